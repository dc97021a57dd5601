"""Multivariate polynomials and Groebner bases over exact fields.

Everything here is generic over the coefficient field objects from
:mod:`momentpoly.fields`, so the same Buchberger code runs over Q, over F_q,
and over rational function fields Q(z_1, ..., z_s).

The monomial order is degree-reverse-lexicographic throughout, with
x_1 > x_2 > ... > x_m.  Polynomials are immutable term lists sorted in
descending order, which keeps the hot reduction loop a linear merge.

The Buchberger loop uses the Gebauer-Moeller pair criteria and the sugar
selection strategy, and aborts early once a normal form turns out to be a
nonzero constant (the ideal is then the unit ideal and nothing else matters
for consistency checking).  All reduction work is metered by a
:class:`Budget`, since function-field runs can blow up in both time and
coefficient size.
"""

from __future__ import annotations

import time
from typing import Iterable, Sequence

from momentpoly.fields import QQ

__all__ = [
    "Budget",
    "BudgetExceeded",
    "Poly",
    "buchberger",
    "drl_key",
    "is_trivial_ideal",
    "mono_divides",
    "mono_lcm",
    "mono_mul",
    "mono_sub",
    "normal_form",
    "reduced_groebner",
    "specialize_poly",
    "spoly",
]


# ---------------------------------------------------------------------------
# Monomials: exponent tuples


def drl_key(e: tuple) -> tuple:
    """Sort key realizing degrevlex; larger key means larger monomial."""
    return (sum(e), tuple(-x for x in reversed(e)))


def mono_mul(e1: tuple, e2: tuple) -> tuple:
    return tuple(a + b for a, b in zip(e1, e2))


def mono_sub(e1: tuple, e2: tuple) -> tuple:
    return tuple(a - b for a, b in zip(e1, e2))


def mono_lcm(e1: tuple, e2: tuple) -> tuple:
    return tuple(a if a > b else b for a, b in zip(e1, e2))


def mono_divides(e1: tuple, e2: tuple) -> bool:
    """Whether x^e1 divides x^e2."""
    return all(a <= b for a, b in zip(e1, e2))


def _coprime(e1: tuple, e2: tuple) -> bool:
    return all(a == 0 or b == 0 for a, b in zip(e1, e2))


# ---------------------------------------------------------------------------
# Budgets


class BudgetExceeded(RuntimeError):
    """Raised when a Groebner computation runs out of steps or wall time."""


class Budget:
    """Caps a Groebner run by reduction steps and elapsed milliseconds."""

    def __init__(self, max_steps: int = 10**6, max_ms: float = 60_000.0):
        self.max_steps = max_steps
        self.max_ms = max_ms
        self.steps = 0
        self._start = time.monotonic()

    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.max_steps:
            raise BudgetExceeded(
                f"exceeded {self.max_steps} reduction steps")
        if self.steps % 256 < n:
            self.check_time()

    def check_time(self) -> None:
        elapsed = (time.monotonic() - self._start) * 1000.0
        if elapsed > self.max_ms:
            raise BudgetExceeded(f"exceeded {self.max_ms:.0f} ms")


# ---------------------------------------------------------------------------
# Polynomials


class Poly:
    """Immutable multivariate polynomial over a coefficient field object.

    ``terms`` is a tuple of (exponent tuple, coefficient) pairs, sorted in
    strictly descending degrevlex order, all coefficients nonzero.
    """

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field, nvars: int, terms: tuple):
        self.field = field
        self.nvars = nvars
        self.terms = terms

    # -- constructors

    @classmethod
    def zero(cls, field, nvars: int) -> "Poly":
        return cls(field, nvars, ())

    @classmethod
    def const(cls, field, nvars: int, c) -> "Poly":
        if field.is_zero(c):
            return cls(field, nvars, ())
        return cls(field, nvars, (((0,) * nvars, c),))

    @classmethod
    def variable(cls, field, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(field, nvars, ((tuple(e), field.one),))

    @classmethod
    def from_dict(cls, field, nvars: int, d: dict) -> "Poly":
        terms = [(e, c) for e, c in d.items() if not field.is_zero(c)]
        terms.sort(key=lambda t: drl_key(t[0]), reverse=True)
        return cls(field, nvars, tuple(terms))

    def to_dict(self) -> dict:
        return dict(self.terms)

    # -- basic queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or not any(self.terms[0][0])

    def lm(self) -> tuple:
        return self.terms[0][0]

    def lc(self):
        return self.terms[0][1]

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e, _ in self.terms)

    def variables_used(self) -> set[int]:
        used: set[int] = set()
        for e, _ in self.terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return used

    # -- arithmetic

    def add(self, other: "Poly") -> "Poly":
        return _axpy(self, self.field.one, (0,) * self.nvars, other)

    def sub(self, other: "Poly") -> "Poly":
        return _axpy(self, self.field.neg(self.field.one),
                     (0,) * self.nvars, other)

    def neg(self) -> "Poly":
        f = self.field
        return Poly(f, self.nvars,
                    tuple((e, f.neg(c)) for e, c in self.terms))

    def term_mul(self, c, m: tuple) -> "Poly":
        """Multiply by the single term c * x^m; preserves term order."""
        f = self.field
        if f.is_zero(c):
            return Poly.zero(f, self.nvars)
        return Poly(f, self.nvars,
                    tuple((mono_mul(e, m), f.mul(c, cc))
                          for e, cc in self.terms))

    def mul(self, other: "Poly") -> "Poly":
        f = self.field
        acc: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = mono_mul(e1, e2)
                v = acc.get(e)
                v = f.mul(c1, c2) if v is None else f.add(v, f.mul(c1, c2))
                if f.is_zero(v):
                    acc.pop(e, None)
                else:
                    acc[e] = v
        return Poly.from_dict(f, self.nvars, acc)

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        inv = self.field.inv(self.lc())
        return self.term_mul(inv, (0,) * self.nvars)

    # -- comparison and printing

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if len(self.terms) != len(other.terms):
            return False
        f = self.field
        return all(e1 == e2 and f.eq(c1, c2)
                   for (e1, c1), (e2, c2) in zip(self.terms, other.terms))

    __hash__ = None

    def fmt(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for e, c in self.terms:
            mono = "*".join(
                name if k == 1 else f"{name}^{k}"
                for name, k in zip(names, e) if k)
            cs = self.field.fmt(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append(f"-{mono}")
            else:
                if "+" in cs or " " in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    def __repr__(self) -> str:
        return self.fmt()


def _axpy(f: Poly, c, m: tuple, g: Poly) -> Poly:
    """f + c * x^m * g by a linear merge of the two sorted term lists."""
    fld = f.field
    if fld.is_zero(c) or not g.terms:
        return f
    if not f.terms:
        return g.term_mul(c, m)
    ft = f.terms
    gt = g.terms
    out = []
    i = j = 0
    nf, ng = len(ft), len(gt)
    while i < nf and j < ng:
        ef = ft[i][0]
        eg = mono_mul(gt[j][0], m)
        kf = drl_key(ef)
        kg = drl_key(eg)
        if kf > kg:
            out.append(ft[i])
            i += 1
        elif kf < kg:
            out.append((eg, fld.mul(c, gt[j][1])))
            j += 1
        else:
            v = fld.add(ft[i][1], fld.mul(c, gt[j][1]))
            if not fld.is_zero(v):
                out.append((ef, v))
            i += 1
            j += 1
    out.extend(ft[i:])
    for jj in range(j, ng):
        out.append((mono_mul(gt[jj][0], m), fld.mul(c, gt[jj][1])))
    return Poly(fld, f.nvars, tuple(out))


# ---------------------------------------------------------------------------
# Division and S-polynomials


def spoly(f: Poly, g: Poly) -> Poly:
    """S-polynomial: both leading terms scaled to the lcm, then subtracted."""
    fld = f.field
    l = mono_lcm(f.lm(), g.lm())
    left = f.term_mul(fld.inv(f.lc()), mono_sub(l, f.lm()))
    return _axpy(left, fld.neg(fld.inv(g.lc())), mono_sub(l, g.lm()), g)


def normal_form(f: Poly, basis: Sequence[Poly],
                budget: Budget | None = None) -> Poly:
    p, _ = _normal_form_sugar(f, f.total_degree(), basis, None, budget)
    return p


def _normal_form_sugar(f: Poly, sugar: int, basis: Sequence[Poly],
                       sugars: Sequence[int] | None,
                       budget: Budget | None):
    """Full normal form; also tracks the sugar degree through the division."""
    fld = f.field
    remainder: list = []
    p = f
    basis_lms = [g.lm() for g in basis]
    while p.terms:
        lm = p.lm()
        hit = -1
        for idx, glm in enumerate(basis_lms):
            if mono_divides(glm, lm):
                hit = idx
                break
        if hit < 0:
            remainder.append(p.terms[0])
            p = Poly(fld, p.nvars, p.terms[1:])
            continue
        g = basis[hit]
        m = mono_sub(lm, g.lm())
        coef = fld.neg(fld.div(p.lc(), g.lc()))
        p = _axpy(p, coef, m, g)
        if budget is not None:
            budget.tick()
        if sugars is not None:
            sugar = max(sugar, sugars[hit] + sum(m))
    tail = Poly(fld, f.nvars, tuple(remainder))
    return tail, sugar


# ---------------------------------------------------------------------------
# Buchberger with Gebauer-Moeller pair pruning and sugar selection


def _pair_lcm(G: list[Poly], i: int, j: int) -> tuple:
    return mono_lcm(G[i].lm(), G[j].lm())


def _update_pairs(G: list[Poly], pairs: set, t: int) -> set:
    """Gebauer-Moeller update after G[t] was appended."""
    lmt = G[t].lm()
    fresh = []
    for i in range(t):
        fresh.append((i, t))
    # criterion M: drop (i,t) when another fresh pair's lcm properly divides
    lcms = {p: mono_lcm(G[p[0]].lm(), lmt) for p in fresh}
    keep_m = []
    for p in fresh:
        lp = lcms[p]
        dominated = False
        for q in fresh:
            if q is p:
                continue
            lq = lcms[q]
            if lq != lp and mono_divides(lq, lp):
                dominated = True
                break
        if not dominated:
            keep_m.append(p)
    # criterion F: among equal lcms keep a single representative
    by_lcm: dict = {}
    for p in keep_m:
        by_lcm.setdefault(lcms[p], []).append(p)
    keep_f = [min(group) for group in by_lcm.values()]
    # criterion B (coprime leading monomials reduce to zero)
    fresh_kept = {p for p in keep_f
                  if not _coprime(G[p[0]].lm(), lmt)}
    # prune old pairs whose lcm is properly divided by the new leading term
    survivors = set()
    for (i, j) in pairs:
        lij = _pair_lcm(G, i, j)
        if (mono_divides(lmt, lij)
                and mono_lcm(G[i].lm(), lmt) != lij
                and mono_lcm(G[j].lm(), lmt) != lij):
            continue
        survivors.add((i, j))
    survivors |= fresh_kept
    return survivors


def buchberger(polys: Iterable[Poly], budget: Budget | None = None) -> list[Poly]:
    """A (non-reduced) Groebner basis of the given polynomials.

    Returns ``[1]`` as soon as the unit ideal is detected.  Raises
    :class:`BudgetExceeded` when the budget runs out.
    """
    inputs = [p for p in polys if not p.is_zero()]
    if not inputs:
        return []
    field = inputs[0].field
    nvars = inputs[0].nvars
    one = Poly.const(field, nvars, field.one)
    for p in inputs:
        if p.is_constant():
            return [one]

    G: list[Poly] = []
    sugars: list[int] = []
    pairs: set = set()
    for p in inputs:
        G.append(p.monic())
        sugars.append(p.total_degree())
        pairs = _update_pairs(G, pairs, len(G) - 1)

    def pair_sugar(i: int, j: int) -> int:
        l = _pair_lcm(G, i, j)
        return max(sugars[i] + sum(mono_sub(l, G[i].lm())),
                   sugars[j] + sum(mono_sub(l, G[j].lm())))

    while pairs:
        if budget is not None:
            budget.check_time()
        best = min(pairs,
                   key=lambda p: (pair_sugar(*p), drl_key(_pair_lcm(G, *p)), p))
        pairs.discard(best)
        i, j = best
        s = spoly(G[i], G[j])
        if s.is_zero():
            continue
        r, sug = _normal_form_sugar(s, pair_sugar(i, j), G, sugars, budget)
        if r.is_zero():
            continue
        if r.is_constant():
            return [one]
        G.append(r.monic())
        sugars.append(sug)
        pairs = _update_pairs(G, pairs, len(G) - 1)
    return G


def reduced_groebner(polys: Iterable[Poly],
                     budget: Budget | None = None) -> list[Poly]:
    """The reduced Groebner basis: minimal, interreduced, monic, sorted."""
    G = buchberger(polys, budget)
    if not G:
        return []
    # minimal: drop any element whose leading monomial another one divides
    keep: list[Poly] = []
    lms = [g.lm() for g in G]
    for idx, g in enumerate(G):
        lm = lms[idx]
        redundant = any(
            k != idx and mono_divides(lms[k], lm)
            and (lms[k] != lm or k < idx)
            for k in range(len(G)))
        if not redundant:
            keep.append(g)
    # interreduce: replace each element by its normal form against the rest
    out: list[Poly] = []
    for idx, g in enumerate(keep):
        rest = keep[:idx] + keep[idx + 1:]
        r = normal_form(g, rest, budget) if rest else g
        if not r.is_zero():
            out.append(r.monic())
    out.sort(key=lambda p: drl_key(p.lm()))
    return out


def is_trivial_ideal(polys: Iterable[Poly],
                     budget: Budget | None = None) -> bool:
    """Whether the ideal generated by the system is all of the ring."""
    G = buchberger(polys, budget)
    return len(G) == 1 and G[0].is_constant() and not G[0].is_zero()


# ---------------------------------------------------------------------------
# Coefficient specialization (function field -> rationals)


def specialize_poly(p: Poly, point: Sequence) -> Poly:
    """Evaluate function-field coefficients at a rational point.

    Raises :class:`momentpoly.fields.DenominatorVanished` when the point
    hits a denominator, in which case the caller should resample.
    """
    ff = p.field
    acc: dict = {}
    for e, c in p.terms:
        v = ff.specialize(c, point)
        if v != 0:
            acc[e] = v
    return Poly.from_dict(QQ, p.nvars, acc)
