"""Attainability of prescribed weight supports, decided by Groebner bases.

A weight set is attainable for a tensor when some unit-diagonal lower
triangular triple maps the tensor's support into it.  Writing the triple
symbolically turns each forbidden entry of the transformed tensor into a
polynomial; the set is attainable exactly when those polynomials share a
common zero, i.e. when their reduced Groebner basis is not {1}.

Three coefficient fields are supported.  Plain rationals decide
attainability for the given tensor.  A prime field decides the same
question modulo a random prime, which is fast and almost always agrees
(an unlucky prime can flip the answer, so callers treat it as a
heuristic).  A rational function field in the entries of a symbolic
upper triangular triple decides the question for every tensor in a dense
subset of the upper triangular orbit at once, which is what moment
polytope computations need.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from gmpy2 import mpq

from .fields import QQ, FunctionField, PrimeField, random_prime
from .polynomials import Budget, BudgetExceeded, Poly, buchberger, \
    reduced_groebner
from .enumeration import embed_weight, ordered_weights
from .tensors import Tensor

IntVec = tuple[int, ...]


class Decision(Enum):
    ATTAINABLE = "attainable"
    NOT_ATTAINABLE = "not-attainable"
    TIMEOUT = "timeout"


class SymbolicDecision(Enum):
    ATTAINABLE_GENERIC = "attainable-generic"
    NOT_ATTAINABLE_GENERIC = "not-attainable-generic"
    # a hinted run whose enlarged ideal is trivial proves nothing
    INCONCLUSIVE = "inconclusive"
    TIMEOUT = "timeout"


# ---------------------------------------------------------------------------
# Variable rosters
#
# x-variables: strictly lower entries of the unit-diagonal triple, ordered
# by (factor, row, column).  z-variables: all entries on or above the
# diagonal of an upper triangular triple, same ordering.


def x_variable_count(shape: tuple[int, int, int]) -> int:
    return sum(n * (n - 1) // 2 for n in shape)


def x_variable_names(shape: tuple[int, int, int]) -> list[str]:
    return [f"x{i + 1}" for i in range(x_variable_count(shape))]


def _x_offsets(shape: tuple[int, int, int]) -> list[int]:
    offs = [0]
    for n in shape[:2]:
        offs.append(offs[-1] + n * (n - 1) // 2)
    return offs


def _x_index(shape: tuple[int, int, int], factor: int, i: int, j: int) -> int:
    """Flat index of the (i, j) entry (1-based, i > j) of one factor."""
    return _x_offsets(shape)[factor] + (i - 1) * (i - 2) // 2 + (j - 1)


def z_variable_count(shape: tuple[int, int, int]) -> int:
    return sum(n * (n + 1) // 2 for n in shape)


def z_variable_names(shape: tuple[int, int, int]) -> list[str]:
    return [f"z{i + 1}" for i in range(z_variable_count(shape))]


def _z_index(shape: tuple[int, int, int], factor: int, i: int, j: int) -> int:
    """Flat index of the (i, j) entry (1-based, i <= j) of one factor."""
    off = sum(n * (n + 1) // 2 for n in shape[:factor])
    n = shape[factor]
    # row-major over the upper triangle: row i holds n - i + 1 entries
    before = sum(n - r + 1 for r in range(1, i))
    return off + before + (j - i)


# ---------------------------------------------------------------------------
# Polynomial systems


@dataclass(frozen=True)
class PolySystem:
    """The forbidden-entry polynomials of one (tensor, inequality) pair.

    ``polys`` live in a ring shrunk to the variables that actually occur;
    ``kept_vars`` maps their positions back to the full x-variable roster
    so results can be reported in the documented numbering.
    """

    field: object
    shape: tuple[int, int, int]
    h: IntVec
    polys: tuple[Poly, ...]
    n_excluded: int
    kept_vars: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.polys)

    @property
    def names(self) -> list[str]:
        full = x_variable_names(self.shape)
        return [full[v] for v in self.kept_vars]

    def original_dict(self, p: Poly) -> dict:
        """A polynomial's term dict re-indexed to the full variable roster."""
        m = x_variable_count(self.shape)
        out = {}
        for e, c in p.terms:
            full = [0] * m
            for pos, exp in enumerate(e):
                full[self.kept_vars[pos]] = exp
            out[tuple(full)] = c
        return out


def excluded_weights(shape: tuple[int, int, int],
                     h: Sequence[int]) -> list[tuple[int, int, int]]:
    """The weights the inequality h forbids (negative pairing with h)."""
    out = []
    for w in ordered_weights(shape):
        row = embed_weight(shape, w)
        if sum(x * y for x, y in zip(row, h)) < 0:
            out.append(w)
    return out


def _clear_denominators(t: Tensor) -> Tensor:
    denoms = [int(v.denominator) for plane in t.data for row in plane
              for v in row if v != 0]
    if not denoms:
        return t
    scale = math.lcm(*denoms)
    return t.scale(scale) if scale != 1 else t


def _freeze(field, p: Poly):
    if field.kind == "FF":
        return tuple(sorted(
            (e, tuple(sorted(c.num.items())), tuple(sorted(c.den.items())))
            for e, c in p.terms))
    return tuple(sorted(p.terms))


def _shrink(field, polys: list[Poly], m: int,
            extra_vars: Iterable[int] = ()) -> tuple[tuple[Poly, ...],
                                                     tuple[int, ...]]:
    used: set[int] = set(extra_vars)
    for p in polys:
        used |= p.variables_used()
    kept = tuple(sorted(used))
    where = {v: pos for pos, v in enumerate(kept)}
    out = []
    for p in polys:
        d = {}
        for e, c in p.terms:
            ne = [0] * len(kept)
            for v, exp in enumerate(e):
                if exp:
                    ne[where[v]] = exp
            d[tuple(ne)] = c
        out.append(Poly.from_dict(field, len(kept), d))
    return tuple(out), kept


def _entry_poly(field, shape, t_entry, w: tuple[int, int, int], m: int):
    """Terms of the transformed entry at weight w = (i, j, k): one monomial
    per source entry below it, with the source value as coefficient."""
    i, j, k = w
    terms = {}
    for ii in range(1, i + 1):
        for jj in range(1, j + 1):
            for kk in range(1, k + 1):
                coef = t_entry(ii, jj, kk)
                if coef is None:
                    continue
                e = [0] * m
                if ii < i:
                    e[_x_index(shape, 0, i, ii)] += 1
                if jj < j:
                    e[_x_index(shape, 1, j, jj)] += 1
                if kk < k:
                    e[_x_index(shape, 2, k, kk)] += 1
                terms[tuple(e)] = coef
    return Poly.from_dict(field, m, terms)


def _assemble(field, shape, h, t_entry,
              hints: Iterable[Poly] = ()) -> PolySystem:
    m = x_variable_count(shape)
    excluded = excluded_weights(shape, h)
    polys: list[Poly] = []
    seen = set()
    for w in excluded:
        p = _entry_poly(field, shape, t_entry, w, m)
        if p.is_zero():
            continue
        key = _freeze(field, p)
        if key in seen:
            continue
        seen.add(key)
        polys.append(p)
    for hint in hints:
        p = Poly.from_dict(field, m, {
            e: field.from_mpq(c) for e, c in hint.terms})
        key = _freeze(field, p)
        if not p.is_zero() and key not in seen:
            seen.add(key)
            polys.append(p)
    shrunk, kept = _shrink(field, polys, m)
    return PolySystem(field, shape, tuple(h), shrunk, len(excluded), kept)


def build_polysystem(t: Tensor, h: Sequence[int]) -> PolySystem:
    """The rational polynomial system deciding attainability for t itself."""

    def entry(i, j, k):
        v = t.data[i - 1][j - 1][k - 1]
        return mpq(v) if v != 0 else None

    return _assemble(QQ, t.shape, h, entry)


def build_polysystem_fq(t: Tensor, h: Sequence[int], q: int) -> PolySystem:
    """The same system with coefficients reduced modulo a prime q.

    Denominators are cleared first (scaling never changes attainability);
    entries divisible by q vanish from the system, which is one of the ways
    a prime can be unlucky.
    """
    field = PrimeField(q)
    ti = _clear_denominators(t)

    def entry(i, j, k):
        v = ti.data[i - 1][j - 1][k - 1]
        if v == 0:
            return None
        c = field.from_mpq(v)
        return c if c != 0 else None

    return _assemble(field, t.shape, h, entry)


def build_polysystem_symbolic(t: Tensor, h: Sequence[int],
                              hints: Iterable[Poly] = ()) -> PolySystem:
    """The function-field system deciding attainability generically.

    The tensor is first hit with a fully symbolic upper triangular triple;
    its entries become polynomials in the z-variables, and the forbidden
    entries of the lower triangular action then have coefficients in the
    rational function field of those variables.
    """
    shape = t.shape
    a, b, c = shape
    s = z_variable_count(shape)
    field = FunctionField(s, z_variable_names(shape))
    ti = _clear_denominators(t)

    # upper triangular action: entry (i, j, k) of the symbolic tensor pulls
    # from every source entry with componentwise larger index
    cache: dict = {}

    def symbolic_entry(i, j, k):
        key = (i, j, k)
        if key in cache:
            return cache[key]
        acc: dict = {}
        for ii in range(i, a + 1):
            for jj in range(j, b + 1):
                for kk in range(k, c + 1):
                    v = ti.data[ii - 1][jj - 1][kk - 1]
                    if v == 0:
                        continue
                    e = [0] * s
                    e[_z_index(shape, 0, i, ii)] += 1
                    e[_z_index(shape, 1, j, jj)] += 1
                    e[_z_index(shape, 2, k, kk)] += 1
                    key_e = tuple(e)
                    acc[key_e] = acc.get(key_e, 0) + int(v)
        acc = {e: v for e, v in acc.items() if v != 0}
        elem = field.from_zpoly(acc) if acc else None
        cache[key] = elem
        return elem

    return _assemble(field, shape, h, symbolic_entry, hints)


# ---------------------------------------------------------------------------
# Deciders


def _run_groebner(system: PolySystem, budget: Budget | None,
                  stats: dict | None, reduce: bool = False):
    start = time.perf_counter()
    try:
        if reduce:
            basis = reduced_groebner(system.polys, budget)
        else:
            basis = buchberger(system.polys, budget)
    except BudgetExceeded:
        if stats is not None:
            stats.update(n_polys=len(system), n_vars=len(system.kept_vars),
                         gb_size=None,
                         elapsed=time.perf_counter() - start)
        return None
    if stats is not None:
        stats.update(n_polys=len(system), n_vars=len(system.kept_vars),
                     gb_size=len(basis), elapsed=time.perf_counter() - start)
    return basis


def _is_trivial(basis: list[Poly]) -> bool:
    return len(basis) == 1 and basis[0].is_constant() \
        and not basis[0].is_zero()


def attainable_q(t: Tensor, h: Sequence[int],
                 budget: Budget | None = None,
                 stats: dict | None = None) -> Decision:
    """Exact attainability of the support prescribed by h, for t as given."""
    system = build_polysystem(t, h)
    if stats is not None:
        stats["field"] = "QQ"
    basis = _run_groebner(system, budget, stats)
    if basis is None:
        return Decision.TIMEOUT
    return Decision.NOT_ATTAINABLE if _is_trivial(basis) \
        else Decision.ATTAINABLE


def attainable_fq(t: Tensor, h: Sequence[int], q: int | None = None,
                  budget: Budget | None = None, seed: int = 0,
                  stats: dict | None = None) -> Decision:
    """Attainability decided modulo a prime; fast but heuristic.

    When q is omitted a random 31-bit prime is drawn from the seed.  The
    verdict can differ from the rational one on unlucky primes.
    """
    if q is None:
        q = random_prime(random.Random(seed))
    system = build_polysystem_fq(t, h, q)
    if stats is not None:
        stats["field"] = f"F{q}"
    basis = _run_groebner(system, budget, stats)
    if basis is None:
        return Decision.TIMEOUT
    return Decision.NOT_ATTAINABLE if _is_trivial(basis) \
        else Decision.ATTAINABLE


def attainable_symbolic(t: Tensor, h: Sequence[int],
                        hints: Iterable[Poly] = (),
                        budget: Budget | None = None,
                        stats: dict | None = None) -> SymbolicDecision:
    """Attainability for all tensors in a dense subset of the upper
    triangular orbit of t.

    Hints are extra polynomials adjoined to the system.  They can only
    enlarge the ideal, so a non-trivial hinted basis still certifies
    attainability, while a trivial one proves nothing and comes back
    INCONCLUSIVE rather than NOT_ATTAINABLE_GENERIC.
    """
    hints = tuple(hints)
    system = build_polysystem_symbolic(t, h, hints)
    if stats is not None:
        stats["field"] = "FF"
    basis = _run_groebner(system, budget, stats)
    if basis is None:
        return SymbolicDecision.TIMEOUT
    if not _is_trivial(basis):
        return SymbolicDecision.ATTAINABLE_GENERIC
    if hints:
        return SymbolicDecision.INCONCLUSIVE
    return SymbolicDecision.NOT_ATTAINABLE_GENERIC


def suggest_hints(t: Tensor, h: Sequence[int], seed: int = 0,
                  bound: int = 1000,
                  budget: Budget | None = None) -> list[Poly]:
    """Hint polynomials for the symbolic decider, read off a randomized run.

    Randomizes t with an upper triangular triple, reduces the rational
    Groebner basis, and returns every element that is a bare variable: a
    variable pinned to zero generically is the cheapest possible cut to
    adjoin symbolically.  Returned polynomials use the full x-variable
    roster of the shape.
    """
    _, tr = t.randomize(mode="upper", bound=bound, seed=seed)
    system = build_polysystem(tr, h)
    basis = reduced_groebner(system.polys, budget)
    m = x_variable_count(t.shape)
    hints = []
    for g in basis:
        if len(g.terms) == 1:
            e, _ = g.terms[0]
            if sum(e) == 1:
                orig = system.kept_vars[e.index(1)]
                hints.append(Poly.variable(QQ, m, orig))
    return hints
