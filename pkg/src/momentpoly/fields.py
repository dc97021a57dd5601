"""Exact coefficient fields and exact integer/rational linear algebra.

Three fields back the polynomial machinery:

* ``RationalField`` wraps arbitrary-precision rationals (gmpy2.mpq).
* ``PrimeField`` is F_q for a large prime q, elements stored as ints in [0, q).
* ``FunctionField`` is Q(z_1, ..., z_s), elements stored as fractions of
  integer-coefficient multivariate polynomials with lazy gcd reduction.

The linear algebra here is deliberately small: exact rank and one-dimensional
integer kernels (fraction-free), plus a rational Gaussian solver used by the
polytope code.
"""

from __future__ import annotations

import random
from typing import Sequence

from gmpy2 import gcd as _gcd
from gmpy2 import mpq, mpz

__all__ = [
    "QQ",
    "PrimeField",
    "FunctionField",
    "DenominatorVanished",
    "random_prime",
    "rank_int",
    "integer_kernel_vector",
    "gauss_rank",
    "gauss_solve",
]


class DenominatorVanished(ValueError):
    """A rational-function denominator became zero under specialization."""


# ---------------------------------------------------------------------------
# The rationals


class RationalField:
    """Field object for exact rationals; elements are gmpy2.mpq values."""

    kind = "Q"

    zero = mpq(0)
    one = mpq(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def div(a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in Q")
        return a / b

    @staticmethod
    def inv(a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in Q")
        return 1 / mpq(a)

    @staticmethod
    def is_zero(a) -> bool:
        return a == 0

    @staticmethod
    def eq(a, b) -> bool:
        return a == b

    @staticmethod
    def from_int(n: int):
        return mpq(n)

    @staticmethod
    def from_mpq(r):
        return mpq(r)

    @staticmethod
    def fmt(a) -> str:
        return str(a)

    def __repr__(self) -> str:
        return "QQ"


QQ = RationalField()


# ---------------------------------------------------------------------------
# Prime fields


def _is_probable_prime(n: int) -> bool:
    # gmpy2.is_prime is a BPSW + Miller-Rabin test, deterministic far beyond
    # the 31-bit range used here.
    from gmpy2 import is_prime

    return bool(is_prime(n))


def random_prime(rng: random.Random, lo: int = 2**30, hi: int = 2**31) -> int:
    """A uniform-ish random prime in [lo, hi), by rejection sampling."""
    while True:
        n = rng.randrange(lo, hi)
        if _is_probable_prime(n):
            return n


class PrimeField:
    """F_q for a prime modulus q; elements are Python ints in [0, q)."""

    kind = "Fq"

    def __init__(self, q: int):
        if q < 2 or not _is_probable_prime(q):
            raise ValueError(f"modulus {q} is not prime")
        self.q = q
        self.zero = 0
        self.one = 1

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def mul(self, a, b):
        return (a * b) % self.q

    def neg(self, a):
        return (-a) % self.q

    def inv(self, a):
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return pow(a, -1, self.q)

    def div(self, a, b):
        return (a * self.inv(b)) % self.q

    def is_zero(self, a) -> bool:
        return a % self.q == 0

    def eq(self, a, b) -> bool:
        return (a - b) % self.q == 0

    def from_int(self, n: int):
        return n % self.q

    def from_mpq(self, r):
        num = int(r.numerator) % self.q
        den = int(r.denominator) % self.q
        return (num * self.inv(den)) % self.q

    def fmt(self, a) -> str:
        return str(a % self.q)

    def __repr__(self) -> str:
        return f"GF({self.q})"


# ---------------------------------------------------------------------------
# Multivariate integer polynomials as exponent->coefficient dicts.
#
# These are the numerators/denominators of function-field elements. Keys are
# exponent tuples over the z variables, values are nonzero mpz. The zero
# polynomial is the empty dict. Dicts are never mutated after construction.


def zp_const(s: int, c) -> dict:
    c = mpz(c)
    if c == 0:
        return {}
    return {(0,) * s: c}


def zp_var(s: int, i: int) -> dict:
    e = [0] * s
    e[i] = 1
    return {tuple(e): mpz(1)}


def zp_add(p: dict, q: dict) -> dict:
    if not p:
        return q
    if not q:
        return p
    out = dict(p)
    for e, c in q.items():
        v = out.get(e)
        if v is None:
            out[e] = c
        else:
            v = v + c
            if v:
                out[e] = v
            else:
                del out[e]
    return out


def zp_neg(p: dict) -> dict:
    return {e: -c for e, c in p.items()}


def zp_mul(p: dict, q: dict) -> dict:
    if not p or not q:
        return {}
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            v = out.get(e)
            if v is None:
                out[e] = c1 * c2
            else:
                v = v + c1 * c2
                if v:
                    out[e] = v
                else:
                    del out[e]
    return out


def zp_scale(p: dict, c) -> dict:
    c = mpz(c)
    if c == 0:
        return {}
    return {e: cc * c for e, cc in p.items()}


def zp_content(p: dict):
    g = mpz(0)
    for c in p.values():
        g = _gcd(g, c)
        if g == 1:
            break
    return g


def zp_eval(p: dict, point: Sequence) -> "mpq":
    total = mpq(0)
    for e, c in p.items():
        term = mpq(c)
        for u, k in zip(point, e):
            if k:
                term *= mpq(u) ** k
        total += term
    return total


def _zp_leading_sign(p: dict) -> int:
    if not p:
        return 0
    e = max(p)
    return 1 if p[e] > 0 else -1


class FunctionField:
    """Q(z_1, ..., z_s): fractions of integer multivariate polynomials.

    Fractions are kept content-normalized after every operation; the full
    multivariate gcd is only taken once a fraction grows beyond
    ``lazy_gcd_threshold`` total monomials.  The threshold is deliberately
    small: letting fractions grow unreduced through a Groebner run makes the
    eventually unavoidable gcds astronomically more expensive than reducing
    early while everything is still tiny.
    """

    kind = "FF"

    def __init__(self, nvars: int, names: Sequence[str] | None = None,
                 lazy_gcd_threshold: int = 8):
        if nvars < 1:
            raise ValueError("need at least one variable")
        self.nvars = nvars
        self.names = list(names) if names is not None else [
            f"z{i + 1}" for i in range(nvars)
        ]
        if len(self.names) != nvars:
            raise ValueError("name count mismatch")
        self.lazy_gcd_threshold = lazy_gcd_threshold
        self.zero = FFElem(self, {}, zp_const(nvars, 1))
        self.one = FFElem(self, zp_const(nvars, 1), zp_const(nvars, 1))
        self._sympy_ring = None

    # -- construction helpers

    def from_int(self, n: int) -> "FFElem":
        return FFElem(self, zp_const(self.nvars, n), zp_const(self.nvars, 1))

    def from_mpq(self, r) -> "FFElem":
        r = mpq(r)
        return FFElem(self, zp_const(self.nvars, r.numerator),
                      zp_const(self.nvars, r.denominator))

    def var(self, i: int) -> "FFElem":
        return FFElem(self, zp_var(self.nvars, i), zp_const(self.nvars, 1))

    def from_zpoly(self, p: dict) -> "FFElem":
        return FFElem(self, p, zp_const(self.nvars, 1))

    # -- arithmetic

    def add(self, a: "FFElem", b: "FFElem") -> "FFElem":
        if not a.num:
            return b
        if not b.num:
            return a
        if a.den == b.den:
            return self._make(zp_add(a.num, b.num), a.den)
        num = zp_add(zp_mul(a.num, b.den), zp_mul(b.num, a.den))
        return self._make(num, zp_mul(a.den, b.den))

    def sub(self, a: "FFElem", b: "FFElem") -> "FFElem":
        return self.add(a, self.neg(b))

    def neg(self, a: "FFElem") -> "FFElem":
        return FFElem(self, zp_neg(a.num), a.den)

    def mul(self, a: "FFElem", b: "FFElem") -> "FFElem":
        if not a.num or not b.num:
            return self.zero
        return self._make(zp_mul(a.num, b.num), zp_mul(a.den, b.den))

    def inv(self, a: "FFElem") -> "FFElem":
        if not a.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return self._make(a.den, a.num)

    def div(self, a: "FFElem", b: "FFElem") -> "FFElem":
        if not b.num:
            raise ZeroDivisionError("division by zero rational function")
        if not a.num:
            return self.zero
        return self._make(zp_mul(a.num, b.den), zp_mul(a.den, b.num))

    def is_zero(self, a: "FFElem") -> bool:
        return not a.num

    def eq(self, a: "FFElem", b: "FFElem") -> bool:
        if not a.num:
            return not b.num
        if not b.num:
            return False
        # Cross-multiplication avoids relying on full reduction.
        return zp_add(zp_mul(a.num, b.den), zp_neg(zp_mul(b.num, a.den))) == {}

    # -- normalization

    def _make(self, num: dict, den: dict) -> "FFElem":
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return self.zero
        g = _gcd(zp_content(num), zp_content(den))
        sign = _zp_leading_sign(den)
        if sign < 0:
            g = -g
        if g != 1:
            num = {e: c // g for e, c in num.items()}
            den = {e: c // g for e, c in den.items()}
        if len(num) + len(den) > self.lazy_gcd_threshold:
            num, den = self._full_reduce(num, den)
        return FFElem(self, num, den)

    def reduce_fully(self, a: "FFElem") -> "FFElem":
        """Force a complete gcd reduction (used at output boundaries)."""
        if not a.num:
            return self.zero
        num, den = self._full_reduce(a.num, a.den)
        return FFElem(self, num, den)

    def _ring(self):
        if self._sympy_ring is None:
            from sympy.polys.domains import ZZ
            from sympy.polys.rings import ring

            self._sympy_ring = ring(",".join(self.names), ZZ)[0]
        return self._sympy_ring

    def _full_reduce(self, num: dict, den: dict) -> tuple[dict, dict]:
        R = self._ring()
        pn = R.from_dict({e: int(c) for e, c in num.items()})
        pd = R.from_dict({e: int(c) for e, c in den.items()})
        _, qn, qd = pn.cofactors(pd)
        num = {tuple(e): mpz(c) for e, c in qn.to_dict().items()}
        den = {tuple(e): mpz(c) for e, c in qd.to_dict().items()}
        if _zp_leading_sign(den) < 0:
            num = zp_neg(num)
            den = zp_neg(den)
        return num, den

    # -- specialization and printing

    def specialize(self, a: "FFElem", point: Sequence) -> "mpq":
        den = zp_eval(a.den, point)
        if den == 0:
            raise DenominatorVanished("denominator vanishes at the given point")
        if not a.num:
            return mpq(0)
        return zp_eval(a.num, point) / den

    def fmt(self, a: "FFElem") -> str:
        num = self._fmt_zpoly(a.num)
        if a.den == zp_const(self.nvars, 1):
            return num
        return f"({num})/({self._fmt_zpoly(a.den)})"

    def _fmt_zpoly(self, p: dict) -> str:
        if not p:
            return "0"
        parts = []
        for e in sorted(p, reverse=True):
            c = p[e]
            factors = []
            if abs(c) != 1 or not any(e):
                factors.append(str(c) if c > 0 or abs(c) != 1 else "-1")
            elif c < 0:
                factors.append("-")
            for name, k in zip(self.names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            term = "*".join(f for f in factors if f != "-")
            if factors and factors[0] == "-":
                term = "-" + term
            parts.append(term)
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    def __repr__(self) -> str:
        return f"FunctionField({self.nvars})"


class FFElem:
    """A rational function, num/den over the owning FunctionField."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field: FunctionField, num: dict, den: dict):
        self.field = field
        self.num = num
        self.den = den

    def __eq__(self, other):
        if not isinstance(other, FFElem):
            return NotImplemented
        return self.field.eq(self, other)

    __hash__ = None  # representation is not canonical under lazy reduction

    def __repr__(self):
        return self.field.fmt(self)


# ---------------------------------------------------------------------------
# Exact linear algebra


def rank_int(rows: Sequence[Sequence[int]]) -> int:
    """Exact rank of an integer matrix, fraction-free Gaussian elimination."""
    m = [[mpz(x) for x in row] for row in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    prev_pivot = mpz(1)
    row = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(row, len(m)):
            if m[r][col]:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        m[row], m[pivot_row] = m[pivot_row], m[row]
        pivot = m[row][col]
        for r in range(row + 1, len(m)):
            factor = m[r][col]
            for c in range(col, ncols):
                m[r][c] = (pivot * m[r][c] - factor * m[row][c]) // prev_pivot
        prev_pivot = pivot
        rank += 1
        row += 1
        if row == len(m):
            break
    return rank


def integer_kernel_vector(rows: Sequence[Sequence[int]]) -> list[int]:
    """The generator of a one-dimensional integer kernel.

    Returns h with M h = 0, entries coprime, first nonzero entry positive.
    Raises ValueError when the kernel dimension is not exactly 1.
    """
    if not rows:
        raise ValueError("empty matrix")
    ncols = len(rows[0])
    m = [[mpq(x) for x in row] for row in rows]
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(row, len(m)):
            if m[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        m[row], m[pivot_row] = m[pivot_row], m[row]
        pv = m[row][col]
        m[row] = [x / pv for x in m[row]]
        for r in range(len(m)):
            if r != row and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    if len(free) != 1:
        raise ValueError(f"kernel dimension is {len(free)}, expected 1")
    fc = free[0]
    h = [mpq(0)] * ncols
    h[fc] = mpq(1)
    for r, col in enumerate(pivots):
        h[col] = -m[r][fc]
    # scale to coprime integers
    den_lcm = mpz(1)
    for x in h:
        den_lcm = den_lcm * x.denominator // _gcd(den_lcm, x.denominator)
    ints = [mpz(x * den_lcm) for x in h]
    g = mpz(0)
    for x in ints:
        g = _gcd(g, x)
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-v for v in ints]
            break
    out = [int(x) for x in ints]
    # safety: exact kernel membership
    for row_ in rows:
        assert sum(int(a) * b for a, b in zip(row_, out)) == 0
    return out


def gauss_rank(rows: Sequence[Sequence], field=QQ) -> int:
    """Rank over an arbitrary field (rows of field elements or ints)."""
    m = [[x if not isinstance(x, int) else field.from_int(x) for x in row]
         for row in rows]
    rank = 0
    if not m:
        return 0
    ncols = len(m[0])
    row = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(row, len(m)):
            if not field.is_zero(m[r][col]):
                pivot_row = r
                break
        if pivot_row is None:
            continue
        m[row], m[pivot_row] = m[pivot_row], m[row]
        inv = field.inv(m[row][col])
        m[row] = [field.mul(inv, x) for x in m[row]]
        for r in range(row + 1, len(m)):
            f = m[r][col]
            if not field.is_zero(f):
                m[r] = [field.sub(a, field.mul(f, b))
                        for a, b in zip(m[r], m[row])]
        rank += 1
        row += 1
        if row == len(m):
            break
    return rank


def gauss_solve(a_rows: Sequence[Sequence], b: Sequence):
    """Solve A x = b exactly over Q. Returns list[mpq] or None if singular
    or inconsistent. A must be square."""
    n = len(a_rows)
    m = [[mpq(x) for x in row] + [mpq(bv)] for row, bv in zip(a_rows, b)]
    for col in range(n):
        pivot_row = None
        for r in range(col, n):
            if m[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            return None
        m[col], m[pivot_row] = m[pivot_row], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]
