"""Exact rational polytopes of marginal spectra.

Points live in R^(a+b+c), split into three blocks of sizes a, b, c.  Every
polytope here sits inside the affine span cut out by the three block-sum
equalities (each block sums to 1), and inequalities are integer vectors h
acting by <h, p> >= 0.  Because the block sums are fixed, h is only
determined up to adding a constant per block; the canonical representative
has all three block sums equal and coprime entries, matching the
normalization of the candidate enumeration.

The conversion between the two descriptions is an exact double description
over the rationals: H -> V projects onto the affine span, homogenizes, and
enumerates extreme rays; V -> H recovers the facets of the convex hull via
the polar dual, relative to the affine hull of the vertex set (so a segment
reports two facets, a single point none).

Derived quantities split by arithmetic: the minimum-norm point runs Wolfe's
nearest-point algorithm entirely in exact rationals, while the entropy
functionals run Frank-Wolfe in floating point with an exact membership check
on the rationalized optimum.
"""

from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from gmpy2 import gcd as _gcd
from gmpy2 import mpq, mpz

from .fields import gauss_solve, rank_int

IntVec = tuple[int, ...]
Shape = tuple[int, int, int]

__all__ = [
    "Polytope",
    "UnboundedRegionError",
    "chamber_rows",
    "canonical_inequality",
    "pad_point",
    "remove_redundant",
    "vertices_and_rays",
    "kronecker_polytope",
    "kronecker_shapes",
]


class UnboundedRegionError(ValueError):
    """Vertex enumeration hit a recession direction; the H-rep is missing
    the inequalities that would make the region bounded."""


def _block_offsets(shape: Shape) -> list[tuple[int, int]]:
    a, b, c = shape
    return [(0, a), (a, b), (a + b, c)]


def chamber_rows(shape: Shape) -> tuple[IntVec, ...]:
    """Dominance inequalities p_i >= p_{i+1}, block by block."""
    n = sum(shape)
    rows = []
    for off, m in _block_offsets(shape):
        for i in range(m - 1):
            row = [0] * n
            row[off + i] = 1
            row[off + i + 1] = -1
            rows.append(tuple(row))
    return tuple(rows)


def _primitive(vec: Sequence) -> IntVec:
    """Scale a rational vector to coprime integers, keeping orientation."""
    vals = [mpq(x) for x in vec]
    den = mpz(1)
    for v in vals:
        den = den * v.denominator // _gcd(den, v.denominator)
    ints = [mpz(v * den) for v in vals]
    g = mpz(0)
    for x in ints:
        g = _gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(int(x // g) for x in ints)


def canonical_inequality(shape: Shape, g: Sequence, rhs=0) -> IntVec:
    """Canonical integer form of the inequality <g, p> >= rhs.

    On the affine span the constant rhs can be folded into g by per-block
    shifts; the representative with equal block sums is unique up to
    positive scaling, and scaling to coprime integers fixes it completely.
    """
    offs = _block_offsets(shape)
    gq = [mpq(x) for x in g]
    sigma = [sum(gq[off:off + m], mpq(0)) for off, m in offs]
    weight = sum(mpq(1, m) for _, m in offs)
    s = (sum(sig / m for sig, (_, m) in zip(sigma, offs)) - mpq(rhs)) / weight
    shifted = list(gq)
    for (off, m), sig in zip(offs, sigma):
        c = (s - sig) / m
        for i in range(off, off + m):
            shifted[i] += c
    return _primitive(shifted)


def pad_point(shape_from: Shape, shape_to: Shape, p: Sequence) -> tuple:
    """Append zero coordinates at the end of each block."""
    if any(t < f for f, t in zip(shape_from, shape_to)):
        raise ValueError(f"cannot pad {shape_from} into {shape_to}")
    out = []
    pos = 0
    for f, t in zip(shape_from, shape_to):
        out.extend(p[pos:pos + f])
        out.extend([mpq(0)] * (t - f))
        pos += f
    return tuple(out)


def _dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


# ---------------------------------------------------------------------------
# Double description

def _rref(rows: list[list[mpq]]) -> tuple[list[list[mpq]], list[int]]:
    """Reduced row echelon form over Q; returns (basis rows, pivot columns)."""
    m = [list(r) for r in rows]
    basis: list[list[mpq]] = []
    pivots: list[int] = []
    ncols = len(m[0]) if m else 0
    for row in m:
        v = list(row)
        for b, p in zip(basis, pivots):
            if v[p]:
                f = v[p]
                v = [x - f * y for x, y in zip(v, b)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            continue
        pv = v[piv]
        v = [x / pv for x in v]
        for b in basis:
            if b[piv]:
                f = b[piv]
                for i in range(ncols):
                    b[i] -= f * v[i]
        basis.append(v)
        pivots.append(piv)
    order = sorted(range(len(pivots)), key=lambda i: pivots[i])
    return [basis[i] for i in order], [pivots[i] for i in order]


def _extreme_rays(
        rows: list[IntVec]) -> tuple[list[IntVec], list[int], int, list[int]]:
    """Extreme rays of the cone {y : <r, y> >= 0 for r in rows}.

    Rows are processed in the given order (the caller fixes it for
    determinism).  Rank-deficient systems are handled by passing to the
    quotient modulo the lineality space: returned rays are expressed in
    quotient coordinates of dimension ``rank``, together with one tightness
    bitmask per ray over the input rows.  When the rank equals the ambient
    dimension the quotient is the identity and rays are ambient vectors.
    Returns (rays, masks, rank, pivot columns of the row space).
    """
    rref_basis, pivots = _rref([[mpq(x) for x in r] for r in rows])
    rank = len(pivots)
    if rank == 0:
        return [], [], 0, []
    # Coordinates w.r.t. the reduced echelon basis are read off at the
    # pivot columns.
    qrows = [tuple(mpz(r[p]) for p in pivots) for r in rows]

    # initial simplicial cone from the first full-rank subsystem
    base_idx: list[int] = []
    picked: list[IntVec] = []
    for i, q in enumerate(qrows):
        if rank_int(picked + [q]) > len(picked):
            picked.append(q)
            base_idx.append(i)
            if len(picked) == rank:
                break
    rays: list[tuple[mpz, ...]] = []
    masks: list[int] = []
    all_base = 0
    for i in base_idx:
        all_base |= 1 << i
    for j in range(rank):
        rhs = [mpq(1) if t == j else mpq(0) for t in range(rank)]
        sol = gauss_solve(picked, rhs)
        assert sol is not None
        ray = tuple(mpz(x) for x in _primitive(sol))
        rays.append(ray)
        masks.append(all_base & ~(1 << base_idx[j]))

    done = set(base_idx)
    for k, q in enumerate(qrows):
        if k in done:
            continue
        vals = [_dot(q, r) for r in rays]
        if all(v >= 0 for v in vals):
            for i, v in enumerate(vals):
                if v == 0:
                    masks[i] |= 1 << k
            continue
        plus = [i for i, v in enumerate(vals) if v > 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        minus = [i for i, v in enumerate(vals) if v < 0]
        new_rays = [rays[i] for i in plus] + [rays[i] for i in zero]
        new_masks = [masks[i] for i in plus] \
            + [masks[i] | 1 << k for i in zero]
        bit = 1 << k
        for p in plus:
            for m in minus:
                common = masks[p] & masks[m]
                if common.bit_count() < rank - 2:
                    continue
                blocked = False
                for t, mk in enumerate(masks):
                    if t != p and t != m and mk & common == common:
                        blocked = True
                        break
                if blocked:
                    continue
                combo = tuple(vals[p] * rays[m][i] - vals[m] * rays[p][i]
                              for i in range(rank))
                new_rays.append(tuple(mpz(x) for x in _primitive(combo)))
                new_masks.append(common | bit)
        rays = new_rays
        masks = new_masks
    return [tuple(int(x) for x in r) for r in rays], masks, rank, pivots


def _span_basis(shape: Shape) -> list[IntVec]:
    """Integer basis of the block-sum-zero subspace: consecutive
    differences within each block, a + b + c - 3 vectors."""
    n = sum(shape)
    basis = []
    for off, m in _block_offsets(shape):
        for i in range(m - 1):
            vec = [0] * n
            vec[off + i] = 1
            vec[off + i + 1] = -1
            basis.append(tuple(vec))
    return basis


def _uniform_point(shape: Shape) -> tuple[mpq, ...]:
    out = []
    for _, m in _block_offsets(shape):
        out.extend([mpq(1, m)] * m)
    return tuple(out)


def _homogenized_rows(shape: Shape, rows: Sequence[IntVec]) -> list[IntVec]:
    """Project inequalities onto the affine span and homogenize.

    Row h becomes (h . x0 | h . b_1, ..., h . b_d) over the span basis,
    scaled to coprime integers, so a point x = x0 + sum u_k b_k satisfies
    <h, x> >= 0 exactly when the projected row pairs >= 0 with (1, u).
    """
    x0 = _uniform_point(shape)
    basis = _span_basis(shape)
    out = []
    for h in rows:
        vec = [_dot(h, x0)] + [mpq(_dot(h, bvec)) for bvec in basis]
        out.append(_primitive(vec))
    return out


def _t_row(dim: int) -> IntVec:
    return (1,) + (0,) * (dim - 1)


def _vertices_from_rows(shape: Shape,
                        rows: Sequence[IntVec]) -> tuple[tuple[mpq, ...], ...]:
    """Exact vertex enumeration of the region cut out by ``rows`` inside
    the affine span.  Empty regions give (); recession directions raise."""
    d = sum(shape) - 3
    proj = _homogenized_rows(shape, rows) if rows else []
    system = [_t_row(d + 1)] + sorted(set(proj))
    rays, _, rank, _ = _extreme_rays(system)
    finite = [r for r in rays if r[0] > 0]
    if not finite:
        return ()
    if rank < d + 1 or any(r[0] == 0 for r in rays):
        raise UnboundedRegionError(
            f"region for shape {shape} is unbounded; "
            f"{len(rows)} inequalities given")
    x0 = _uniform_point(shape)
    basis = _span_basis(shape)
    verts = []
    for r in finite:
        t = mpq(r[0])
        x = list(x0)
        for k, bvec in enumerate(basis):
            u = r[k + 1] / t
            if u:
                for i, bi in enumerate(bvec):
                    if bi:
                        x[i] += u * bi
        verts.append(tuple(x))
    return tuple(sorted(set(verts), reverse=True))


def vertices_and_rays(shape: Shape, rows: Sequence[IntVec]):
    """Vertices and recession directions of a possibly unbounded region.

    Intermediate systems during facet screening are usually unbounded, so
    this returns (vertices, directions): the region equals
    conv(vertices) + cone(directions), with lineality split into opposite
    direction pairs.  An empty region gives ((), ())."""
    d = sum(shape) - 3
    proj = _homogenized_rows(shape, rows) if rows else []
    system = [_t_row(d + 1)] + sorted(set(proj))
    rays, _, rank, pivots = _extreme_rays(system)
    if not any(r[0] > 0 for r in rays):
        return (), ()
    x0 = _uniform_point(shape)
    basis = _span_basis(shape)

    def lift_dir(hom: Sequence) -> tuple[mpq, ...]:
        vec = [mpq(0)] * sum(shape)
        for k, bvec in enumerate(basis):
            u = mpq(hom[k + 1])
            if u:
                for i, bi in enumerate(bvec):
                    if bi:
                        vec[i] += u * bi
        return tuple(vec)

    verts = []
    dirs = []
    for r in rays:
        hom = [mpq(0)] * (d + 1)
        for val, p in zip(r, pivots):
            hom[p] = mpq(val)
        if hom[0] > 0:
            t = hom[0]
            x = list(x0)
            for k, bvec in enumerate(basis):
                u = hom[k + 1] / t
                if u:
                    for i, bi in enumerate(bvec):
                        if bi:
                            x[i] += u * bi
            verts.append(tuple(x))
        else:
            dirs.append(lift_dir(hom))
    if rank < d + 1:
        rref_basis, piv = _rref([[mpq(x) for x in r] for r in system])
        free = [j for j in range(d + 1) if j not in piv]
        for f in free:
            hom = [mpq(0)] * (d + 1)
            hom[f] = mpq(1)
            for b, p in zip(rref_basis, piv):
                hom[p] = -b[f]
            direction = lift_dir(hom)
            dirs.append(direction)
            dirs.append(tuple(-x for x in direction))
    return (tuple(sorted(set(verts), reverse=True)),
            tuple(sorted(set(dirs), reverse=True)))


def _hull_data(verts: Sequence[Sequence[mpq]]):
    """Affine hull of a vertex set: base point, RREF basis of the
    difference space, and its pivot columns."""
    v0 = tuple(mpq(x) for x in verts[0])
    diffs = [[mpq(x) - y for x, y in zip(v, v0)] for v in verts[1:]]
    diffs = [d for d in diffs if any(d)]
    if not diffs:
        return v0, [], []
    basis, pivots = _rref(diffs)
    return v0, basis, pivots


def _hull_coords(v, v0, basis, pivots) -> tuple[mpq, ...] | None:
    """Coordinates of v in the affine hull, or None when v lies outside."""
    diff = [mpq(x) - y for x, y in zip(v, v0)]
    coords = tuple(diff[p] for p in pivots)
    recon = [mpq(0)] * len(diff)
    for c, b in zip(coords, basis):
        if c:
            for i, bi in enumerate(b):
                recon[i] += c * bi
    if recon != diff:
        return None
    return coords


def _facets_from_vertices(shape: Shape,
                          verts: Sequence[Sequence[mpq]]) -> tuple[IntVec, ...]:
    """Facets of conv(verts) relative to its affine hull, as canonical
    ambient inequalities.  A 0-dimensional hull has no facets."""
    if len(verts) <= 1:
        return ()
    v0, basis, pivots = _hull_data(verts)
    k = len(pivots)
    coords = []
    for v in verts:
        w = _hull_coords(v, v0, basis, pivots)
        assert w is not None
        coords.append(w)
    centroid = tuple(sum(w[j] for w in coords) / len(coords)
                     for j in range(k))
    dual_rows = [_t_row(k + 1)]
    for w in coords:
        dual_rows.append(_primitive(
            (mpq(1),) + tuple(centroid[j] - w[j] for j in range(k))))
    rays, _, rank, _ = _extreme_rays(
        [_t_row(k + 1)] + sorted(set(dual_rows[1:])))
    assert rank == k + 1 and all(r[0] > 0 for r in rays), \
        "polar dual of a full-dimensional hull must be bounded"
    facets = set()
    for r in rays:
        tau = mpq(r[0])
        y = [r[j + 1] / tau for j in range(k)]
        # facet inequality in hull coordinates: <-y, w> + 1 + <y, c> >= 0
        g = [mpq(0)] * sum(shape)
        for j, p in enumerate(pivots):
            g[p] = -y[j]
        phi0 = 1 + _dot(y, centroid)
        gamma = _dot(g, v0) - phi0
        facets.add(canonical_inequality(shape, g, gamma))
    return tuple(sorted(facets))


def remove_redundant(shape: Shape, rows: Iterable[IntVec],
                     include_chamber: bool = False) -> tuple[IntVec, ...]:
    """Minimal subset of inequalities cutting the same region.

    Rows are canonicalized, deduplicated, and processed in ascending order
    of their largest absolute entry, so cheap structured inequalities build
    the intermediate cone before expensive ones arrive.  A row survives if
    it supports a facet of the region, or if it is tight on all of it and
    still needed to pin the affine hull (tested by re-running the double
    description without it).
    """
    canon = {canonical_inequality(shape, h) for h in rows}
    if include_chamber:
        canon.update(chamber_rows(shape))
    ordered = sorted(canon, key=lambda h: (max(abs(x) for x in h), h))
    if not ordered:
        return ()
    d = sum(shape) - 3

    def cone_of(subset):
        proj = _homogenized_rows(shape, subset)
        system = [_t_row(d + 1)] + proj
        rays, _, rank, pivots = _extreme_rays(system)
        return frozenset(rays), rank, tuple(pivots)

    proj = _homogenized_rows(shape, ordered)
    system = [_t_row(d + 1)] + proj
    rays, masks, rank, pivots = _extreme_rays(system)
    if not rays:
        return tuple(ordered)
    full_cone = (frozenset(tuple(r) for r in rays), rank, tuple(pivots))
    dim_c = rank_int(rays)
    keep: list[IntVec] = []
    tight_all: list[IntVec] = []
    for i, h in enumerate(ordered):
        bit = 1 << (i + 1)
        tight = [r for r, mk in zip(rays, masks) if mk & bit]
        if len(tight) == len(rays):
            tight_all.append(h)
        elif tight and rank_int(tight) == dim_c - 1:
            keep.append(h)
    for h in reversed(list(tight_all)):
        trial = [x for x in keep + tight_all if x != h]
        if cone_of(trial) == full_cone:
            tight_all.remove(h)
    kept = keep + tight_all
    if cone_of(kept) != full_cone:
        # fall back to the full set rather than return a wrong region
        kept = ordered
    return tuple(sorted(kept, key=lambda h: (max(abs(x) for x in h), h)))


# ---------------------------------------------------------------------------
# The polytope type

class Polytope:
    """A bounded region of spectra, carried as an H-rep, a V-rep, or both.

    The defining description is whichever one the constructor received;
    the other is derived lazily and exactly.  Vertices are canonically
    sorted in descending lexicographic order, facet inequalities ascending.
    """

    __slots__ = ("shape", "inequalities", "_vertices", "_facets",
                 "_defined_by", "_hull")

    def __init__(self, shape: Shape, *, inequalities=None, vertices=None):
        if inequalities is None and vertices is None:
            raise ValueError("need inequalities or vertices")
        self.shape = tuple(shape)
        if len(self.shape) != 3 or any(m < 1 for m in self.shape):
            raise ValueError(f"bad shape {shape}")
        n = sum(self.shape)
        if inequalities is not None:
            canon = sorted({canonical_inequality(self.shape, h)
                            for h in inequalities})
            self.inequalities: tuple[IntVec, ...] = tuple(canon)
        else:
            self.inequalities = ()
        if vertices is not None:
            vs = []
            for v in vertices:
                if len(v) != n:
                    raise ValueError("vertex length does not match shape")
                vs.append(tuple(mpq(x) for x in v))
            self._vertices = tuple(sorted(set(vs), reverse=True))
            self._defined_by = "V"
        else:
            self._vertices = None
            self._defined_by = "H"
        self._facets = None
        self._hull = None

    @classmethod
    def from_inequalities(cls, shape: Shape, rows: Iterable[IntVec],
                          include_chamber: bool = True) -> "Polytope":
        rows = list(rows)
        if include_chamber:
            rows.extend(chamber_rows(shape))
        return cls(shape, inequalities=rows)

    @classmethod
    def from_vertices(cls, shape: Shape, verts: Iterable[Sequence]) -> "Polytope":
        return cls(shape, vertices=verts)

    # -- representations ----------------------------------------------

    @property
    def vertices(self) -> tuple[tuple[mpq, ...], ...]:
        if self._vertices is None:
            self._vertices = _vertices_from_rows(self.shape,
                                                 self.inequalities)
        return self._vertices

    @property
    def facets(self) -> tuple[IntVec, ...]:
        """Facet inequalities relative to the affine hull, recomputed from
        the vertex set regardless of how the polytope was constructed."""
        if self._facets is None:
            self._facets = _facets_from_vertices(self.shape, self.vertices)
        return self._facets

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def hull_equations(self) -> tuple[IntVec, ...]:
        """Canonical rows vanishing on the whole polytope, one per
        dimension separating the affine hull from the block-sum span.
        Full-dimensional polytopes have none."""
        verts = self.vertices
        if not verts:
            return ()
        v0, basis, pivots = self._hull_cached()
        n = sum(self.shape)
        found: list[IntVec] = []
        for f in range(n):
            if f in pivots:
                continue
            vec = [mpq(0)] * n
            vec[f] = mpq(1)
            for b, p in zip(basis, pivots):
                vec[p] = -b[f]
            shifted = [mpq(x) for x in vec]
            rhs = _dot(vec, v0)
            try:
                g = canonical_inequality(self.shape, shifted, rhs)
            except ValueError:
                continue
            neg = tuple(-x for x in g)
            for i in range(len(g)):
                if g[i]:
                    if g[i] < 0:
                        g = neg
                    break
            if g not in found and rank_int(found + [g]) > len(found):
                found.append(g)
        return tuple(sorted(found))

    def defining_inequalities(self) -> tuple[IntVec, ...]:
        """Inequalities that cut the polytope out of the block-sum span:
        the facets plus both signs of every hull equation."""
        rows = list(self.facets)
        for g in self.hull_equations():
            rows.append(g)
            rows.append(tuple(-x for x in g))
        return tuple(sorted(rows))

    @property
    def dim(self) -> int:
        if not self.vertices:
            return -1
        _, basis, _ = self._hull_cached()
        return len(basis)

    def _hull_cached(self):
        if self._hull is None:
            self._hull = _hull_data(self.vertices)
        return self._hull

    # -- point and set predicates --------------------------------------

    def contains(self, point: Sequence) -> bool:
        """Exact membership test."""
        p = tuple(mpq(x) for x in point)
        if len(p) != sum(self.shape):
            raise ValueError("point length does not match shape")
        for off, m in _block_offsets(self.shape):
            if sum(p[off:off + m], mpq(0)) != 1:
                return False
        if self._defined_by == "H":
            return all(_dot(h, p) >= 0 for h in self.inequalities)
        if not self.vertices:
            return False
        v0, basis, pivots = self._hull_cached()
        w = _hull_coords(p, v0, basis, pivots)
        if w is None:
            return False
        return all(_dot(h, p) >= 0 for h in self.facets)

    def equals(self, other: "Polytope") -> bool:
        return self.shape == other.shape and self.vertices == other.vertices

    def equal_up_to_padding(self, other: "Polytope") -> bool:
        target = tuple(max(f, t) for f, t in zip(self.shape, other.shape))
        mine = {pad_point(self.shape, target, v) for v in self.vertices}
        theirs = {pad_point(other.shape, target, v) for v in other.vertices}
        return mine == theirs

    def equal_up_to_factor_perm(self, other: "Polytope") -> bool:
        offs = _block_offsets(other.shape)
        for perm in itertools.permutations(range(3)):
            if tuple(other.shape[i] for i in perm) != self.shape:
                continue
            permuted = set()
            for v in other.vertices:
                blocks = [v[off:off + m] for off, m in offs]
                permuted.add(tuple(x for i in perm for x in blocks[i]))
            if permuted == set(self.vertices):
                return True
        return False

    # -- derived quantities --------------------------------------------

    def min_norm_point(self) -> tuple[mpq, ...]:
        """The unique point of the polytope closest to the origin in the
        l2 norm, by Wolfe's nearest-point algorithm in exact arithmetic."""
        verts = self.vertices
        if not verts:
            raise ValueError("empty polytope has no nearest point")
        return _wolfe_min_norm(verts)

    def quantum_functional(self, theta: Sequence) -> float:
        """2 to the maximum of the theta-weighted block entropies.

        Frank-Wolfe with pairwise steps over the vertex set, stopped at
        duality gap 1e-10; the optimum is snapped to a nearby rational
        point when that point verifies exactly inside the polytope.
        """
        verts = self.vertices
        if not verts:
            raise ValueError("empty polytope")
        th = [float(t) for t in theta]
        if len(th) != 3 or any(t < -1e-12 for t in th) \
                or abs(sum(th) - 1.0) > 1e-9:
            raise ValueError("theta must be a probability 3-vector")
        return _entropy_max(self, th)

    # -- serialization --------------------------------------------------

    def to_json(self) -> str:
        """Deterministic JSON with exact rational vertices."""
        verts = self.vertices
        ineqs = self.inequalities
        if not ineqs and len(verts) > 1:
            ineqs = self.facets
        data = {
            "shape": list(self.shape),
            "inequalities": [list(h) for h in ineqs],
            "vertices": [[{"num": int(x.numerator),
                           "den": int(x.denominator)} for x in v]
                         for v in verts],
        }
        return json.dumps(data, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        data = json.loads(text)
        shape = tuple(data["shape"])
        verts = [[mpq(c["num"], c["den"]) for c in v]
                 for v in data.get("vertices", [])]
        ineqs = [tuple(h) for h in data.get("inequalities", [])]
        if verts:
            return cls(shape, vertices=verts, inequalities=ineqs or None)
        if ineqs:
            return cls(shape, inequalities=ineqs)
        return cls(shape, vertices=[])

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "Polytope":
        return cls.from_json(Path(path).read_text())

    def __repr__(self) -> str:
        a, b, c = self.shape
        parts = [f"Polytope({a}x{b}x{c}"]
        if self._vertices is not None:
            parts.append(f", {len(self._vertices)} vertices")
        if self.inequalities:
            parts.append(f", {len(self.inequalities)} inequalities")
        return "".join(parts) + ")"


# ---------------------------------------------------------------------------
# Minimum-norm point (exact Wolfe)

def _affine_min_norm(points: list[tuple[mpq, ...]]):
    """Affine coefficients of the nearest point to 0 in aff(points)."""
    k = len(points)
    gram = [[_dot(points[i], points[j]) for j in range(k)] for i in range(k)]
    rows = [gram[i] + [mpq(1)] for i in range(k)] + [[mpq(1)] * k + [mpq(0)]]
    rhs = [mpq(0)] * k + [mpq(1)]
    sol = gauss_solve(rows, rhs)
    if sol is None:
        return None
    return sol[:k]


def _wolfe_min_norm(verts: Sequence[tuple[mpq, ...]]) -> tuple[mpq, ...]:
    n = len(verts[0])
    start = min(range(len(verts)), key=lambda i: (_dot(verts[i], verts[i]), i))
    corral = [start]
    lam = [mpq(1)]
    x = list(verts[start])
    for _ in range(500 + 200 * len(verts)):
        xx = _dot(x, x)
        j = min(range(len(verts)), key=lambda i: (_dot(x, verts[i]), i))
        if _dot(x, verts[j]) >= xx:
            return tuple(x)
        corral.append(j)
        lam.append(mpq(0))
        while True:
            pts = [verts[i] for i in corral]
            mu = _affine_min_norm(pts)
            assert mu is not None, "corral became affinely dependent"
            if all(m >= 0 for m in mu):
                lam = list(mu)
                x = [sum(m * pts[t][i] for t, m in enumerate(mu))
                     for i in range(n)]
                survivors = [t for t in range(len(corral)) if lam[t] > 0]
                corral = [corral[t] for t in survivors]
                lam = [lam[t] for t in survivors]
                break
            theta = min(lam[t] / (lam[t] - mu[t])
                        for t in range(len(corral)) if mu[t] < 0)
            assert theta > 0, "minor cycle stalled"
            lam = [lam[t] + theta * (mu[t] - lam[t])
                   for t in range(len(corral))]
            survivors = [t for t in range(len(corral)) if lam[t] > 0]
            corral = [corral[t] for t in survivors]
            lam = [lam[t] for t in survivors]
    raise RuntimeError("nearest-point iteration did not terminate")


# ---------------------------------------------------------------------------
# Entropy functionals (Frank-Wolfe)

_LOG2E = 1.0 / math.log(2.0)


def _entropy_obj(shape: Shape, th: list[float], p: Sequence[float]) -> float:
    val = 0.0
    for (off, m), t in zip(_block_offsets(shape), th):
        if t == 0.0:
            continue
        h = 0.0
        for i in range(off, off + m):
            if p[i] > 0.0:
                h -= p[i] * math.log2(p[i])
        val += t * h
    return val


def _entropy_grad(shape: Shape, th: list[float],
                  p: Sequence[float]) -> list[float]:
    g = [0.0] * len(p)
    for (off, m), t in zip(_block_offsets(shape), th):
        for i in range(off, off + m):
            g[i] = t * (-math.log2(max(p[i], 1e-300)) - _LOG2E)
    return g


def _entropy_max(poly: Polytope, th: list[float]) -> float:
    shape = poly.shape
    verts = [tuple(float(x) for x in v) for v in poly.vertices]
    n = len(verts[0])
    vertex_best = max(_entropy_obj(shape, th, v) for v in verts)
    if len(verts) == 1:
        return 2.0 ** vertex_best
    weights = {i: 1.0 / len(verts) for i in range(len(verts))}
    x = [sum(verts[i][c] * w for i, w in weights.items()) for c in range(n)]
    for it in range(100_000):
        if it and it % 512 == 0:
            # resync against float drift in the incremental updates
            x = [sum(verts[i][c] * w for i, w in weights.items())
                 for c in range(n)]
        g = _entropy_grad(shape, th, x)
        scores = [_dot(g, v) for v in verts]
        s = max(range(len(verts)), key=lambda i: (scores[i], -i))
        gap = scores[s] - _dot(g, x)
        if gap < 1e-10:
            break
        a = min(weights, key=lambda i: (scores[i], i))
        gamma_max = weights[a]
        d = [verts[s][c] - verts[a][c] for c in range(n)]

        def slope(gm: float) -> float:
            pt = [x[c] + gm * d[c] for c in range(n)]
            return _dot(_entropy_grad(shape, th, pt), d)

        if slope(gamma_max) >= 0.0:
            gamma = gamma_max
        else:
            lo, hi = 0.0, gamma_max
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if slope(mid) > 0.0:
                    lo = mid
                else:
                    hi = mid
            gamma = 0.5 * (lo + hi)
        weights[s] = weights.get(s, 0.0) + gamma
        weights[a] -= gamma
        if weights[a] <= 1e-15:
            del weights[a]
        x = [x[c] + gamma * d[c] for c in range(n)]
    best = max(_entropy_obj(shape, th, x), vertex_best)
    snapped = _rationalize_inside(poly, x)
    if snapped is not None:
        cand = _entropy_obj(shape, th, [float(c) for c in snapped])
        best = max(best, cand)
    return 2.0 ** best


def _rationalize_inside(poly: Polytope, x: Sequence[float],
                        max_den: int = 120):
    """Round coordinates to small denominators; keep the result only when
    it lies in the polytope exactly."""
    cand = []
    for c in x:
        f = Fraction(c).limit_denominator(max_den)
        cand.append(mpq(f.numerator, f.denominator))
    try:
        ok = poly.contains(cand)
    except ValueError:
        return None
    return tuple(cand) if ok else None


# ---------------------------------------------------------------------------
# Bundled generic polytopes

def _kronecker_dir():
    return resources.files("momentpoly").joinpath("data/kronecker")


def kronecker_shapes() -> list[Shape]:
    out = []
    for p in _kronecker_dir().iterdir():
        if p.name.endswith(".json"):
            a, b, c = p.name[:-5].split("x")
            out.append((int(a), int(b), int(c)))
    return sorted(out)


def kronecker_polytope(shape: Shape) -> Polytope:
    """The bundled moment polytope of a generic tensor of this shape."""
    a, b, c = shape
    path = _kronecker_dir() / f"{a}x{b}x{c}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        avail = ", ".join(f"{s[0]}x{s[1]}x{s[2]}" for s in kronecker_shapes())
        raise KeyError(f"no bundled polytope for shape {shape}; "
                       f"available: {avail}") from None
    return Polytope.from_json(text)
