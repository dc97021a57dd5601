"""Candidate inequality enumeration for 3-tensor support polytopes.

Every facet of every polytope conv(S), with S a subset of the weight set
Omega of a shape (a, b, c), has a normal vector that is the integer kernel
of a small weight matrix: a full-rank matrix whose rows are weights lying
on the facet, extended by the two trivial relations that hold on all of
aff Omega.  Enumerating weight matrices up to row order and coordinate
permutations, extracting the kernels, and then restoring the permutation
symmetries therefore produces one finite candidate set per shape that
covers all support polytopes at once.

The enumeration works on "standard" matrices, a normal form under row
permutations and per-factor coordinate permutations, plus an "outer
standard" refinement under factor swaps when all three dimensions agree.
Candidates are deduplicated signed integer vectors; the highest weight
(e1|e1|e1) lies in every polytope of interest, so vectors that cut it are
dropped at the end.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .fields import integer_kernel_vector

IntVec = tuple[int, ...]

_MAGIC = b"MPOLY-H1"


def ordered_weights(shape: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    """All weights (i, j, k) of the shape, 1-based, in the enumeration order.

    Ascending lexicographic order on the index triples, which is descending
    lexicographic order on the 0/1 embeddings; the first weight is always
    (1, 1, 1), the highest weight.
    """
    a, b, c = shape
    return [(i, j, k)
            for i in range(1, a + 1)
            for j in range(1, b + 1)
            for k in range(1, c + 1)]


def embed_weight(shape: tuple[int, int, int],
                 w: tuple[int, int, int]) -> IntVec:
    """0/1 embedding (e_i | e_j | e_k) of a weight into Z^(a+b+c)."""
    a, b, c = shape
    i, j, k = w
    row = [0] * (a + b + c)
    row[i - 1] = 1
    row[a + j - 1] = 1
    row[a + b + k - 1] = 1
    return tuple(row)


def weight_cost(shape: tuple[int, int, int],
                row: Sequence[int]) -> tuple[int, int, int]:
    """Recover the index triple (i, j, k) from an embedded weight row."""
    a, b, c = shape
    i = row.index(1) + 1
    j = row.index(1, a) - a + 1
    k = row.index(1, a + b) - a - b + 1
    return (i, j, k)


def trivial_vectors(shape: tuple[int, int, int]) -> tuple[IntVec, IntVec]:
    """The two relations (1|-1|0) and (0|1|-1) valid on all of aff Omega."""
    a, b, c = shape
    q1 = (1,) * a + (-1,) * b + (0,) * c
    q2 = (0,) * a + (1,) * b + (-1,) * c
    return q1, q2


def is_standard(shape: tuple[int, int, int],
                rows: Sequence[Sequence[int]]) -> bool:
    """Whether an embedded weight matrix is in the permutation normal form.

    Two conditions: the rows are sorted (descending in the embedding, i.e.
    ascending in the index triples), and within each factor the index used
    by a row exceeds the running maximum of the rows above it by at most 1
    (the running maximum starts at 0, so the first row must be (1, 1, 1)).
    """
    costs = [weight_cost(shape, r) for r in rows]
    if any(costs[t] > costs[t + 1] for t in range(len(costs) - 1)):
        return False
    maxes = [0, 0, 0]
    for cost in costs:
        for f in range(3):
            if cost[f] > maxes[f] + 1:
                return False
            maxes[f] = max(maxes[f], cost[f])
    return True


def is_outer_standard(shape: tuple[int, int, int],
                      rows: Sequence[Sequence[int]]) -> bool:
    """Standardness plus the factor-swap normal form for cubic shapes.

    Requires the first-column sums per factor (the number of rows using
    index 1 in that factor) to be non-increasing.
    """
    a, b, c = shape
    if not a == b == c:
        raise ValueError("outer standardness needs a cubic shape")
    if not is_standard(shape, rows):
        return False
    s1 = sum(r[0] for r in rows)
    s2 = sum(r[a] for r in rows)
    s3 = sum(r[2 * a] for r in rows)
    return s1 >= s2 >= s3


def _reduce_against(basis: list[tuple[int, tuple[mpq, ...]]],
                    row: Sequence[int]):
    """Reduce a row against an echelon basis; return (pivot, normalized row)
    or None when the row is dependent."""
    v = [mpq(x) for x in row]
    for pivot, brow in basis:
        coef = v[pivot]
        if coef:
            v = [x - coef * y for x, y in zip(v, brow)]
    for idx, x in enumerate(v):
        if x:
            return idx, tuple(y / x for y in v)
    return None


@dataclass(frozen=True)
class CandidateSet:
    """The enumerated inequality candidates of one shape.

    Counts from the two intermediate stages are kept for reporting: the
    number of emitted weight matrices and the number of distinct signed
    kernel vectors before symmetry restoration.
    """

    shape: tuple[int, int, int]
    outer: bool
    n_matrices: int
    n_presym: int
    inequalities: tuple[IntVec, ...]
    filters: tuple[str, ...] = ("highest-weight",)

    def __len__(self) -> int:
        return len(self.inequalities)

    def max_abs(self) -> int:
        """Largest absolute entry over all candidates (the constant that
        controls scaling-certificate precision)."""
        return max((max(abs(x) for x in h) for h in self.inequalities),
                   default=0)

    def with_inequalities(self, inequalities: Iterable[IntVec],
                          filter_name: str) -> "CandidateSet":
        return CandidateSet(self.shape, self.outer, self.n_matrices,
                            self.n_presym, tuple(inequalities),
                            self.filters + (filter_name,))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        a, b, c = self.shape
        n = a + b + c
        flat = [x for h in self.inequalities for x in h]
        blob = struct.pack("<8sBBBBqqq", _MAGIC, a, b, c, int(self.outer),
                           self.n_matrices, self.n_presym,
                           len(self.inequalities))
        blob += struct.pack(f"<{len(flat)}i", *flat)
        path.write_bytes(blob)

    @classmethod
    def load(cls, path: str | Path) -> "CandidateSet":
        blob = Path(path).read_bytes()
        head = struct.calcsize("<8sBBBBqqq")
        magic, a, b, c, outer, n_mat, n_pre, n_final = struct.unpack(
            "<8sBBBBqqq", blob[:head])
        if magic != _MAGIC:
            raise ValueError(f"not a candidate cache file: {path}")
        n = a + b + c
        flat = struct.unpack(f"<{n_final * n}i", blob[head:])
        ineqs = tuple(tuple(flat[t * n:(t + 1) * n]) for t in range(n_final))
        return cls((a, b, c), bool(outer), n_mat, n_pre, ineqs)


def enumerate_candidates(shape: tuple[int, int, int],
                         use_outer: bool | None = None) -> CandidateSet:
    """Enumerate the full candidate inequality set of a shape.

    Grows ordered weight matrices row by row (indices strictly increasing),
    keeping only standard full-rank prefixes, up to d = a+b+c-3 rows.  For
    cubic shapes the outer-standard filter is applied once after growth.
    Each matrix, extended by the two trivial relations, has a kernel of
    dimension exactly one; both signs of the coprime kernel vector are
    collected.  Coordinate symmetries are then restored one transposition
    layer at a time, factor swaps are restored for cubic shapes, and the
    highest-weight filter is applied last.
    """
    a, b, c = shape
    if use_outer is None:
        use_outer = a == b == c
    if use_outer and not a == b == c:
        raise ValueError("factor-swap reduction needs a cubic shape")
    weights = ordered_weights(shape)
    embeds = [embed_weight(shape, w) for w in weights]
    d = a + b + c - 3

    matrices: list[tuple[int, ...]] = []
    if d == 0:
        matrices.append(())
    else:
        def grow(idxs: list[int], maxes: tuple[int, int, int],
                 basis: list) -> None:
            if len(idxs) == d:
                matrices.append(tuple(idxs))
                return
            for t in range(idxs[-1] + 1, len(weights)):
                i, j, k = weights[t]
                if i > maxes[0] + 1 or j > maxes[1] + 1 or k > maxes[2] + 1:
                    continue
                ext = _reduce_against(basis, embeds[t])
                if ext is None:
                    continue
                grow(idxs + [t], (max(maxes[0], i), max(maxes[1], j),
                                  max(maxes[2], k)), basis + [ext])

        # standardness at two rows already forces the first row (1,1,1)
        grow([0], (1, 1, 1), [_reduce_against([], embeds[0])])

    if use_outer:
        def outer_ok(idxs: tuple[int, ...]) -> bool:
            sums = [0, 0, 0]
            for t in idxs:
                for f in range(3):
                    if weights[t][f] == 1:
                        sums[f] += 1
            return sums[0] >= sums[1] >= sums[2]

        matrices = [m for m in matrices if outer_ok(m)]

    q1, q2 = trivial_vectors(shape)
    presym: set[IntVec] = set()
    for m in matrices:
        h = tuple(integer_kernel_vector([embeds[t] for t in m] + [q1, q2]))
        presym.add(h)
        presym.add(tuple(-x for x in h))

    candidates = set(presym)
    for dim, off in ((a, 0), (b, a), (c, a + b)):
        for m in range(dim, 0, -1):
            grown = set(candidates)
            qcol = off + m - 1
            for i in range(1, m):
                pcol = off + i - 1
                for h in candidates:
                    if h[pcol] != h[qcol]:
                        g = list(h)
                        g[pcol], g[qcol] = g[qcol], g[pcol]
                        grown.add(tuple(g))
            candidates = grown

    if use_outer:
        def swap_factors(h: IntVec, f1: int, f2: int) -> IntVec:
            blocks = [list(h[0:a]), list(h[a:2 * a]), list(h[2 * a:])]
            blocks[f1], blocks[f2] = blocks[f2], blocks[f1]
            return tuple(blocks[0] + blocks[1] + blocks[2])

        candidates |= {swap_factors(h, 0, 2) for h in candidates} \
            | {swap_factors(h, 1, 2) for h in candidates}
        candidates |= {swap_factors(h, 0, 1) for h in candidates}

    final = tuple(sorted(h for h in candidates
                         if h[0] + h[a] + h[a + b] >= 0))
    return CandidateSet(shape, use_outer, len(matrices), len(presym), final)


def candidates_cache_path(cache_dir: str | Path,
                          shape: tuple[int, int, int],
                          use_outer: bool) -> Path:
    a, b, c = shape
    name = "candidates.outer.bin" if use_outer else "candidates.bin"
    return Path(cache_dir) / f"{a}x{b}x{c}" / name


def load_or_enumerate(shape: tuple[int, int, int],
                      cache_dir: str | Path | None = None,
                      use_outer: bool | None = None) -> CandidateSet:
    """Enumerate a shape's candidates, reusing an on-disk cache if given."""
    if use_outer is None:
        use_outer = shape[0] == shape[1] == shape[2]
    if cache_dir is None:
        return enumerate_candidates(shape, use_outer)
    path = candidates_cache_path(cache_dir, shape, use_outer)
    if path.exists():
        return CandidateSet.load(path)
    cand = enumerate_candidates(shape, use_outer)
    cand.save(path)
    return cand


def _dot(p: Sequence, h: Sequence[int]):
    return sum(x * y for x, y in zip(p, h))


def filter_by_points(inequalities: Iterable[IntVec],
                     points: Sequence[Sequence]) -> tuple[IntVec, ...]:
    """Keep the inequalities that hold at every supplied point.

    The points must be known members of the target polytope; anything they
    violate can never be a valid inequality, so it is discarded before the
    expensive attainability checks.
    """
    return tuple(h for h in inequalities
                 if all(_dot(p, h) >= 0 for p in points))


def filter_known_valid(inequalities: Iterable[IntVec],
                       polytope) -> tuple[IntVec, ...]:
    """Drop inequalities that hold on a polytope known to contain the target.

    Such inequalities are valid automatically and need no attainability
    check; they are reinstated by intersecting with that polytope when the
    final answer is assembled.  Accepts a polytope object exposing
    ``vertices`` or a plain sequence of rational points.
    """
    vertices = getattr(polytope, "vertices", polytope)
    return tuple(h for h in inequalities
                 if any(_dot(v, h) < 0 for v in vertices))


def maxrank_points(shape: tuple[int, int, int],
                   maxranks: tuple[int, int, int]) -> list[tuple[mpq, ...]]:
    """Known polytope members derived from the maximal slice ranks.

    A rank-r combination of slices along one axis restricts the tensor to
    e_1 tensored with an r x r identity, whose marginals are the point
    (e_1 | u_r | u_r) up to placing e_1 at the axis; all of these lie in
    the moment polytope.
    """
    a, b, c = shape

    def e1(m: int) -> tuple[mpq, ...]:
        return (mpq(1),) + (mpq(0),) * (m - 1)

    def u(r: int, m: int) -> tuple[mpq, ...]:
        if r > m:
            raise ValueError(f"uniform vector u_{r} does not fit in C^{m}")
        return (mpq(1, r),) * r + (mpq(0),) * (m - r)

    points = []
    for r in range(1, maxranks[0] + 1):
        points.append(e1(a) + u(r, b) + u(r, c))
    for r in range(1, maxranks[1] + 1):
        points.append(u(r, a) + e1(b) + u(r, c))
    for r in range(1, maxranks[2] + 1):
        points.append(u(r, a) + u(r, b) + e1(c))
    return points


def sort_by_max_abs(inequalities: Iterable[IntVec]) -> list[IntVec]:
    """Cheapest-first order for attainability checks: small entries tend to
    give sparse, quickly decided polynomial systems."""
    return sorted(inequalities, key=lambda h: (max(abs(x) for x in h), h))


class Redundancy(Enum):
    REDUNDANT = "redundant"
    MUST_CHECK = "must-check"


class IntermediatePolytopeFilter:
    """Tracks the polytope cut out by the inequalities accepted so far and
    classifies new candidates against its cached vertex set.

    A candidate that already holds at every cached vertex cannot shrink the
    intersection and is redundant.  Vertices are refreshed lazily, every
    ``batch_size`` accepted inequalities, because vertex enumeration is far
    more expensive than the dot products saved.
    """

    def __init__(self, valid: Iterable[IntVec],
                 vertex_fn: Callable[[Sequence[IntVec]], Sequence],
                 batch_size: int = 8):
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        self._valid: list[IntVec] = list(valid)
        self._vertex_fn = vertex_fn
        self._batch = batch_size
        self._pending = 0
        self._vertices = list(vertex_fn(self._valid))

    @property
    def valid(self) -> tuple[IntVec, ...]:
        return tuple(self._valid)

    def classify(self, h: IntVec) -> Redundancy:
        for v in self._vertices:
            if _dot(v, h) < 0:
                return Redundancy.MUST_CHECK
        return Redundancy.REDUNDANT

    def accept(self, h: IntVec) -> None:
        """Record an inequality found valid; refresh vertices when due."""
        self._valid.append(h)
        self._pending += 1
        if self._pending >= self._batch:
            self._vertices = list(self._vertex_fn(self._valid))
            self._pending = 0
