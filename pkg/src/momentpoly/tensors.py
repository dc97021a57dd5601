"""Exact 3-tensors: group action, supports, marginals, maxranks, corpus.

Tensors store dense arbitrary-precision rational entries.  All indices in
public interfaces (supports, weights, JSON) are 1-based; internal storage is
0-based nested tuples.  Everything is immutable after construction.
"""

from __future__ import annotations

import json
import math
import random
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq

__all__ = [
    "SqrtTensor",
    "Tensor",
    "corpus_names",
    "named_tensor",
    "random_triple",
]


class Tensor:
    """A 3-tensor with exact rational entries and shape (a, b, c)."""

    __slots__ = ("shape", "data")

    def __init__(self, shape: tuple[int, int, int], data):
        a, b, c = shape
        if a < 1 or b < 1 or c < 1:
            raise ValueError(f"invalid shape {shape}")
        self.shape = (a, b, c)
        self.data = tuple(
            tuple(tuple(mpq(data[i][j][k]) for k in range(c))
                  for j in range(b))
            for i in range(a))

    # -- constructors

    @classmethod
    def zeros(cls, shape: tuple[int, int, int]) -> "Tensor":
        a, b, c = shape
        return cls(shape, [[[0] * c for _ in range(b)] for _ in range(a)])

    @classmethod
    def from_entries(cls, shape: tuple[int, int, int],
                     entries: dict) -> "Tensor":
        """Build from {(i, j, k): value} with 1-based index triples."""
        a, b, c = shape
        data = [[[mpq(0)] * c for _ in range(b)] for _ in range(a)]
        for (i, j, k), v in entries.items():
            if not (1 <= i <= a and 1 <= j <= b and 1 <= k <= c):
                raise ValueError(f"index {(i, j, k)} outside shape {shape}")
            data[i - 1][j - 1][k - 1] = mpq(v)
        return cls(shape, data)

    # -- queries

    def __getitem__(self, idx: tuple[int, int, int]):
        """Entry at a 0-based index triple."""
        i, j, k = idx
        return self.data[i][j][k]

    def is_zero(self) -> bool:
        return all(v == 0 for plane in self.data for row in plane for v in row)

    def support(self) -> tuple[tuple[int, int, int], ...]:
        """Sorted 1-based index triples of the nonzero entries."""
        a, b, c = self.shape
        return tuple((i + 1, j + 1, k + 1)
                     for i in range(a) for j in range(b) for k in range(c)
                     if self.data[i][j][k] != 0)

    def norm_sq(self):
        return sum(v * v for plane in self.data for row in plane for v in row)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    __hash__ = None

    def __repr__(self) -> str:
        terms = [f"{v}*e{i}{j}{k}" if v != 1 else f"e{i}{j}{k}"
                 for (i, j, k), v in
                 ((w, self.data[w[0] - 1][w[1] - 1][w[2] - 1])
                  for w in self.support())]
        body = " + ".join(terms) if terms else "0"
        return f"Tensor{self.shape}: {body}"

    # -- arithmetic and group action

    def add(self, other: "Tensor") -> "Tensor":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        a, b, c = self.shape
        return Tensor(self.shape,
                      [[[self.data[i][j][k] + other.data[i][j][k]
                         for k in range(c)] for j in range(b)]
                       for i in range(a)])

    def scale(self, s) -> "Tensor":
        s = mpq(s)
        a, b, c = self.shape
        return Tensor(self.shape,
                      [[[s * self.data[i][j][k] for k in range(c)]
                        for j in range(b)] for i in range(a)])

    def apply_triple(self, A, B, C) -> "Tensor":
        """(A tensor B tensor C) applied to T, computed exactly.

        The matrices are square, sized a, b, c, given as nested sequences of
        rationals; new entry (i,j,k) = sum A[i][p] B[j][q] C[k][r] T[p][q][r].
        """
        a, b, c = self.shape
        if len(A) != a or len(B) != b or len(C) != c:
            raise ValueError("matrix sizes do not match tensor shape")
        # contract one factor at a time to keep this O(n^4) instead of O(n^6)
        t1 = [[[sum(mpq(A[i][p]) * self.data[p][q][r] for p in range(a))
                for r in range(c)] for q in range(b)] for i in range(a)]
        t2 = [[[sum(mpq(B[j][q]) * t1[i][q][r] for q in range(b))
                for r in range(c)] for j in range(b)] for i in range(a)]
        t3 = [[[sum(mpq(C[k][r]) * t2[i][j][r] for r in range(c))
                for k in range(c)] for j in range(b)] for i in range(a)]
        return Tensor(self.shape, t3)

    # -- marginals and spectra

    def marginal(self, axis: int):
        """Exact unnormalized Gram matrix of the flattening along an axis.

        axis 1 gives the a x a matrix with entry (i,i') equal to
        sum_{j,k} T_{ijk} T_{i'jk}; axes 2 and 3 analogous.
        """
        a, b, c = self.shape
        if axis == 1:
            n = a
            fibers = [[self.data[i][j][k] for j in range(b) for k in range(c)]
                      for i in range(a)]
        elif axis == 2:
            n = b
            fibers = [[self.data[i][j][k] for i in range(a) for k in range(c)]
                      for j in range(b)]
        elif axis == 3:
            n = c
            fibers = [[self.data[i][j][k] for i in range(a) for j in range(b)]
                      for k in range(c)]
        else:
            raise ValueError("axis must be 1, 2 or 3")
        return [[sum(x * y for x, y in zip(fibers[i], fibers[j]))
                 for j in range(n)] for i in range(n)]

    def moment_map(self):
        """Trace-normalized marginals as float arrays (rho_1, rho_2, rho_3)."""
        ns = self.norm_sq()
        if ns == 0:
            raise ValueError("moment map of the zero tensor")
        out = []
        for axis in (1, 2, 3):
            g = self.marginal(axis)
            out.append(np.array([[float(x / ns) for x in row] for row in g]))
        return tuple(out)

    def spectrum(self):
        """Sorted (non-increasing) marginal eigenvalue triples, floats."""
        return tuple(np.sort(np.linalg.eigvalsh(rho))[::-1]
                     for rho in self.moment_map())

    # -- maxranks

    def maxrank(self, axis: int, seed: int = 0, trials: int = 8,
                bound: int = 1000) -> int:
        """Largest rank of a random linear combination of slices.

        Generic combinations attain the maximum, so a handful of random
        integer trials suffices; rank is computed exactly over Q.
        """
        from momentpoly.fields import gauss_rank

        a, b, c = self.shape
        rng = random.Random(seed)
        n = (a, b, c)[axis - 1]
        best = 0
        for _ in range(trials):
            beta = [rng.randint(-bound, bound) for _ in range(n)]
            m = self._slice_combo(axis, beta)
            best = max(best, gauss_rank(m))
        return best

    def _slice_combo(self, axis: int, beta: Sequence):
        a, b, c = self.shape
        if axis == 1:
            return [[sum(mpq(beta[i]) * self.data[i][j][k] for i in range(a))
                     for k in range(c)] for j in range(b)]
        if axis == 2:
            return [[sum(mpq(beta[j]) * self.data[i][j][k] for j in range(b))
                     for k in range(c)] for i in range(a)]
        if axis == 3:
            return [[sum(mpq(beta[k]) * self.data[i][j][k] for k in range(c))
                     for j in range(b)] for i in range(a)]
        raise ValueError("axis must be 1, 2 or 3")

    # -- randomization

    def randomize(self, mode: str = "upper", bound: int = 1000,
                  seed: int = 0):
        """Apply a random integer triple; returns ((A, B, C), new tensor).

        In "upper" mode the triples are upper triangular with every entry on
        and above the diagonal uniform in {1, ..., bound} (so they are
        invertible); "general" mode fills all entries.
        """
        rng = random.Random(seed)
        triple = random_triple(self.shape, mode, bound, rng)
        return triple, self.apply_triple(*triple)

    # -- reshaping

    def pad_zeros(self, newshape: tuple[int, int, int]) -> "Tensor":
        a, b, c = self.shape
        na, nb, nc = newshape
        if na < a or nb < b or nc < c:
            raise ValueError("padding cannot shrink the shape")
        data = [[[self.data[i][j][k] if i < a and j < b and k < c else mpq(0)
                  for k in range(nc)] for j in range(nb)] for i in range(na)]
        return Tensor(newshape, data)

    def direct_sum(self, other: "Tensor") -> "Tensor":
        a1, b1, c1 = self.shape
        a2, b2, c2 = other.shape
        shape = (a1 + a2, b1 + b2, c1 + c2)
        data = [[[mpq(0)] * shape[2] for _ in range(shape[1])]
                for _ in range(shape[0])]
        for i in range(a1):
            for j in range(b1):
                for k in range(c1):
                    data[i][j][k] = self.data[i][j][k]
        for i in range(a2):
            for j in range(b2):
                for k in range(c2):
                    data[a1 + i][b1 + j][c1 + k] = other.data[i][j][k]
        return Tensor(shape, data)

    def cyclic_permute(self) -> "Tensor":
        """Send sum of e_{ijk} to sum of e_{kij}; shape (a,b,c) -> (c,a,b)."""
        a, b, c = self.shape
        data = [[[self.data[i][j][k] for j in range(b)] for i in range(a)]
                for k in range(c)]
        return Tensor((c, a, b), data)

    def permute_coords(self, axis: int, perm: Sequence[int]) -> "Tensor":
        """Relabel coordinates along one axis; perm[new] = old (0-based)."""
        a, b, c = self.shape
        if axis == 1:
            data = [self.data[perm[i]] for i in range(a)]
        elif axis == 2:
            data = [[self.data[i][perm[j]] for j in range(b)]
                    for i in range(a)]
        elif axis == 3:
            data = [[[self.data[i][j][perm[k]] for k in range(c)]
                     for j in range(b)] for i in range(a)]
        else:
            raise ValueError("axis must be 1, 2 or 3")
        return Tensor(self.shape, data)

    def support_minimize(self) -> "Tensor":
        """Per-factor relabeling minimizing the total corner distance.

        The objective is the sum of i+j+k over the support.  Exhaustive over
        all per-factor permutations, which is fine for dimensions up to 4.
        Ties keep the identity relabeling (and otherwise prefer the
        lexicographically smallest support) so the result is deterministic.
        """
        import itertools

        a, b, c = self.shape
        if max(self.shape) > 4:
            raise ValueError("exhaustive search is limited to dimensions <= 4")
        supp = self.support()
        best = None
        best_key = None
        for pa in itertools.permutations(range(a)):
            inv_a = _invert(pa)
            for pb in itertools.permutations(range(b)):
                inv_b = _invert(pb)
                for pc in itertools.permutations(range(c)):
                    inv_c = _invert(pc)
                    new_supp = sorted(
                        (inv_a[i - 1] + 1, inv_b[j - 1] + 1, inv_c[k - 1] + 1)
                        for (i, j, k) in supp)
                    cost = sum(i + j + k for (i, j, k) in new_supp)
                    identity = (pa == tuple(range(a)) and pb == tuple(range(b))
                                and pc == tuple(range(c)))
                    key = (cost, not identity, new_supp)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = (pa, pb, pc)
        pa, pb, pc = best
        out = self.permute_coords(1, pa).permute_coords(2, pb)
        return out.permute_coords(3, pc)

    # -- serialization

    def to_json_obj(self) -> dict:
        entries = []
        for (i, j, k) in self.support():
            v = self.data[i - 1][j - 1][k - 1]
            entries.append({"idx": [i, j, k],
                            "num": int(v.numerator),
                            "den": int(v.denominator)})
        return {"shape": list(self.shape), "entries": entries}

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True,
                          separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Tensor":
        shape = tuple(obj["shape"])
        entries = {}
        for e in obj["entries"]:
            i, j, k = e["idx"]
            entries[(i, j, k)] = mpq(e["num"], e.get("den", 1))
        return cls.from_entries(shape, entries)

    @classmethod
    def loads(cls, s: str) -> "Tensor":
        return cls.from_json_obj(json.loads(s))


def _invert(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for new, old in enumerate(perm):
        inv[old] = new
    return inv


def random_triple(shape: tuple[int, int, int], mode: str, bound: int,
                  rng: random.Random):
    """Random integer matrix triple; "upper" mode is invertible by design."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    out = []
    for n in shape:
        m = [[0] * n for _ in range(n)]
        for r in range(n):
            for s in range(n):
                if mode == "upper":
                    if s >= r:
                        m[r][s] = rng.randint(1, bound)
                elif mode == "general":
                    m[r][s] = rng.randint(1, bound)
                else:
                    raise ValueError(f"unknown mode {mode!r}")
        out.append(m)
    return tuple(out)


class SqrtTensor:
    """A tensor whose entries are (sign) * sqrt(rational).

    Stores signs and squared magnitudes exactly, but only exposes the
    floating-point marginal path; exact arithmetic paths never see these.
    Used to verify explicit moment-map witnesses with square-root weights.
    """

    def __init__(self, shape: tuple[int, int, int], entries: dict):
        """entries: {(i,j,k) 1-based: squared magnitude with sign}.

        The stored rational is sign(v) * |v| where the actual tensor entry is
        sign(v) * sqrt(|v|).
        """
        self.shape = shape
        self.entries = {idx: mpq(v) for idx, v in entries.items() if v != 0}

    def norm_sq(self):
        return sum(abs(v) for v in self.entries.values())

    def moment_map(self):
        a, b, c = self.shape
        arr = np.zeros((a, b, c))
        for (i, j, k), v in self.entries.items():
            arr[i - 1][j - 1][k - 1] = math.copysign(
                math.sqrt(abs(float(v))), float(v))
        ns = float(self.norm_sq())
        rho1 = np.einsum("ijk,ljk->il", arr, arr) / ns
        rho2 = np.einsum("ijk,ilk->jl", arr, arr) / ns
        rho3 = np.einsum("ijk,ijl->kl", arr, arr) / ns
        return rho1, rho2, rho3


# ---------------------------------------------------------------------------
# Named corpus


_ALIASES = {
    "u1": "unit1", "u2": "unit2", "u3": "unit3", "u4": "unit4",
    "D+e111": "D_plus_e111", "D+W": "D_plus_W",
}


def _corpus_dir():
    return resources.files("momentpoly").joinpath("data/corpus")


def corpus_names() -> list[str]:
    return sorted(p.name[:-5] for p in _corpus_dir().iterdir()
                  if p.name.endswith(".json"))


def named_tensor(name: str) -> Tensor:
    """A tensor from the bundled corpus (T1..T25, unit_r, M2, D, W, ...)."""
    fname = _ALIASES.get(name, name)
    path = _corpus_dir() / f"{fname}.json"
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise KeyError(f"unknown tensor name {name!r}; "
                       f"available: {', '.join(corpus_names())}") from None
    return Tensor.loads(text)
