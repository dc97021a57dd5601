"""Tests for the candidate inequality enumeration.

The heavy lifting is validated two independent ways: published stage counts
for the four shapes of interest, and exhaustive brute force over *all*
full-rank weight subsets on the smaller shapes, which proves the standard
form plus symmetry restoration loses no kernel vector and invents none.
"""

import itertools
import json
import math
import os
import struct
from fractions import Fraction

import pytest
from gmpy2 import mpq

from momentpoly.enumeration import (
    CandidateSet,
    IntermediatePolytopeFilter,
    Redundancy,
    candidates_cache_path,
    embed_weight,
    enumerate_candidates,
    filter_by_points,
    filter_known_valid,
    is_outer_standard,
    is_standard,
    load_or_enumerate,
    maxrank_points,
    ordered_weights,
    sort_by_max_abs,
    trivial_vectors,
    weight_cost,
)
from momentpoly.fields import integer_kernel_vector, rank_int

HEAVY = os.environ.get("MOMENTPOLY_HEAVY") == "1"

# Worked example: six weights of a 3x3x3 tensor whose extended matrix has
# the kernel line spanned by (-11,-2,16 | 10,1,-8 | 1,10,-8).
SIX_WEIGHTS = [(1, 1, 1), (1, 2, 2), (2, 1, 3), (2, 2, 1), (2, 3, 2),
               (3, 3, 3)]
SIX_KERNEL = (-11, -2, 16, 10, 1, -8, 1, 10, -8)


def rows_of(shape, costs):
    return [embed_weight(shape, w) for w in costs]


def neg(h):
    return tuple(-x for x in h)


def dot(p, h):
    return sum(x * y for x, y in zip(p, h))


def highest_weight(shape):
    return embed_weight(shape, (1, 1, 1))


def transposition_images(shape, h):
    """All images of h under one swap of two coordinates within a factor,
    plus the factor-swap images when the shape is cubic."""
    a, b, c = shape
    out = []
    for dim, off in ((a, 0), (b, a), (c, a + b)):
        for i, j in itertools.combinations(range(dim), 2):
            g = list(h)
            g[off + i], g[off + j] = g[off + j], g[off + i]
            out.append(tuple(g))
    if a == b == c:
        blocks = [h[0:a], h[a:2 * a], h[2 * a:]]
        for f1, f2 in ((0, 1), (0, 2), (1, 2)):
            per = list(blocks)
            per[f1], per[f2] = per[f2], per[f1]
            out.append(tuple(per[0] + per[1] + per[2]))
    return out


def symmetric_closure(shape, vectors):
    """Fixpoint of a vector set under negation, per-factor coordinate swaps
    and (for cubic shapes) factor swaps."""
    closure = set(vectors) | {neg(h) for h in vectors}
    frontier = set(closure)
    while frontier:
        fresh = set()
        for h in frontier:
            for g in transposition_images(shape, h):
                if g not in closure:
                    fresh.add(g)
        closure |= fresh
        frontier = fresh
    return closure


def brute_force_kernels(shape):
    """Signed kernel vectors of *every* full-rank d-row weight matrix,
    with no normal form and no symmetry shortcuts."""
    a, b, c = shape
    d = a + b + c - 3
    weights = ordered_weights(shape)
    embeds = [embed_weight(shape, w) for w in weights]
    q1, q2 = trivial_vectors(shape)
    found = set()
    for sub in itertools.combinations(range(len(weights)), d):
        rows = [embeds[t] for t in sub]
        if rank_int(rows) != d:
            continue
        h = tuple(integer_kernel_vector(rows + [list(q1), list(q2)]))
        found.add(h)
        found.add(neg(h))
    return found


class TestWeightOrder:
    def test_first_weight_is_highest(self):
        assert ordered_weights((3, 3, 3))[0] == (1, 1, 1)

    def test_count(self):
        assert len(ordered_weights((2, 3, 4))) == 24

    def test_ascending_lex(self):
        ws = ordered_weights((2, 2, 3))
        assert ws == sorted(ws)

    @pytest.mark.parametrize("shape", [(2, 2, 2), (2, 3, 4), (1, 1, 2)])
    def test_embed_cost_round_trip(self, shape):
        for w in ordered_weights(shape):
            row = embed_weight(shape, w)
            assert sum(row) == 3
            assert weight_cost(shape, row) == w

    def test_embedding_reverses_order(self):
        ws = ordered_weights((2, 2, 2))
        rows = [embed_weight((2, 2, 2), w) for w in ws]
        assert rows == sorted(rows, reverse=True)

    @pytest.mark.parametrize("shape", [(2, 2, 2), (3, 3, 3), (2, 3, 4)])
    def test_trivial_vectors_annihilate_weights(self, shape):
        q1, q2 = trivial_vectors(shape)
        for w in ordered_weights(shape):
            row = embed_weight(shape, w)
            assert dot(row, q1) == 0
            assert dot(row, q2) == 0


class TestStandard:
    def test_six_row_example(self):
        costs = [(1, 1, 1), (2, 2, 2), (2, 2, 3), (3, 3, 1), (4, 1, 3),
                 (4, 2, 1)]
        assert is_standard((4, 3, 3), rows_of((4, 3, 3), costs))

    def test_unsorted_rows_rejected(self):
        costs = [(1, 1, 1), (2, 1, 1), (1, 2, 1)]
        assert not is_standard((2, 3, 2), rows_of((2, 3, 2), costs))

    def test_index_jump_rejected(self):
        # factor 2 jumps from running max 1 straight to 3
        costs = [(1, 1, 1), (1, 3, 1)]
        assert not is_standard((2, 3, 2), rows_of((2, 3, 2), costs))

    def test_first_row_must_be_highest_weight(self):
        assert not is_standard((2, 3, 2), rows_of((2, 3, 2), [(1, 2, 1)]))
        assert is_standard((2, 3, 2), rows_of((2, 3, 2), [(1, 1, 1)]))

    def test_empty_prefix(self):
        assert is_standard((2, 2, 2), [])

    def test_sorted_with_unit_jumps(self):
        costs = [(1, 1, 1), (1, 2, 1), (2, 3, 2)]
        assert is_standard((2, 3, 2), rows_of((2, 3, 2), costs))


class TestOuterStandard:
    def test_needs_cubic_shape(self):
        with pytest.raises(ValueError):
            is_outer_standard((2, 3, 3), rows_of((2, 3, 3), [(1, 1, 1)]))

    def test_six_weight_example(self):
        assert is_outer_standard((3, 3, 3), rows_of((3, 3, 3), SIX_WEIGHTS))

    def test_decreasing_first_column_sums(self):
        # index 1 used twice in factor 1, once in the others
        assert is_outer_standard((3, 3, 3),
                                 rows_of((3, 3, 3), [(1, 1, 1), (1, 2, 2)]))
        # the mirror image loads factor 3 instead and is rejected
        assert not is_outer_standard((3, 3, 3),
                                     rows_of((3, 3, 3), [(1, 1, 1),
                                                         (2, 2, 1)]))

    def test_implies_standard(self):
        costs = [(1, 1, 1), (2, 1, 1), (1, 2, 1)]
        assert not is_outer_standard((2, 2, 2), rows_of((2, 2, 2), costs))


# matrices and final counts reproduce the published table for these shapes;
# the intermediate value is this implementation's deduplicated signed kernel
# count, whose completeness TestCompleteness proves by exhaustion.
COUNTS = [
    ((2, 2, 2), 8, 10, 29),
    ((2, 2, 3), 89, 38, 81),
    ((2, 3, 3), 798, 122, 345),
    ((3, 3, 3), 5499, 418, 2845),
]


class TestCounts:
    @pytest.mark.parametrize("shape,n_mat,n_pre,n_final", COUNTS)
    def test_stage_counts(self, shape, n_mat, n_pre, n_final):
        cand = enumerate_candidates(shape)
        assert cand.n_matrices == n_mat
        assert cand.n_presym == n_pre
        assert len(cand) == n_final

    def test_final_is_sorted_and_deterministic(self):
        one = enumerate_candidates((2, 2, 3))
        two = enumerate_candidates((2, 2, 3))
        assert one.inequalities == two.inequalities
        assert list(one.inequalities) == sorted(one.inequalities)

    def test_outer_reduction_changes_nothing_final(self):
        plain = enumerate_candidates((2, 2, 2), use_outer=False)
        outer = enumerate_candidates((2, 2, 2), use_outer=True)
        assert plain.n_matrices == 21
        assert outer.n_matrices == 8
        assert set(plain.inequalities) == set(outer.inequalities)

    def test_outer_requires_cubic(self):
        with pytest.raises(ValueError):
            enumerate_candidates((2, 2, 3), use_outer=True)

    def test_degenerate_shapes(self):
        # a 1x1x1 tensor has a single weight and a point polytope
        cand = enumerate_candidates((1, 1, 1))
        assert cand.inequalities == ((1, 1, 1),)
        # one growth step: only the highest weight row is standard
        assert enumerate_candidates((1, 1, 2)).n_matrices == 1


class TestKernelExample:
    def test_six_weight_kernel(self):
        rows = rows_of((3, 3, 3), SIX_WEIGHTS)
        q1, q2 = trivial_vectors((3, 3, 3))
        h = tuple(integer_kernel_vector(rows + [list(q1), list(q2)]))
        assert h in (SIX_KERNEL, neg(SIX_KERNEL))

    def test_kernel_appears_in_final_set(self):
        final = set(enumerate_candidates((3, 3, 3)).inequalities)
        # the highest weight evaluates to zero on it, so both signs survive
        assert SIX_KERNEL in final
        assert neg(SIX_KERNEL) in final

    def test_max_entry_bound(self):
        assert enumerate_candidates((3, 3, 3)).max_abs() == 16
        assert enumerate_candidates((2, 2, 2)).max_abs() == 4


@pytest.fixture(scope="module", params=[s for s, *_ in COUNTS],
                ids=lambda s: "x".join(map(str, s)))
def candidates(request):
    return enumerate_candidates(request.param)


class TestFinalProperties:
    def test_orthogonal_to_trivial_vectors(self, candidates):
        q1, q2 = trivial_vectors(candidates.shape)
        for h in candidates.inequalities:
            assert dot(h, q1) == 0
            assert dot(h, q2) == 0

    def test_entries_coprime(self, candidates):
        for h in candidates.inequalities:
            assert math.gcd(*(abs(x) for x in h)) == 1

    def test_highest_weight_kept(self, candidates):
        hw = highest_weight(candidates.shape)
        for h in candidates.inequalities:
            assert dot(hw, h) >= 0

    def test_tight_weights_have_boundary_rank(self, candidates):
        a, b, c = candidates.shape
        d = a + b + c - 3
        embeds = [embed_weight(candidates.shape, w)
                  for w in ordered_weights(candidates.shape)]
        for h in candidates.inequalities:
            tight = [row for row in embeds if dot(row, h) == 0]
            assert len(tight) >= d
            assert rank_int(tight) == d

    def test_closed_under_symmetries_modulo_filter(self, candidates):
        """The set before the highest-weight cut is symmetric, so any image
        of a kept vector that the filter would keep must itself be kept."""
        final = set(candidates.inequalities)
        hw = highest_weight(candidates.shape)
        for h in final:
            if dot(hw, h) == 0:
                assert neg(h) in final
            for g in transposition_images(candidates.shape, h):
                if dot(hw, g) >= 0:
                    assert g in final


class TestCompleteness:
    """The restored candidate set must coincide with the kernels of *all*
    full-rank weight matrices, enumerated with no shortcuts."""

    @pytest.mark.parametrize("shape", [(1, 1, 2), (1, 2, 2), (2, 2, 2),
                                       (2, 2, 3), (2, 3, 3)],
                             ids=lambda s: "x".join(map(str, s)))
    def test_closure_equals_brute_force(self, shape):
        final = enumerate_candidates(shape).inequalities
        closure = symmetric_closure(shape, final)
        assert closure == brute_force_kernels(shape)

    @pytest.mark.skipif(not HEAVY, reason="set MOMENTPOLY_HEAVY=1 to run")
    def test_closure_equals_brute_force_cubic(self):
        final = enumerate_candidates((3, 3, 3)).inequalities
        closure = symmetric_closure((3, 3, 3), final)
        assert closure == brute_force_kernels((3, 3, 3))

    def test_every_facet_normal_is_a_candidate(self):
        """Exhaustive over all supports S of a 2x2x2 tensor with a
        full-dimensional hull: each facet of conv(S) has its normal in the
        symmetric closure of the enumerated set."""
        shape = (2, 2, 2)
        closure = symmetric_closure(
            shape, enumerate_candidates(shape).inequalities)
        weights = ordered_weights(shape)
        embeds = [embed_weight(shape, w) for w in weights]
        q1, q2 = trivial_vectors(shape)
        d = 3
        checked = 0
        for bits in range(1, 1 << len(weights)):
            support = [embeds[t] for t in range(len(weights))
                       if bits >> t & 1]
            base = support[0]
            diffs = [[x - y for x, y in zip(row, base)]
                     for row in support[1:]]
            if rank_int(diffs) < d:
                continue
            for triple in itertools.combinations(support, d):
                if rank_int(list(triple)) != d:
                    continue
                h = integer_kernel_vector(
                    [list(r) for r in triple] + [list(q1), list(q2)])
                values = [dot(row, h) for row in support]
                if all(v >= 0 for v in values):
                    pass
                elif all(v <= 0 for v in values):
                    h = [-x for x in h]
                    values = [-v for v in values]
                else:
                    continue  # the triple does not support a face
                tight = [row for row, v in zip(support, values) if v == 0]
                if rank_int(tight) == d:  # a facet, not a lower face
                    assert tuple(h) in closure
                    checked += 1
        assert checked > 100


@pytest.fixture(scope="module")
def final222():
    return enumerate_candidates((2, 2, 2)).inequalities


class TestFilters:
    def test_no_points_keeps_everything(self, final222):
        assert filter_by_points(final222, []) == final222

    def test_highest_weight_point_keeps_everything(self, final222):
        hw = highest_weight((2, 2, 2))
        assert filter_by_points(final222, [hw]) == final222

    def test_uniform_point_keeps_nonnegative_sums(self, final222):
        u = [mpq(1, 2)] * 6
        kept = filter_by_points(final222, [u])
        assert kept == tuple(h for h in final222 if sum(h) >= 0)
        assert 0 < len(kept) < len(final222)

    def test_known_valid_on_a_point_drops_everything(self, final222):
        hw = highest_weight((2, 2, 2))
        assert filter_known_valid(final222, [hw]) == ()

    def test_known_valid_accepts_vertex_attribute(self, final222):
        class Poly:
            vertices = [highest_weight((2, 2, 2))]

        assert filter_known_valid(final222, Poly()) == ()

    def test_maxrank_points_values(self):
        pts = maxrank_points((2, 2, 2), (2, 1, 1))
        assert pts[0] == (mpq(1), mpq(0)) * 3
        assert pts[1] == (mpq(1), mpq(0), mpq(1, 2), mpq(1, 2),
                          mpq(1, 2), mpq(1, 2))
        assert len(pts) == 4

    def test_maxrank_points_reject_overlong_rank(self):
        with pytest.raises(ValueError):
            maxrank_points((2, 2, 2), (3, 2, 2))

    def test_sort_by_max_abs(self, final222):
        ordered = sort_by_max_abs(final222)
        norms = [max(abs(x) for x in h) for h in ordered]
        assert norms == sorted(norms)
        assert norms[0] == 1
        assert set(ordered) == set(final222)


def load_kronecker_vertices(shape):
    from importlib import resources
    name = "data/kronecker/{}x{}x{}.json".format(*shape)
    payload = json.loads(
        resources.files("momentpoly").joinpath(name).read_text())
    assert tuple(payload["shape"]) == shape
    return [tuple(Fraction(x["num"], x["den"]) for x in v)
            for v in payload["vertices"]]


@pytest.fixture(scope="module")
def not_generic():
    verts = load_kronecker_vertices((3, 3, 3))
    assert len(verts) == 33
    final = enumerate_candidates((3, 3, 3)).inequalities
    return filter_known_valid(final, verts)


class TestCandidateFunnel:
    """Counts surviving the generic-polytope and maxrank filters, frozen
    for the shapes the attainability pipeline runs on."""

    def test_generic_filter_3x3x3(self, not_generic):
        assert len(not_generic) == 2187

    def test_maxrank_filter_full_ranks(self, not_generic):
        pts = maxrank_points((3, 3, 3), (3, 3, 3))
        assert len(filter_by_points(not_generic, pts)) == 355

    def test_maxrank_filter_deficient_ranks(self, not_generic):
        pts = maxrank_points((3, 3, 3), (3, 2, 2))
        assert len(filter_by_points(not_generic, pts)) == 736

    def test_generic_filter_2x2x2(self):
        verts = load_kronecker_vertices((2, 2, 2))
        assert len(verts) == 5
        final = enumerate_candidates((2, 2, 2)).inequalities
        assert len(filter_known_valid(final, verts)) == 13

    def test_kronecker_vertices_normalized(self):
        for shape in [(2, 2, 2), (3, 3, 3)]:
            a, b, c = shape
            for v in load_kronecker_vertices(shape):
                blocks = [v[0:a], v[a:a + b], v[a + b:]]
                for block in blocks:
                    assert sum(block) == 1
                    assert list(block) == sorted(block, reverse=True)


class TestCache:
    def test_round_trip(self, tmp_path):
        cand = enumerate_candidates((2, 2, 3))
        path = tmp_path / "c.bin"
        cand.save(path)
        assert CandidateSet.load(path) == cand

    def test_cache_path_layout(self):
        path = candidates_cache_path("cache", (2, 3, 3), False)
        assert path.as_posix() == "cache/2x3x3/candidates.bin"
        outer = candidates_cache_path("cache", (3, 3, 3), True)
        assert outer.as_posix() == "cache/3x3x3/candidates.outer.bin"

    def test_load_or_enumerate_prefers_cache(self, tmp_path):
        first = load_or_enumerate((2, 2, 2), cache_dir=tmp_path)
        assert first == enumerate_candidates((2, 2, 2))
        # doctor the cached file; a second call must read it, not recompute
        doctored = CandidateSet((2, 2, 2), True, 1, 2, ((1,) * 6,))
        doctored.save(candidates_cache_path(tmp_path, (2, 2, 2), True))
        assert load_or_enumerate((2, 2, 2), cache_dir=tmp_path) == doctored

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "bogus.bin"
        path.write_bytes(struct.pack("<8sBBBBqqq", b"ZZZZZZZZ", 2, 2, 2, 1,
                                     0, 0, 0))
        with pytest.raises(ValueError):
            CandidateSet.load(path)

    def test_with_inequalities_tracks_filters(self):
        cand = enumerate_candidates((2, 2, 2))
        cut = cand.with_inequalities(cand.inequalities[:5], "generic")
        assert len(cut) == 5
        assert cut.filters == ("highest-weight", "generic")
        assert cut.n_matrices == cand.n_matrices


class TestIntermediateFilter:
    def test_classify_against_current_vertices(self):
        fil = IntermediatePolytopeFilter(
            [], lambda valid: [(1, 0), (0, 1)], batch_size=8)
        assert fil.classify((1, 1)) is Redundancy.REDUNDANT
        assert fil.classify((1, -1)) is Redundancy.MUST_CHECK

    def test_vertices_refresh_per_batch(self):
        calls = []

        def vertex_fn(valid):
            calls.append(len(valid))
            return [(1, 0)]

        fil = IntermediatePolytopeFilter([], vertex_fn, batch_size=2)
        assert calls == [0]
        fil.accept((1, 1))
        assert calls == [0]  # below the batch threshold
        fil.accept((1, 2))
        assert calls == [0, 2]
        fil.accept((1, 3))
        fil.accept((1, 4))
        assert calls == [0, 2, 4]
        assert fil.valid == ((1, 1), (1, 2), (1, 3), (1, 4))

    def test_batch_size_must_be_positive(self):
        with pytest.raises(ValueError):
            IntermediatePolytopeFilter([], lambda valid: [], batch_size=0)
