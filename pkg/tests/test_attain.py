"""Attainability deciders: system construction and Groebner verdicts.

The unit tensor fixture pins the polynomial system construction entry by
entry, the T4 fixture pins the rational and symbolic Groebner bases the
hint machinery is built around, and the (2, 2, 2) sweeps freeze complete
decision vectors that were cross-validated three independent ways
(numerical multistart search, prime-field runs, and specialization of the
symbolic verdicts at random points).
"""

import itertools

import numpy as np
import pytest
from gmpy2 import mpq

from momentpoly.attain import (
    Decision,
    SymbolicDecision,
    attainable_fq,
    attainable_q,
    attainable_symbolic,
    build_polysystem,
    build_polysystem_fq,
    build_polysystem_symbolic,
    excluded_weights,
    suggest_hints,
    x_variable_count,
    x_variable_names,
    z_variable_count,
    z_variable_names,
)
from momentpoly.enumeration import enumerate_candidates, ordered_weights
from momentpoly.fields import QQ
from momentpoly.polynomials import Budget, BudgetExceeded, Poly, reduced_groebner
from momentpoly.tensors import Tensor, named_tensor

SIX_KERNEL = (-11, -2, 16, 10, 1, -8, 1, 10, -8)
T4_H = (0, -1, 1, 1, 0, -1, 1, 0, 0)

# decisions for the 29 final (2,2,2) candidates, seed-0 randomization,
# 'A' attainable / 'N' not; W flips exactly one entry (index 14)
UNIT2_DECISIONS = "NANNNNAAANNANNNNNAAAAAANAAAAA"
W_DECISIONS = "NANNNNAAANNANNANNAAAAAANAAAAA"


def unit_tensor(n):
    return Tensor.from_entries(
        (n, n, n), {(i, i, i): 1 for i in range(1, n + 1)})


def w_tensor():
    return Tensor.from_entries(
        (2, 2, 2), {(1, 1, 2): 1, (1, 2, 1): 1, (2, 1, 1): 1})


@pytest.fixture(scope="module")
def finals222():
    return enumerate_candidates((2, 2, 2)).inequalities


@pytest.fixture(scope="module")
def u2r():
    return unit_tensor(2).randomize(seed=0)[1]


@pytest.fixture(scope="module")
def wr():
    return w_tensor().randomize(seed=0)[1]


@pytest.fixture(scope="module")
def decisions222(finals222, u2r, wr):
    return {
        "unit2": [attainable_q(u2r, h) for h in finals222],
        "W": [attainable_q(wr, h) for h in finals222],
    }


def decisions_string(ds):
    return "".join("A" if d == Decision.ATTAINABLE else "N" for d in ds)


def multistart_residual(system, n_starts, seed, iters=60):
    """Best 2-norm residual of the system over batched damped Gauss-Newton
    runs from uniform random starts (the least-squares iteration itself)."""
    n = len(system.kept_vars)
    if n == 0:
        vals = [float(p.terms[0][1]) if p.terms else 0.0
                for p in system.polys]
        return float(np.sqrt(sum(v * v for v in vals)))
    exps = [np.array([e for e, _ in p.terms], dtype=float)
            for p in system.polys]
    coefs = [np.array([float(c) for _, c in p.terms])
             for p in system.polys]

    def fval(x):
        out = np.empty((x.shape[0], len(exps)))
        for i, (E, C) in enumerate(zip(exps, coefs)):
            out[:, i] = (C * np.prod(x[:, None, :] ** E[None, :, :],
                                     axis=2)).sum(axis=1)
        return out

    def jval(x):
        J = np.zeros((x.shape[0], len(exps), n))
        for i, (E, C) in enumerate(zip(exps, coefs)):
            for v in range(n):
                ev = E[:, v]
                mask = ev > 0
                if not mask.any():
                    continue
                Ed = E[mask].copy()
                Ed[:, v] -= 1
                J[:, i, v] = (C[mask] * ev[mask] *
                              np.prod(x[:, None, :] ** Ed[None, :, :],
                                      axis=2)).sum(axis=1)
        return J

    rng = np.random.default_rng(seed)
    x = rng.uniform(-3.0, 3.0, (n_starts, n))
    lam = np.full(n_starts, 1e-3)
    f = fval(x)
    cost = (f ** 2).sum(axis=1)
    eye = np.eye(n)[None]
    for _ in range(iters):
        J = jval(x)
        JtJ = np.einsum("sik,sil->skl", J, J)
        g = np.einsum("sik,si->sk", J, f)
        try:
            dx = np.linalg.solve(JtJ + lam[:, None, None] * eye,
                                 g[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        xn = x - dx
        fn = fval(xn)
        cn = (fn ** 2).sum(axis=1)
        better = cn < cost
        x[better] = xn[better]
        f[better] = fn[better]
        cost[better] = cn[better]
        lam = np.clip(np.where(better, lam * 0.5, lam * 4.0), 1e-12, 1e6)
    return float(np.sqrt(cost.min()))


class TestVariableRosters:
    def test_x_counts(self):
        assert x_variable_count((3, 3, 3)) == 9
        assert x_variable_count((2, 2, 3)) == 5
        assert x_variable_count((2, 2, 2)) == 3
        assert x_variable_count((1, 1, 2)) == 1

    def test_z_counts(self):
        assert z_variable_count((3, 3, 3)) == 18
        assert z_variable_count((2, 2, 2)) == 9

    def test_names(self):
        assert x_variable_names((2, 2, 2)) == ["x1", "x2", "x3"]
        assert z_variable_names((2, 2, 2))[:4] == ["z1", "z2", "z3", "z4"]
        assert len(z_variable_names((3, 3, 3))) == 18


class TestExcludedWeights:
    def test_six_kernel_exclusions(self):
        got = excluded_weights((3, 3, 3), SIX_KERNEL)
        assert set(got) == {
            (1, 1, 3), (1, 2, 1), (1, 2, 3), (1, 3, 1), (1, 3, 2),
            (1, 3, 3), (2, 2, 3), (2, 3, 1), (2, 3, 3),
        }

    def test_zero_vector_excludes_nothing(self):
        assert excluded_weights((2, 2, 2), (0,) * 6) == []

    def test_order_follows_weight_enumeration(self):
        got = excluded_weights((3, 3, 3), SIX_KERNEL)
        order = {w: i for i, w in enumerate(ordered_weights((3, 3, 3)))}
        assert [order[w] for w in got] == sorted(order[w] for w in got)


class TestBuildUnit3:
    """The displayed system for the unit tensor and the six-weight kernel
    vector: nine entries survive, each a short polynomial in the strictly
    lower triangular variables."""

    def test_frozen_system(self):
        system = build_polysystem(unit_tensor(3), SIX_KERNEL)
        assert system.n_excluded == 9
        assert system.kept_vars == (0, 3, 4, 5, 6, 7, 8)
        e = [0] * 9

        def mono(*idx):
            out = list(e)
            for i in idx:
                out[i - 1] += 1
            return tuple(out)

        expected = [
            {mono(8): mpq(1)},
            {mono(4): mpq(1)},
            {mono(4, 8): mpq(1)},
            {mono(5): mpq(1)},
            {mono(5, 7): mpq(1)},
            {mono(5, 8): mpq(1)},
            {mono(1, 4, 8): mpq(1), mono(9): mpq(1)},
            {mono(1, 5): mpq(1)},
            {mono(1, 5, 8): mpq(1), mono(6, 9): mpq(1)},
        ]
        got = [system.original_dict(p) for p in system.polys]
        for want in expected:
            assert want in got
        assert len(got) == len(expected)

    def test_names_follow_kept_vars(self):
        system = build_polysystem(unit_tensor(3), SIX_KERNEL)
        assert system.names == ["x1", "x4", "x5", "x6", "x7", "x8", "x9"]

    def test_x_degree_bound(self):
        system = build_polysystem(unit_tensor(3), SIX_KERNEL)
        assert all(p.total_degree() <= 3 for p in system.polys)


class TestBuildBasics:
    def test_nothing_excluded_gives_empty_system(self):
        system = build_polysystem(unit_tensor(2), (0,) * 6)
        assert system.n_excluded == 0
        assert len(system) == 0
        assert system.kept_vars == ()

    def test_zero_polynomials_dropped(self):
        # e222 has nothing at or below (1,1,1), so that entry is the zero
        # polynomial and is vacuously satisfied
        t = Tensor.from_entries((2, 2, 2), {(2, 2, 2): 1})
        h = (1, 0, 1, 0, 1, 0)
        hm = (-3, 0, 1, 0, 1, 0)
        assert excluded_weights((2, 2, 2), hm)[0] == (1, 1, 1)
        system = build_polysystem(t, hm)
        assert system.n_excluded == 4
        assert len(system) == 0
        assert build_polysystem(t, h).n_excluded == 0

    def test_constant_entry_kept(self):
        t = Tensor.from_entries((2, 2, 2), {(1, 1, 1): 1})
        h = (-1, 0, -1, 0, -1, 0)
        system = build_polysystem(t, h)
        assert any(p.is_constant() and not p.is_zero() for p in system.polys)

    def test_duplicate_systems_deduplicated(self):
        # two excluded weights of the doubled unit tensor produce the same
        # polynomial entry once the ring is shrunk
        t = Tensor.from_entries((2, 1, 1), {(1, 1, 1): 2, (2, 1, 1): 2})
        system = build_polysystem(t, (1, -1, 0, 0))
        assert len(system) == 1

    def test_degree_bound_across_finals(self, finals222, u2r):
        for h in finals222:
            for p in build_polysystem(u2r, h).polys:
                assert p.total_degree() <= 3

    def test_fq_clears_denominators(self):
        t = Tensor.from_entries((2, 1, 1), {(1, 1, 1): mpq(1, 2),
                                            (2, 1, 1): 1})
        system = build_polysystem_fq(t, (1, -1, 0, 0), 5)
        # cleared to entries (1, 2): the excluded entry reads x1 + 2 mod 5
        assert len(system) == 1
        assert system.polys[0].to_dict() == {(1,): 1, (0,): 2}

    def test_fq_drops_entries_divisible_by_q(self):
        t = Tensor.from_entries((2, 1, 1), {(1, 1, 1): 7, (2, 1, 1): 1})
        system = build_polysystem_fq(t, (1, -1, 0, 0), 7)
        assert len(system) == 1
        assert system.polys[0].is_constant()


class TestAttainableQ:
    def test_empty_system_attainable(self):
        assert attainable_q(unit_tensor(2), (0,) * 6) == Decision.ATTAINABLE

    def test_constant_system_not_attainable(self):
        t = Tensor.from_entries((2, 2, 2), {(1, 1, 1): 1})
        assert attainable_q(t, (-1, 0, -1, 0, -1, 0)) == \
            Decision.NOT_ATTAINABLE

    def test_unit2_decision_vector(self, finals222, decisions222):
        assert decisions_string(decisions222["unit2"]) == UNIT2_DECISIONS

    def test_w_decision_vector(self, decisions222):
        assert decisions_string(decisions222["W"]) == W_DECISIONS

    def test_unit2_and_w_differ_exactly_once(self, decisions222):
        diff = [i for i, (a, b) in enumerate(zip(decisions222["unit2"],
                                                 decisions222["W"]))
                if a != b]
        assert diff == [14]

    def test_randomization_seed_does_not_matter(self, finals222):
        t = unit_tensor(2)
        for seed in (1, 2):
            tr = t.randomize(seed=seed)[1]
            got = decisions_string(attainable_q(tr, h) for h in finals222)
            assert got == UNIT2_DECISIONS

    def test_budget_timeout(self, u2r, finals222):
        d = attainable_q(u2r, finals222[11], budget=Budget(max_steps=1))
        assert d == Decision.TIMEOUT

    def test_stats_populated(self, u2r, finals222):
        stats = {}
        attainable_q(u2r, finals222[0], stats=stats)
        assert stats["field"] == "QQ"
        assert stats["n_polys"] == 4
        assert stats["n_vars"] == 3
        assert stats["gb_size"] >= 1
        assert stats["elapsed"] > 0


class TestMultistartSoundness:
    """Attainable verdicts are backed by an actual solution: random
    multistart least-squares finds a near-exact zero, while systems judged
    not attainable defeat ten thousand starts."""

    @pytest.mark.parametrize("which,idx", [
        ("unit2", 11), ("unit2", 17), ("unit2", 27), ("W", 14), ("W", 8),
    ])
    def test_attainable_has_numeric_zero(self, which, idx, finals222,
                                         u2r, wr):
        t = u2r if which == "unit2" else wr
        system = build_polysystem(t, finals222[idx])
        assert attainable_q(t, finals222[idx]) == Decision.ATTAINABLE
        assert multistart_residual(system, 64, seed=5) < 1e-8

    @pytest.mark.parametrize("which,idx", [
        ("unit2", 0), ("unit2", 4), ("W", 23),
    ])
    def test_not_attainable_defeats_multistart(self, which, idx, finals222,
                                               u2r, wr):
        t = u2r if which == "unit2" else wr
        system = build_polysystem(t, finals222[idx])
        assert attainable_q(t, finals222[idx]) == Decision.NOT_ATTAINABLE
        assert multistart_residual(system, 10**4, seed=5) > 1e-8


class TestMonotonicity:
    def test_larger_support_stays_attainable(self, finals222, decisions222):
        excl = [frozenset(excluded_weights((2, 2, 2), h))
                for h in finals222]
        pairs = [(i, j)
                 for i in range(len(finals222))
                 for j in range(len(finals222))
                 if i != j and excl[i] > excl[j]]
        assert len(pairs) > 100
        for ds in decisions222.values():
            for i, j in pairs:
                if ds[i] == Decision.ATTAINABLE:
                    assert ds[j] == Decision.ATTAINABLE


def transpose_tensor(t, fp):
    ent = {}
    for w in t.support():
        nw = tuple(w[fp.index(f)] for f in range(3))
        ent[nw] = t.data[w[0] - 1][w[1] - 1][w[2] - 1]
    return Tensor.from_entries(t.shape, ent)


def transpose_h(h, shape, fp):
    blocks = []
    off = 0
    for n in shape:
        blocks.append(h[off:off + n])
        off += n
    return tuple(x for f in fp for x in blocks[f])


class TestTransposeInvariance:
    """Permuting the three factors of T and the three blocks of h together
    maps lower triangular triples to lower triangular triples, so every
    decision must survive unchanged."""

    @pytest.mark.parametrize("fp", list(itertools.permutations(range(3))))
    def test_all_finals(self, fp, finals222, u2r, decisions222):
        tt = transpose_tensor(u2r, fp)
        for idx, h in enumerate(finals222):
            ht = transpose_h(h, (2, 2, 2), fp)
            n1 = len(excluded_weights((2, 2, 2), h))
            n2 = len(excluded_weights((2, 2, 2), ht))
            assert n1 == n2
            assert attainable_q(tt, ht) == decisions222["unit2"][idx]


class TestAttainableFq:
    def test_empty_system_attainable(self):
        assert attainable_fq(unit_tensor(2), (0,) * 6, q=101) == \
            Decision.ATTAINABLE

    def test_agreement_with_rationals(self, finals222, u2r, wr,
                                      decisions222):
        for nm, t in (("unit2", u2r), ("W", wr)):
            for idx, h in enumerate(finals222):
                assert attainable_fq(t, h, q=(1 << 31) - 1) == \
                    decisions222[nm][idx]
                assert attainable_fq(t, h, seed=11) == decisions222[nm][idx]

    def test_unlucky_prime(self):
        # q * x1 + 1 vanishes at x1 = -1/q rationally, but collapses to the
        # constant 1 modulo that very prime
        q = 1000003
        t = Tensor.from_entries((2, 1, 1), {(1, 1, 1): q, (2, 1, 1): 1})
        h = (1, -1, 0, 0)
        assert attainable_q(t, h) == Decision.ATTAINABLE
        assert attainable_fq(t, h, q=q) == Decision.NOT_ATTAINABLE
        assert attainable_fq(t, h, q=7919) == Decision.ATTAINABLE

    def test_seeded_prime_is_deterministic(self, u2r, finals222):
        stats1, stats2 = {}, {}
        d1 = attainable_fq(u2r, finals222[3], seed=5, stats=stats1)
        d2 = attainable_fq(u2r, finals222[3], seed=5, stats=stats2)
        assert d1 == d2
        assert stats1["field"] == stats2["field"]


@pytest.fixture(scope="module")
def symbolic222(finals222):
    out = {}
    for nm, t in (("unit2", unit_tensor(2)), ("W", w_tensor())):
        out[nm] = [attainable_symbolic(t, h, budget=Budget(max_ms=30_000.0))
                   for h in finals222]
    return out


class TestAttainableSymbolic:
    def test_empty_system(self):
        d = attainable_symbolic(unit_tensor(2), (0,) * 6)
        assert d == SymbolicDecision.ATTAINABLE_GENERIC

    def test_constant_system(self):
        t = Tensor.from_entries((2, 2, 2), {(1, 1, 1): 1})
        d = attainable_symbolic(t, (-1, 0, -1, 0, -1, 0))
        assert d == SymbolicDecision.NOT_ATTAINABLE_GENERIC

    def test_trivial_hinted_run_is_inconclusive(self):
        m = x_variable_count((2, 2, 2))
        d = attainable_symbolic(unit_tensor(2), (0,) * 6,
                                hints=[Poly.const(QQ, m, 1)])
        assert d == SymbolicDecision.INCONCLUSIVE

    def test_hint_extends_ring_before_shrink(self):
        m = x_variable_count((2, 2, 2))
        d = attainable_symbolic(unit_tensor(2), (0,) * 6,
                                hints=[Poly.variable(QQ, m, 1)])
        assert d == SymbolicDecision.ATTAINABLE_GENERIC

    def test_decision_vectors_match_rational_runs(self, symbolic222,
                                                  decisions222):
        for nm in ("unit2", "W"):
            got = "".join(
                "A" if d == SymbolicDecision.ATTAINABLE_GENERIC else "N"
                for d in symbolic222[nm])
            assert got == decisions_string(decisions222[nm])

    def test_specialization_agreement(self, symbolic222, finals222):
        # the generic verdict must reproduce at random points of the
        # upper triangular orbit
        for nm, base in (("unit2", unit_tensor(2)), ("W", w_tensor())):
            for seed in (101, 202, 303):
                tr = base.randomize(seed=seed)[1]
                for idx, h in enumerate(finals222):
                    want = Decision.ATTAINABLE \
                        if symbolic222[nm][idx] == \
                        SymbolicDecision.ATTAINABLE_GENERIC \
                        else Decision.NOT_ATTAINABLE
                    assert attainable_q(tr, h) == want

    def test_z_degree_bound_at_build(self):
        system = build_polysystem_symbolic(w_tensor(), (-1, 0, 1, 0, 1, 0))
        for p in system.polys:
            for _, c in p.terms:
                assert all(sum(e) <= 3 for e in c.num)
                assert list(c.den.keys()) == [(0,) * 9]

    def test_budget_timeout(self):
        d = attainable_symbolic(named_tensor("T4"), T4_H,
                                budget=Budget(max_steps=1))
        assert d == SymbolicDecision.TIMEOUT


class TestT4Derandomization:
    """The worked example this module's hint strategy comes from: the
    rational basis of a randomized run pins x1 and x5 to zero, and
    adjoining x1 makes the function-field run finish with the displayed
    six-element basis."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rational_basis_shape(self, seed):
        t4 = named_tensor("T4")
        tr = t4.randomize(seed=seed)[1]
        system = build_polysystem(tr, T4_H)
        basis = reduced_groebner(system.polys)
        assert len(basis) == 6
        by_name = {}
        for g in basis:
            lead = system.kept_vars[g.lm().index(1)]
            by_name[f"x{lead + 1}"] = g
        assert sorted(by_name) == ["x1", "x4", "x5", "x6", "x7", "x8"]
        # x1 and x5 are pinned to zero outright
        assert len(by_name["x1"].terms) == 1
        assert len(by_name["x5"].terms) == 1
        # x4, x6, x7 are each a variable plus a nonzero constant
        for nm in ("x4", "x6", "x7"):
            g = by_name[nm]
            assert len(g.terms) == 2
            assert g.terms[1][0] == (0,) * g.nvars
            assert g.terms[1][1] != 0
        # the x8 element couples to x9 with the same coefficient that
        # appears as the constant of the x7 element
        g8 = by_name["x8"]
        assert len(g8.terms) == 2
        x9_pos = system.kept_vars.index(8)
        assert g8.terms[1][0] == tuple(
            1 if i == x9_pos else 0 for i in range(g8.nvars))
        assert g8.terms[1][1] == by_name["x7"].terms[1][1]

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_suggested_hints(self, seed):
        hints = suggest_hints(named_tensor("T4"), T4_H, seed=seed)
        assert sorted(h.fmt() for h in hints) == ["x1", "x5"]

    def test_no_hints_from_trivial_basis(self):
        t = Tensor.from_entries((2, 2, 2), {(1, 1, 1): 1})
        assert suggest_hints(t, (-1, 0, -1, 0, -1, 0)) == []

    def test_no_hints_without_pure_variables(self, finals222):
        # a single irreducible entry polynomial is its own basis and
        # contains no bare variable
        u2r = unit_tensor(2).randomize(seed=0)[1]
        hints = suggest_hints(unit_tensor(2), finals222[27], seed=0)
        system = build_polysystem(u2r, finals222[27])
        assert len(system) == 1
        assert hints == []

    def test_hinted_symbolic_run_certifies(self):
        stats = {}
        hint = Poly.variable(QQ, x_variable_count((3, 3, 3)), 0)
        d = attainable_symbolic(named_tensor("T4"), T4_H, hints=[hint],
                                budget=Budget(max_ms=60_000.0), stats=stats)
        assert d == SymbolicDecision.ATTAINABLE_GENERIC
        assert stats["elapsed"] < 60.0

    def test_symbolic_basis_matches_displayed_coefficients(self):
        hint = Poly.variable(QQ, x_variable_count((3, 3, 3)), 0)
        system = build_polysystem_symbolic(named_tensor("T4"), T4_H,
                                           hints=[hint])
        basis = reduced_groebner(system.polys,
                                 Budget(max_ms=60_000.0))
        assert len(basis) == 6
        ff = system.field

        def frac(num, den):
            def zp(monos):
                out = {}
                for mono in monos:
                    e = [0] * 18
                    sign = 1
                    for v in mono:
                        if v < 0:
                            sign = -1
                            v = -v
                        e[v - 1] += 1
                    out[tuple(e)] = sign
                return out
            return ff.div(ff.from_zpoly(zp(num)), ff.from_zpoly(zp(den)))

        c4 = frac([(1, 4, 5, 10), (1, 5, 5, 11)],
                  [(1, 4, 5, 8), (1, 5, 5, 9), (-2, 4, 5, 7), (3, 4, 4, 7)])
        c6 = frac([(5, 12)], [(4, 10), (5, 11)])
        c78 = frac([(1, 5, 16)], [(1, 5, 14), (2, 5, 13), (-3, 4, 13)])

        by_name = {}
        for g in basis:
            lead = system.kept_vars[g.lm().index(1)]
            by_name[f"x{lead + 1}"] = g
        assert sorted(by_name) == ["x1", "x4", "x5", "x6", "x7", "x8"]
        assert len(by_name["x1"].terms) == 1
        assert len(by_name["x5"].terms) == 1
        for nm, want in (("x4", c4), ("x6", c6), ("x7", c78)):
            g = by_name[nm]
            assert len(g.terms) == 2
            assert g.terms[1][0] == (0,) * g.nvars
            assert ff.eq(g.terms[1][1], want)
        g8 = by_name["x8"]
        x9_pos = system.kept_vars.index(8)
        assert len(g8.terms) == 2
        assert g8.terms[1][0] == tuple(
            1 if i == x9_pos else 0 for i in range(g8.nvars))
        assert ff.eq(g8.terms[1][1], c78)

    def test_hint_run_stats(self):
        stats = {}
        hint = Poly.variable(QQ, x_variable_count((3, 3, 3)), 0)
        attainable_symbolic(named_tensor("T4"), T4_H, hints=[hint],
                            budget=Budget(max_ms=60_000.0), stats=stats)
        assert stats["field"] == "FF"
        assert stats["n_polys"] == 8
        assert stats["gb_size"] >= 6
