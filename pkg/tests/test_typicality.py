import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stein_dmc import oracles
from stein_dmc.errors import ResourceLimit
from stein_dmc.prob_core import JointPmf, Pmf
from stein_dmc.typicality import (
    Box,
    EmpiricalType,
    TypicalityParams,
    count_types,
    enumerate_joint_types,
    is_strongly_typical,
    log_multinomial,
    marginal_box_logprob,
    typical_count_bounds,
    typicality_event_probability,
)


class TestStrongTypicality:
    def test_exact_type(self):
        assert is_strongly_typical(EmpiricalType([5, 5]), TypicalityParams(1e-6, Pmf.bernoulli(0.5)))

    def test_far_type(self):
        assert not is_strongly_typical(EmpiricalType([9, 1]), TypicalityParams(0.05, Pmf.bernoulli(0.5)))

    def test_zero_reference(self):
        assert not is_strongly_typical(EmpiricalType([9, 1]), TypicalityParams(0.5, Pmf([1.0, 0.0])))

    def test_boundary_is_closed_and_symmetric(self):
        params = TypicalityParams(0.05, Pmf.bernoulli(0.5))
        assert is_strongly_typical(EmpiricalType([9, 11]), params)
        assert is_strongly_typical(EmpiricalType([11, 9]), params)

    def test_mu_positive(self):
        with pytest.raises(ValueError):
            TypicalityParams(0.0, Pmf.bernoulli(0.5))

    @given(st.integers(1, 60), st.floats(0.001, 0.3), st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3))
    def test_box_matches_direct_test(self, n, mu, w):
        w = np.array(w) + np.array([0.0, 0.0, 1e-3])
        ref = Pmf(w / w.sum())
        box = Box.typical(ref, n, mu)
        params = TypicalityParams(mu, ref)
        for t in enumerate_joint_types(n, 3):
            assert bool(box.contains(t.counts)) == is_strongly_typical(t, params)


class TestEnumeration:
    def test_small(self):
        assert [tuple(t.counts) for t in enumerate_joint_types(2, 2)] == [(2, 0), (1, 1), (0, 2)]
        assert sum(1 for _ in enumerate_joint_types(4, 4)) == 35
        assert [tuple(t.counts) for t in enumerate_joint_types(1, 1)] == [(1,)]

    @given(st.integers(1, 12), st.integers(1, 4))
    def test_count_and_uniqueness(self, n, cells):
        seen = {tuple(t.counts) for t in enumerate_joint_types(n, cells)}
        assert len(seen) == count_types(n, cells) == math.comb(n + cells - 1, cells - 1)

    def test_cap(self):
        with pytest.raises(ResourceLimit) as exc:
            next(enumerate_joint_types(100, 4, cap=1000))
        assert exc.value.cap == 1000 and exc.value.n == 100


class TestProbabilities:
    def test_log_multinomial(self):
        assert log_multinomial([7, 0, 0]) == 0.0
        assert log_multinomial([1, 1]) == pytest.approx(math.log(2))
        assert log_multinomial(EmpiricalType([2, 2])) == pytest.approx(math.log(6))

    def test_total_probability(self):
        p = JointPmf([[0.1, 0.2], [0.3, 0.4]])
        assert typicality_event_probability(p, 40, lambda t: True) == pytest.approx(1.0, abs=1e-10)

    def test_binomial(self):
        assert typicality_event_probability(Pmf.bernoulli(0.5), 2, lambda t: tuple(t.counts) == (1, 1)) == pytest.approx(0.5)

    def test_zero_cell(self):
        assert typicality_event_probability(Pmf([1.0, 0.0]), 5, lambda t: t.counts[1] > 0) == 0.0

    def test_sum_over_types(self):
        for cells, n in ((2, 200), (3, 60), (4, 30)):
            p = np.arange(1, cells + 1, dtype=float)
            p /= p.sum()
            total = typicality_event_probability(Pmf(p), n, lambda t: True)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_brute_force_n8(self):
        p = JointPmf([[0.3, 0.2], [0.1, 0.4]])
        mu = 0.15
        ub, vb = Box.typical(p.u, 8, mu), Box.typical(p.v, 8, mu)

        def pred(counts):
            c = np.asarray(counts).reshape(2, 2)
            return bool(ub.contains(c.sum(1))) and bool(vb.contains(c.sum(0)))

        want = oracles.brute_force_type_event(p.probs, 8, pred)
        got = typicality_event_probability(p, 8, lambda t: pred(t.counts))
        assert got == pytest.approx(want, abs=1e-12)
        L = marginal_box_logprob(p, 8, [ub], [vb])
        assert math.exp(L[1, 1]) == pytest.approx(want, abs=1e-12)

    def test_weak_law_bound(self):
        ref = Pmf([0.2, 0.3, 0.5])
        mu = 0.1
        prev = 0.0
        for n in (50, 100, 200):
            L = marginal_box_logprob(ref, n, [Box.typical(ref, n, mu)])
            prob = math.exp(L[1, 0])
            assert prob >= 1 - 3 / (4 * mu**2 * n)
            assert prob >= prev
            prev = prob

    def test_box_kernel_matches_convolution(self):
        p = JointPmf([[0.35, 0.15], [0.05, 0.45]])
        n = 150
        ub, vb = Box.typical(p.u, n, 0.04), Box.typical(p.v, n, 0.03)
        dp = oracles.binary_count_distribution(p.probs, n)
        a = np.arange(n + 1)
        ua = (a >= ub.lo[0]) & (a <= ub.hi[0]) & (n - a >= ub.lo[1]) & (n - a <= ub.hi[1])
        va = (a >= vb.lo[0]) & (a <= vb.hi[0]) & (n - a >= vb.lo[1]) & (n - a <= vb.hi[1])
        L = np.exp(marginal_box_logprob(p, n, [ub], [vb]))
        assert L[1, 1] == pytest.approx(dp[np.ix_(ua, va)].sum(), abs=1e-13)
        assert L[0, 1] == pytest.approx(dp[np.ix_(~ua, va)].sum(), abs=1e-13)
        assert L.sum() == pytest.approx(1.0, abs=1e-12)

    def test_empty_box(self):
        lo, hi = typical_count_bounds(Pmf.bernoulli(0.5), 5, 0.05)
        assert np.all(lo > hi)
