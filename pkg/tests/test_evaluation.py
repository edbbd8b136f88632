import math

import numpy as np
import pytest

from stein_dmc import oracles
from stein_dmc.errors import InsufficientData, RegimeMismatch, ResourceLimit, ValidationError
from stein_dmc.evaluation import (
    EvaluationResult,
    Method,
    audit_cost,
    evaluate_exact,
    fit_exponent,
    simulate,
)
from stein_dmc.prob_core import CostFunction, Dmc, JointPmf
from stein_dmc.schemes import Regime, resolve_instance

P = JointPmf([[0.4, 0.1], [0.15, 0.35]])
Q = JointPmf([[0.2, 0.3], [0.3, 0.2]])
COST = CostFunction([0.0, 1.0])
Z = Dmc.z_channel(0.6)
BSC = Dmc.bsc(0.2)
# marginals far from P, so beta decays quickly
Q_FAR = JointPmf([[0.1, 0.2], [0.2, 0.5]])


def synthetic(ns, log2_beta):
    return [EvaluationResult(n, 0.0, log2_beta(n), 0.0, 0.0, Method.EXACT) for n in ns]


class TestExact:
    @pytest.mark.parametrize("regime", list(Regime))
    @pytest.mark.parametrize("ch", [Z, BSC], ids=["z", "bsc"])
    def test_identical_hypotheses(self, regime, ch):
        inst = resolve_instance(regime, 60, P, P, ch, COST, mu=0.1)
        r = evaluate_exact(inst, P, P, ch)
        assert r.alpha + r.beta == pytest.approx(1.0, abs=1e-12)

    def test_noiseless_link(self):
        ch = Dmc.identity(2)
        inst = resolve_instance(Regime.SUBLINEAR_USES, 80, P, Q, ch, COST, mu=0.05)
        r = evaluate_exact(inst, P, Q, ch)
        n = 80
        dp = oracles.binary_count_distribution(Q.probs, n)
        ub, vb = inst.u_boxes()[0], inst.v_box()
        a = np.arange(n + 1)
        ua = (a >= ub.lo[0]) & (a <= ub.hi[0]) & (n - a >= ub.lo[1]) & (n - a <= ub.hi[1])
        va = (a >= vb.lo[0]) & (a <= vb.hi[0]) & (n - a >= vb.lo[1]) & (n - a <= vb.hi[1])
        assert r.beta == pytest.approx(dp[np.ix_(ua, va)].sum(), rel=1e-12)

    @pytest.mark.parametrize("regime", list(Regime))
    def test_exhaustive_n6(self, regime):
        for ch in (Z, BSC):
            inst = resolve_instance(regime, 6, P, Q, ch, COST, mu=0.2)
            r = evaluate_exact(inst, P, Q, ch)
            ref = oracles.exhaustive_scheme_evaluation(inst, P, Q, ch)
            assert r.alpha == pytest.approx(ref["alpha"], abs=1e-12)
            assert r.beta == pytest.approx(ref["beta"], abs=1e-12)
            assert r.expected_cost_H0 == pytest.approx(ref["cost_H0"], abs=1e-12)
            assert r.expected_cost_H1 == pytest.approx(ref["cost_H1"], abs=1e-12)

    def test_deterministic(self):
        inst = resolve_instance(Regime.EXPECTED_COST_BOTH, 120, P, Q, BSC, COST)
        assert evaluate_exact(inst, P, Q, BSC) == evaluate_exact(inst, P, Q, BSC)

    def test_resource_limit(self):
        inst = resolve_instance(Regime.LOCAL_ONLY, 300, P, Q, BSC, COST)
        with pytest.raises(ResourceLimit):
            evaluate_exact(inst, P, Q, BSC, cap=1000)

    def test_log_domain_beta(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 500, P, Q_FAR, Z, COST, mu=0.01)
        r = evaluate_exact(inst, P, Q_FAR, Z)
        assert r.log2_beta < -60 and math.isfinite(r.log2_beta)

    def test_result_invariants(self):
        with pytest.raises(ValidationError):
            EvaluationResult(10, 1.5, -1.0, 0, 0, Method.EXACT)
        with pytest.raises(ValidationError):
            EvaluationResult(10, 0.5, 0.5, 0, 0, Method.EXACT)


class TestAudit:
    def test_strict(self):
        inst = resolve_instance(Regime.STRICT_COST, 100, P, Q, Z, COST)
        a = audit_cost(inst, P, Q)
        assert a.passed and a.worst_case_cost <= a.bound

    def test_expected_h0(self):
        inst = resolve_instance(Regime.EXPECTED_COST_H0, 100, P, Q, BSC, COST)
        a = audit_cost(inst, P, Q)
        r = evaluate_exact(inst, P, Q, BSC)
        assert a.expected_cost_H0 == pytest.approx(r.expected_cost_H0, abs=1e-12)
        assert a.passed and a.expected_cost_H0 <= a.chebyshev_cost_bound <= a.bound * (1 + 1e-12)

    def test_h0_only_ignores_h1(self):
        # U under H1 is never P_U-typical, so the H1 cost approaches n c(x_hat)
        Qf = JointPmf([[0.05, 0.05], [0.45, 0.45]])
        inst = resolve_instance(Regime.EXPECTED_COST_H0, 100, P, Qf, BSC, COST)
        a = audit_cost(inst, P, Qf)
        assert a.expected_cost_H1 > a.bound and a.passed

    def test_local_rejected(self):
        with pytest.raises(RegimeMismatch):
            audit_cost(resolve_instance(Regime.LOCAL_ONLY, 50, P, Q, BSC, COST), P, Q)


class TestSimulate:
    def test_point_mass_typical(self):
        Pd = JointPmf([[1.0, 0.0], [0.0, 0.0]])
        Qd = JointPmf([[0.25, 0.25], [0.25, 0.25]])
        ch = Dmc.identity(2)
        inst = resolve_instance(Regime.SUBLINEAR_USES, 30, Pd, Qd, ch, COST)
        r = simulate(inst, Pd, Qd, ch, 500, seed=3)
        assert r.alpha == 0.0

    def test_same_seed(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 40, P, Q, Z, COST, mu=0.1)
        a = simulate(inst, P, Q, Z, 3000, seed=11)
        b = simulate(inst, P, Q, Z, 3000, seed=11)
        assert a == b
        assert simulate(inst, P, Q, Z, 3000, seed=12) != a

    def test_workers_do_not_change_totals(self):
        inst = resolve_instance(Regime.EXPECTED_COST_BOTH, 40, P, Q, BSC, COST)
        base = simulate(inst, P, Q, BSC, 9000, seed=5, workers=1, block_size=1000)
        for w in (2, 4):
            assert simulate(inst, P, Q, BSC, 9000, seed=5, workers=w, block_size=1000) == base

    def test_zero_hits_upper_bound(self):
        inst = resolve_instance(Regime.SUBLINEAR_USES, 200, P, Q_FAR, Z, COST, mu=0.01)
        r = simulate(inst, P, Q_FAR, Z, 200, seed=1)
        assert r.beta_upper_bound
        assert r.beta == pytest.approx(1 - 0.05 ** (1 / 200))

    def test_trials_validation(self):
        inst = resolve_instance(Regime.LOCAL_ONLY, 10, P, Q, BSC, COST)
        with pytest.raises(ValidationError):
            simulate(inst, P, Q, BSC, 0, seed=1)

    def test_converges(self):
        inst = resolve_instance(Regime.EXPECTED_COST_H0, 30, P, Q, BSC, COST)
        exact = evaluate_exact(inst, P, Q, BSC)
        r = simulate(inst, P, Q, BSC, 40000, seed=9)
        sd = math.sqrt(exact.alpha * (1 - exact.alpha) / 40000)
        assert abs(r.alpha - exact.alpha) <= 4 * sd
        # the cost is n c(x_hat) times a Bernoulli frequency
        p_atyp = exact.expected_cost_H0 / 30
        assert abs(r.expected_cost_H0 / 30 - p_atyp) <= 4 * math.sqrt(p_atyp * (1 - p_atyp) / 40000)


class TestFit:
    def test_linear(self):
        f = fit_exponent(synthetic([100, 200, 300, 400, 500], lambda n: -0.3 * n))
        assert f.slope == pytest.approx(0.3, abs=1e-12)
        assert f.residual < 1e-10

    def test_polynomial_correction(self):
        # -log2 beta = 0.3 n - 4 log2(n+1); the fitted slope is 0.3 minus the
        # least-squares slope of 4 log2(n+1), which is 0.02247 on this grid
        grid = [100, 200, 300, 400, 500]
        f = fit_exponent(synthetic(grid, lambda n: 4 * math.log2(n + 1) - 0.3 * n))
        g = [4 * math.log2(n + 1) for n in grid]
        nbar, gbar = sum(grid) / 5, sum(g) / 5
        bias = sum((n - nbar) * (v - gbar) for n, v in zip(grid, g)) / sum((n - nbar) ** 2 for n in grid)
        assert f.slope == pytest.approx(0.3 - bias, abs=1e-12)
        assert 0.022 < bias < 0.023
        wide = fit_exponent(synthetic([1000, 2000, 3000, 4000, 5000], lambda n: 4 * math.log2(n + 1) - 0.3 * n))
        assert abs(wide.slope - 0.3) < abs(f.slope - 0.3)

    def test_two_points(self):
        with pytest.raises(InsufficientData):
            fit_exponent(synthetic([100, 200], lambda n: -0.3 * n))

    def test_ignores_monte_carlo(self):
        res = synthetic([100, 200], lambda n: -0.3 * n)
        res.append(EvaluationResult(300, 0.0, -90.0, 0, 0, Method.MONTE_CARLO, trials=10))
        with pytest.raises(InsufficientData):
            fit_exponent(res)
