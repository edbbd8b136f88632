"""Quick oracle cross-checks behind ``stein-dmc selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import oracles
from .evaluation import evaluate_exact
from .exponents import i_projection
from .prob_core import CostFunction, Dmc, JointPmf
from .schemes import Regime, resolve_instance
from .typicality import Box, marginal_box_logprob


def _random_joint(rng, shape):
    x = rng.uniform(0.05, 1.0, size=shape)
    return x / x.sum()


def _check_ipf_2x2(rng) -> float:
    worst = 0.0
    for _ in range(5):
        q = _random_joint(rng, (2, 2))
        a = rng.dirichlet([2, 2])
        b = rng.dirichlet([2, 2])
        _, ref = oracles.transport_2x2_oracle(q, a, b, grid_points=100_000)
        worst = max(worst, abs(i_projection(q, a, b).value - ref))
    return worst


def _check_ipf_3x3(rng) -> float:
    worst = 0.0
    for _ in range(5):
        q = _random_joint(rng, (3, 3))
        a = rng.dirichlet([2, 2, 2])
        b = rng.dirichlet([2, 2, 2])
        _, ref = oracles.projected_newton_projection(q, a, b)
        worst = max(worst, abs(i_projection(q, a, b).value - ref))
    return worst


def _check_box_dp() -> float:
    P = JointPmf([[0.3, 0.2], [0.1, 0.4]])
    n = 60
    ub = Box.typical(P.u, n, 0.05)
    vb = Box.typical(P.v, n, 0.05)
    L = marginal_box_logprob(P, n, [ub], [vb])
    dp = oracles.binary_count_distribution(P.probs, n)
    a = np.arange(n + 1)
    # the box bounds both symbol counts; symbol 1 count is n - a
    ua = (a >= ub.lo[0]) & (a <= ub.hi[0]) & (n - a >= ub.lo[1]) & (n - a <= ub.hi[1])
    va = (a >= vb.lo[0]) & (a <= vb.hi[0]) & (n - a >= vb.lo[1]) & (n - a <= vb.hi[1])
    ref = dp[np.ix_(ua, va)].sum()
    return abs(math.exp(L[1, 1]) - ref)


def _check_exhaustive() -> float:
    P = JointPmf([[0.4, 0.1], [0.15, 0.35]])
    Q = JointPmf([[0.2, 0.3], [0.3, 0.2]])
    cost = CostFunction([0.0, 1.0])
    worst = 0.0
    for ch in (Dmc.z_channel(0.6), Dmc.bsc(0.2)):
        for regime in Regime:
            inst = resolve_instance(regime, 6, P, Q, ch, cost, mu=0.2)
            ex = evaluate_exact(inst, P, Q, ch)
            ref = oracles.exhaustive_scheme_evaluation(inst, P, Q, ch)
            worst = max(worst, abs(ex.alpha - ref["alpha"]), abs(ex.beta - ref["beta"]),
                        abs(ex.expected_cost_H0 - ref["cost_H0"]), abs(ex.expected_cost_H1 - ref["cost_H1"]))
    return worst


CHECKS: tuple[tuple[str, Callable, float], ...] = (
    ("i_projection vs 2x2 grid oracle", lambda rng: _check_ipf_2x2(rng), 1e-8),
    ("i_projection vs null-space Newton oracle (3x3)", lambda rng: _check_ipf_3x3(rng), 1e-6),
    ("box kernel vs count-convolution DP (n=60)", lambda rng: _check_box_dp(), 1e-12),
    ("exact evaluator vs exhaustive enumeration (n=6)", lambda rng: _check_exhaustive(), 1e-12),
)


def run_selftest(report: Callable[[str], None] = print, seed: int = 2024) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn, tol in CHECKS:
        err = fn(rng)
        passed = err <= tol
        ok &= passed
        report(f"{'PASS' if passed else 'FAIL'}  {name}: max error {err:.3e} (tol {tol:.0e})")
    return ok
