"""Exact and Monte Carlo error probabilities of a scheme instance.

Exact evaluation partitions the sensor space by encoder branch at the type
level. For a branch b sending word x_b, acceptance under hypothesis H is::

    Pr_H[accept] = sum_b Pr_H[U-branch b and V typical] * Pr[output event | x_b]

The first factor comes from the joint-type box kernel, the second is either
``1 - (1 - Gamma(y*|x))^k`` (triple mode) or a Y-type box probability under
the constant input x_b (zero-word mode). Type-II probabilities are kept in
log2 so they survive long after they underflow.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientData, RegimeMismatch, ValidationError
from .prob_core import Dmc, JointPmf, Pmf
from .schemes import Mode, Regime, SchemeInstance, decide, encode
from .typicality import log_of_sum, marginal_box_logprob

LN2 = math.log(2.0)
Z95 = 1.959963984540054
MC_BLOCK = 4096


class Method(str, enum.Enum):
    EXACT = "Exact"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class EvaluationResult:
    n: int
    alpha: float
    log2_beta: float
    expected_cost_H0: float
    expected_cost_H1: float
    method: Method
    regime: Optional[Regime] = None
    trials: Optional[int] = None
    ci_halfwidth: Optional[float] = None
    ci_halfwidth_beta: Optional[float] = None
    # Monte Carlo saw no type-II errors; log2_beta is then a 95% upper bound
    beta_upper_bound: bool = False

    def __post_init__(self):
        if not -1e-15 <= self.alpha <= 1 + 1e-15:
            raise ValidationError(f"alpha = {self.alpha!r} is not a probability")
        if self.log2_beta > 1e-12:
            raise ValidationError(f"log2_beta = {self.log2_beta!r} is positive")

    @property
    def beta(self) -> float:
        return 2.0 ** self.log2_beta

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["method"] = self.method.value
        d["regime"] = self.regime.value if self.regime is not None else None
        return d


# ---------------------------------------------------------------------------
# exact evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """One encoder branch: the word sent and the U-box masks that select it."""

    symbol: int
    masks: tuple[int, ...]
    word_cost: float


def branches(inst: SchemeInstance) -> list[Branch]:
    """Encoder branches keyed by the U-box membership bitmask."""
    c = inst.cost.costs
    if inst.mode is Mode.LOCAL:
        return [Branch(-1, (0,), 0.0)]
    if inst.mode is Mode.TRIPLE:
        t = inst.triple
        return [Branch(t.x0, (1,), inst.k * float(c[t.x0])), Branch(t.x1, (0,), inst.k * float(c[t.x1]))]
    n_boxes = len(inst.u_boxes())
    typical = tuple(range(1, 1 << n_boxes))
    return [
        Branch(inst.zero_symbol, typical, inst.n * float(c[inst.zero_symbol])),
        Branch(inst.x_hat, (0,), inst.n * float(c[inst.x_hat])),
    ]


def _log_output_factor(inst: SchemeInstance, ch: Dmc, symbol: int, cap) -> float:
    """ln Pr[decoder's output-side test passes | constant input ``symbol``]."""
    if inst.mode is Mode.LOCAL:
        return 0.0
    if inst.mode is Mode.TRIPLE:
        g = float(ch.transition[symbol, inst.triple.y_star])
        if g <= 0.0:
            return -math.inf
        if g >= 1.0:
            return 0.0
        # ln(1 - (1 - g)^k) without cancellation
        return math.log(-math.expm1(inst.k * math.log1p(-g)))
    L = marginal_box_logprob(ch.row(symbol), inst.n, [inst.y_box()], cap=cap)
    return float(L[1, 0])


@dataclass(frozen=True)
class _HypothesisTerms:
    log_branch: tuple[float, ...]  # ln Pr[branch]
    log_branch_vtyp: tuple[float, ...]  # ln Pr[branch and V typical]


def _hypothesis_terms(inst: SchemeInstance, dist: JointPmf, brs: list[Branch], cap) -> _HypothesisTerms:
    L = marginal_box_logprob(dist, inst.n, inst.u_boxes(), [inst.v_box()], cap=cap)
    lb, lbv = [], []
    for br in brs:
        lb.append(log_of_sum(L[m, b] for m in br.masks for b in (0, 1)))
        lbv.append(log_of_sum(L[m, 1] for m in br.masks))
    return _HypothesisTerms(tuple(lb), tuple(lbv))


def _check_dims(inst: SchemeInstance, P: JointPmf, Q: JointPmf, ch: Optional[Dmc]) -> None:
    if P.shape != Q.shape or P.shape != (inst.pu.alphabet_size, inst.pv.alphabet_size):
        raise ValidationError(f"P {P.shape} / Q {Q.shape} do not match the instance alphabets")
    if ch is not None and (ch.n_inputs, ch.n_outputs) != (inst.n_inputs, inst.n_outputs):
        raise ValidationError("channel does not match the instance")


def evaluate_exact(inst: SchemeInstance, P: JointPmf, Q: JointPmf, ch: Dmc,
                   cap: int | None = None) -> EvaluationResult:
    """Exact (alpha_n, log2 beta_n, expected costs) by joint-type enumeration."""
    _check_dims(inst, P, Q, ch)
    brs = branches(inst)
    out = [_log_output_factor(inst, ch, br.symbol, cap) for br in brs]
    accept, costs = [], []
    for dist in (P, Q):
        terms = _hypothesis_terms(inst, dist, brs, cap)
        accept.append(log_of_sum(lv + lo for lv, lo in zip(terms.log_branch_vtyp, out)))
        costs.append(math.fsum(math.exp(lb) * br.word_cost for lb, br in zip(terms.log_branch, brs)))
    alpha = -math.expm1(accept[0]) if accept[0] > -math.inf else 1.0
    return EvaluationResult(
        n=inst.n, alpha=min(max(alpha, 0.0), 1.0), log2_beta=min(accept[1] / LN2, 0.0),
        expected_cost_H0=costs[0], expected_cost_H1=costs[1],
        method=Method.EXACT, regime=inst.regime,
    )


# ---------------------------------------------------------------------------
# cost audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostAudit:
    expected_cost_H0: float
    expected_cost_H1: float
    bound: float
    passed: bool
    branch_costs: tuple[float, ...]
    worst_case_cost: float
    # Chebyshev bound on Pr[U not mu_n-typical] times n c(x_hat); expected-cost regimes only
    chebyshev_cost_bound: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def audit_cost(inst: SchemeInstance, P: JointPmf, Q: JointPmf, cap: int | None = None) -> CostAudit:
    """Exact expected costs per hypothesis against the regime's C_n."""
    if inst.regime not in (Regime.STRICT_COST, Regime.EXPECTED_COST_H0, Regime.EXPECTED_COST_BOTH):
        raise RegimeMismatch(f"{inst.regime.value} has no cost constraint to audit")
    _check_dims(inst, P, Q, None)
    brs = branches(inst)
    costs = []
    for dist in (P, Q):
        terms = _hypothesis_terms(inst, dist, brs, cap)
        costs.append(math.fsum(math.exp(lb) * br.word_cost for lb, br in zip(terms.log_branch, brs)))
    worst = max(br.word_cost for br in brs)
    slack = 1e-12 * max(1.0, inst.C_n)
    if inst.regime is Regime.STRICT_COST:
        passed = worst <= inst.C_n + slack
    elif inst.regime is Regime.EXPECTED_COST_H0:
        passed = costs[0] <= inst.C_n + slack
    else:
        passed = max(costs) <= inst.C_n + slack
    cheb = None
    if inst.mu_n is not None:
        r = inst.pu.alphabet_size
        cheb = r / (4.0 * inst.mu_n ** 2 * inst.n) * inst.n * inst.c_x_hat
    return CostAudit(costs[0], costs[1], inst.C_n, passed, tuple(br.word_cost for br in brs), worst, cheb)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def _block_rng(seed: int, hypothesis: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(hypothesis, block))))


def _sample_channel(rng: np.random.Generator, cum: np.ndarray, x: np.ndarray) -> np.ndarray:
    r = rng.random(x.shape)
    y = (r[..., None] >= cum[x]).sum(axis=-1)
    return np.minimum(y, cum.shape[1] - 1)


def _run_block(inst: SchemeInstance, dist: JointPmf, cum_ch: np.ndarray, seed: int,
               hypothesis: int, block: int, size: int) -> tuple[int, float]:
    """(number of H=0 decisions, total input cost) for one block of trials."""
    rng = _block_rng(seed, hypothesis, block)
    s = dist.shape[1]
    cdf = np.cumsum(dist.probs.reshape(-1))
    cells = np.minimum(np.searchsorted(cdf, rng.random((size, inst.n)), side="right"), cdf.size - 1)
    u, v = cells // s, cells % s
    x = encode(inst, u)
    if inst.mode is Mode.LOCAL:
        d = decide(inst, v)
        cost = 0.0
    else:
        y = _sample_channel(rng, cum_ch, x)
        d = decide(inst, v, y)
        cost = float(np.sum(inst.cost.costs[x]))
    return int(np.sum(np.asarray(d) == 0)), cost


def simulate(inst: SchemeInstance, P: JointPmf, Q: JointPmf, ch: Dmc, trials: int, seed: int,
             workers: int = 1, block_size: int = MC_BLOCK) -> EvaluationResult:
    """Monte Carlo estimates of alpha_n and beta_n with 95% normal intervals.

    Trials are cut into fixed-size blocks, each with its own stream derived
    from ``(seed, hypothesis, block)``, so totals do not depend on ``workers``.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValidationError(f"trials must be a positive integer, got {trials!r}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers!r}")
    _check_dims(inst, P, Q, ch)
    cum_ch = np.cumsum(ch.transition, axis=1)
    n_blocks = -(-int(trials) // block_size)
    jobs = [(h, b, min(block_size, trials - b * block_size)) for h in (0, 1) for b in range(n_blocks)]

    def run(job):
        h, b, size = job
        return _run_block(inst, (P, Q)[h], cum_ch, seed, h, b, size)

    if workers == 1:
        results = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    accepts = [0, 0]
    cost_parts: list[list[float]] = [[], []]
    for (h, _, _), (acc, cost) in zip(jobs, results):
        accepts[h] += acc
        cost_parts[h].append(cost)
    T = int(trials)
    alpha = (T - accepts[0]) / T
    beta = accepts[1] / T
    hw_a = Z95 * math.sqrt(alpha * (1 - alpha) / T)
    hw_b = Z95 * math.sqrt(beta * (1 - beta) / T)
    zero_hits = accepts[1] == 0
    if zero_hits:
        beta = 1.0 - 0.05 ** (1.0 / T)
    return EvaluationResult(
        n=inst.n, alpha=alpha, log2_beta=math.log2(beta),
        expected_cost_H0=math.fsum(cost_parts[0]) / T, expected_cost_H1=math.fsum(cost_parts[1]) / T,
        method=Method.MONTE_CARLO, regime=inst.regime, trials=T,
        ci_halfwidth=hw_a, ci_halfwidth_beta=hw_b, beta_upper_bound=zero_hits,
    )


# ---------------------------------------------------------------------------
# exponent fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentFit:
    grid: tuple[int, ...]
    slope: float
    intercept: float
    residual: float

    def __post_init__(self):
        if len(self.grid) < 3 or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise InsufficientData(f"fit grid must be strictly increasing with >= 3 points, got {self.grid}")


def fit_exponent(results: Sequence[EvaluationResult]) -> ExponentFit:
    """Least-squares line through (n, -log2 beta_n); the slope estimates the exponent."""
    pts = sorted(
        (r.n, -r.log2_beta) for r in results
        if r.method is Method.EXACT and math.isfinite(r.log2_beta)
    )
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 exact results with finite log2-beta, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    if np.unique(n).size != n.size:
        raise InsufficientData("duplicate blocklengths in the fit grid")
    A = np.stack([n, np.ones_like(n)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ np.array([slope, intercept])
    return ExponentFit(tuple(int(v) for v in n), float(slope), float(intercept),
                       float(np.sqrt(np.mean(resid ** 2))))
