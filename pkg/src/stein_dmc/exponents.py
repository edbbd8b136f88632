"""Stein exponents for the three stringent-communication regimes.

The core solver is the I-projection of Q_UV onto the transportation polytope
{pi : pi_U = a, pi_V = b}. Its minimizer has the product form
``a'(u) b'(v) Q(u, v)`` and is computed by iterative proportional fitting.

Exponents (bits)::

    E1 = min_{pi_U = P_U, pi_V = P_V} D(pi || Q)
    E2 = D(P_V || Q_V) + max_{x != 0} D(Gamma(.|0) || Gamma(.|x))
    E3 = min_{pi_U = Q_U, pi_V = P_V} D(pi || Q)

Partially connected channel: every regime has exponent E1.
Fully connected channel: sublinear uses / almost-sure cost give the local
exponent D(P_V || Q_V); expected cost under H=0 gives min(E1, E2); expected
cost under both hypotheses gives min(E1, E2, E3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel_analysis import best_binary_relay_exponent, classify
from .errors import InfeasibleTargets, NonConvergence, SupportAssumptionViolation, ValidationError
from .prob_core import CostFunction, Dmc, JointPmf, Pmf, kl_divergence

IPF_TOL = 1e-10
IPF_MAX_ITER = 100_000


class ChannelCase(str, enum.Enum):
    PARTIALLY_CONNECTED = "PartiallyConnected"
    FULLY_CONNECTED = "FullyConnected"


@dataclass(frozen=True)
class ProjectionResult:
    minimizer: JointPmf
    value: float
    iterations: int
    residual: float


def _probs(x) -> np.ndarray:
    if isinstance(x, (Pmf, JointPmf)):
        return x.probs
    return np.asarray(x, dtype=np.float64)


def i_projection(Q, target_u, target_v, tol: float = IPF_TOL, max_iter: int = IPF_MAX_ITER) -> ProjectionResult:
    """Minimize D(pi || Q) subject to pi_U = target_u and pi_V = target_v."""
    q = _probs(Q)
    a = Pmf(_probs(target_u)).probs
    b = Pmf(_probs(target_v)).probs
    if q.ndim != 2 or q.shape != (a.size, b.size):
        raise InfeasibleTargets(f"targets of sizes ({a.size}, {b.size}) do not match Q of shape {q.shape}")
    if np.any(q <= 0):
        u, v = (int(i) for i in np.argwhere(q <= 0)[0])
        raise SupportAssumptionViolation(f"Q({u},{v}) = {q[u, v]!r}; I-projection needs Q > 0")
    # zero targets force zero rows/columns; solve on the remaining block
    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    sub, it, resid = kernels.ipf(q[np.ix_(rows, cols)], a[rows], b[cols], tol=tol, max_iter=max_iter)
    if not resid <= tol:
        raise NonConvergence(f"IPF stopped after {it} iterations with residual {resid:.3e}")
    pi = np.zeros_like(q)
    pi[np.ix_(rows, cols)] = sub
    # column scaling is last, so columns are exact; fix round-off in the total
    pi /= pi.sum()
    minimizer = JointPmf(pi)
    return ProjectionResult(minimizer, kl_divergence(minimizer, q), it, resid)


def local_exponent(P: JointPmf, Q: JointPmf) -> float:
    """D(P_V || Q_V): exponent of a test using only the decision center's data."""
    return kl_divergence(P.v, Q.v)


def compute_E1(P: JointPmf, Q: JointPmf) -> float:
    return i_projection(Q, P.u, P.v).value


def compute_E2(P: JointPmf, Q: JointPmf, ch: Dmc, cost: CostFunction) -> float:
    _, relay = best_binary_relay_exponent(ch, cost)
    return local_exponent(P, Q) + relay


def compute_E3(P: JointPmf, Q: JointPmf) -> float:
    return i_projection(Q, Q.u, P.v).value


@dataclass(frozen=True)
class ExponentReport:
    E1: float
    E2: float
    E3: float
    theorem1: float
    theorem2: float
    theorem3_H0only: float
    theorem3_both: float
    channel_case: ChannelCase
    local: float
    x_hat: int

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["channel_case"] = self.channel_case.value
        return d


def resolve_exponents(P: JointPmf, Q: JointPmf, ch: Dmc, cost: CostFunction) -> ExponentReport:
    if cost.n_inputs != ch.n_inputs:
        raise ValidationError(f"cost has {cost.n_inputs} inputs but channel has {ch.n_inputs}")
    report = classify(ch)
    e1 = compute_E1(P, Q)
    e3 = compute_E3(P, Q)
    local = local_exponent(P, Q)
    x_hat, relay = best_binary_relay_exponent(ch, cost)
    e2 = local + relay
    if report.is_fully_connected:
        case = ChannelCase.FULLY_CONNECTED
        th1 = local
        th3_h0 = min(e1, e2)
        th3_both = min(e1, e2, e3)
    else:
        case = ChannelCase.PARTIALLY_CONNECTED
        th1 = th3_h0 = th3_both = e1
    return ExponentReport(
        E1=e1, E2=e2, E3=e3, theorem1=th1, theorem2=th1,
        theorem3_H0only=th3_h0, theorem3_both=th3_both,
        channel_case=case, local=local, x_hat=x_hat,
    )


def regime_exponent(report: ExponentReport, regime) -> float:
    """Stein exponent assigned to a scheme regime."""
    name = getattr(regime, "value", regime)
    if name in ("SublinearUses", "StrictCost"):
        return report.theorem1
    if name == "ExpectedCostH0":
        return report.theorem3_H0only
    if name == "ExpectedCostBoth":
        return report.theorem3_both
    if name == "LocalOnly":
        return report.local
    raise ValidationError(f"unknown regime {regime!r}")
