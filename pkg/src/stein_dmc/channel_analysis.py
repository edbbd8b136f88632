"""Structural diagnostics of a DMC.

The connectivity classification drives the exponent dichotomy: a channel is
*partially connected* when some output y* is reachable from an input x0 but
not from another input x1, and *fully connected* otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateChannel, NotFullyConnected, ValidationError
from .prob_core import CostFunction, Dmc, JointPmf, kl_divergence

USELESS_COMM_TOL = 1e-10


class Triple(NamedTuple):
    x0: int
    x1: int
    y_star: int


@dataclass(frozen=True)
class ConnectivityReport:
    is_fully_connected: bool
    triple: Optional[Triple] = None
    gamma_x0: Optional[float] = None

    def __post_init__(self):
        if self.is_fully_connected != (self.triple is None):
            raise ValidationError("fully connected iff no disconnection triple")

    def describe(self) -> str:
        if self.is_fully_connected:
            return "fully-connected"
        t = self.triple
        return f"partially-connected, triple ({t.x0},{t.x1},{t.y_star})"


def _as_dmc(ch) -> Dmc:
    return ch if isinstance(ch, Dmc) else Dmc(ch)


def classify(ch: Dmc) -> ConnectivityReport:
    """Find a triple with Gamma(y*|x0) > 0 = Gamma(y*|x1), if any.

    The smallest y*, then the smallest x1 with a zero at y*, is chosen; x0 is
    the input maximizing Gamma(y*|x0) (smallest index on ties), which makes
    the finite-k detection probability as large as possible.
    """
    ch = _as_dmc(ch)
    t = ch.transition
    dead = np.flatnonzero(~np.any(t > 0, axis=0))
    if dead.size:
        raise DegenerateChannel(f"output {int(dead[0])} has zero probability under every input")
    for y in range(ch.n_outputs):
        col = t[:, y]
        zeros = np.flatnonzero(col == 0)
        if zeros.size == 0:
            continue
        # every column has a positive entry, so a valid x0 exists here
        x1 = int(zeros[0])
        x0 = int(np.argmax(col))
        return ConnectivityReport(False, Triple(x0, x1, y), float(col[x0]))
    return ConnectivityReport(True)


def gamma_min(ch: Dmc) -> float:
    return float(_as_dmc(ch).transition.min())


def gamma_quotient(ch: Dmc) -> float:
    """min over x1 != x2 and y of Gamma(y|x1) / Gamma(y|x2)."""
    t = _as_dmc(ch).transition
    if np.any(t <= 0):
        x, y = (int(i) for i in np.argwhere(t <= 0)[0])
        raise NotFullyConnected(f"Gamma({y}|{x}) = 0; quotient constant needs a fully connected channel")
    if t.shape[0] < 2:
        return 1.0
    ratios = t[:, None, :] / t[None, :, :]
    off = ~np.eye(t.shape[0], dtype=bool)
    return float(ratios[off].min())


def relay_exponents(ch: Dmc, cost: CostFunction) -> np.ndarray:
    """D(row(0) || row(x)) for every input x (``inf`` where undefined, ``nan`` at x = 0)."""
    ch = _as_dmc(ch)
    if cost.n_inputs != ch.n_inputs:
        raise ValidationError(f"cost has {cost.n_inputs} inputs but channel has {ch.n_inputs}")
    t = ch.transition
    z = cost.zero_symbol
    out = np.full(ch.n_inputs, np.nan)
    for x in range(ch.n_inputs):
        if x == z:
            continue
        if np.any((t[z] > 0) & (t[x] == 0)):
            out[x] = math.inf
        else:
            out[x] = kl_divergence(t[z], t[x])
    return out


def best_binary_relay_exponent(ch: Dmc, cost: CostFunction) -> tuple[int, float]:
    """Input x_hat != 0 maximizing D(row(0) || row(x_hat)), and the maximum (bits).

    An infinite divergence wins the maximum; ties go to the smallest index.
    """
    ch = _as_dmc(ch)
    if ch.n_inputs < 2:
        raise ValidationError("need at least two channel inputs")
    vals = relay_exponents(ch, cost)
    best_x, best_v = -1, -math.inf
    for x, v in enumerate(vals):
        if x == cost.zero_symbol:
            continue
        if v > best_v:
            best_x, best_v = x, float(v)
    return best_x, best_v


def check_useless_communication_condition(P: JointPmf, Q: JointPmf, tol: float = USELESS_COMM_TOL) -> bool:
    """True iff sum_v P_V(v) Q_{U|V}(u|v) = P_U(u) for every u."""
    mixed = Q.conditional_u_given_v() @ P.v.probs
    return bool(np.all(np.abs(mixed - P.u.probs) <= tol))
