"""Encoders and decision rules of the achievability schemes.

Three scheme *modes* cover all regimes:

``triple``
    The sensor sends x0 on every signalling slot when its sequence is
    mu-typical for P_U and x1 otherwise; the decision center accepts H=0 iff
    y* shows up on a signalling slot and its own sequence is mu-typical for
    P_V. Because Gamma(y*|x1) = 0, y* certifies that the sensor was typical.
    Used for sublinear channel uses (k slots), for the almost-sure cost
    constraint (signal in the first slots, zero symbol elsewhere), and for the
    expected-cost regimes on partially connected channels.
``zero_word``
    Expected-cost regimes on fully connected channels: send 0^n when U^n is
    mu_n-typical for P_U (or, when the constraint binds under both hypotheses,
    also for Q_U), else x_hat^n. Accept iff Y^n is mu_n-typical for
    Gamma(.|0) and V^n is typical for P_V.
``local``
    No communication; accept iff V^n is mu-typical for P_V.

All sequence arguments may be batched: the last axis is time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel_analysis import Triple, best_binary_relay_exponent, classify
from .errors import RegimeMismatch, ScheduleViolation, ValidationError
from .prob_core import CostFunction, Dmc, JointPmf, Pmf
from .typicality import Box

DEFAULT_MU = 0.05


class Regime(str, enum.Enum):
    SUBLINEAR_USES = "SublinearUses"
    STRICT_COST = "StrictCost"
    EXPECTED_COST_H0 = "ExpectedCostH0"
    EXPECTED_COST_BOTH = "ExpectedCostBoth"
    LOCAL_ONLY = "LocalOnly"


class Mode(str, enum.Enum):
    TRIPLE = "triple"
    ZERO_WORD = "zero_word"
    LOCAL = "local"


EXPECTED_COST_REGIMES = (Regime.EXPECTED_COST_H0, Regime.EXPECTED_COST_BOTH)
COST_REGIMES = (Regime.STRICT_COST,) + EXPECTED_COST_REGIMES


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


class ScheduleKind(str, enum.Enum):
    SQRT_N = "SqrtN"
    LOG_N = "LogN"
    TABLE = "Table"


@dataclass(frozen=True)
class Schedule:
    """A growth schedule n -> value, e.g. k(n) or C_n.

    ``SqrtN`` is ``scale * sqrt(n)``, ``LogN`` is ``scale * log2(n)``, and
    ``Table`` looks ``n`` up in an explicit mapping.
    """

    kind: ScheduleKind = ScheduleKind.SQRT_N
    scale: float = 1.0
    table: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not self.scale > 0:
            raise ValidationError(f"schedule scale must be positive, got {self.scale!r}")
        if self.kind is ScheduleKind.TABLE:
            if not self.table:
                raise ValidationError("table schedule needs at least one entry")
            tbl = tuple(sorted((int(n), float(v)) for n, v in self.table))
            if any(v <= 0 for _, v in tbl):
                raise ValidationError("schedule values must be positive")
            object.__setattr__(self, "table", tbl)

    def __call__(self, n: int) -> float:
        if self.kind is ScheduleKind.SQRT_N:
            return self.scale * math.sqrt(n)
        if self.kind is ScheduleKind.LOG_N:
            return self.scale * math.log2(n)
        for m, v in self.table:
            if m == n:
                return v
        raise ScheduleViolation(f"table schedule has no entry for n={n}")

    def channel_uses(self, n: int) -> int:
        """Integer version ``max(1, ceil(value))`` used for k(n)."""
        return max(1, math.ceil(self(n) - 1e-12))

    def check(self, grid: Sequence[int], integer: bool = False) -> None:
        """Sublinear-growth sanity check on the grid endpoints.

        Requires the value to grow and the ratio value/n to shrink between the
        smallest and largest n in the grid.
        """
        if len(grid) < 2:
            return
        lo, hi = min(grid), max(grid)
        f = self.channel_uses if integer else self
        a, b = f(lo), f(hi)
        if not b > a:
            raise ScheduleViolation(f"schedule does not grow on the grid: value {a} at n={lo}, {b} at n={hi}")
        if not b / hi < a / lo:
            raise ScheduleViolation(
                f"schedule is not sublinear on the grid: ratio {a / lo:.4g} at n={lo}, {b / hi:.4g} at n={hi}"
            )

    def as_dict(self) -> dict:
        d = {"kind": self.kind.value, "scale": self.scale}
        if self.table:
            d["table"] = [[n, v] for n, v in self.table]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        return cls(ScheduleKind(d.get("kind", "SqrtN")), float(d.get("scale", 1.0)),
                   tuple((int(n), float(v)) for n, v in d.get("table", ())))


@dataclass(frozen=True)
class Schedules:
    k: Schedule = field(default_factory=Schedule)
    cost: Schedule = field(default_factory=Schedule)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeInstance:
    regime: Regime
    mode: Mode
    n: int
    pu: Pmf
    qu: Pmf
    pv: Pmf
    gamma0: Pmf
    n_inputs: int
    n_outputs: int
    zero_symbol: int
    cost: CostFunction
    mu: float
    local_fallback: bool = False
    # triple mode
    triple: Optional[Triple] = None
    gamma_x0: Optional[float] = None
    k: Optional[int] = None
    # cost regimes
    C_n: Optional[float] = None
    k_prime: Optional[int] = None
    # expected-cost regimes
    x_hat: Optional[int] = None
    c_x_hat: Optional[float] = None
    mu_n: Optional[float] = None
    mu_v: Optional[float] = None

    @property
    def code_length(self) -> int:
        """Number of channel uses of the encoder output."""
        if self.mode is Mode.LOCAL:
            return 0
        if self.mode is Mode.TRIPLE and self.regime is Regime.SUBLINEAR_USES:
            return self.k
        return self.n

    @property
    def v_slack(self) -> float:
        return self.mu_v if self.mode is Mode.ZERO_WORD else self.mu

    # boxes shared by encode/decide and the exact evaluator
    def u_boxes(self) -> list[Box]:
        if self.mode is Mode.TRIPLE:
            return [Box.typical(self.pu, self.n, self.mu)]
        if self.mode is Mode.ZERO_WORD:
            boxes = [Box.typical(self.pu, self.n, self.mu_n)]
            if self.regime is Regime.EXPECTED_COST_BOTH:
                boxes.append(Box.typical(self.qu, self.n, self.mu_n))
            return boxes
        return []

    def v_box(self) -> Box:
        return Box.typical(self.pv, self.n, self.v_slack)

    def y_box(self) -> Box:
        return Box.typical(self.gamma0, self.n, self.mu_n)


def _counts(seq: np.ndarray, size: int) -> np.ndarray:
    return np.stack([(seq == a).sum(axis=-1) for a in range(size)], axis=-1)


def finite_k_feasibility(gamma_x0: float, k: int, epsilon: float) -> bool:
    """Whether the triple scheme with k uses meets type-I level epsilon: epsilon >= (1 - gamma)^k."""
    if not 0 < gamma_x0 <= 1:
        raise ValidationError(f"gamma_x0 must lie in (0, 1], got {gamma_x0!r}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k!r}")
    if not 0 <= epsilon < 1:
        raise ValidationError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    return epsilon >= (1.0 - gamma_x0) ** k


def resolve_instance(regime, n: int, P: JointPmf, Q: JointPmf, ch: Dmc, cost: CostFunction,
                     schedules: Schedules | None = None, mu: float | None = None,
                     mu_v: float | None = None, grid: Sequence[int] | None = None,
                     enforce_sublinear: bool = True) -> SchemeInstance:
    """Fix every parameter of a scheme at blocklength ``n``.

    ``grid`` (default ``[n]``) is where the schedules are sanity-checked;
    ``enforce_sublinear=False`` skips that check, which is how fixed finite-k
    instances are built.
    """
    regime = Regime(regime)
    if n < 1:
        raise ValidationError(f"blocklength must be >= 1, got {n}")
    if cost.n_inputs != ch.n_inputs:
        raise ValidationError(f"cost has {cost.n_inputs} inputs but channel has {ch.n_inputs}")
    if P.shape != Q.shape:
        raise ValidationError(f"P_UV shape {P.shape} differs from Q_UV shape {Q.shape}")
    schedules = schedules or Schedules()
    mu = DEFAULT_MU if mu is None else float(mu)
    if not mu > 0:
        raise ValidationError(f"mu must be positive, got {mu!r}")
    grid = list(grid) if grid else [n]
    conn = classify(ch)
    base = dict(
        regime=regime, n=n, pu=P.u, qu=Q.u, pv=P.v, gamma0=ch.row(cost.zero_symbol),
        n_inputs=ch.n_inputs, n_outputs=ch.n_outputs, zero_symbol=cost.zero_symbol, cost=cost, mu=mu,
    )

    if regime is Regime.LOCAL_ONLY:
        return SchemeInstance(mode=Mode.LOCAL, **base)

    if regime is Regime.SUBLINEAR_USES:
        if enforce_sublinear:
            schedules.k.check(grid, integer=True)
        if conn.is_fully_connected:
            return SchemeInstance(mode=Mode.LOCAL, local_fallback=True, **base)
        k = schedules.k.channel_uses(n)
        return SchemeInstance(mode=Mode.TRIPLE, triple=conn.triple, gamma_x0=conn.gamma_x0, k=k, **base)

    # cost-constrained regimes
    if enforce_sublinear:
        schedules.cost.check(grid)
    C_n = float(schedules.cost(n))
    k_prime = math.ceil(C_n / cost.c_min - 1e-12)
    extra = dict(C_n=C_n, k_prime=k_prime)
    if regime in EXPECTED_COST_REGIMES:
        x_hat, _ = best_binary_relay_exponent(ch, cost)
        c_hat = float(cost.costs[x_hat])
        mu_n = math.sqrt(P.shape[0] * c_hat / (4.0 * C_n))
        extra.update(x_hat=x_hat, c_x_hat=c_hat, mu_n=mu_n, mu_v=mu_n if mu_v is None else float(mu_v))

    if conn.is_fully_connected:
        if regime is Regime.STRICT_COST:
            return SchemeInstance(mode=Mode.LOCAL, local_fallback=True, **base, **extra)
        return SchemeInstance(mode=Mode.ZERO_WORD, **base, **extra)

    t = conn.triple
    worst = max(cost.costs[t.x0], cost.costs[t.x1])
    k_sig = min(n, math.floor(C_n / worst + 1e-12))
    if k_sig < 1:
        raise ScheduleViolation(
            f"C_n = {C_n:.6g} at n={n} cannot pay for one signalling symbol of cost {worst:.6g}"
        )
    return SchemeInstance(mode=Mode.TRIPLE, triple=t, gamma_x0=conn.gamma_x0, k=k_sig, **base, **extra)


# ---------------------------------------------------------------------------
# encoder / decision center
# ---------------------------------------------------------------------------


def _check_len(seq: np.ndarray, n: int, what: str) -> None:
    if seq.shape[-1] != n:
        raise ValidationError(f"{what} has length {seq.shape[-1]}, expected {n}")


def encode(inst: SchemeInstance, u_seq) -> np.ndarray:
    """Channel input word(s) for sensor sequence(s) ``u_seq``."""
    u = np.asarray(u_seq, dtype=np.int64)
    _check_len(u, inst.n, "u_seq")
    batch = u.shape[:-1]
    if inst.mode is Mode.LOCAL:
        return np.zeros(batch + (0,), dtype=np.int64)
    uc = _counts(u, inst.pu.alphabet_size)
    boxes = inst.u_boxes()
    if inst.mode is Mode.TRIPLE:
        if inst.triple is None:
            raise RegimeMismatch(f"{inst.regime.value} instance has no disconnection triple")
        typ = boxes[0].contains(uc)
        sym = np.where(typ, inst.triple.x0, inst.triple.x1)
        if inst.regime is Regime.SUBLINEAR_USES:
            return np.repeat(sym[..., None], inst.k, axis=-1)
        x = np.full(batch + (inst.n,), inst.zero_symbol, dtype=np.int64)
        x[..., :inst.k] = sym[..., None]
        return x
    # zero-word mode
    if inst.x_hat is None:
        raise RegimeMismatch(f"{inst.regime.value} instance has no relay symbol")
    typ = np.zeros(batch, dtype=bool)
    for b in boxes:
        typ |= b.contains(uc)
    sym = np.where(typ, inst.zero_symbol, inst.x_hat)
    return np.repeat(sym[..., None], inst.n, axis=-1)


def decide(inst: SchemeInstance, v_seq, y_seq=None) -> np.ndarray | int:
    """Decision(s) in {0, 1}; 0 means "accept H=0"."""
    v = np.asarray(v_seq, dtype=np.int64)
    _check_len(v, inst.n, "v_seq")
    vtyp = inst.v_box().contains(_counts(v, inst.pv.alphabet_size))
    if inst.mode is Mode.LOCAL:
        accept = vtyp
    else:
        if y_seq is None:
            raise ValidationError(f"{inst.mode.value} decisions need channel outputs")
        y = np.asarray(y_seq, dtype=np.int64)
        _check_len(y, inst.code_length, "y_seq")
        if inst.mode is Mode.TRIPLE:
            if inst.triple is None:
                raise RegimeMismatch(f"{inst.regime.value} instance has no disconnection triple")
            seen = np.any(y[..., :inst.k] == inst.triple.y_star, axis=-1)
            accept = seen & vtyp
        else:
            ytyp = inst.y_box().contains(_counts(y, inst.n_outputs))
            accept = ytyp & vtyp
    out = np.where(accept, 0, 1)
    return int(out) if out.ndim == 0 else out
