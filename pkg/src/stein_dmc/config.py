"""Problem configuration: one instance per JSON document.

Example::

    {
      "P_UV": [[0.4, 0.1], [0.1, 0.4]],
      "Q_UV": [[0.25, 0.25], [0.25, 0.25]],
      "channel": [[1.0, 0.0], [0.4, 0.6]],
      "cost": [0.0, 1.0],
      "zero_symbol": 0,
      "schedules": {"k": {"kind": "SqrtN", "scale": 1.0},
                    "cost": {"kind": "SqrtN", "scale": 1.0}},
      "mu": 0.05,
      "grid": [100, 200, 300, 400, 500],
      "epsilon": 0.05,
      "seed": 1,
      "trials": 100000,
      "regimes": ["SublinearUses", "LocalOnly"]
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ValidationError
from .prob_core import CostFunction, Dmc, JointPmf, validate_problem
from .schemes import Regime, Schedule, Schedules
from .typicality import DEFAULT_TYPE_CAP

DEFAULT_GRID = (100, 200, 300, 400, 500)
_KNOWN = {
    "P_UV", "Q_UV", "channel", "cost", "zero_symbol", "schedules", "mu", "mu_v", "grid",
    "epsilon", "seed", "trials", "regimes", "type_cap", "workers",
}


def _matrix(x, name: str) -> tuple[tuple[float, ...], ...]:
    try:
        rows = tuple(tuple(float(v) for v in row) for row in x)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a matrix of numbers") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{name} must be a non-empty rectangular matrix")
    return rows


@dataclass(frozen=True)
class ProblemConfig:
    P_UV: tuple[tuple[float, ...], ...]
    Q_UV: tuple[tuple[float, ...], ...]
    channel: tuple[tuple[float, ...], ...]
    cost: tuple[float, ...]
    zero_symbol: int = 0
    schedules: Schedules = field(default_factory=Schedules)
    mu: Optional[float] = None
    mu_v: Optional[float] = None
    grid: tuple[int, ...] = DEFAULT_GRID
    epsilon: float = 0.05
    seed: int = 0
    trials: int = 10_000
    regimes: tuple[Regime, ...] = tuple(Regime)
    type_cap: int = DEFAULT_TYPE_CAP
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValidationError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValidationError(f"trials must be a positive integer, got {self.trials!r}")
        if not self.grid or any(n < 1 for n in self.grid):
            raise ValidationError(f"grid must list positive blocklengths, got {list(self.grid)}")
        if len(set(self.grid)) != len(self.grid):
            raise ValidationError("grid has duplicate blocklengths")
        if self.mu is not None and not self.mu > 0:
            raise ValidationError(f"mu must be positive, got {self.mu!r}")
        if self.mu_v is not None and not self.mu_v > 0:
            raise ValidationError(f"mu_v must be positive, got {self.mu_v!r}")
        if self.type_cap < 1 or self.workers < 1:
            raise ValidationError("type_cap and workers must be positive")
        if not self.regimes:
            raise ValidationError("select at least one regime")
        P, Q, ch, cost = self.P, self.Q, self.dmc, self.cost_function
        validate_problem(P, Q)
        if ch.n_inputs != cost.n_inputs:
            raise ValidationError(f"channel has {ch.n_inputs} inputs but cost lists {cost.n_inputs}")

    # parsed views
    @property
    def P(self) -> JointPmf:
        return JointPmf(self.P_UV)

    @property
    def Q(self) -> JointPmf:
        return JointPmf(self.Q_UV)

    @property
    def dmc(self) -> Dmc:
        return Dmc(self.channel)

    @property
    def cost_function(self) -> CostFunction:
        return CostFunction(self.cost, self.zero_symbol)

    def with_overrides(self, seed=None, trials=None, grid=None) -> "ProblemConfig":
        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if trials is not None:
            kw["trials"] = int(trials)
        if grid is not None:
            kw["grid"] = tuple(int(n) for n in grid)
        return replace(self, **kw) if kw else self

    # serialization
    @classmethod
    def from_dict(cls, d: dict) -> "ProblemConfig":
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object")
        unknown = set(d) - _KNOWN
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"P_UV", "Q_UV", "channel", "cost"} - set(d)
        if missing:
            raise ValidationError(f"missing config keys: {sorted(missing)}")
        kw = dict(
            P_UV=_matrix(d["P_UV"], "P_UV"),
            Q_UV=_matrix(d["Q_UV"], "Q_UV"),
            channel=_matrix(d["channel"], "channel"),
            cost=tuple(float(c) for c in d["cost"]),
        )
        sch = d.get("schedules", {})
        try:
            kw["schedules"] = Schedules(Schedule.from_dict(sch.get("k", {})), Schedule.from_dict(sch.get("cost", {})))
            for key, conv in (("zero_symbol", int), ("mu", float), ("mu_v", float), ("epsilon", float),
                              ("seed", int), ("trials", int), ("type_cap", int), ("workers", int)):
                if d.get(key) is not None:
                    if conv is int and isinstance(d[key], float) and not d[key].is_integer():
                        raise ValidationError(f"{key} must be an integer, got {d[key]!r}")
                    kw[key] = conv(d[key])
            if "grid" in d:
                kw["grid"] = tuple(int(n) for n in d["grid"])
            if "regimes" in d:
                kw["regimes"] = tuple(Regime(r) for r in d["regimes"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad config value: {exc}") from exc
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "P_UV": [list(r) for r in self.P_UV],
            "Q_UV": [list(r) for r in self.Q_UV],
            "channel": [list(r) for r in self.channel],
            "cost": list(self.cost),
            "zero_symbol": self.zero_symbol,
            "schedules": {"k": self.schedules.k.as_dict(), "cost": self.schedules.cost.as_dict()},
            "mu": self.mu,
            "mu_v": self.mu_v,
            "grid": list(self.grid),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "trials": self.trials,
            "regimes": [r.value for r in self.regimes],
            "type_cap": self.type_cap,
            "workers": self.workers,
        }

    @classmethod
    def loads(cls, text: str) -> "ProblemConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
        return cls.loads(text)

    def dumps(self) -> str:
        return dumps_structured(self.to_dict())


def format_float(x: float) -> str:
    """17 significant digits, locale independent; JSON-style names for non-finite values."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    # keep floats recognizable as floats after a JSON round trip
    return text if any(c in text for c in ".en") else text + ".0"


def dumps_structured(obj, indent: int = 2) -> str:
    """JSON text with every float written by :func:`format_float`."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, bool) or o is None or isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return format_float(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if hasattr(o, "item"):  # numpy scalar
            return enc(o.item(), level)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"
