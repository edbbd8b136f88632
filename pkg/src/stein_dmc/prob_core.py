"""Finite-alphabet probability primitives.

All objects are frozen dataclasses wrapping read-only float64 arrays. Simplex
constraints are checked to ``SIMPLEX_TOL``; inputs that miss by less than the
tolerance are renormalized, anything worse is rejected.

Divergences are in bits throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    AbsoluteContinuityViolation,
    SupportAssumptionViolation,
    ValidationError,
)

SIMPLEX_TOL = 1e-12

ArrayLike = Union[np.ndarray, list, tuple]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def _check_simplex(a: np.ndarray, what: str) -> np.ndarray:
    if a.size == 0:
        raise ValidationError(f"{what}: empty array")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what}: non-finite entry")
    if np.any(a < 0):
        idx = tuple(int(i) for i in np.argwhere(a < 0)[0])
        raise ValidationError(f"{what}: negative entry at {idx}: {a[idx]!r}")
    total = float(a.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValidationError(f"{what}: entries sum to {total!r}, not 1")
    return a / total


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over ``range(alphabet_size)``."""

    probs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.probs, dtype=np.float64)
        if a.ndim != 1:
            raise ValidationError(f"Pmf needs a 1-D array, got shape {a.shape}")
        object.__setattr__(self, "probs", _frozen(_check_simplex(a, "Pmf")))

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.shape[0])

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def __len__(self) -> int:
        return self.alphabet_size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"Pmf({self.probs.tolist()})"

    @classmethod
    def bernoulli(cls, p1: float) -> "Pmf":
        """Binary pmf with ``P(1) = p1``."""
        return cls([1.0 - p1, p1])

    @classmethod
    def point_mass(cls, size: int, symbol: int) -> "Pmf":
        a = np.zeros(size)
        a[symbol] = 1.0
        return cls(a)

    @classmethod
    def uniform(cls, size: int) -> "Pmf":
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf; rows are U-symbols, columns V-symbols."""

    probs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.probs, dtype=np.float64)
        if a.ndim != 2:
            raise ValidationError(f"JointPmf needs a 2-D array, got shape {a.shape}")
        object.__setattr__(self, "probs", _frozen(_check_simplex(a, "JointPmf")))

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.probs.shape[0]), int(self.probs.shape[1]))

    @property
    def u(self) -> Pmf:
        return Pmf(self.probs.sum(axis=1))

    @property
    def v(self) -> Pmf:
        return Pmf(self.probs.sum(axis=0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointPmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"JointPmf({self.probs.tolist()})"

    @classmethod
    def product(cls, pu: Pmf | ArrayLike, pv: Pmf | ArrayLike) -> "JointPmf":
        a = pu.probs if isinstance(pu, Pmf) else np.asarray(pu, dtype=float)
        b = pv.probs if isinstance(pv, Pmf) else np.asarray(pv, dtype=float)
        return cls(np.outer(a, b))

    def conditional_u_given_v(self) -> np.ndarray:
        """Matrix ``W[u, v] = P(u | v)``; columns with zero mass are left at zero."""
        col = self.probs.sum(axis=0)
        out = np.zeros_like(self.probs)
        nz = col > 0
        out[:, nz] = self.probs[:, nz] / col[nz]
        return out


@dataclass(frozen=True, eq=False)
class Dmc:
    """Discrete memoryless channel ``transition[x, y] = Gamma(y | x)``."""

    transition: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=np.float64)
        if t.ndim != 2:
            raise ValidationError(f"Dmc needs a 2-D matrix, got shape {t.shape}")
        rows = np.empty_like(t)
        for x in range(t.shape[0]):
            rows[x] = _check_simplex(t[x], f"Dmc row {x}")
        object.__setattr__(self, "transition", _frozen(rows))

    @property
    def n_inputs(self) -> int:
        return int(self.transition.shape[0])

    @property
    def n_outputs(self) -> int:
        return int(self.transition.shape[1])

    def row(self, x: int) -> Pmf:
        return Pmf(self.transition[x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dmc):
            return NotImplemented
        return bool(np.array_equal(self.transition, other.transition))

    def __hash__(self) -> int:
        return hash(self.transition.tobytes())

    def __repr__(self) -> str:
        return f"Dmc({self.transition.tolist()})"

    @classmethod
    def bsc(cls, eps: float) -> "Dmc":
        return cls([[1 - eps, eps], [eps, 1 - eps]])

    @classmethod
    def z_channel(cls, p: float) -> "Dmc":
        """Input 0 is noiseless; input 1 reaches output 1 w.p. ``p``."""
        return cls([[1.0, 0.0], [1 - p, p]])

    @classmethod
    def identity(cls, size: int) -> "Dmc":
        return cls(np.eye(size))


@dataclass(frozen=True, eq=False)
class CostFunction:
    """Per-input costs with a unique zero-cost symbol."""

    costs: np.ndarray
    zero_symbol: int = 0

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=np.float64)
        if c.ndim != 1 or c.size < 1:
            raise ValidationError(f"cost vector must be 1-D and non-empty, got shape {c.shape}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValidationError(f"costs must be finite and nonnegative: {c.tolist()}")
        z = int(self.zero_symbol)
        if not 0 <= z < c.size:
            raise ValidationError(f"zero_symbol {z} outside input alphabet of size {c.size}")
        if c[z] != 0.0:
            raise ValidationError(f"cost of zero symbol {z} is {c[z]!r}, must be 0")
        others = np.delete(c, z)
        if np.any(others <= 0):
            bad = [x for x in range(c.size) if x != z and c[x] <= 0]
            raise ValidationError(f"zero symbol not unique: inputs {bad} also have zero cost")
        object.__setattr__(self, "costs", _frozen(c))
        object.__setattr__(self, "zero_symbol", z)

    @property
    def n_inputs(self) -> int:
        return int(self.costs.shape[0])

    @property
    def c_min(self) -> float:
        """Smallest cost of a nonzero symbol (inf when the alphabet is just {0})."""
        others = np.delete(self.costs, self.zero_symbol)
        return float(others.min()) if others.size else float("inf")

    def __call__(self, x) -> np.ndarray | float:
        return self.costs[x]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CostFunction):
            return NotImplemented
        return self.zero_symbol == other.zero_symbol and bool(np.array_equal(self.costs, other.costs))

    def __hash__(self) -> int:
        return hash((self.costs.tobytes(), self.zero_symbol))

    def __repr__(self) -> str:
        return f"CostFunction({self.costs.tolist()}, zero_symbol={self.zero_symbol})"


def _as_array(p) -> np.ndarray:
    if isinstance(p, (Pmf, JointPmf)):
        return p.probs
    return np.asarray(p, dtype=np.float64)


def kl_divergence(p, q) -> float:
    """D(p || q) in bits, with 0 log 0 = 0.

    Raises AbsoluteContinuityViolation when p puts mass on a zero of q.
    """
    a = _as_array(p)
    b = _as_array(q)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    mask = a > 0
    bad = mask & (b <= 0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise AbsoluteContinuityViolation(f"p{idx} = {a[idx]!r} > 0 but q{idx} = 0")
    d = float(np.sum(a[mask] * (np.log2(a[mask]) - np.log2(b[mask]))))
    # Round-off can leave tiny negatives when p ~ q.
    return max(d, 0.0)


def marginals(j: JointPmf) -> tuple[Pmf, Pmf]:
    return j.u, j.v


@dataclass(frozen=True)
class Problem:
    """Validated (P_UV, Q_UV) pair."""

    P: JointPmf
    Q: JointPmf

    @property
    def u_size(self) -> int:
        return self.P.shape[0]

    @property
    def v_size(self) -> int:
        return self.P.shape[1]


def validate_problem(P: JointPmf, Q: JointPmf) -> Problem:
    if not isinstance(P, JointPmf):
        P = JointPmf(P)
    if not isinstance(Q, JointPmf):
        Q = JointPmf(Q)
    if P.shape != Q.shape:
        raise ValidationError(f"P_UV has shape {P.shape} but Q_UV has shape {Q.shape}")
    zeros = np.argwhere(Q.probs <= 0)
    if zeros.size:
        u, v = (int(i) for i in zeros[0])
        raise SupportAssumptionViolation(
            f"Q_UV({u},{v}) = {Q.probs[u, v]!r}; Q_UV must be strictly positive"
            + (f" (P_UV({u},{v}) = {P.probs[u, v]!r})" if P.probs[u, v] > 0 else "")
        )
    return Problem(P, Q)
