"""Method-of-types machinery.

Empirical types, strong typicality, composition enumeration and exact
probabilities of type-level events. Exact sums are accumulated in natural-log
space and exponentiated once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels
from .errors import ResourceLimit, ValidationError
from .prob_core import JointPmf, Pmf

DEFAULT_TYPE_CAP = 50_000_000
# slack on |freq - p| <= mu so exact ties survive round-off symmetrically
TYPICALITY_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class EmpiricalType:
    """Count vector (or matrix) of a length-n sequence."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        if np.any(c < 0):
            raise ValidationError(f"negative count in type {c.tolist()}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmpiricalType):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))

    def __hash__(self) -> int:
        return hash((self.counts.shape, self.counts.tobytes()))

    def __repr__(self) -> str:
        return f"EmpiricalType({self.counts.tolist()})"

    @classmethod
    def of(cls, seq, alphabet_size: int) -> "EmpiricalType":
        """Type of a symbol sequence."""
        return cls(np.bincount(np.asarray(seq, dtype=np.int64), minlength=alphabet_size))

    @classmethod
    def joint_of(cls, useq, vseq, shape: tuple[int, int]) -> "EmpiricalType":
        u = np.asarray(useq, dtype=np.int64)
        v = np.asarray(vseq, dtype=np.int64)
        flat = np.bincount(u * shape[1] + v, minlength=shape[0] * shape[1])
        return cls(flat.reshape(shape))


@dataclass(frozen=True)
class TypicalityParams:
    mu: float
    reference: Pmf

    def __post_init__(self):
        if not self.mu > 0:
            raise ValidationError(f"typicality slack mu must be > 0, got {self.mu!r}")
        if not isinstance(self.reference, Pmf):
            object.__setattr__(self, "reference", Pmf(self.reference))


def is_strongly_typical(seq_type: EmpiricalType, params: TypicalityParams) -> bool:
    ref = params.reference.probs
    counts = np.asarray(seq_type.counts).reshape(-1)
    if counts.shape != ref.shape:
        raise ValidationError(f"type has {counts.size} cells, reference has {ref.size}")
    freq = counts / counts.sum()
    zero = ref == 0
    if np.any(counts[zero] > 0):
        return False
    return bool(np.all(np.abs(freq[~zero] - ref[~zero]) <= params.mu + TYPICALITY_SLACK))


def typical_count_bounds(reference, n: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer box ``(lo, hi)`` of counts that are ``mu``-typical for ``reference``.

    Uses the same floating-point comparison as :func:`is_strongly_typical`, so
    box membership and the direct test never disagree. An empty range is
    encoded as ``lo > hi``.
    """
    ref = reference.probs if isinstance(reference, Pmf) else np.asarray(reference, dtype=float)
    c = np.arange(n + 1)
    freq = c / n
    lo = np.empty(ref.size, dtype=np.int64)
    hi = np.empty(ref.size, dtype=np.int64)
    for a, p in enumerate(ref):
        ok = (c == 0) if p == 0 else (np.abs(freq - p) <= mu + TYPICALITY_SLACK)
        idx = np.flatnonzero(ok)
        if idx.size:
            lo[a], hi[a] = idx[0], idx[-1]
        else:
            lo[a], hi[a] = 1, 0
    return lo, hi


def count_types(n: int, cells: int) -> int:
    return math.comb(n + cells - 1, cells - 1)


def _check_cap(n: int, cells: int, cap: int | None) -> int:
    cap = DEFAULT_TYPE_CAP if cap is None else cap
    total = count_types(n, cells)
    if total > cap:
        raise ResourceLimit(
            f"{total} types for n={n} over {cells} cells exceeds the cap of {cap}",
            count=total, cap=cap, n=n,
        )
    return total


def enumerate_joint_types(n: int, cells: int, cap: int | None = None) -> Iterator[EmpiricalType]:
    """Every composition of ``n`` into ``cells`` parts, in descending-lex order."""
    if n < 1 or cells < 1:
        raise ValidationError(f"need n >= 1 and cells >= 1, got n={n}, cells={cells}")
    _check_cap(n, cells, cap)
    x = [0] * cells
    x[0] = n
    while True:
        yield EmpiricalType(np.array(x))
        tail = x[-1]
        x[-1] = 0
        j = cells - 2
        while j >= 0 and x[j] == 0:
            j -= 1
        if j < 0:
            return
        x[j] -= 1
        x[j + 1] = tail + 1


def log_multinomial(counts: EmpiricalType | Sequence[int]) -> float:
    """ln(n! / prod counts_i!)."""
    c = counts.counts if isinstance(counts, EmpiricalType) else np.asarray(counts)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    return float(gammaln(c.sum() + 1.0) - gammaln(c + 1.0).sum())


def type_log_probability(counts: EmpiricalType, dist) -> float:
    """ln of the probability that an i.i.d. ``dist`` sequence has this type."""
    p = dist.probs if isinstance(dist, (Pmf, JointPmf)) else np.asarray(dist, dtype=float)
    c = np.asarray(counts.counts).reshape(-1)
    p = p.reshape(-1)
    if np.any((c > 0) & (p == 0)):
        return -math.inf
    nz = c > 0
    return log_multinomial(counts) + float(np.sum(c[nz] * np.log(p[nz])))


def typicality_event_probability(dist, n: int, predicate: Callable[[EmpiricalType], bool],
                                 cap: int | None = None) -> float:
    """Exact probability that the type of an i.i.d. ``dist`` sequence satisfies ``predicate``.

    ``predicate`` receives an :class:`EmpiricalType` shaped like ``dist``.
    This is the generic (pure Python) path; scheme evaluation uses
    :func:`marginal_box_logprob`, which is much faster.
    """
    p = dist.probs if isinstance(dist, (Pmf, JointPmf)) else np.asarray(dist, dtype=float)
    shape = p.shape
    logs = []
    for t in enumerate_joint_types(n, p.size, cap=cap):
        typ = EmpiricalType(t.counts.reshape(shape))
        if predicate(typ):
            lw = type_log_probability(typ, p)
            if lw > -math.inf:
                logs.append(lw)
    if not logs:
        return 0.0
    return float(min(1.0, math.exp(logsumexp(logs))))


@dataclass(frozen=True)
class Box:
    """Integer count box ``lo <= counts <= hi`` over one marginal alphabet."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    @classmethod
    def typical(cls, reference, n: int, mu: float) -> "Box":
        lo, hi = typical_count_bounds(reference, n, mu)
        return cls(tuple(int(v) for v in lo), tuple(int(v) for v in hi))

    def contains(self, counts) -> np.ndarray | bool:
        c = np.asarray(counts)
        return np.all((c >= np.asarray(self.lo)) & (c <= np.asarray(self.hi)), axis=-1)


def marginal_box_logprob(dist, n: int, u_boxes: Sequence[Box] = (), v_boxes: Sequence[Box] = (),
                         cap: int | None = None) -> np.ndarray:
    """Log-probabilities of all U-box/V-box membership patterns of the joint type.

    For a joint pmf ``dist`` (rows U, columns V) and blocklength ``n``, returns
    an array ``L`` of shape ``(2**len(u_boxes), 2**len(v_boxes))`` where
    ``exp(L[a, b])`` is the probability that the U-marginal type lies in
    exactly the U-boxes flagged by bitmask ``a`` and the V-marginal type in
    exactly the V-boxes flagged by ``b``. A :class:`Pmf` is treated as a
    one-column joint pmf (so only U-boxes make sense).
    """
    if isinstance(dist, Pmf):
        p = dist.probs[:, None]
    elif isinstance(dist, JointPmf):
        p = dist.probs
    else:
        p = np.asarray(dist, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
    r, s = p.shape
    _check_cap(n, r * s, cap)
    with np.errstate(divide="ignore"):
        logp = np.log(p.reshape(-1))
    row_of = np.repeat(np.arange(r), s)
    col_of = np.tile(np.arange(s), r)
    u_lo = np.array([b.lo for b in u_boxes], dtype=np.int64).reshape(-1, r)
    u_hi = np.array([b.hi for b in u_boxes], dtype=np.int64).reshape(-1, r)
    v_lo = np.array([b.lo for b in v_boxes], dtype=np.int64).reshape(-1, s)
    v_hi = np.array([b.hi for b in v_boxes], dtype=np.int64).reshape(-1, s)
    return kernels.box_event_logprob(n, logp, row_of, col_of, r, s, u_lo, u_hi, v_lo, v_hi)


def log_of_sum(logs) -> float:
    """ln(sum(exp(logs))) over a possibly empty collection."""
    arr = np.asarray(list(logs) if not isinstance(logs, np.ndarray) else logs, dtype=float).reshape(-1)
    arr = arr[arr > -np.inf]
    if arr.size == 0:
        return -math.inf
    return float(logsumexp(arr))
