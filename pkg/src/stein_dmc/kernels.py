"""Hot numeric kernels: joint-type enumeration with box events, and IPF.

Each kernel has a numba implementation (``_*_nb``) and a pure-numpy one
(``_*_np``). The public wrappers pick numba unless ``STEIN_DMC_NO_NUMBA`` is
set; both paths must agree to round-off and are cross-checked in the tests.

Box events
----------
A *box* over an alphabet of size r is a pair of integer vectors (lo, hi):
a count vector c is inside iff lo <= c <= hi elementwise. Strong typicality
of a marginal type is exactly such a box, so every scheme acceptance event is
a Boolean combination of U-marginal boxes and V-marginal boxes. The kernel
accumulates, for every joint type, its log-probability into the bin
``(U-box membership bitmask, V-box membership bitmask)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ._accel import njit, use_numba

# ---------------------------------------------------------------------------
# box-event enumeration
# ---------------------------------------------------------------------------


@njit
def _box_event_logprob_nb(n, logp, row_of, col_of, n_rows, n_cols, u_lo, u_hi, v_lo, v_hi):
    cells = logp.shape[0]
    n_ub = u_lo.shape[0]
    n_vb = v_lo.shape[0]
    lg = np.empty(n + 1)
    for k in range(n + 1):
        lg[k] = math.lgamma(k + 1.0)
    xlogp = np.zeros((cells, n + 1))
    for i in range(cells):
        for k in range(1, n + 1):
            xlogp[i, k] = k * logp[i]
    mx = np.full((1 << n_ub, 1 << n_vb), -np.inf)
    acc = np.zeros((1 << n_ub, 1 << n_vb))
    x = np.zeros(cells, dtype=np.int64)
    x[0] = n
    ucnt = np.zeros(n_rows, dtype=np.int64)
    vcnt = np.zeros(n_cols, dtype=np.int64)
    while True:
        lw = lg[n]
        for i in range(cells):
            lw += xlogp[i, x[i]] - lg[x[i]]
        if lw > -np.inf:
            for r in range(n_rows):
                ucnt[r] = 0
            for c in range(n_cols):
                vcnt[c] = 0
            for i in range(cells):
                ucnt[row_of[i]] += x[i]
                vcnt[col_of[i]] += x[i]
            ub = 0
            for b in range(n_ub):
                inside = True
                for r in range(n_rows):
                    if ucnt[r] < u_lo[b, r] or ucnt[r] > u_hi[b, r]:
                        inside = False
                        break
                if inside:
                    ub |= 1 << b
            vb = 0
            for b in range(n_vb):
                inside = True
                for c in range(n_cols):
                    if vcnt[c] < v_lo[b, c] or vcnt[c] > v_hi[b, c]:
                        inside = False
                        break
                if inside:
                    vb |= 1 << b
            m = mx[ub, vb]
            if lw > m:
                acc[ub, vb] = acc[ub, vb] * math.exp(m - lw) + 1.0
                mx[ub, vb] = lw
            else:
                acc[ub, vb] += math.exp(lw - m)
        # advance to the next composition in descending-lex order
        tail = x[cells - 1]
        x[cells - 1] = 0
        j = cells - 2
        while j >= 0 and x[j] == 0:
            j -= 1
        if j < 0:
            break
        x[j] -= 1
        x[j + 1] = tail + 1
    out = np.full((1 << n_ub, 1 << n_vb), -np.inf)
    for a in range(1 << n_ub):
        for b in range(1 << n_vb):
            if acc[a, b] > 0.0:
                out[a, b] = mx[a, b] + math.log(acc[a, b])
    return out


def compositions_array(m: int, c: int) -> np.ndarray:
    """All compositions of ``m`` into ``c`` nonnegative parts, descending-lex."""
    if c == 1:
        return np.array([[m]], dtype=np.int64)
    if c == 2:
        a = np.arange(m, -1, -1, dtype=np.int64)
        return np.stack([a, m - a], axis=1)
    if c == 3:
        a_vals = np.arange(m, -1, -1, dtype=np.int64)
        sizes = m - a_vals + 1
        a = np.repeat(a_vals, sizes)
        starts = np.repeat(np.cumsum(sizes) - sizes, sizes)
        b = (m - a) - (np.arange(a.size) - starts)
        return np.stack([a, b, m - a - b], axis=1)
    head = np.arange(m, -1, -1, dtype=np.int64)
    parts = []
    for h in head:
        rest = compositions_array(m - int(h), c - 1)
        parts.append(np.concatenate([np.full((rest.shape[0], 1), h, dtype=np.int64), rest], axis=1))
    return np.concatenate(parts, axis=0)


def _leading_parts(m: int, c: int):
    """Yield compositions of at most m into c parts plus the remainder."""
    if c == 0:
        yield (), m
        return
    for h in range(m, -1, -1):
        for rest, rem in _leading_parts(m - h, c - 1):
            yield (h,) + rest, rem


def _box_event_logprob_np(n, logp, row_of, col_of, n_rows, n_cols, u_lo, u_hi, v_lo, v_hi):
    cells = logp.shape[0]
    n_ub, n_vb = u_lo.shape[0], v_lo.shape[0]
    out = np.full((1 << n_ub, 1 << n_vb), -np.inf)
    lead = max(cells - 3, 0)
    tail_cells = cells - lead
    u_onehot = np.zeros((cells, n_rows))
    u_onehot[np.arange(cells), row_of] = 1.0
    v_onehot = np.zeros((cells, n_cols))
    v_onehot[np.arange(cells), col_of] = 1.0
    ub_weights = (1 << np.arange(n_ub)).astype(np.int64)
    vb_weights = (1 << np.arange(n_vb)).astype(np.int64)
    k = np.arange(n + 1)
    lgtab = gammaln(k + 1.0)
    with np.errstate(invalid="ignore"):
        # per-cell table of k*log p - log k!, with 0*log 0 = 0
        cell_tab = np.where(k[None, :] > 0, k[None, :] * logp[:, None], 0.0) - lgtab[None, :]
    lgn = lgtab[n]
    for head, rem in _leading_parts(n, lead):
        tail = compositions_array(rem, tail_cells)
        x = np.empty((tail.shape[0], cells), dtype=np.int64)
        x[:, :lead] = head
        x[:, lead:] = tail
        lw = np.full(x.shape[0], lgn)
        for i in range(cells):
            lw += cell_tab[i, x[:, i]]
        keep = lw > -np.inf
        if not np.any(keep):
            continue
        x, lw = x[keep], lw[keep]
        xf = x.astype(np.float64)
        uc = np.rint(xf @ u_onehot).astype(np.int64)
        vc = np.rint(xf @ v_onehot).astype(np.int64)
        uin = np.all((uc[:, None, :] >= u_lo[None]) & (uc[:, None, :] <= u_hi[None]), axis=2)
        vin = np.all((vc[:, None, :] >= v_lo[None]) & (vc[:, None, :] <= v_hi[None]), axis=2)
        ub = uin.astype(np.int64) @ ub_weights
        vb = vin.astype(np.int64) @ vb_weights
        key = ub * (1 << n_vb) + vb
        nbins = 1 << (n_ub + n_vb)
        mx = np.full(nbins, -np.inf)
        np.maximum.at(mx, key, lw)
        s = np.bincount(key, weights=np.exp(lw - mx[key]), minlength=nbins)
        with np.errstate(divide="ignore"):
            chunk = np.where(s > 0, mx + np.log(np.where(s > 0, s, 1.0)), -np.inf)
        out = np.logaddexp(out, chunk.reshape(out.shape))
    return out


def box_event_logprob(n, logp, row_of, col_of, n_rows, n_cols, u_lo, u_hi, v_lo, v_hi):
    """Natural-log probability mass per (U-box mask, V-box mask) bin.

    ``logp`` holds per-cell natural logs (``-inf`` for zero cells); cell ``i``
    contributes to U-symbol ``row_of[i]`` and V-symbol ``col_of[i]``.
    """
    args = (
        int(n),
        np.ascontiguousarray(logp, dtype=np.float64),
        np.ascontiguousarray(row_of, dtype=np.int64),
        np.ascontiguousarray(col_of, dtype=np.int64),
        int(n_rows),
        int(n_cols),
        np.ascontiguousarray(u_lo, dtype=np.int64).reshape(-1, n_rows),
        np.ascontiguousarray(u_hi, dtype=np.int64).reshape(-1, n_rows),
        np.ascontiguousarray(v_lo, dtype=np.int64).reshape(-1, n_cols),
        np.ascontiguousarray(v_hi, dtype=np.int64).reshape(-1, n_cols),
    )
    if use_numba():
        return _box_event_logprob_nb(*args)
    return _box_event_logprob_np(*args)


# ---------------------------------------------------------------------------
# iterative proportional fitting
# ---------------------------------------------------------------------------


@njit
def _ipf_nb(q, a, b, tol, max_iter):
    r, s = q.shape
    pi = q.copy()
    resid = np.inf
    it = 0
    rows = np.empty(r)
    cols = np.empty(s)
    while it < max_iter:
        it += 1
        for i in range(r):
            t = 0.0
            for j in range(s):
                t += pi[i, j]
            rows[i] = t
        for i in range(r):
            f = a[i] / rows[i]
            for j in range(s):
                pi[i, j] *= f
        for j in range(s):
            t = 0.0
            for i in range(r):
                t += pi[i, j]
            cols[j] = t
        for j in range(s):
            f = b[j] / cols[j]
            for i in range(r):
                pi[i, j] *= f
        resid = 0.0
        for i in range(r):
            t = 0.0
            for j in range(s):
                t += pi[i, j]
            d = abs(t - a[i])
            if d > resid:
                resid = d
        if resid <= tol:
            break
    return pi, it, resid


def _ipf_np(q, a, b, tol, max_iter):
    pi = q.copy()
    resid = np.inf
    it = 0
    while it < max_iter:
        it += 1
        pi *= (a / pi.sum(axis=1))[:, None]
        pi *= (b / pi.sum(axis=0))[None, :]
        resid = float(np.max(np.abs(pi.sum(axis=1) - a)))
        if resid <= tol:
            break
    return pi, it, resid


def ipf(q, a, b, tol=1e-10, max_iter=100_000):
    """Alternate row/column scaling of ``q`` toward marginals ``(a, b)``.

    ``q``, ``a`` and ``b`` must be strictly positive. Returns
    ``(pi, iterations, residual)`` where residual is the L-inf row-marginal
    error after the final column scaling (columns are then exact).
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if use_numba():
        pi, it, resid = _ipf_nb(q, a, b, float(tol), int(max_iter))
    else:
        pi, it, resid = _ipf_np(q, a, b, float(tol), int(max_iter))
    return pi, int(it), float(resid)
