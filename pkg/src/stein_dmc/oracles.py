"""Independent reference computations used to check the fast paths.

Nothing here is on a production code path. Each oracle takes a different
route to the same quantity:

* ``transport_2x2_oracle``: the 2x2 transportation polytope has one free
  parameter ``t = pi(0, 0)``; grid search plus golden-section refinement.
* ``projected_newton_projection``: damped Newton steps confined to the null
  space of the marginal constraints (a projected descent, not IPF).
* ``relaxed_projection``: log-barrier Newton for the box-relaxed problem
  ``|pi_U - a| <= mu, |pi_V - b| <= mu``.
* ``brute_force_*``: explicit sums over every sequence.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.linalg import null_space

from .errors import ValidationError

LN2 = math.log(2.0)


def _kl_nats(x: np.ndarray, q: np.ndarray) -> float:
    m = x > 0
    return float(np.sum(x[m] * np.log(x[m] / q[m])))


# ---------------------------------------------------------------------------
# 2x2 one-parameter oracle
# ---------------------------------------------------------------------------


def transport_2x2_oracle(Q, a, b, grid_points: int = 1_000_000, xtol: float = 1e-14) -> tuple[float, float]:
    """Return ``(t*, value_bits)`` minimizing D(pi_t || Q) over the 2x2 polytope."""
    q = np.asarray(Q, dtype=float)
    a0 = float(np.asarray(a, dtype=float)[0])
    b0 = float(np.asarray(b, dtype=float)[0])
    lo = max(0.0, a0 + b0 - 1.0)
    hi = min(a0, b0)

    def pi_of(t):
        return np.array([[t, a0 - t], [b0 - t, 1.0 - a0 - b0 + t]])

    def f(t):
        p = np.clip(pi_of(t), 0.0, None)
        return _kl_nats(p, q)

    if hi - lo <= 0:
        t = lo
        return t, f(t) / LN2
    ts = np.linspace(lo, hi, grid_points)
    pis = np.stack([ts, a0 - ts, b0 - ts, 1.0 - a0 - b0 + ts], axis=1)
    pis = np.clip(pis, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pis > 0, pis * np.log(pis / q.reshape(1, 4)), 0.0)
    vals = terms.sum(axis=1)
    k = int(np.argmin(vals))
    left = ts[max(k - 1, 0)]
    right = ts[min(k + 1, grid_points - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = right - invphi * (right - left)
    d = left + invphi * (right - left)
    fc, fd = f(c), f(d)
    while right - left > xtol:
        if fc < fd:
            right, d, fd = d, c, fc
            c = right - invphi * (right - left)
            fc = f(c)
        else:
            left, c, fc = c, d, fd
            d = left + invphi * (right - left)
            fd = f(d)
    cands = [(vals[k], ts[k]), (fc, c), (fd, d)]
    best_v, best_t = min(cands)
    return float(best_t), float(best_v) / LN2


# ---------------------------------------------------------------------------
# null-space Newton / barrier solver
# ---------------------------------------------------------------------------


def _marginal_matrix(r: int, s: int) -> np.ndarray:
    A = np.zeros((r + s, r * s))
    for u in range(r):
        A[u, u * s:(u + 1) * s] = 1.0
    for v in range(s):
        A[r + v, v::s] = 1.0
    return A


def _newton_minimize(q, x0, Z, G=None, h=None, tol=1e-13, max_outer=60):
    """Minimize sum x ln(x/q) over x = x0 + Z z with Gx < h and x > 0."""
    x = x0.copy()
    has_ineq = G is not None and G.shape[0] > 0
    t = 1.0 if has_ineq else None

    def phi(x, t):
        if np.any(x <= 0):
            return math.inf
        val = float(np.sum(x * np.log(x / q)))
        if has_ineq:
            s = h - G @ x
            if np.any(s <= 0):
                return math.inf
            val = t * val - float(np.sum(np.log(s)))
        return val

    def newton(x, t):
        for _ in range(200):
            g = np.log(x / q) + 1.0
            H = np.diag(1.0 / x)
            if has_ineq:
                s = h - G @ x
                g = t * g + G.T @ (1.0 / s)
                H = t * H + G.T @ np.diag(1.0 / s**2) @ G
            gz = Z.T @ g
            Hz = Z.T @ H @ Z
            dz = -np.linalg.solve(Hz, gz)
            dec = float(-gz @ dz)
            if dec / 2.0 <= 1e-15 * max(1.0, t or 1.0):
                return x
            dx = Z @ dz
            step = 1.0
            f0 = phi(x, t)
            while step > 1e-20:
                xn = x + step * dx
                fn = phi(xn, t)
                if fn <= f0 - 0.25 * step * dec:
                    break
                step *= 0.5
            else:
                return x
            x = xn
        return x

    if not has_ineq:
        return newton(x, None)
    m = G.shape[0]
    for _ in range(max_outer):
        x = newton(x, t)
        if m / t < tol:
            break
        t *= 10.0
    return x


def projected_newton_projection(Q, a, b) -> tuple[np.ndarray, float]:
    """Equality-constrained I-projection; returns ``(minimizer, value_bits)``."""
    q = np.asarray(Q, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rows = np.flatnonzero(a > 0)
    cols = np.flatnonzero(b > 0)
    qs = q[np.ix_(rows, cols)]
    r, s = qs.shape
    x0 = np.outer(a[rows], b[cols]).reshape(-1)
    pi = np.zeros_like(q)
    if r == 1 or s == 1:
        x = x0
    else:
        Z = null_space(_marginal_matrix(r, s))
        x = _newton_minimize(qs.reshape(-1), x0, Z)
    pi[np.ix_(rows, cols)] = x.reshape(r, s)
    return pi, _kl_nats(pi.reshape(-1), q.reshape(-1)) / LN2


def relaxed_projection(Q, center_u, center_v, mu: float) -> tuple[np.ndarray, float]:
    """min D(pi || Q) over pmfs with |pi_U - center_u| <= mu and |pi_V - center_v| <= mu."""
    if not mu > 0:
        raise ValidationError("relaxation width must be positive")
    q = np.asarray(Q, dtype=float)
    a = np.asarray(center_u, dtype=float)
    b = np.asarray(center_v, dtype=float)
    r, s = q.shape
    A = _marginal_matrix(r, s)
    G = np.vstack([A, -A])
    centers = np.concatenate([a, b])
    h = np.concatenate([centers + mu, -(centers - mu)])
    # interior start: nudge the product of the centers toward uniform
    delta = 0.5 * mu
    x0 = ((1.0 - delta) * np.outer(a, b) + delta / (r * s)).reshape(-1)
    Z = null_space(np.ones((1, r * s)))
    x = _newton_minimize(q.reshape(-1), x0, Z, G, h)
    return x.reshape(r, s), _kl_nats(x, q.reshape(-1)) / LN2


# ---------------------------------------------------------------------------
# brute-force sequence sums
# ---------------------------------------------------------------------------


def all_sequences(alphabet: int, n: int) -> np.ndarray:
    """Every length-n sequence over ``range(alphabet)`` as rows of an array."""
    if alphabet ** n > 50_000_000:
        raise ValidationError(f"{alphabet}**{n} sequences is too many to enumerate")
    return np.array(list(itertools.product(range(alphabet), repeat=n)), dtype=np.int64).reshape(-1, n)


def brute_force_type_event(dist, n: int, predicate) -> float:
    """Sum of sequence probabilities over sequences whose count vector satisfies ``predicate``.

    ``dist`` is a flat pmf over cells; ``predicate`` receives the count vector.
    """
    p = np.asarray(dist, dtype=float).reshape(-1)
    total = 0.0
    for seq in all_sequences(p.size, n):
        counts = np.bincount(seq, minlength=p.size)
        if predicate(counts):
            total += float(np.prod(p[seq]))
    return total


def exhaustive_scheme_evaluation(inst, P, Q, ch) -> dict:
    """alpha, beta and expected costs by summing over every source pair and channel output.

    Source sequences are enumerated as joint-cell sequences; for each distinct
    input word the decision is evaluated on every output sequence. Only
    feasible for tiny n.
    """
    # imported here: this oracle exercises the production encoder/decoder
    from .schemes import Mode, decide, encode

    p = [np.asarray(d.probs, dtype=float) for d in (P, Q)]
    r, s = p[0].shape
    t = np.asarray(ch.transition, dtype=float)
    cells = all_sequences(r * s, inst.n)
    u, v = cells // s, cells % s
    words = encode(inst, u)
    word_cost = inst.cost.costs[words].sum(axis=1) if words.shape[1] else np.zeros(len(words))
    uniq, inv = np.unique(words, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    v_uniq, v_inv = np.unique(v, axis=0, return_inverse=True)
    v_inv = v_inv.reshape(-1)
    # accept[w, j] = Pr[decide = 0 | word w, V-sequence j]
    accept = np.zeros((uniq.shape[0], v_uniq.shape[0]))
    if inst.mode is Mode.LOCAL:
        accept[:] = (decide(inst, v_uniq) == 0)
    else:
        ys = all_sequences(ch.n_outputs, uniq.shape[1])
        for w, word in enumerate(uniq):
            py = np.prod(t[word[None, :], ys], axis=1)
            for j, vs in enumerate(v_uniq):
                d = decide(inst, np.broadcast_to(vs, (ys.shape[0], inst.n)), ys)
                accept[w, j] = float(np.sum(py[d == 0]))
    out = {}
    for name, pj in zip(("H0", "H1"), p):
        seq_prob = np.prod(pj.reshape(-1)[cells], axis=1)
        out[f"accept_{name}"] = float(np.sum(seq_prob * accept[inv, v_inv]))
        out[f"cost_{name}"] = float(np.sum(seq_prob * word_cost))
    out["alpha"] = 1.0 - out["accept_H0"]
    out["beta"] = out["accept_H1"]
    return out


def binary_count_distribution(P, n: int) -> np.ndarray:
    """Joint law of (#{i: U_i = 0}, #{i: V_i = 0}) for i.i.d. binary pairs, by convolution.

    ``out[a, b]`` is the probability of a zeros in U^n and b zeros in V^n.
    """
    p = np.asarray(P, dtype=float)
    if p.shape != (2, 2):
        raise ValidationError("binary count DP needs a 2x2 pmf")
    dist = np.zeros((n + 1, n + 1))
    dist[0, 0] = 1.0
    for _ in range(n):
        nxt = p[1, 1] * dist
        nxt[1:, :] += p[0, 1] * dist[:-1, :]
        nxt[:, 1:] += p[1, 0] * dist[:, :-1]
        nxt[1:, 1:] += p[0, 0] * dist[:-1, :-1]
        dist = nxt
    return dist
