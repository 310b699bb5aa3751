"""Compiled inner loops shared by the public modules.

All randomness enters through arrays of uniforms drawn by the caller, so the
kernels are pure functions of their arguments.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def nearest(X, C):
    n, d = X.shape
    m = C.shape[0]
    idx = np.zeros(n, np.int64)
    d2 = np.empty(n)
    for i in range(n):
        best = np.inf
        bj = 0
        for j in range(m):
            acc = 0.0
            for t in range(d):
                diff = X[i, t] - C[j, t]
                acc += diff * diff
            # strict '<' keeps the lowest index on ties
            if acc < best:
                best = acc
                bj = j
        idx[i] = bj
        d2[i] = best
    return idx, d2


@njit(cache=True)
def weighted_cost(X, w, C):
    _, d2 = nearest(X, C)
    total = 0.0
    for i in range(X.shape[0]):
        total += w[i] * d2[i]
    return total


@njit(cache=True)
def draw_index(p, target):
    """First index whose running sum of `p` exceeds `target` (p >= 0)."""
    acc = 0.0
    last = -1
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            acc += p[i]
            last = i
            if acc > target:
                return i
    # target fell past the end through rounding
    return last


@njit(cache=True)
def _update_min_d2(X, c, d2):
    n, d = X.shape
    for i in range(n):
        acc = 0.0
        for t in range(d):
            diff = X[i, t] - c[t]
            acc += diff * diff
        if acc < d2[i]:
            d2[i] = acc


@njit(cache=True)
def seed_indices(X, w, k_prime, u):
    """k-means++ sampling; returns indices of the chosen records."""
    n = X.shape[0]
    chosen = np.empty(k_prime, np.int64)
    total = 0.0
    for i in range(n):
        total += w[i]
    if total > 0.0:
        first = draw_index(w, u[0] * total)
    else:
        first = 0
    chosen[0] = first
    m = 1
    d2 = np.full(n, np.inf)
    _update_min_d2(X, X[first], d2)
    p = np.empty(n)
    while m < k_prime:
        tot = 0.0
        for i in range(n):
            p[i] = w[i] * d2[i]
            tot += p[i]
        if not tot > 0.0:
            break
        j = draw_index(p, u[m] * tot)
        chosen[m] = j
        m += 1
        _update_min_d2(X, X[j], d2)
    return chosen[:m]


@njit(cache=True)
def lloyd_once(X, w, C):
    n, d = X.shape
    m = C.shape[0]
    idx, _ = nearest(X, C)
    sums = np.zeros((m, d))
    mass = np.zeros(m)
    for i in range(n):
        j = idx[i]
        mass[j] += w[i]
        for t in range(d):
            sums[j, t] += w[i] * X[i, t]
    out = C.copy()
    for j in range(m):
        if mass[j] > 0.0:
            for t in range(d):
                out[j, t] = sums[j, t] / mass[j]
    return out


@njit(cache=True)
def sensitivity_draw(X, w, C, u, denom, eps_w):
    """Importance sampling against the bicriteria centers `C`.

    Returns (labels, cluster_mass, total_cost, picks, pick_weights,
    center_weights). When total_cost == 0 the sample arrays are empty.
    """
    n = X.shape[0]
    m = C.shape[0]
    labels, d2 = nearest(X, C)
    mass = np.zeros(m)
    cost = 0.0
    for i in range(n):
        mass[labels[i]] += w[i]
        cost += w[i] * d2[i]
    n_draws = u.shape[0]
    if not cost > 0.0:
        return (labels, mass, cost, np.empty(0, np.int64), np.empty(0),
                np.empty(0))
    sens = np.empty(n)
    total = 0.0
    for i in range(n):
        c = mass[labels[i]]
        v = w[i] * d2[i] / cost
        if c > 0.0:
            v += w[i] / c
        sens[i] = v
        total += v
    cum = np.cumsum(sens)
    picks = np.empty(n_draws, np.int64)
    pw = np.empty(n_draws)
    landed = np.zeros(m)
    for t in range(n_draws):
        j = np.searchsorted(cum, u[t] * total, side="right")
        if j >= n:
            j = n - 1
        while sens[j] <= 0.0 and j > 0:
            j -= 1
        picks[t] = j
        pw[t] = w[j] * total / (denom * sens[j])
        landed[labels[j]] += pw[t]
    cw = np.empty(m)
    for c in range(m):
        cw[c] = (1.0 + eps_w) * mass[c] - landed[c]
    return labels, mass, cost, picks, pw, cw
