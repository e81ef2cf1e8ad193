"""Compiled inner loops for coordinate descent.

All kernels work in covariance form: ``G = X^T X`` and ``c = X^T r`` with
``r = y - X beta`` kept in sync as coordinates move.
"""

import numpy as np
from numba import njit

_DEDUP = 1e-12


@njit(cache=True)
def _abs_dev_sum(b, s):
    acc = 0.0
    for j in range(s.size):
        acc += abs(b - s[j])
    return acc


@njit(cache=True)
def phi_1d(g, z, lam1, lam2, others, b):
    """``0.5*g*b^2 - z*b + lam1*|b| + lam2*sum_j |b - others_j|``."""
    return 0.5 * g * b * b - z * b + lam1 * abs(b) + lam2 * _abs_dev_sum(b, others)


@njit(cache=True)
def min_1d(g, z, lam1, lam2, others):
    """Exact minimizer of :func:`phi_1d` given ``others`` sorted ascending.

    The derivative is piecewise linear with breaks at 0 and at each entry of
    ``others``.  Intervals between consecutive breakpoints are scanned in
    ascending order for an interior stationary point; when none exists the
    minimum sits on a breakpoint and every breakpoint is evaluated, ties going
    to 0 and then to the smaller magnitude.
    """
    m = others.size
    # 0 is merged into the sorted breakpoints after any equal entries
    z0 = np.searchsorted(others, 0.0, side="right")
    # distinct breakpoints; values closer than _DEDUP collapse (to 0 if 0 is involved)
    q = np.empty(m + 1)
    cnt = np.zeros(m + 1, dtype=np.int64)
    nq = 0
    zero_idx = -1
    last = 0.0
    for t in range(m + 1):
        is_zero = t == z0
        if t < z0:
            v = others[t]
        elif is_zero:
            v = 0.0
        else:
            v = others[t - 1]
        if nq > 0 and abs(v - last) <= _DEDUP * max(1.0, abs(v)):
            if is_zero:
                q[nq - 1] = 0.0
                zero_idx = nq - 1
            else:
                cnt[nq - 1] += 1
        else:
            q[nq] = v
            if is_zero:
                zero_idx = nq
            else:
                cnt[nq] = 1
            nq += 1
        last = v
    cum = np.cumsum(cnt[:nq])

    if g > 0.0:
        for i in range(nq + 1):
            below = cum[i - 1] if i > 0 else 0
            above = m - below
            s0 = -1.0 if i <= zero_idx else 1.0
            b = (z - lam1 * s0 - lam2 * (below - above)) / g
            lo = q[i - 1] if i > 0 else -np.inf
            hi = q[i] if i < nq else np.inf
            if lo < b < hi:
                return b

    # prefix sums over the sorted others for O(1) evaluation at each breakpoint
    pre = np.empty(m + 1)
    pre[0] = 0.0
    for t in range(m):
        pre[t + 1] = pre[t] + others[t]
    best = 0.0
    best_val = np.inf
    for i in range(nq):
        v = q[i]
        k = cum[i]
        dev = v * k - pre[k] + (pre[m] - pre[k]) - v * (m - k)
        val = 0.5 * g * v * v - z * v + lam1 * abs(v) + lam2 * dev
        eps = 1e-13 * max(1.0, abs(val))
        if val < best_val - eps:
            best, best_val = v, val
        elif abs(val - best_val) <= eps:
            if v == 0.0 and best != 0.0:
                best, best_val = v, min(val, best_val)
            elif best != 0.0 and abs(v) < abs(best):
                best, best_val = v, min(val, best_val)
    return best


@njit(cache=True)
def _others_sorted(beta, k):
    p = beta.size
    out = np.empty(p - 1)
    t = 0
    for j in range(p):
        if j != k:
            out[t] = beta[j]
            t += 1
    return np.sort(out)


@njit(cache=True)
def coordinate_update(G, c, beta, k, lam1, lam2):
    """Return ``(new_value, phi_new, phi_old)`` for the descent step at ``k``."""
    others = _others_sorted(beta, k)
    g = G[k, k]
    z = c[k] + g * beta[k]
    b = min_1d(g, z, lam1, lam2, others)
    return b, phi_1d(g, z, lam1, lam2, others, b), phi_1d(g, z, lam1, lam2, others, beta[k])


@njit(cache=True)
def descent_sweep(G, c, beta, lam1, lam2):
    """One cyclic sweep of descent steps.  Updates ``beta`` and ``c`` in place.

    Returns the total decrease of the objective.
    """
    p = beta.size
    total = 0.0
    for k in range(p):
        b, phi_new, phi_old = coordinate_update(G, c, beta, k, lam1, lam2)
        if phi_new < phi_old:
            delta = b - beta[k]
            for i in range(p):
                c[i] -= delta * G[i, k]
            beta[k] = b
            total += phi_old - phi_new
    return total


@njit(cache=True)
def pair_move(G, c, beta, k, l, lam1, lam2, sorted_b, pos):
    """Best ``gamma`` for the move ``beta_k = beta_l = gamma``; returns ``(gamma, delta_f)``."""
    p = beta.size
    others = np.empty(p - 2)
    t = 0
    pk = pos[k]
    pl = pos[l]
    for i in range(p):
        if i != pk and i != pl:
            others[t] = sorted_b[i]
            t += 1
    bk = beta[k]
    bl = beta[l]
    gkk = G[k, k]
    gll = G[l, l]
    gkl = G[k, l]
    zk = c[k] + gkk * bk + gkl * bl
    zl = c[l] + gkl * bk + gll * bl
    q = gkk + gll + 2.0 * gkl
    z = zk + zl
    gamma = min_1d(q, z, 2.0 * lam1, 2.0 * lam2, others)
    new = phi_1d(q, z, 2.0 * lam1, 2.0 * lam2, others, gamma)
    cur = (
        -zk * bk
        - zl * bl
        + 0.5 * (gkk * bk * bk + 2.0 * gkl * bk * bl + gll * bl * bl)
        + lam1 * (abs(bk) + abs(bl))
        + lam2 * (_abs_dev_sum(bk, others) + _abs_dev_sum(bl, others) + abs(bk - bl))
    )
    return gamma, new - cur


@njit(cache=True)
def fusion_scan(G, c, beta, lam1, lam2, adjacent_only):
    """Evaluate pair moves and return the best ``(k, l, gamma, delta_f)``.

    ``k == -1`` when no pair was evaluated.  Pairs are all ``k < l`` or, with
    ``adjacent_only``, neighbours in sorted-coefficient order.
    """
    p = beta.size
    order = np.argsort(beta, kind="mergesort")
    sorted_b = beta[order]
    pos = np.empty(p, dtype=np.int64)
    for i in range(p):
        pos[order[i]] = i
    best_k = -1
    best_l = -1
    best_gamma = 0.0
    best_delta = np.inf
    if adjacent_only:
        for i in range(p - 1):
            k = min(order[i], order[i + 1])
            l = max(order[i], order[i + 1])
            gamma, delta = pair_move(G, c, beta, k, l, lam1, lam2, sorted_b, pos)
            if delta < best_delta:
                best_k, best_l, best_gamma, best_delta = k, l, gamma, delta
    else:
        for k in range(p):
            for l in range(k + 1, p):
                gamma, delta = pair_move(G, c, beta, k, l, lam1, lam2, sorted_b, pos)
                if delta < best_delta:
                    best_k, best_l, best_gamma, best_delta = k, l, gamma, delta
    return best_k, best_l, best_gamma, best_delta


@njit(cache=True)
def enet_sweep(G, c, beta, l1, l2):
    """Cyclic soft-threshold sweep for ``0.5||r||^2 + l1*||b||_1 + l2*||b||^2``.

    Returns the largest absolute coordinate change.
    """
    p = beta.size
    maxchg = 0.0
    for k in range(p):
        gkk = G[k, k]
        z = c[k] + gkk * beta[k]
        a = abs(z) - l1
        b = 0.0
        if a > 0.0:
            b = np.sign(z) * a / (gkk + 2.0 * l2)
        delta = b - beta[k]
        if delta != 0.0:
            for i in range(p):
                c[i] -= delta * G[i, k]
            beta[k] = b
            if abs(delta) > maxchg:
                maxchg = abs(delta)
    return maxchg


@njit(cache=True)
def _pen_slope(beta, v, t, lam1, lam2, rank_w):
    u = beta + t * v
    order = np.argsort(u)
    acc1 = 0.0
    acc2 = 0.0
    for i in range(u.size):
        if u[i] > 0:
            acc1 += v[i]
        elif u[i] < 0:
            acc1 -= v[i]
        acc2 += rank_w[i] * v[order[i]]
    return lam1 * acc1 + lam2 * acc2


@njit(cache=True)
def _breakpoints(beta, v):
    p = beta.size
    out = np.empty(p + p * (p - 1) // 2)
    t = 0
    for i in range(p):
        if v[i] != 0.0:
            tz = -beta[i] / v[i]
            if tz > 0:
                out[t] = tz
                t += 1
    for i in range(p):
        for j in range(i + 1, p):
            dv = v[i] - v[j]
            if dv != 0.0:
                tp = -(beta[i] - beta[j]) / dv
                if tp > 0:
                    out[t] = tp
                    t += 1
    return np.unique(out[:t])


@njit(cache=True)
def line_search_step(beta, v, a, bq, lam1, lam2):
    """Step ``t >= 0`` minimizing ``a*t + 0.5*bq*t^2 + penalty(beta + t*v)``.

    The penalty is piecewise linear in ``t`` with kinks where a coordinate
    crosses zero or two coordinates cross; the derivative is increasing, so
    a binary search over the kink intervals finds the minimizer.  Returns
    ``(t, at_breakpoint)``.
    """
    p = beta.size
    rank_w = 2.0 * np.arange(1, p + 1) - p - 1
    bps = _breakpoints(beta, v)
    nint = bps.size + 1
    lo = 0
    hi = nint - 1
    while lo < hi:
        mid = (lo + hi) // 2
        s = 0.0 if mid == 0 else bps[mid - 1]
        e = bps[mid]
        ps = _pen_slope(beta, v, 0.5 * (s + e), lam1, lam2, rank_w)
        if a + bq * e + ps > 0:
            hi = mid
        else:
            lo = mid + 1
    s = 0.0 if lo == 0 else bps[lo - 1]
    if lo < nint - 1:
        e = bps[lo]
        ps = _pen_slope(beta, v, 0.5 * (s + e), lam1, lam2, rank_w)
        d_end = a + bq * e + ps
    else:
        ps = _pen_slope(beta, v, 2.0 * s + 1.0, lam1, lam2, rank_w)
        d_end = np.inf if bq > 0 else a + ps
    d_start = a + bq * s + ps
    if d_end <= 0 or d_start >= 0:
        # flat/unbounded last piece or a kink minimizer: stop at the interval start
        return s, True
    return -(a + ps) / bq, False


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True)
def snap(beta, v, t, new):
    """Make coordinates that meet zero or each other at step ``t`` exactly equal."""
    p = beta.size
    rt = 1e-10 * t
    parent = np.arange(p)
    is_zero = np.zeros(p, dtype=np.bool_)
    for i in range(p):
        if v[i] != 0.0 and abs(-beta[i] / v[i] - t) <= rt:
            is_zero[i] = True
    for i in range(p):
        for j in range(i + 1, p):
            dv = v[i] - v[j]
            if dv != 0.0 and abs(-(beta[i] - beta[j]) / dv - t) <= rt:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    root = np.empty(p, dtype=np.int64)
    for i in range(p):
        root[i] = _find(parent, i)
    sums = np.zeros(p)
    counts = np.zeros(p, dtype=np.int64)
    zero_root = np.zeros(p, dtype=np.bool_)
    for i in range(p):
        sums[root[i]] += new[i]
        counts[root[i]] += 1
        if is_zero[i]:
            zero_root[root[i]] = True
    out = new.copy()
    for i in range(p):
        r = root[i]
        if zero_root[r]:
            out[i] = 0.0
        elif counts[r] > 1:
            out[i] = sums[r] / counts[r]
    return out
