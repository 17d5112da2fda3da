"""Compiled inner loops for separated-set construction on window families."""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lo_distance(codes, levels, weights, use_max, p, f, eps):
    n, L = weights.shape
    dmax = 0.0
    for j in range(n):
        s = 0.0
        for c in range(L):
            w = weights[j, c]
            if w == 0.0:
                continue
            dv = w * abs(levels[codes[p, c]] - levels[codes[f, c]])
            if use_max:
                if dv > s:
                    s = dv
            else:
                s += dv
        if s > dmax:
            dmax = s
            if dmax >= eps:
                return dmax
    return dmax


@njit(cache=True, nogil=True)
def greedy_separated_kernel(codes, levels, weights, use_max, eps, pivots, nb_lo, nb_hi, init):
    """First-fit scan in row order; keeps a row iff its lo-distance to every kept row is >= eps.

    Rows listed in ``init`` are kept up front (the caller guarantees they are
    separated). Kept rows are hashed on their symbols in the ``pivots`` columns.
    Since the distance is at least the weighted gap in any single column, a row
    only needs the cells whose pivot symbols s' satisfy nb_lo[k, s] <= s' <= nb_hi[k, s].
    """
    N = codes.shape[0]
    m = levels.shape[0]
    K = pivots.shape[0]
    ncell = 1
    for k in range(K):
        ncell *= m
    head = np.full(ncell, -1, dtype=np.int64)
    nxt = np.full(N, -1, dtype=np.int64)
    kept = np.zeros(N, dtype=np.bool_)
    cur = np.zeros(K, dtype=np.int64)
    lo_k = np.zeros(K, dtype=np.int64)
    hi_k = np.zeros(K, dtype=np.int64)
    for t in range(init.shape[0]):
        p = init[t]
        key = 0
        for k in range(K):
            key = key * m + codes[p, pivots[k]]
        kept[p] = True
        nxt[p] = head[key]
        head[key] = p
    for p in range(N):
        if kept[p]:
            continue
        key = 0
        for k in range(K):
            s = codes[p, pivots[k]]
            key = key * m + s
            lo_k[k] = nb_lo[k, s]
            hi_k[k] = nb_hi[k, s]
            cur[k] = lo_k[k]
        ok = True
        done = False
        while not done:
            cell = 0
            for k in range(K):
                cell = cell * m + cur[k]
            f = head[cell]
            while f != -1:
                if _lo_distance(codes, levels, weights, use_max, p, f, eps) < eps:
                    ok = False
                    break
                f = nxt[f]
            if not ok:
                break
            # advance the odometer over neighbouring cells
            k = K - 1
            while k >= 0:
                cur[k] += 1
                if cur[k] <= hi_k[k]:
                    break
                cur[k] = lo_k[k]
                k -= 1
            if k < 0:
                done = True
        if ok:
            kept[p] = True
            nxt[p] = head[key]
            head[key] = p
    return np.nonzero(kept)[0]


@njit(cache=True, nogil=True)
def pairwise_lo_kernel(codes, levels, weights, use_max):
    N = codes.shape[0]
    out = np.zeros((N, N))
    for p in range(N):
        for f in range(p + 1, N):
            d = _lo_distance(codes, levels, weights, use_max, p, f, np.inf)
            out[p, f] = d
            out[f, p] = d
    return out


@njit(cache=True, nogil=True)
def _ba_step(mode, p, a, b, c, d, k0, K, q, qout, cq, cr, cy):
    """One Blahut-Arimoto update q -> qout; returns (gap, objective -sum p log Z)."""
    N = p.shape[0]
    M = q.shape[0]
    obj = 0.0
    if mode == 0:
        cq[0] = 0.0
        for y in range(M):
            cq[y + 1] = cq[y] + q[y]
        tot = cq[M]
        cr[0] = 0.0
        for x in range(N):
            z = k0 * tot + (1.0 - k0) * (cq[b[x]] - cq[a[x]])
            if z < 1e-300:
                z = 1e-300
            if p[x] > 0:
                cr[x + 1] = cr[x] + p[x] / z
                obj -= p[x] * np.log(z)
            else:
                cr[x + 1] = cr[x]
        rs = cr[N]
        for y in range(M):
            cy[y] = k0 * rs + (1.0 - k0) * (cr[d[y]] - cr[c[y]])
    else:
        for y in range(M):
            cy[y] = 0.0
        for x in range(N):
            if p[x] <= 0:
                continue
            z = 0.0
            for y in range(M):
                z += q[y] * K[x, y]
            obj -= p[x] * np.log(z)
            w = p[x] / z
            for y in range(M):
                cy[y] += w * K[x, y]
    mx = -np.inf
    acc = 0.0
    s = 0.0
    for y in range(M):
        lc = np.log(cy[y]) if cy[y] > 0 else -np.inf
        if lc > mx:
            mx = lc
        if cy[y] > 0:
            acc += q[y] * cy[y] * lc
        v = q[y] * cy[y]
        if v < 1e-300:
            v = 1e-300
        qout[y] = v
        s += v
    for y in range(M):
        qout[y] /= s
    return mx - acc, obj


@njit(cache=True, nogil=True)
def ba_squarem(mode, p, a, b, c, d, k0, K, q, tol, max_iters):
    """Blahut-Arimoto with SQUAREM extrapolation in log(q); ``q`` is updated in place.

    mode 0 uses the window kernel k0 + (1 - k0)[a_x <= y < b_x], mode 1 the
    dense kernel K.  Each cycle takes two plain steps, extrapolates along the
    squared-difference direction, and keeps the extrapolated point only when
    its objective beats the plain double step.  Returns (updates, last gap).
    """
    N = p.shape[0]
    M = q.shape[0]
    cq = np.zeros(M + 1)
    cr = np.zeros(N + 1)
    cy = np.zeros(M)
    q1 = np.empty(M)
    q2 = np.empty(M)
    q3 = np.empty(M)
    q4 = np.empty(M)
    trial = np.empty(M)
    it = 0
    gap = np.inf
    while it < max_iters:
        gap, obj0 = _ba_step(mode, p, a, b, c, d, k0, K, q, q1, cq, cr, cy)
        it += 1
        if gap < tol:
            break
        gap, obj1 = _ba_step(mode, p, a, b, c, d, k0, K, q1, q2, cq, cr, cy)
        it += 1
        if gap < tol:
            q[:] = q1
            break
        nr = 0.0
        nv = 0.0
        for y in range(M):
            l0 = np.log(q[y])
            l1 = np.log(q1[y])
            l2 = np.log(q2[y])
            r = l1 - l0
            v = l2 - 2.0 * l1 + l0
            nr += r * r
            nv += v * v
        if nv == 0.0:
            q[:] = q2
            continue
        alpha = -np.sqrt(nr / nv)
        if alpha > -1.0:
            alpha = -1.0
        mx = -np.inf
        for y in range(M):
            l0 = np.log(q[y])
            l1 = np.log(q1[y])
            l2 = np.log(q2[y])
            t = l0 - 2.0 * alpha * (l1 - l0) + alpha * alpha * (l2 - 2.0 * l1 + l0)
            trial[y] = t
            if t > mx:
                mx = t
        s = 0.0
        for y in range(M):
            v = np.exp(trial[y] - mx)
            if v < 1e-300:
                v = 1e-300
            trial[y] = v
            s += v
        for y in range(M):
            trial[y] /= s
        _, obj_t = _ba_step(mode, p, a, b, c, d, k0, K, trial, q3, cq, cr, cy)
        _, obj_2 = _ba_step(mode, p, a, b, c, d, k0, K, q2, q4, cq, cr, cy)
        it += 2
        if obj_t <= obj_2:
            q[:] = q3
        else:
            q[:] = q4
    return it, gap


@njit(cache=True, nogil=True)
def ba_window_stats(p, a, b, k0, q):
    """(distortion, sum_x p_x log Z_x) for the window kernel at q."""
    M = q.shape[0]
    cq = np.zeros(M + 1)
    for y in range(M):
        cq[y + 1] = cq[y] + q[y]
    tot = cq[M]
    dist = 0.0
    plogz = 0.0
    for x in range(p.shape[0]):
        if p[x] <= 0:
            continue
        inside = cq[b[x]] - cq[a[x]]
        z = max(k0 * tot + (1.0 - k0) * inside, 1e-300)
        dist += p[x] * k0 * (tot - inside) / z
        plogz += p[x] * np.log(z)
    return dist, plogz
