"""Jit-compiled implementations of the numeric hot kernels.

Twins of ``_numpy_kernels`` with the same signatures and the same pivot
rules; ``accel`` picks one module at import time. Loops are written out
so numba can compile them; matrix products go through np.dot and hit the
same BLAS as the numpy twin.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sqdist_matrix(x, y):
    """Pairwise squared euclidean distances, shape (len(x), len(y))."""
    n = x.shape[0]
    m = y.shape[0]
    dim = x.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(dim):
                d = y[j, k] - x[i, k]
                s += d * d
            out[i, j] = s
    return out


@njit(cache=True)
def sinkhorn_log(C, a, b, eps, tol, max_iter):
    """Entropic transport by log-domain alternating potential updates.

    Same scheme as the numpy twin: max-shifted log-sum-exp sweeps on the
    potentials, marginal violation checked after every iteration.
    Returns (P, err, n_iter).
    """
    ns, nt = C.shape
    f = np.zeros(ns, dtype=np.float64)
    g = np.zeros(nt, dtype=np.float64)
    log_a = np.log(a)
    log_b = np.log(b)
    P = np.empty((ns, nt), dtype=np.float64)
    for i in range(ns):
        for j in range(nt):
            P[i, j] = np.exp((f[i] + g[j] - C[i, j]) / eps)
    err = np.inf
    it_done = 0
    for it in range(1, max_iter + 1):
        for i in range(ns):
            mx = -np.inf
            for j in range(nt):
                m = (g[j] - C[i, j]) / eps
                if m > mx:
                    mx = m
            s = 0.0
            for j in range(nt):
                s += np.exp((g[j] - C[i, j]) / eps - mx)
            f[i] = eps * (log_a[i] - (mx + np.log(s)))
        for j in range(nt):
            mx = -np.inf
            for i in range(ns):
                m = (f[i] - C[i, j]) / eps
                if m > mx:
                    mx = m
            s = 0.0
            for i in range(ns):
                s += np.exp((f[i] - C[i, j]) / eps - mx)
            g[j] = eps * (log_b[j] - (mx + np.log(s)))
        err = 0.0
        for i in range(ns):
            rs = 0.0
            for j in range(nt):
                P[i, j] = np.exp((f[i] + g[j] - C[i, j]) / eps)
                rs += P[i, j]
            d = abs(rs - a[i])
            if d > err:
                err = d
        for j in range(nt):
            cs = 0.0
            for i in range(ns):
                cs += P[i, j]
            d = abs(cs - b[j])
            if d > err:
                err = d
        it_done = it
        if err < tol:
            break
    return P, err, it_done


@njit(cache=True)
def solve_uniform_transport(C, max_pivots):
    """Exact optimal transport between uniform marginals on a dense cost.

    Same algorithm and tie rules as the numpy twin: northwest-corner
    start, tree duals, Dantzig entering with Bland fallback after a
    degenerate run, minimum minus-arc flow leaving with linear-index
    ties, leaf-elimination flow recomputation at the end.
    Returns (plan, u, v, n_pivots, status).
    """
    ns, nt = C.shape
    a = 1.0 / ns
    bm = 1.0 / nt
    n_nodes = ns + nt

    basic = np.zeros((ns, nt), dtype=np.bool_)
    flow = np.zeros((ns, nt), dtype=np.float64)
    rem_r = np.full(ns, a, dtype=np.float64)
    rem_c = np.full(nt, bm, dtype=np.float64)
    i = 0
    j = 0
    while True:
        t = rem_r[i] if rem_r[i] <= rem_c[j] else rem_c[j]
        basic[i, j] = True
        flow[i, j] = t
        rem_r[i] -= t
        rem_c[j] -= t
        if i == ns - 1 and j == nt - 1:
            break
        if i == ns - 1:
            j += 1
        elif j == nt - 1:
            i += 1
        elif rem_r[i] <= rem_c[j]:
            i += 1
        else:
            j += 1

    u = np.zeros(ns, dtype=np.float64)
    v = np.zeros(nt, dtype=np.float64)
    queue = np.empty(n_nodes, dtype=np.int64)
    parent = np.empty(n_nodes, dtype=np.int64)
    cyc_i = np.empty(n_nodes, dtype=np.int64)
    cyc_j = np.empty(n_nodes, dtype=np.int64)

    cmax = np.max(np.abs(C))
    opt_tol = 1e-11 * (cmax if cmax > 1.0 else 1.0)
    bland_threshold = 8 * n_nodes + 64
    degen_run = 0
    bland = False
    n_pivots = 0
    status = 0

    while True:
        # duals over the basis tree, rooted at u[0] = 0
        row_seen = np.zeros(ns, dtype=np.bool_)
        col_seen = np.zeros(nt, dtype=np.bool_)
        u[0] = 0.0
        row_seen[0] = True
        queue[0] = 0
        qh = 0
        qt = 1
        while qh < qt:
            node = queue[qh]
            qh += 1
            if node < ns:
                i0 = node
                for jj in range(nt):
                    if basic[i0, jj] and not col_seen[jj]:
                        v[jj] = C[i0, jj] - u[i0]
                        col_seen[jj] = True
                        queue[qt] = ns + jj
                        qt += 1
            else:
                j0 = node - ns
                for ii in range(ns):
                    if basic[ii, j0] and not row_seen[ii]:
                        u[ii] = C[ii, j0] - v[j0]
                        row_seen[ii] = True
                        queue[qt] = ii
                        qt += 1

        # entering arc
        ei = -1
        ej = -1
        if bland:
            done = False
            for i in range(ns):
                if done:
                    break
                for j in range(nt):
                    if basic[i, j]:
                        continue
                    r = C[i, j] - u[i] - v[j]
                    if r < -opt_tol:
                        ei = i
                        ej = j
                        done = True
                        break
            if ei < 0:
                break
        else:
            best = -opt_tol
            for i in range(ns):
                for j in range(nt):
                    if basic[i, j]:
                        continue
                    r = C[i, j] - u[i] - v[j]
                    if r < best:
                        best = r
                        ei = i
                        ej = j
            if ei < 0:
                break
        if n_pivots >= max_pivots:
            status = 1
            break

        # unique tree path from row ei to column ej closes the cycle
        for n in range(n_nodes):
            parent[n] = -1
        row_seen2 = np.zeros(ns, dtype=np.bool_)
        col_seen2 = np.zeros(nt, dtype=np.bool_)
        row_seen2[ei] = True
        queue[0] = ei
        qh = 0
        qt = 1
        target = ns + ej
        while qh < qt and not col_seen2[ej]:
            node = queue[qh]
            qh += 1
            if node < ns:
                i0 = node
                for jj in range(nt):
                    if basic[i0, jj] and not col_seen2[jj]:
                        col_seen2[jj] = True
                        parent[ns + jj] = node
                        queue[qt] = ns + jj
                        qt += 1
            else:
                j0 = node - ns
                for ii in range(ns):
                    if basic[ii, j0] and not row_seen2[ii]:
                        row_seen2[ii] = True
                        parent[ii] = node
                        queue[qt] = ii
                        qt += 1

        # walk back from the column end; arcs alternate -, +, -, ...
        n_arcs = 0
        node = target
        while node != ei:
            p = parent[node]
            if node >= ns:
                cyc_i[n_arcs] = p
                cyc_j[n_arcs] = node - ns
            else:
                cyc_i[n_arcs] = node
                cyc_j[n_arcs] = p - ns
            n_arcs += 1
            node = p

        # leaving arc: minimum flow over minus arcs, smallest linear index
        theta = np.inf
        li = -1
        lj = -1
        for t in range(n_arcs):
            if t % 2 == 0:
                ft = flow[cyc_i[t], cyc_j[t]]
                if ft < theta or (
                    ft == theta and cyc_i[t] * nt + cyc_j[t] < li * nt + lj
                ):
                    theta = ft
                    li = cyc_i[t]
                    lj = cyc_j[t]

        if theta > 1e-15:
            flow[ei, ej] += theta
            for t in range(n_arcs):
                if t % 2 == 0:
                    flow[cyc_i[t], cyc_j[t]] -= theta
                else:
                    flow[cyc_i[t], cyc_j[t]] += theta
            degen_run = 0
            bland = False
        else:
            degen_run += 1
            if degen_run > bland_threshold:
                bland = True
        flow[li, lj] = 0.0
        basic[li, lj] = False
        basic[ei, ej] = True
        n_pivots += 1

    # recompute basic flows exactly from the marginals by leaf elimination
    deg = np.zeros(n_nodes, dtype=np.int64)
    rem = np.empty(n_nodes, dtype=np.float64)
    for i in range(ns):
        rem[i] = a
    for j in range(nt):
        rem[ns + j] = bm
    for i in range(ns):
        for j in range(nt):
            if basic[i, j]:
                deg[i] += 1
                deg[ns + j] += 1
    work = basic.copy()
    qh = 0
    qt = 0
    for node in range(n_nodes):
        if deg[node] == 1:
            queue[qt] = node
            qt += 1
    while qh < qt:
        node = queue[qh]
        qh += 1
        if deg[node] != 1:
            continue
        if node < ns:
            i0 = node
            j0 = -1
            for j in range(nt):
                if work[i0, j]:
                    j0 = j
                    break
            other = ns + j0
        else:
            j0 = node - ns
            i0 = -1
            for i in range(ns):
                if work[i, j0]:
                    i0 = i
                    break
            other = i0
        f = rem[node]
        if f < 0.0:
            f = 0.0
        flow[i0, j0] = f
        work[i0, j0] = False
        rem[node] = 0.0
        deg[node] = 0
        rem[other] -= f
        deg[other] -= 1
        if deg[other] == 1:
            queue[qt] = other
            qt += 1

    return flow, u, v, n_pivots, status


@njit(cache=True)
def hinge_objective(K, P, lam, A, b):
    """Weighted one-vs-all squared-hinge objective with kernel ridge term."""
    n, nc = P.shape
    KA = np.dot(K, A)
    loss = 0.0
    for jj in range(n):
        for k in range(nc):
            s = KA[jj, k] + b[k]
            up = 1.0 - s
            if up < 0.0:
                up = 0.0
            dn = 1.0 + s
            if dn < 0.0:
                dn = 0.0
            p = P[jj, k]
            loss += p * up * up + (1.0 - p) * dn * dn
    reg = 0.0
    for jj in range(n):
        for k in range(nc):
            reg += A[jj, k] * KA[jj, k]
    return loss + lam * reg


@njit(cache=True)
def hinge_gradient(K, P, lam, A, b, fit_intercept):
    """Gradient of ``hinge_objective`` w.r.t. (A, b)."""
    n, nc = P.shape
    KA = np.dot(K, A)
    G = np.empty((n, nc), dtype=np.float64)
    for jj in range(n):
        for k in range(nc):
            s = KA[jj, k] + b[k]
            up = 1.0 - s
            if up < 0.0:
                up = 0.0
            dn = 1.0 + s
            if dn < 0.0:
                dn = 0.0
            p = P[jj, k]
            G[jj, k] = -2.0 * p * up + 2.0 * (1.0 - p) * dn
    gA = np.dot(K, G) + 2.0 * lam * KA
    gb = np.zeros(nc, dtype=np.float64)
    if fit_intercept:
        for jj in range(n):
            for k in range(nc):
                gb[k] += G[jj, k]
    return gA, gb


@njit(cache=True)
def hinge_descent(K, P, lam, tol, max_iter, A0, b0, fit_intercept):
    """Damped-Newton descent on the squared-hinge objective.

    Same scheme and status codes as the numpy twin: per-class weighted
    ridge solves on the active-set curvature with a first-order fallback
    and Armijo backtracking; 0 = gradient tolerance met, 1 = iteration
    budget exhausted, 2 = no descent step at float precision.
    """
    n, nc = P.shape
    A = A0.copy()
    b = b0.copy()
    status = 1
    n_iter = max_iter
    grad_norm = np.inf
    cur = np.inf
    for it in range(1, max_iter + 1):
        KA = np.dot(K, A)
        S = np.empty((n, nc), dtype=np.float64)
        G = np.empty((n, nc), dtype=np.float64)
        loss = 0.0
        for jj in range(n):
            for k in range(nc):
                s = KA[jj, k] + b[k]
                S[jj, k] = s
                up = 1.0 - s
                if up < 0.0:
                    up = 0.0
                dn = 1.0 + s
                if dn < 0.0:
                    dn = 0.0
                p = P[jj, k]
                loss += p * up * up + (1.0 - p) * dn * dn
                G[jj, k] = -2.0 * p * up + 2.0 * (1.0 - p) * dn
        rAA = 0.0
        for jj in range(n):
            for k in range(nc):
                rAA += A[jj, k] * KA[jj, k]
        cur = loss + lam * rAA

        gA = np.dot(K, G) + 2.0 * lam * KA
        gb = np.zeros(nc, dtype=np.float64)
        if fit_intercept:
            for jj in range(n):
                for k in range(nc):
                    gb[k] += G[jj, k]
        gg = 0.0
        for jj in range(n):
            for k in range(nc):
                gg += gA[jj, k] * gA[jj, k]
        for k in range(nc):
            gg += gb[k] * gb[k]
        grad_norm = np.sqrt(gg)
        if grad_norm <= tol * (1.0 + abs(cur)):
            status = 0
            n_iter = it - 1
            break

        # per-class damped-Newton direction: jump to the minimizer of the
        # active-set quadratic model, a bordered weighted ridge solve
        D = np.empty((n, nc), dtype=np.float64)
        Db = np.zeros(nc, dtype=np.float64)
        for k in range(nc):
            if fit_intercept:
                M = np.empty((n + 1, n + 1), dtype=np.float64)
                rhs = np.empty(n + 1, dtype=np.float64)
                for jj in range(n):
                    for j2 in range(n):
                        M[jj, j2] = K[jj, j2]
                    M[jj, n] = 1.0
                    M[n, jj] = 1.0
                M[n, n] = 0.0
                for jj in range(n):
                    s = S[jj, k]
                    h = 0.0
                    if s < 1.0:
                        h += 2.0 * P[jj, k]
                    if s > -1.0:
                        h += 2.0 * (1.0 - P[jj, k])
                    w = 0.5 * h
                    if w < 1e-8:
                        w = 1e-8
                    M[jj, jj] += lam / w + 1e-10
                    rhs[jj] = s - G[jj, k] / (2.0 * w)
                rhs[n] = 0.0
                sol = np.linalg.solve(M, rhs)
                for jj in range(n):
                    D[jj, k] = sol[jj] - A[jj, k]
                Db[k] = sol[n] - b[k]
            else:
                M = np.empty((n, n), dtype=np.float64)
                rhs = np.empty(n, dtype=np.float64)
                for jj in range(n):
                    for j2 in range(n):
                        M[jj, j2] = K[jj, j2]
                for jj in range(n):
                    s = S[jj, k]
                    h = 0.0
                    if s < 1.0:
                        h += 2.0 * P[jj, k]
                    if s > -1.0:
                        h += 2.0 * (1.0 - P[jj, k])
                    w = 0.5 * h
                    if w < 1e-8:
                        w = 1e-8
                    M[jj, jj] += lam / w + 1e-10
                    rhs[jj] = s - G[jj, k] / (2.0 * w)
                sol = np.linalg.solve(M, rhs)
                for jj in range(n):
                    D[jj, k] = sol[jj] - A[jj, k]
        dd = 0.0
        for jj in range(n):
            for k in range(nc):
                dd += gA[jj, k] * D[jj, k]
        for k in range(nc):
            dd += gb[k] * Db[k]
        if not np.isfinite(dd) or dd >= 0.0:
            # first-order fallback: the gradient with its leading K
            # factor dropped, still a descent direction for PSD K
            dd = 0.0
            for jj in range(n):
                for k in range(nc):
                    D[jj, k] = -(G[jj, k] + 2.0 * lam * A[jj, k])
                    dd += gA[jj, k] * D[jj, k]
            for k in range(nc):
                Db[k] = -gb[k]
                dd -= gb[k] * gb[k]
            if dd >= 0.0:
                status = 2
                n_iter = it - 1
                break
        KD = np.dot(K, D)
        rAD = 0.0
        rDD = 0.0
        for jj in range(n):
            for k in range(nc):
                rAD += D[jj, k] * KA[jj, k]
                rDD += D[jj, k] * KD[jj, k]
        Sdir = np.empty((n, nc), dtype=np.float64)
        for jj in range(n):
            for k in range(nc):
                Sdir[jj, k] = KD[jj, k] + Db[k]
        t = 1.0
        accepted = False
        obj_t = cur
        for _ in range(60):
            loss_t = 0.0
            for jj in range(n):
                for k in range(nc):
                    st = S[jj, k] + t * Sdir[jj, k]
                    up = 1.0 - st
                    if up < 0.0:
                        up = 0.0
                    dn = 1.0 + st
                    if dn < 0.0:
                        dn = 0.0
                    p = P[jj, k]
                    loss_t += p * up * up + (1.0 - p) * dn * dn
            obj_t = loss_t + lam * (rAA + 2.0 * t * rAD + t * t * rDD)
            if obj_t <= cur + 1e-4 * t * dd:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            status = 2
            n_iter = it - 1
            break
        for jj in range(n):
            for k in range(nc):
                A[jj, k] += t * D[jj, k]
        if fit_intercept:
            for k in range(nc):
                b[k] += t * Db[k]
        cur = obj_t
        n_iter = it
    return A, b, n_iter, grad_norm, cur, status
