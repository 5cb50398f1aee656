"""Pure-numpy implementations of the numeric hot kernels.

Fallback twins of the jit-compiled routines in ``_numba_kernels``;
``accel`` picks one module at import time. Both twins follow the same
pivot rules in the transport simplex (row-major Dantzig entering with
first-index ties, Bland fallback after a degenerate run, leaving arc =
minimum minus-arc flow with linear-index ties), so they return the same
vertex plan on the same cost matrix.
"""

import numpy as np


def sqdist_matrix(x, y):
    """Pairwise squared euclidean distances, shape (len(x), len(y)).

    Row-blocked so peak memory stays O(len(y) * dim); the explicit
    difference form avoids the cancellation of the dot-product expansion.
    """
    n = x.shape[0]
    out = np.empty((n, y.shape[0]), dtype=np.float64)
    acc = np.empty(y.shape[0], dtype=np.float64)
    for i in range(n):
        # accumulate one feature at a time so the addition order matches
        # the scalar loop of the jit twin bit for bit
        acc[:] = 0.0
        for k in range(y.shape[1]):
            d = y[:, k] - x[i, k]
            acc += d * d
        out[i] = acc
    return out


def sinkhorn_log(C, a, b, eps, tol, max_iter):
    """Entropic transport by log-domain alternating potential updates.

    Potentials f, g start at zero; each sweep sets
    f_i = eps * (log a_i - LSE_j((g_j - C_ij) / eps)) and the symmetric
    g update, with a max-shifted log-sum-exp so small eps stays finite.
    Returns (P, err, n_iter) where err is the largest absolute marginal
    violation of the final plan; the caller decides whether a
    non-converged run is acceptable.
    """
    ns, nt = C.shape
    f = np.zeros(ns, dtype=np.float64)
    g = np.zeros(nt, dtype=np.float64)
    log_a = np.log(a)
    log_b = np.log(b)
    P = np.exp((f[:, None] + g[None, :] - C) / eps)
    err = np.inf
    it_done = 0
    for it in range(1, max_iter + 1):
        M = (g[None, :] - C) / eps
        mx = M.max(axis=1)
        f = eps * (log_a - (mx + np.log(np.sum(np.exp(M - mx[:, None]), axis=1))))
        M = (f[:, None] - C) / eps
        mx = M.max(axis=0)
        g = eps * (log_b - (mx + np.log(np.sum(np.exp(M - mx[None, :]), axis=0))))
        P = np.exp((f[:, None] + g[None, :] - C) / eps)
        err_r = np.max(np.abs(P.sum(axis=1) - a))
        err_c = np.max(np.abs(P.sum(axis=0) - b))
        err = err_r if err_r > err_c else err_c
        it_done = it
        if err < tol:
            break
    return P, err, it_done


def solve_uniform_transport(C, max_pivots):
    """Exact optimal transport between uniform marginals on a dense cost.

    Transportation simplex: northwest-corner start, duals solved over the
    basis tree, Dantzig entering rule (most negative reduced cost,
    row-major first on ties) with a Bland fallback once a run of
    degenerate pivots exceeds 8*(ns+nt)+64, leaving arc = minimum flow
    among minus arcs with ties to the smallest linear index. Flows are
    recomputed from the final basis by leaf elimination so the plan meets
    the marginals to float accuracy.

    Returns (plan, u, v, n_pivots, status); status 0 = optimal within
    1e-11 * max(1, |C|_max) on reduced costs, 1 = pivot budget exhausted.
    """
    ns, nt = C.shape
    a = 1.0 / ns
    bm = 1.0 / nt
    n_nodes = ns + nt

    # northwest-corner initial basis: ns + nt - 1 arcs, degenerate zeros
    # where a row and a column exhaust together
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
        # duals: u_i + v_j = C[i, j] on basis arcs, rooted at u[0] = 0;
        # every basis arc is used for exactly one assignment so its
        # reduced cost is exactly zero
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
                js = np.nonzero(basic[i0] & ~col_seen)[0]
                v[js] = C[i0, js] - u[i0]
                col_seen[js] = True
                for jj in js:
                    queue[qt] = ns + jj
                    qt += 1
            else:
                j0 = node - ns
                is_ = np.nonzero(basic[:, j0] & ~row_seen)[0]
                u[is_] = C[is_, j0] - v[j0]
                row_seen[is_] = True
                for ii in is_:
                    queue[qt] = ii
                    qt += 1

        # entering arc
        R = (C - u[:, None]) - v[None, :]
        R[basic] = 0.0
        if bland:
            flat = np.flatnonzero(R.ravel() < -opt_tol)
            if flat.size == 0:
                break
            e = int(flat[0])
        else:
            e = int(np.argmin(R))
            if R.ravel()[e] >= -opt_tol:
                break
        if n_pivots >= max_pivots:
            status = 1
            break
        ei = e // nt
        ej = e % nt

        # unique tree path from row ei to column ej closes the cycle
        parent[:] = -1
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
                js = np.nonzero(basic[i0] & ~col_seen2)[0]
                col_seen2[js] = True
                parent[ns + js] = node
                for jj in js:
                    queue[qt] = ns + jj
                    qt += 1
            else:
                j0 = node - ns
                is_ = np.nonzero(basic[:, j0] & ~row_seen2)[0]
                row_seen2[is_] = True
                parent[is_] = node
                for ii in is_:
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
    # over the final tree; kills the drift of incremental pivot updates
    deg = np.zeros(n_nodes, dtype=np.int64)
    rem = np.empty(n_nodes, dtype=np.float64)
    rem[:ns] = a
    rem[ns:] = bm
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


def hinge_objective(K, P, lam, A, b):
    """Weighted one-vs-all squared-hinge objective with kernel ridge term.

    J = sum_jk [ P_jk * max(0, 1 - S_jk)^2 + (1 - P_jk) * max(0, 1 + S_jk)^2 ]
        + lam * sum_k a_k' K a_k,  with scores S = K A + 1 b'.
    """
    S = K @ A + b[None, :]
    up = 1.0 - S
    dn = 1.0 + S
    up = np.where(up > 0.0, up, 0.0)
    dn = np.where(dn > 0.0, dn, 0.0)
    loss = np.sum(P * up * up + (1.0 - P) * dn * dn)
    reg = lam * np.sum(A * (K @ A))
    return loss + reg


def hinge_gradient(K, P, lam, A, b, fit_intercept):
    """Gradient of ``hinge_objective`` w.r.t. (A, b).

    dJ/dS = -2 P max(0, 1 - S) + 2 (1 - P) max(0, 1 + S); by symmetry of K
    the coefficient gradient is K (dJ/dS) + 2 lam K A and the intercept
    gradient is the column sum of dJ/dS (zero when the intercept is not
    fitted).
    """
    S = K @ A + b[None, :]
    up = 1.0 - S
    dn = 1.0 + S
    up = np.where(up > 0.0, up, 0.0)
    dn = np.where(dn > 0.0, dn, 0.0)
    G = -2.0 * P * up + 2.0 * (1.0 - P) * dn
    gA = K @ G + 2.0 * lam * (K @ A)
    if fit_intercept:
        gb = G.sum(axis=0)
    else:
        gb = np.zeros(P.shape[1], dtype=np.float64)
    return gA, gb


def hinge_descent(K, P, lam, tol, max_iter, A0, b0, fit_intercept):
    """Damped-Newton descent on the squared-hinge objective.

    Each iteration builds, per class, the quadratic model given by the
    active-set curvature h = 2 P 1{S<1} + 2 (1-P) 1{S>-1} and jumps to its
    minimizer: a weighted ridge solve (K + diag(lam / w)) a = targets with
    w = max(h/2, 1e-8), bordered by a mean-zero row when the intercept is
    fitted. The objective is piecewise quadratic, so once the active set
    settles the model is exact and the full step lands on the block
    minimum. Falls back to the first-order direction -(G + 2 lam A) if
    the solve goes non-finite or uphill; a backtracking line search
    (c1 = 1e-4, at most 60 halvings) keeps every accepted step a strict
    decrease either way. Stops when the true gradient norm falls below
    tol * (1 + |J|). Returns (A, b, n_iter, grad_norm, obj, status) with
    status 0 = gradient tolerance met, 1 = iteration budget exhausted,
    2 = no descent step at float precision (stationary).
    """
    n, m = P.shape
    A = A0.copy()
    b = b0.copy()
    status = 1
    n_iter = max_iter
    grad_norm = np.inf
    cur = np.inf
    diag = np.arange(n)
    for it in range(1, max_iter + 1):
        KA = K @ A
        S = KA + b[None, :]
        up = 1.0 - S
        dn = 1.0 + S
        up = np.where(up > 0.0, up, 0.0)
        dn = np.where(dn > 0.0, dn, 0.0)
        rAA = np.sum(A * KA)
        cur = np.sum(P * up * up + (1.0 - P) * dn * dn) + lam * rAA

        G = -2.0 * P * up + 2.0 * (1.0 - P) * dn
        gA = K @ G + 2.0 * lam * KA
        if fit_intercept:
            gb = G.sum(axis=0)
        else:
            gb = np.zeros(m, dtype=np.float64)
        gg = np.sum(gA * gA) + np.sum(gb * gb)
        grad_norm = np.sqrt(gg)
        if grad_norm <= tol * (1.0 + abs(cur)):
            status = 0
            n_iter = it - 1
            break

        D = np.empty_like(A)
        Db = np.zeros(m, dtype=np.float64)
        for k in range(m):
            s = S[:, k]
            h = np.where(s < 1.0, 2.0 * P[:, k], 0.0) + np.where(
                s > -1.0, 2.0 * (1.0 - P[:, k]), 0.0
            )
            w = np.maximum(0.5 * h, 1e-8)
            # the model gradient matches the true one at the current
            # point: targets tau = s - G / (2 w)
            tau = s - G[:, k] / (2.0 * w)
            ridge = lam / w + 1e-10
            if fit_intercept:
                M = np.empty((n + 1, n + 1), dtype=np.float64)
                M[:n, :n] = K
                M[diag, diag] += ridge
                M[:n, n] = 1.0
                M[n, :n] = 1.0
                M[n, n] = 0.0
                rhs = np.empty(n + 1, dtype=np.float64)
                rhs[:n] = tau
                rhs[n] = 0.0
                sol = np.linalg.solve(M, rhs)
                D[:, k] = sol[:n] - A[:, k]
                Db[k] = sol[n] - b[k]
            else:
                M = K + np.diag(ridge)
                D[:, k] = np.linalg.solve(M, tau) - A[:, k]
        dd = np.sum(gA * D) + np.sum(gb * Db)
        if not np.isfinite(dd) or dd >= 0.0:
            D = -(G + 2.0 * lam * A)
            Db = -gb
            dd = np.sum(gA * D) + np.sum(gb * Db)
            if dd >= 0.0:
                status = 2
                n_iter = it - 1
                break
        # the ridge term along the ray is quadratic in the step with
        # these three scalars
        KD = K @ D
        rAD = np.sum(D * KA)
        rDD = np.sum(D * KD)
        Sdir = KD + Db[None, :]
        t = 1.0
        accepted = False
        for _ in range(60):
            St = S + t * Sdir
            upt = 1.0 - St
            dnt = 1.0 + St
            upt = np.where(upt > 0.0, upt, 0.0)
            dnt = np.where(dnt > 0.0, dnt, 0.0)
            obj_t = np.sum(P * upt * upt + (1.0 - P) * dnt * dnt) + lam * (
                rAA + 2.0 * t * rAD + t * t * rDD
            )
            if obj_t <= cur + 1e-4 * t * dd:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            status = 2
            n_iter = it - 1
            break
        A += t * D
        if fit_intercept:
            b += t * Db
        cur = obj_t
        n_iter = it
    return A, b, n_iter, grad_norm, cur, status
