"""Compiled inner loop of the endpoint sweep.

One call handles one series: prefix sums are accumulated sequentially and every
window is solved with scalar code, so the value of a window never depends on
which other windows are evaluated alongside it.
"""

import numpy as np
from numba import njit

OK, ILL_CONDITIONED, DEGENERATE, SINGULAR_RESTRICTION = 0, 1, 2, 3

DEGENERATE_RSS = 1e-12
QUARTIC_MAX_K = 5


@njit(cache=True)
def _spd_inverse(M, out, d, C, L, Li):
    """Invert SPD ``M`` into ``out`` via the equilibrated Cholesky factor.

    ``d``, ``C``, ``L``, ``Li`` are scratch space of matching size. Returns the
    1-norm condition number of the equilibrated matrix, or inf when it is not
    positive definite.
    """
    k = M.shape[0]
    for i in range(k):
        if not M[i, i] > 0.0:
            return np.inf
        d[i] = np.sqrt(M[i, i])
    for i in range(k):
        for j in range(k):
            C[i, j] = M[i, j] / (d[i] * d[j])
            L[i, j] = 0.0
            Li[i, j] = 0.0
    for j in range(k):
        s = C[j, j]
        for m in range(j):
            s -= L[j, m] * L[j, m]
        if not s > 0.0:
            return np.inf
        L[j, j] = np.sqrt(s)
        for i in range(j + 1, k):
            s = C[i, j]
            for m in range(j):
                s -= L[i, m] * L[j, m]
            L[i, j] = s / L[j, j]
    for i in range(k):
        Li[i, i] = 1.0 / L[i, i]
        for j in range(i):
            s = 0.0
            for m in range(j, i):
                s += L[i, m] * Li[m, j]
            Li[i, j] = -s / L[i, i]
    norm_c = 0.0
    norm_ci = 0.0
    for j in range(k):
        col_c = 0.0
        col_ci = 0.0
        for i in range(k):
            s = 0.0
            for m in range(max(i, j), k):
                s += Li[m, i] * Li[m, j]
            out[i, j] = s / (d[i] * d[j])
            col_c += abs(C[i, j])
            col_ci += abs(s)
        norm_c = max(norm_c, col_c)
        norm_ci = max(norm_ci, col_ci)
    return norm_c * norm_ci


@njit(cache=True)
def sweep_series(X, v, sel, p, min_window, robust, limit,
                 forward, forward_code, rolling, rolling_code, sup, sup_code, argmax):
    """Fill the per-endpoint outputs for one series.

    ``X`` holds the regressor rows (row ``r`` is observation ``r + p``), ``v``
    the tested equation's response, ``sel`` the tested regressor columns.
    """
    R, k = X.shape
    T = R + p
    q = sel.shape[0]
    quartic = robust and k <= QUARTIC_MAX_K

    Sxx = np.zeros((R + 1, k, k))
    Sxv = np.zeros((R + 1, k))
    Svv = np.zeros(R + 1)
    kq = k if quartic else 1
    Svvxx = np.zeros((R + 1, kq, kq))
    Svxxx = np.zeros((R + 1, kq, kq, kq))
    Sxxxx = np.zeros((R + 1, kq, kq, kq, kq))
    for r in range(R):
        vr = v[r]
        Svv[r + 1] = Svv[r] + vr * vr
        for a in range(k):
            Sxv[r + 1, a] = Sxv[r, a] + X[r, a] * vr
            for b in range(k):
                xab = X[r, a] * X[r, b]
                Sxx[r + 1, a, b] = Sxx[r, a, b] + xab
                if quartic:
                    Svvxx[r + 1, a, b] = Svvxx[r, a, b] + vr * vr * xab
                    for c in range(k):
                        Svxxx[r + 1, c, a, b] = Svxxx[r, c, a, b] + vr * X[r, c] * xab
                        for e in range(k):
                            Sxxxx[r + 1, c, e, a, b] = Sxxxx[r, c, e, a, b] + X[r, c] * X[r, e] * xab

    XtX = np.empty((k, k))
    A = np.empty((k, k))
    Xtv = np.empty(k)
    beta = np.empty(k)
    meat = np.empty((k, k))
    AsM = np.empty((q, k))
    V = np.empty((q, q))
    Vi = np.empty((q, q))
    dk, Ck, Lk, Lik = np.empty(k), np.empty((k, k)), np.empty((k, k)), np.empty((k, k))
    dq, Cq, Lq, Liq = np.empty(q), np.empty((q, q)), np.empty((q, q)), np.empty((q, q))

    for j in range(T - min_window + 1):
        end = min_window - 1 + j
        hi = end - p + 1
        n_start = end - min_window + 2
        best = -np.inf
        best_s = -1
        worst = 0
        for s in range(n_start):
            n = hi - s
            for a in range(k):
                Xtv[a] = Sxv[hi, a] - Sxv[s, a]
                for b in range(k):
                    XtX[a, b] = Sxx[hi, a, b] - Sxx[s, a, b]
            vtv = Svv[hi] - Svv[s]
            code = OK
            W = np.nan
            cond = _spd_inverse(XtX, A, dk, Ck, Lk, Lik)
            if not cond <= limit:
                code = ILL_CONDITIONED
            else:
                rss = vtv
                for a in range(k):
                    acc = 0.0
                    for b in range(k):
                        acc += A[a, b] * Xtv[b]
                    beta[a] = acc
                    rss -= acc * Xtv[a]
                tss = vtv - Xtv[0] * Xtv[0] / n
                if not rss > DEGENERATE_RSS * tss:
                    code = DEGENERATE
                else:
                    if robust:
                        if quartic:
                            for a in range(k):
                                for b in range(k):
                                    m = Svvxx[hi, a, b] - Svvxx[s, a, b]
                                    for c in range(k):
                                        m -= 2.0 * beta[c] * (Svxxx[hi, c, a, b] - Svxxx[s, c, a, b])
                                        for e in range(k):
                                            m += beta[c] * beta[e] * (
                                                Sxxxx[hi, c, e, a, b] - Sxxxx[s, c, e, a, b])
                                    meat[a, b] = m
                        else:
                            for a in range(k):
                                for b in range(k):
                                    meat[a, b] = 0.0
                            for r in range(s, hi):
                                e_r = v[r]
                                for a in range(k):
                                    e_r -= X[r, a] * beta[a]
                                e2 = e_r * e_r
                                for a in range(k):
                                    w = e2 * X[r, a]
                                    for b in range(a, k):
                                        meat[a, b] += w * X[r, b]
                            for a in range(k):
                                for b in range(a):
                                    meat[a, b] = meat[b, a]
                        for i in range(q):
                            for b in range(k):
                                acc = 0.0
                                for a in range(k):
                                    acc += A[sel[i], a] * meat[a, b]
                                AsM[i, b] = acc
                        for i in range(q):
                            for l in range(q):
                                acc = 0.0
                                for b in range(k):
                                    acc += AsM[i, b] * A[sel[l], b]
                                V[i, l] = acc
                    else:
                        omega = rss / n
                        for i in range(q):
                            for l in range(q):
                                V[i, l] = A[sel[i], sel[l]] * omega
                    cond = _spd_inverse(V, Vi, dq, Cq, Lq, Liq)
                    if not cond <= limit:
                        code = SINGULAR_RESTRICTION
                    else:
                        W = 0.0
                        for i in range(q):
                            for l in range(q):
                                W += beta[sel[i]] * Vi[i, l] * beta[sel[l]]
                        if W < 0.0:
                            W = 0.0
            if s == 0:
                forward[j] = W
                forward_code[j] = code
            if s == n_start - 1:
                rolling[j] = W
                rolling_code[j] = code
            if code == OK:
                if W > best:
                    best = W
                    best_s = s
            elif code > worst:
                worst = code
        if best_s >= 0:
            sup[j] = best
            sup_code[j] = OK
            argmax[j] = best_s
        else:
            sup[j] = np.nan
            sup_code[j] = worst
            argmax[j] = -1
