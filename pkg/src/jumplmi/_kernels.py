"""Loop-shaped numerical kernels.

The Jacobi eigensolver has two genuinely different implementations: a
rotation-by-rotation nested loop that numba compiles well, and a vectorized
numpy variant whose inner updates are whole-row/column slice operations.
``jacobi_eigenvalues`` dispatches on the selected backend. Both mutate the
matrix they are given, so callers pass a copy.
"""

import numpy as np

from ._backend import USING_NUMBA, maybe_jit


def _jacobi_loops(a, sweep_limit, off_tol):
    # Cyclic Jacobi with explicit rotations. Written with plain loops so
    # numba can compile it; runs uncompiled on the numpy backend only in
    # tests and benchmarks.
    n = a.shape[0]
    for _sweep in range(sweep_limit):
        off2 = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off2 += 2.0 * a[i, j] * a[i, j]
        if off2 <= off_tol * off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * aiq
                    a[i, q] = s * aip + c * aiq
                for j in range(n):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - s * aqj
                    a[q, j] = s * apj + c * aqj
                a[p, q] = 0.0
                a[q, p] = 0.0
    d = np.empty(n)
    for i in range(n):
        d[i] = a[i, i]
    return d


jacobi_loops = maybe_jit(_jacobi_loops)


def jacobi_numpy(a, sweep_limit, off_tol):
    """Vectorized cyclic Jacobi: each rotation updates whole rows/columns."""
    n = a.shape[0]
    for _sweep in range(sweep_limit):
        off2 = 2.0 * float(np.sum(np.triu(a, 1) ** 2))
        if off2 <= off_tol * off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
    return np.diagonal(a).copy()


def jacobi_eigenvalues(a, sweep_limit, off_tol):
    """Diagonal of the Jacobi-rotated matrix (unsorted). Mutates ``a``."""
    if USING_NUMBA:
        return jacobi_loops(a, sweep_limit, off_tol)
    return jacobi_numpy(a, sweep_limit, off_tol)


# ---------------------------------------------------------------------------
# Per-trial trajectory kernels. Each reads exactly one component row of
# (d, lin) per iteration and keeps the Lyapunov value through O(p)
# accumulator updates, so a trial of length T costs O(T p) independent of n.
# Deviations are measured against the supplied equilibrium tables; recorded
# values are (V, ||C xi - xstar||^2, ||xi - xi*||^2) at every state 0..T.


def _saga_trial(d, lin, gstar, xstar, x0, y0, idx, alpha, corr, w1, w2):
    # corr = 1 gives the bias-corrected table update, corr = 1/n the
    # averaged one (sag). V = w1 sum_i ||y_i - y_i*||^2 + w2 ||x - x*||^2.
    n, p = d.shape
    iters = idx.shape[0]
    V = np.empty(iters + 1)
    dist2 = np.empty(iters + 1)
    xi2 = np.empty(iters + 1)
    x = x0.copy()
    y = y0.copy()
    ybar = np.zeros(p)
    sy2 = 0.0
    for j in range(n):
        for t in range(p):
            ybar[t] += y[j, t] / n
            e = y[j, t] - gstar[j, t]
            sy2 += e * e
    dx2 = 0.0
    for t in range(p):
        e = x[t] - xstar[t]
        dx2 += e * e
    V[0] = max(w1 * sy2 + w2 * dx2, 0.0)
    dist2[0] = dx2
    xi2[0] = sy2 + dx2
    for k in range(iters):
        i = idx[k]
        dx2 = 0.0
        for t in range(p):
            g = d[i, t] * x[t] + lin[i, t]
            old = y[i, t]
            # the step reads the pre-update table average and slot
            x[t] = x[t] - alpha * (corr * (g - old) + ybar[t])
            eo = old - gstar[i, t]
            en = g - gstar[i, t]
            sy2 += en * en - eo * eo
            ybar[t] += (g - old) / n
            y[i, t] = g
            e = x[t] - xstar[t]
            dx2 += e * e
        if sy2 < 0.0:
            sy2 = 0.0
        V[k + 1] = max(w1 * sy2 + w2 * dx2, 0.0)
        dist2[k + 1] = dx2
        xi2[k + 1] = sy2 + dx2
    return V, dist2, xi2, x, y


saga_trial = maybe_jit(_saga_trial)


def _finito_trial(d, lin, gstar, xstar, xtab0, y0, idx, alpha,
                  w1, w2, w3, w4, w5):
    # V = w1 sum||yt_i||^2 + w2 ||sum yt||^2 + 2 w3 <sum yt, sum xt>
    #   + w4 sum||xt_i||^2 + w5 ||sum xt||^2 on the deviation tables.
    n, p = d.shape
    iters = idx.shape[0]
    V = np.empty(iters + 1)
    dist2 = np.empty(iters + 1)
    xi2 = np.empty(iters + 1)
    x = xtab0.copy()
    y = y0.copy()
    sy = np.zeros(p)
    sx = np.zeros(p)
    ty = np.zeros(p)
    tx = np.zeros(p)
    sy2 = 0.0
    sx2 = 0.0
    for j in range(n):
        for t in range(p):
            sy[t] += y[j, t]
            sx[t] += x[j, t]
            ey = y[j, t] - gstar[j, t]
            ex = x[j, t] - xstar[t]
            ty[t] += ey
            tx[t] += ex
            sy2 += ey * ey
            sx2 += ex * ex
    dv2 = 0.0
    for t in range(p):
        e = sx[t] / n - alpha * sy[t] - xstar[t]
        dv2 += e * e
    V[0] = max(w1 * sy2 + w2 * np.dot(ty, ty) + 2.0 * w3 * np.dot(ty, tx)
               + w4 * sx2 + w5 * np.dot(tx, tx), 0.0)
    dist2[0] = dv2
    xi2[0] = sy2 + sx2
    for k in range(iters):
        i = idx[k]
        dv2 = 0.0
        for t in range(p):
            v = sx[t] / n - alpha * sy[t]
            g = d[i, t] * v + lin[i, t]
            oldy = y[i, t]
            sy[t] += g - oldy
            eo = oldy - gstar[i, t]
            en = g - gstar[i, t]
            sy2 += en * en - eo * eo
            ty[t] += g - oldy
            y[i, t] = g
            oldx = x[i, t]
            sx[t] += v - oldx
            eo = oldx - xstar[t]
            en = v - xstar[t]
            sx2 += en * en - eo * eo
            tx[t] += v - oldx
            x[i, t] = v
            e = sx[t] / n - alpha * sy[t] - xstar[t]
            dv2 += e * e
        if sy2 < 0.0:
            sy2 = 0.0
        if sx2 < 0.0:
            sx2 = 0.0
        V[k + 1] = max(w1 * sy2 + w2 * np.dot(ty, ty) + 2.0 * w3 * np.dot(ty, tx)
                       + w4 * sx2 + w5 * np.dot(tx, tx), 0.0)
        dist2[k + 1] = dv2
        xi2[k + 1] = sy2 + sx2
    return V, dist2, xi2, x, y


finito_trial = maybe_jit(_finito_trial)


def _sdca_trial(d, lin, gstar, xstar, y0, idx, atld, emn, w1, w2):
    # x is the running table sum over emn = ell2 * n; the equilibrium table
    # is -gstar. V = w1 sum||yt_i||^2 + w2 ||sum yt||^2.
    n, p = d.shape
    iters = idx.shape[0]
    V = np.empty(iters + 1)
    dist2 = np.empty(iters + 1)
    xi2 = np.empty(iters + 1)
    y = y0.copy()
    sy = np.zeros(p)
    ty = np.zeros(p)
    sy2 = 0.0
    for j in range(n):
        for t in range(p):
            sy[t] += y[j, t]
            e = y[j, t] + gstar[j, t]
            ty[t] += e
            sy2 += e * e
    dx2 = 0.0
    for t in range(p):
        e = sy[t] / emn - xstar[t]
        dx2 += e * e
    V[0] = max(w1 * sy2 + w2 * np.dot(ty, ty), 0.0)
    dist2[0] = dx2
    xi2[0] = sy2
    for k in range(iters):
        i = idx[k]
        dx2 = 0.0
        for t in range(p):
            g = d[i, t] * (sy[t] / emn) + lin[i, t]
            old = y[i, t]
            new = (1.0 - atld) * old - atld * g
            sy[t] += new - old
            eo = old + gstar[i, t]
            en = new + gstar[i, t]
            sy2 += en * en - eo * eo
            ty[t] += new - old
            y[i, t] = new
            e = sy[t] / emn - xstar[t]
            dx2 += e * e
        if sy2 < 0.0:
            sy2 = 0.0
        V[k + 1] = max(w1 * sy2 + w2 * np.dot(ty, ty), 0.0)
        dist2[k + 1] = dx2
        xi2[k + 1] = sy2
    return V, dist2, xi2, y


sdca_trial = maybe_jit(_sdca_trial)
