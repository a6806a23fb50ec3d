"""Compiled ADMM iteration loop (same updates as ``Subproblem._solve_numpy``)."""

import numpy as np
from numba import njit

from .proxops import _pav_rows


@njit(cache=True)
def _fro(A):
    s = 0.0
    for v in A.ravel():
        s += v * v
    return np.sqrt(s)


@njit(cache=True, nogil=True)
def admm_loop(Xd, XdT, Minv, Yr, alpha, m, G, P, nc, lam1, lam2, rho, relax,
              max_iters, tol_abs, tol_rel, adaptive, beta, V, W, Z, U_V, U_W, U_Z):
    n, r = Yr.shape
    target = np.empty((n, r))
    V_old = V.copy()
    W_old = W.copy()
    Z_old = Z.copy()
    tmp = np.empty((n, r))
    dv = np.empty((n, r))
    coefW = np.empty((P + 1, r))
    n_con = n * r * (2 if nc else 1) + P * r
    n_var = (P + 1) * r
    y_norm = _fro(Yr)
    r_norm = np.inf
    s_norm = np.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        for i in range(n):
            for l in range(r):
                t = Yr[i, l] - Z[i, l] + U_Z[i, l]
                if nc:
                    t += V[i, l] - U_V[i, l]
                target[i, l] = t
        rhs = XdT @ target
        for p in range(P):
            for l in range(r):
                rhs[p, l] += W[p, l] - U_W[p, l]
        beta[:, :] = Minv @ rhs
        fit = Xd @ beta

        V_old[:, :] = V
        W_old[:, :] = W
        Z_old[:, :] = Z

        r2 = 0.0
        if nc:
            for i in range(n):
                for l in range(r):
                    tmp[i, l] = relax * fit[i, l] + (1.0 - relax) * V_old[i, l] + U_V[i, l]
            _pav_rows(tmp, V)
            for i in range(n):
                for l in range(r):
                    fv = relax * fit[i, l] + (1.0 - relax) * V_old[i, l]
                    U_V[i, l] += fv - V[i, l]
                    d = fit[i, l] - V[i, l]
                    r2 += d * d

        k1 = lam1 / rho
        k2 = 2.0 * lam2 / rho
        for g in range(G // m):
            for l in range(r):
                nrm = 0.0
                for q in range(g * m, (g + 1) * m):
                    cw = relax * beta[q, l] + (1.0 - relax) * W_old[q, l] + U_W[q, l]
                    nrm += cw * cw
                nrm = np.sqrt(nrm)
                fac = (1.0 - k1 / nrm) / (1.0 + k2) if nrm > k1 else 0.0
                for q in range(g * m, (g + 1) * m):
                    cw = relax * beta[q, l] + (1.0 - relax) * W_old[q, l]
                    W[q, l] = (cw + U_W[q, l]) * fac
                    U_W[q, l] += cw - W[q, l]
        for q in range(G, P):
            for l in range(r):
                cw = relax * beta[q, l] + (1.0 - relax) * W_old[q, l]
                W[q, l] = (cw + U_W[q, l]) / (1.0 + lam2 / rho)
                U_W[q, l] += cw - W[q, l]
        for q in range(P):
            for l in range(r):
                d = beta[q, l] - W[q, l]
                r2 += d * d

        t_z = 1.0 / rho
        for i in range(n):
            for l in range(r):
                fz = relax * fit[i, l] + (1.0 - relax) * (Yr[i, l] - Z_old[i, l])
                a = Yr[i, l] - fz + U_Z[i, l]
                hi = t_z * alpha[l]
                lo = t_z * (alpha[l] - 1.0)
                if a > hi:
                    z = a - hi
                elif a < lo:
                    z = a - lo
                else:
                    z = 0.0
                Z[i, l] = z
                U_Z[i, l] += Yr[i, l] - fz - z
                d = Yr[i, l] - fit[i, l] - z
                r2 += d * d
        r_norm = np.sqrt(r2)

        fit_norm = _fro(fit)
        bP = 0.0
        for q in range(P):
            for l in range(r):
                bP += beta[q, l] * beta[q, l]
        ax = np.sqrt((2.0 if nc else 1.0) * fit_norm * fit_norm + bP)
        zz = _fro(W) ** 2 + _fro(Z) ** 2
        if nc:
            zz += _fro(V) ** 2
        eps_pri = np.sqrt(n_con) * tol_abs + tol_rel * max(ax, np.sqrt(zz), y_norm)

        if r_norm <= eps_pri or adaptive:
            for i in range(n):
                for l in range(r):
                    dz = Z[i, l] - Z_old[i, l]
                    dv[i, l] = (V[i, l] - V_old[i, l] - dz) if nc else -dz
            s_vec = XdT @ dv
            for q in range(P):
                for l in range(r):
                    s_vec[q, l] += W[q, l] - W_old[q, l]
            s_norm = rho * _fro(s_vec)
            u_scale = max(_fro(XdT @ U_Z), _fro(U_W))
            if nc:
                u_scale = max(u_scale, _fro(XdT @ U_V))
            eps_dual = np.sqrt(n_var) * tol_abs + tol_rel * rho * u_scale
            if r_norm <= eps_pri and s_norm <= eps_dual:
                ok = True
                if nc and r > 1:
                    coefW[:P, :] = W
                    coefW[P, :] = beta[P, :]
                    q_fit = Xd @ coefW
                    worst = 0.0
                    for i in range(n):
                        for l in range(r - 1):
                            worst = max(worst, q_fit[i, l] - q_fit[i, l + 1])
                    ok = worst <= tol_abs
                if ok:
                    converged = True
                    break
            if adaptive and it % 10 == 0:
                factor = 1.0
                if r_norm > 10.0 * s_norm:
                    factor = 2.0
                elif s_norm > 10.0 * r_norm:
                    factor = 0.5
                if factor != 1.0:
                    rho *= factor
                    for i in range(n):
                        for l in range(r):
                            U_V[i, l] /= factor
                            U_Z[i, l] /= factor
                    for q in range(P):
                        for l in range(r):
                            U_W[q, l] /= factor
    return it, r_norm, s_norm, converged, rho
