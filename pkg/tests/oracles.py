"""Independent brute-force references used by the tests.

None of these share code with the package: they minimise the defining
objectives directly (grid search, exhaustive pooling patterns,
subgradient descent) so that agreement is evidence of correctness.
"""

import itertools

import numpy as np
from numba import njit


def pinball_ref(z, alpha):
    return alpha * z if z >= 0 else (alpha - 1.0) * z


def prox_quantile_grid(a, t, alpha, n_grid=10_000, width=None):
    """Minimise ``psi_alpha(x) + (x - a)^2 / (2t)`` over a 1-d grid.

    Returns ``(x_best, f_best, f)`` where ``f`` evaluates the objective.
    """
    width = width if width is not None else abs(a) + 2.0 * t + 1.0
    xs = np.linspace(a - width, a + width, n_grid)
    xs = np.append(xs, 0.0)
    vals = np.maximum(alpha * xs, (alpha - 1.0) * xs) + (xs - a) ** 2 / (2.0 * t)
    i = int(np.argmin(vals))

    def f(x):
        return max(alpha * x, (alpha - 1.0) * x) + (x - a) ** 2 / (2.0 * t)

    return xs[i], vals[i], f


def isotonic_bruteforce(v):
    """Projection onto {x_1 <= ... <= x_r} by enumerating all 2^(r-1)
    contiguous pooling patterns; the feasible candidate closest to ``v``
    is the projection."""
    v = np.asarray(v, dtype=float)
    r = v.size
    best, best_d = None, np.inf
    for cuts in itertools.product([0, 1], repeat=r - 1):
        x = np.empty(r)
        start = 0
        for i in range(r):
            if i == r - 1 or cuts[i]:
                x[start:i + 1] = v[start:i + 1].mean()
                start = i + 1
        if np.all(np.diff(x) >= -1e-15):
            dist = np.sum((x - v) ** 2)
            if dist < best_d:
                best, best_d = x, dist
    return best


def group_shrink_objective(x, v, k1, k2):
    return k1 * np.linalg.norm(x) + 0.5 * k2 * np.dot(x, x) + 0.5 * np.dot(x - v, x - v)


def group_shrink_numeric(v, k1, k2):
    """Minimise the group prox objective with scipy's Nelder-Mead from
    several starts (2-d or small inputs)."""
    from scipy.optimize import minimize

    v = np.asarray(v, dtype=float)
    starts = [np.zeros_like(v), v, v / (1.0 + k2), 0.5 * v]
    best = None
    for x0 in starts:
        res = minimize(group_shrink_objective, x0, args=(v, k1, k2), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20_000})
        if best is None or res.fun < best.fun:
            best = res
    return best.x, best.fun


# ----------------------------------------------------------- subgradient

@njit(cache=True)
def _penalised(x, D, y, alpha, m, G, lam1, lam2, mu, g, fit):
    # x packs (P + 1) x r coefficients row-major; last row = intercepts.
    # The subgradient is written into g (same layout).
    n, P = D.shape
    r = alpha.size
    for i in range(n):
        for l in range(r):
            s = x[P * r + l]
            for a in range(P):
                s += D[i, a] * x[a * r + l]
            fit[i, l] = s
    g[:] = 0.0
    f = 0.0
    for i in range(n):
        for l in range(r):
            z = y[i] - fit[i, l]
            if z > 0:
                f += alpha[l] * z
                s = -alpha[l]
            elif z < 0:
                f += (alpha[l] - 1.0) * z
                s = 1.0 - alpha[l]
            else:
                s = 0.0
            if s != 0.0:
                for a in range(P):
                    g[a * r + l] += s * D[i, a]
                g[P * r + l] += s
        for l in range(r - 1):
            c = fit[i, l] - fit[i, l + 1]
            if c > 0:
                f += mu * c
                for a in range(P):
                    g[a * r + l] += mu * D[i, a]
                    g[a * r + l + 1] -= mu * D[i, a]
                g[P * r + l] += mu
                g[P * r + l + 1] -= mu
    for q in range(G // m):
        for l in range(r):
            nrm = 0.0
            for a in range(q * m, (q + 1) * m):
                nrm += x[a * r + l] ** 2
            f += lam2 * nrm
            nrm = np.sqrt(nrm)
            f += lam1 * nrm
            for a in range(q * m, (q + 1) * m):
                g[a * r + l] += 2.0 * lam2 * x[a * r + l]
                if nrm > 0:
                    g[a * r + l] += lam1 * x[a * r + l] / nrm
    for a in range(G, P):
        for l in range(r):
            f += 0.5 * lam2 * x[a * r + l] ** 2
            g[a * r + l] += lam2 * x[a * r + l]
    return f


@njit(cache=True)
def _subgradient_run(x0, D, y, alpha, m, G, lam1, lam2, mu, steps, eta0):
    x = x0.copy()
    best = x.copy()
    g = np.empty_like(x)
    fit = np.empty((D.shape[0], alpha.size))
    fbest = np.inf
    for t in range(steps):
        f = _penalised(x, D, y, alpha, m, G, lam1, lam2, mu, g, fit)
        if f < fbest:
            fbest = f
            best[:] = x
        gn = np.sqrt(np.sum(g * g))
        if gn == 0.0:
            break
        step = eta0 / np.sqrt(t + 1.0) / gn
        for a in range(x.size):
            x[a] -= step * g[a]
    return best, fbest


def subgradient_reference(D, y, alpha, m, G, lam1, lam2, steps=1_000_000, mu=None):
    """Best objective found by normalised subgradient descent.

    Non-crossing is handled by an exact penalty ``mu * sum (q_l - q_{l+1})_+``
    with ``mu`` larger than any loss subgradient can balance, so the
    penalised minimum equals the constrained one. The run is split into
    stages; each restarts from the best point with a smaller step.
    """
    D = np.ascontiguousarray(D, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    alpha = np.ascontiguousarray(alpha, dtype=float)
    n, P = D.shape
    r = alpha.size
    mu = mu if mu is not None else 10.0
    x = np.zeros((P + 1) * r)
    x.reshape(P + 1, r)[P] = np.quantile(y, alpha)
    scale = max(1.0, float(np.std(y)))
    stage = steps // 4
    fbest = np.inf
    for k in range(4):
        x, f = _subgradient_run(x, D, y, alpha, m, G, lam1, lam2, mu, stage, scale * 10.0 ** (-k))
        fbest = min(fbest, f)
    return x.reshape(P + 1, r), fbest


def cvxpy_reference(D, y, alpha, m, G, lam1, lam2, noncrossing=True):
    """Exact solution of the same problem with a conic solver (if available)."""
    import cvxpy as cp

    n, P = D.shape
    r = len(alpha)
    Th = cp.Variable((P, r))
    b = cp.Variable(r)
    fit = D @ Th + np.ones((n, 1)) @ cp.reshape(b, (1, r), order="C")
    obj = 0
    for l in range(r):
        z = y - fit[:, l]
        obj += cp.sum(cp.maximum(alpha[l] * z, (alpha[l] - 1.0) * z))
        for q in range(G // m):
            blk = Th[q * m:(q + 1) * m, l]
            obj += lam1 * cp.norm(blk, 2) + lam2 * cp.sum_squares(blk)
        if P > G:
            obj += 0.5 * lam2 * cp.sum_squares(Th[G:, l])
    cons = [fit[:, l] <= fit[:, l + 1] for l in range(r - 1)] if noncrossing else []
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve()
    return float(prob.value)
