"""Neighbourhood-selection baselines: lasso (MB) and absolute loss (Laplace)."""

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..features import fit_basis
from ..proxops import QuantileGrid
from ..solver import SolverConfig, fit_path, lambda_max

GAP_TOL = 1e-6


@njit(cache=True)
def _lasso_cd(X, y, lam, beta, gap_tol, max_sweeps):
    # minimise ||y - X b||^2 + lam ||b||_1 ; X, y centred.
    n, p = X.shape
    col2 = np.empty(p)
    for j in range(p):
        col2[j] = X[:, j] @ X[:, j]
    r = y - X @ beta
    scale = max(1.0, y @ y)
    mu = lam / 2.0
    gap = np.inf
    for sweep in range(max_sweeps):
        for j in range(p):
            if col2[j] == 0.0:
                continue
            old = beta[j]
            rho_j = X[:, j] @ r + col2[j] * old
            if rho_j > mu:
                new = (rho_j - mu) / col2[j]
            elif rho_j < -mu:
                new = (rho_j + mu) / col2[j]
            else:
                new = 0.0
            if new != old:
                r -= X[:, j] * (new - old)
                beta[j] = new
        # Duality gap of 0.5||r||^2 + mu||b||_1, doubled to the original scale.
        xtr = np.abs(X.T @ r).max() if p else 0.0
        s = 1.0 if xtr <= mu else mu / xtr
        primal = 0.5 * (r @ r) + mu * np.abs(beta).sum()
        dual = 0.5 * (y @ y) - 0.5 * ((y - s * r) @ (y - s * r))
        gap = 2.0 * (primal - dual)
        if gap <= gap_tol * scale:
            break
    return beta, gap


def lasso(X, y, lam, beta0=None, gap_tol=GAP_TOL, max_sweeps=100000):
    """Lasso ``||y - X b||^2 + lam ||b||_1`` by cyclic coordinate descent.

    ``X`` and ``y`` are expected to be centred (no intercept). Stops when
    the duality gap is at most ``gap_tol * max(1, ||y||^2)``.
    Returns ``(beta, gap)``.
    """
    X = np.asfortranarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    beta = np.zeros(X.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    return _lasso_cd(X, y, float(lam), beta, float(gap_tol), int(max_sweeps))


@dataclass(frozen=True)
class MbFit:
    """Per-variable lasso regressions ``y_k ~ intercept + coef[k] . y``.

    ``coef[k, k]`` is zero; ``resid_var[k]`` is the sample variance of
    the training residuals of regression ``k``.
    """

    lam: float
    coef: np.ndarray
    intercepts: np.ndarray
    resid_var: np.ndarray

    def strengths(self):
        s = np.maximum(np.abs(self.coef), np.abs(self.coef.T))
        np.fill_diagonal(s, 0.0)
        return s


def mb_lambda_max(data):
    Yc = data.Y - data.Y.mean(axis=0)
    C = np.abs(Yc.T @ Yc)
    np.fill_diagonal(C, 0.0)
    return 2.0 * float(C.max())


def fit_mb_path(data, lambdas):
    """MB fits along ``lambdas`` (warm-started in the given order)."""
    Y = data.Y
    n, d = Y.shape
    mean = Y.mean(axis=0)
    Yc = Y - mean
    fits = [dict(coef=np.zeros((d, d)), res=np.zeros(d)) for _ in lambdas]
    for k in range(d):
        others = [j for j in range(d) if j != k]
        Xk = np.asfortranarray(Yc[:, others])
        beta = np.zeros(d - 1)
        for i, lam in enumerate(lambdas):
            beta, _ = lasso(Xk, Yc[:, k], lam, beta)
            beta = beta.copy()
            fits[i]["coef"][k, others] = beta
            fits[i]["res"][k] = np.var(Yc[:, k] - Xk @ beta)
    out = []
    for lam, f in zip(lambdas, fits):
        coef = f["coef"]
        out.append(MbFit(lam=float(lam), coef=coef, intercepts=mean - coef @ mean,
                         resid_var=f["res"]))
    return out


def fit_mb(data, lam):
    """Meinshausen-Buhlmann neighbourhood selection at one ``lam``."""
    return fit_mb_path(data, [lam])[0]


LAPLACE_GRID = QuantileGrid((0.5,))


def laplace_basis(data):
    """Identity basis ``phi(y) = y`` (m = 1) used by the Laplace baseline."""
    return fit_basis(data, 1, kind="linear")


def fit_laplace_path(data, lambdas, cfg=None):
    """Absolute-loss neighbourhood selection: the MQGM solver with r = 1,
    level 0.5 and the linear basis. Returns one model per lambda."""
    cfg = cfg or SolverConfig()
    return fit_path(data, laplace_basis(data), LAPLACE_GRID, cfg, lambdas)


def fit_laplace(data, lam, cfg=None):
    return fit_laplace_path(data, [lam], cfg)[0]


def laplace_lambda_max(data):
    return lambda_max(data, laplace_basis(data), LAPLACE_GRID)


