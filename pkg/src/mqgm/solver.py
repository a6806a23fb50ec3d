"""ADMM solver for the penalized multiple-quantile neighbourhood regressions.

For target variable ``k`` the subproblem is::

    minimize   sum_l psi_{a_l}(Y_k - b_l - Phi theta_l - X theta^x_l)
             + sum_l sum_{j != k} (lambda1 ||theta_lj||_2 + lambda2 ||theta_lj||_2^2)
             + (lambda2 / 2) ||Theta^x||_F^2
    subject to fitted quantiles nondecreasing across levels at every row

and is split as ``V = fit`` (isotonic copy), ``W = coefficients``
(sparse copy) and ``Z = Y - fit`` (residuals). The coefficient/intercept
update solves one symmetric positive definite system whose matrix only
depends on the design, so its Cholesky factor is computed once and
shared by every ADMM iteration and every lambda on a path.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._kernel import admm_loop
from .features import FeatureMatrix, expand
from .proxops import QuantileGrid, group_shrink_blocks, pinball, project_isotonic_rows, prox_multiquantile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    lambda1: float = 1.0
    lambda2: float = 0.0
    rho: float = 1.0
    max_iters: int = 2000
    tol_abs: float = 1e-4
    tol_rel: float = 1e-3
    noncrossing: bool = True
    adaptive_rho: bool = False
    relaxation: float = 1.6

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be nonnegative")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.tol_abs <= 0 or self.tol_rel <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.relaxation < 2.0:
            raise ValueError("relaxation must lie in (0, 2)")


@dataclass
class AdmmState:
    """Primal, split and scaled dual iterates of one subproblem."""

    beta: np.ndarray
    V: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    U_V: np.ndarray
    U_W: np.ndarray
    U_Z: np.ndarray
    rho: float

    def copy(self):
        return AdmmState(*(a.copy() for a in (self.beta, self.V, self.W, self.Z,
                                               self.U_V, self.U_W, self.U_Z)), self.rho)


@dataclass
class NeighborhoodFit:
    """Fitted coefficients of one neighbourhood regression.

    ``theta`` has one row per column of the full expanded design (the
    rows of block ``k`` are exactly zero); ``intercepts`` has one entry
    per quantile level and ``theta_x`` is (p, r).
    """

    k: int
    theta: np.ndarray
    intercepts: np.ndarray
    theta_x: np.ndarray
    iterations: int = 0
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    objective: float = np.nan
    converged: bool = False
    state: AdmmState = field(default=None, repr=False, compare=False)


class Subproblem:
    """Design, target and cached factorisation for one target variable.

    Parameters
    ----------
    design : ndarray, shape (n, g * m)
        Group-penalised columns (block ``k`` already removed).
    m : int
        Group size.
    Yk : ndarray, shape (n,)
    X : ndarray, shape (n, p) or None
        Exogenous columns (ridge penalty only).
    grid : QuantileGrid
    noncrossing : bool
    """

    def __init__(self, design, m, Yk, X, grid, noncrossing=True):
        design = np.asarray(design, dtype=float)
        Yk = np.asarray(Yk, dtype=float)
        n = Yk.shape[0]
        if design.ndim != 2 or design.shape[0] != n:
            raise ValueError("design must have one row per observation")
        if design.shape[1] % m:
            raise ValueError("design width must be a multiple of m")
        X = np.zeros((n, 0)) if X is None else np.asarray(X, dtype=float).reshape(n, -1)
        self.n = n
        self.m = m
        self.G = design.shape[1]
        self.p = X.shape[1]
        self.P = self.G + self.p
        self.Yk = Yk
        self.alpha = grid.array
        self.r = grid.r
        self.noncrossing = noncrossing and self.r > 1
        self.Xd = np.hstack([design, X, np.ones((n, 1))])
        XtX = self.Xd.T @ self.Xd
        M = 2.0 * XtX if self.noncrossing else XtX.copy()
        M[np.arange(self.P), np.arange(self.P)] += 1.0
        try:
            self.chol = cho_factor(M, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:  # M is PD by construction
            raise np.linalg.LinAlgError("singular ADMM system matrix") from exc
        self.Yr = np.repeat(Yk[:, None], self.r, axis=1)
        self._minv = None

    def _kernel_arrays(self):
        if self._minv is None:
            eye = np.eye(self.P + 1)
            self._minv = np.ascontiguousarray(cho_solve(self.chol, eye, check_finite=False))
            self._xdt = np.ascontiguousarray(self.Xd.T)
        return self._minv, self._xdt

    def initial_state(self, rho):
        """ADMM fixed point of the all-zero coefficient solution.

        Intercepts are the marginal sample quantiles and the scaled duals
        hold the matching loss subgradient, so for ``lambda1 >= lambda_max``
        (and no exogenous features) the first iteration already satisfies
        the stopping rule.
        """
        n, r, P = self.n, self.r, self.P
        b, g = _null_subgradient(self.Yk, self.alpha)
        beta = np.zeros((P + 1, r))
        beta[P] = b
        fit = np.broadcast_to(b, (n, r)).copy()
        U_Z = g / rho
        return AdmmState(beta=beta, V=fit if self.noncrossing else np.zeros((n, r)),
                         W=np.zeros((P, r)), Z=self.Yr - fit, U_V=np.zeros((n, r)),
                         U_W=self.Xd[:, :P].T @ U_Z, U_Z=U_Z, rho=rho)

    def objective(self, coef, intercepts, lambda1, lambda2):
        """Penalised objective at group/exogenous coefficients ``coef`` (P x r)."""
        fit = self.Xd[:, :self.P] @ coef + intercepts
        loss = pinball(self.Yr - fit, self.alpha).sum()
        g = coef[:self.G].reshape(self.G // self.m, self.m, self.r) if self.G else np.zeros((0, 1, self.r))
        gn = np.sqrt(np.einsum("gmr,gmr->gr", g, g))
        pen = lambda1 * gn.sum() + lambda2 * (gn ** 2).sum()
        pen += 0.5 * lambda2 * np.sum(coef[self.G:] ** 2)
        return float(loss + pen)

    def crossing(self, coef, intercepts):
        if self.r < 2:
            return 0.0
        fit = self.Xd[:, :self.P] @ coef + intercepts
        return float(max(0.0, np.max(fit[:, :-1] - fit[:, 1:])))

    def solve(self, cfg, state=None, trace=None, engine="compiled"):
        """Run ADMM from ``state`` (or zeros) until the stopping rule holds.

        Returns ``(state, info)`` with ``info`` holding iterations,
        residuals and the convergence flag. If ``trace`` is a list, the
        objective at every iteration is appended to it (this forces the
        pure numpy engine). ``engine="numpy"`` selects the reference loop;
        the compiled loop performs the same updates.
        """
        if engine not in ("compiled", "numpy"):
            raise ValueError(f"unknown engine {engine!r}")
        st = self.initial_state(cfg.rho) if state is None else state.copy()
        if engine == "compiled" and trace is None:
            return self._solve_compiled(cfg, st)
        return self._solve_numpy(cfg, st, trace)

    def _solve_compiled(self, cfg, st):
        Minv, XdT = self._kernel_arrays()
        arrs = [np.ascontiguousarray(a, dtype=float) for a in
                (st.beta, st.V, st.W, st.Z, st.U_V, st.U_W, st.U_Z)]
        it, r_norm, s_norm, conv, rho = admm_loop(
            self.Xd, XdT, Minv, self.Yr, self.alpha, self.m, self.G, self.P, self.noncrossing,
            float(cfg.lambda1), float(cfg.lambda2), float(st.rho), float(cfg.relaxation),
            int(cfg.max_iters), float(cfg.tol_abs), float(cfg.tol_rel), bool(cfg.adaptive_rho),
            *arrs)
        st = AdmmState(*arrs, float(rho))
        info = {"iterations": int(it), "primal_residual": float(r_norm),
                "dual_residual": float(s_norm), "converged": bool(conv)}
        return st, info

    def _solve_numpy(self, cfg, st, trace):
        nc = self.noncrossing
        G, P, m = self.G, self.P, self.m
        Xd, Yr, alpha = self.Xd, self.Yr, self.alpha
        n_con = Yr.size * (2 if nc else 1) + st.W.size
        n_var = st.beta.size
        beta, V, W, Z, U_V, U_W, U_Z, rho = (st.beta, st.V, st.W, st.Z,
                                             st.U_V, st.U_W, st.U_Z, st.rho)
        converged = False
        r_norm = s_norm = np.inf
        it = 0
        for it in range(1, cfg.max_iters + 1):
            target = Yr - Z + U_Z
            if nc:
                target = target + V - U_V
            rhs = Xd.T @ target
            rhs[:P] += W - U_W
            beta = cho_solve(self.chol, rhs, check_finite=False)
            fit = Xd @ beta

            a = cfg.relaxation
            W_old, Z_old = W, Z
            if nc:
                V_old = V
                fit_v = a * fit + (1.0 - a) * V_old
                V = project_isotonic_rows(fit_v + U_V)
                U_V = U_V + fit_v - V
            coef_w = a * beta[:P] + (1.0 - a) * W_old
            W = np.empty_like(W)
            if G:
                W[:G] = group_shrink_blocks(coef_w[:G] + U_W[:G], m, cfg.lambda1 / rho,
                                            2.0 * cfg.lambda2 / rho)
            W[G:] = (coef_w[G:] + U_W[G:]) / (1.0 + cfg.lambda2 / rho)
            U_W = U_W + coef_w - W
            fit_z = a * fit + (1.0 - a) * (Yr - Z_old)
            Z = prox_multiquantile(Yr - fit_z + U_Z, 1.0 / rho, alpha)
            U_Z = U_Z + Yr - fit_z - Z

            r2 = np.sum((beta[:P] - W) ** 2) + np.sum((Yr - fit - Z) ** 2)
            if nc:
                r2 += np.sum((fit - V) ** 2)
            r_norm = np.sqrt(r2)

            if trace is not None:
                trace.append(self.objective(W, beta[P], cfg.lambda1, cfg.lambda2))

            fit_norm = np.linalg.norm(fit)
            eps_pri = np.sqrt(n_con) * cfg.tol_abs + cfg.tol_rel * max(
                np.sqrt((2 if nc else 1) * fit_norm ** 2 + np.sum(beta[:P] ** 2)),
                np.sqrt(np.sum(V ** 2) * nc + np.sum(W ** 2) + np.sum(Z ** 2)),
                np.linalg.norm(Yr))
            check = r_norm <= eps_pri or cfg.adaptive_rho
            if check:
                dZ = Z - Z_old
                dv = (V - V_old - dZ) if nc else -dZ
                s_vec = Xd.T @ dv
                s_vec[:P] += W - W_old
                s_norm = rho * np.linalg.norm(s_vec)
                # A^T u itself vanishes at every exact beta-update, so the
                # relative term uses the norms of its separate pieces.
                u_scale = max(np.linalg.norm(Xd.T @ U_Z), np.linalg.norm(U_W),
                              np.linalg.norm(Xd.T @ U_V) if nc else 0.0)
                eps_dual = np.sqrt(n_var) * cfg.tol_abs + cfg.tol_rel * rho * u_scale
                if r_norm <= eps_pri and s_norm <= eps_dual:
                    if not nc or self.crossing(W, beta[P]) <= cfg.tol_abs:
                        converged = True
                        break
                if cfg.adaptive_rho and it % 10 == 0:
                    if r_norm > 10.0 * s_norm:
                        factor = 2.0
                    elif s_norm > 10.0 * r_norm:
                        factor = 0.5
                    else:
                        factor = 1.0
                    if factor != 1.0:
                        rho *= factor
                        U_V, U_W, U_Z = U_V / factor, U_W / factor, U_Z / factor

        st = AdmmState(beta, V, W, Z, U_V, U_W, U_Z, rho)
        info = {"iterations": it, "primal_residual": float(r_norm),
                "dual_residual": float(s_norm), "converged": converged}
        return st, info


def _as_design(Phi, k, m):
    if isinstance(Phi, FeatureMatrix):
        return Phi.without_block(k), Phi.spec.m, Phi.values.shape[1]
    Phi = np.asarray(Phi, dtype=float)
    return Phi, m, None


def _to_fit(sub, st, info, k, full_cols, cfg):
    W = st.W
    G = sub.G
    theta = W[:G].copy()
    if full_cols is not None:
        m = sub.m
        full = np.zeros((full_cols, sub.r))
        keep = np.ones(full_cols, dtype=bool)
        keep[k * m:(k + 1) * m] = False
        full[keep] = theta
        theta = full
    intercepts = st.beta[sub.P].copy()
    fit = NeighborhoodFit(
        k=k, theta=theta, intercepts=intercepts, theta_x=W[G:sub.P].copy(),
        iterations=info["iterations"], primal_residual=info["primal_residual"],
        dual_residual=info["dual_residual"],
        objective=sub.objective(W, intercepts, cfg.lambda1, cfg.lambda2),
        converged=info["converged"], state=st)
    if not fit.converged:
        logger.warning("subproblem k=%d did not converge in %d iterations", k, fit.iterations)
    return fit


def fit_neighborhood(k, Phi, Yk, X=None, grid=None, cfg=None, *, m=1, warm_start=None, trace=None):
    """Fit the non-crossing multiple quantile regression of variable ``k``.

    Parameters
    ----------
    k : int
        Target variable index (0-based).
    Phi : FeatureMatrix or ndarray
        Full expanded design (block ``k`` is dropped here), or an already
        reduced ``(n, g*m)`` array with group size ``m``.
    Yk : ndarray, shape (n,)
    X : ndarray, shape (n, p), optional
        Exogenous features.
    grid : QuantileGrid
    cfg : SolverConfig
    warm_start : AdmmState, optional
        Iterates of a previous solve on the same design.
    trace : list, optional
        Receives the objective value after every iteration.

    Returns
    -------
    NeighborhoodFit
        Flagged ``converged=False`` when ``max_iters`` is exhausted.
    """
    grid = grid or QuantileGrid.uniform(20)
    cfg = cfg or SolverConfig()
    design, m, full_cols = _as_design(Phi, k, m)
    sub = Subproblem(design, m, Yk, X, grid, cfg.noncrossing)
    st, info = sub.solve(cfg, warm_start, trace)
    return _to_fit(sub, st, info, k, full_cols, cfg)


def objective(fit, Phi, Yk, X, grid, cfg, *, m=1):
    """Penalised objective of ``fit`` on its own training data."""
    design, m, full_cols = _as_design(Phi, fit.k, m)
    theta = fit.theta
    if full_cols is not None:
        theta = np.delete(theta, np.s_[fit.k * m:(fit.k + 1) * m], axis=0)
    sub = Subproblem(design, m, Yk, X, grid, noncrossing=False)
    coef = np.vstack([theta, np.asarray(fit.theta_x).reshape(sub.p, sub.r)])
    return sub.objective(coef, fit.intercepts, cfg.lambda1, cfg.lambda2)


def _path_for_k(k, Phi, Yk, X, grid, cfg, lambdas):
    design, m, full_cols = _as_design(Phi, k, None)
    sub = Subproblem(design, m, Yk, X, grid, cfg.noncrossing)
    out = []
    state = None
    for lam in lambdas:
        c = replace(cfg, lambda1=float(lam))
        try:
            state, info = sub.solve(c, state)
        except Exception as exc:
            raise RuntimeError(f"subproblem k={k} failed: {exc}") from exc
        out.append(_to_fit(sub, state, info, k, full_cols, c))
    return out


def fit_path(data, spec, grid, cfg, lambdas, threads=1):
    """Fit one model per value of ``lambdas`` (warm-started in the given order).

    Returns a list of :class:`~mqgm.model.MqgmModel`, one per lambda.
    """
    from .model import MqgmModel

    Phi = expand(data, spec)
    lambdas = [float(v) for v in lambdas]
    medians = np.median(data.Y, axis=0)

    def run(k):
        return _path_for_k(k, Phi, data.Y[:, k], data.X, grid, cfg, lambdas)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_k = list(pool.map(run, range(data.d)))
    else:
        per_k = [run(k) for k in range(data.d)]
    return [
        MqgmModel(basis=spec, grid=grid, fits=tuple(per_k[k][i] for k in range(data.d)),
                  names=data.names, exo_names=data.exo_names,
                  config=replace(cfg, lambda1=lam), medians=medians)
        for i, lam in enumerate(lambdas)
    ]


def fit_mqgm(data, spec, grid, cfg, threads=1):
    """Fit all ``d`` neighbourhood regressions and assemble the model."""
    return fit_path(data, spec, grid, cfg, [cfg.lambda1], threads=threads)[0]


def lambda_max(data, spec, grid, Phi=None):
    """Smallest ``lambda1`` at which every coefficient group is zero.

    At ``Theta = 0`` the intercepts are the marginal sample quantiles and
    a group is inactive iff ``||Phi_j^T g_l|| <= lambda1`` for a loss
    subgradient ``g_l`` whose entries sum to zero. Entries with zero
    residual take the value that balances the sum. Exogenous columns
    are ignored, so with a CRF the value is a starting estimate.
    """
    Phi = Phi if Phi is not None else expand(data, spec)
    m = spec.m
    best = 0.0
    for k in range(data.d):
        D = Phi.without_block(k)
        _, g = _null_subgradient(data.Y[:, k], grid.array)
        score = (D.T @ g).reshape(-1, m, grid.r)
        best = max(best, float(np.sqrt((score ** 2).sum(axis=1)).max()))
    return best


def _null_subgradient(Yk, levels):
    """Marginal quantiles ``b`` and a zero-sum pinball subgradient ``g`` (n x r).

    Rows with zero residual take the value that balances each column.
    """
    levels = np.asarray(levels, dtype=float)
    b = np.quantile(Yk, levels, method="inverted_cdf")
    res = Yk[:, None] - b
    g = np.where(res > 0, levels, levels - 1.0)
    zero = res == 0
    for l in np.nonzero(zero.any(axis=0))[0]:
        z = zero[:, l]
        g[z, l] = -g[~z, l].sum() / z.sum()
    return b, g


def lambda_path(lmax, n_points=20, ratio=1e-3):
    """Decreasing log-spaced path from ``lmax`` down to ``lmax * ratio``."""
    return np.geomspace(lmax, lmax * ratio, n_points)
