"""Method drivers shared by the CLI, the acceptance suite and the demos.

Every method is run over a 20-point log-spaced ``lambda1`` path that
starts at its own ``lambda_max`` (the smallest value giving the empty
graph), mirroring "a range of tuning parameters for each method".
"""

from dataclasses import dataclass, replace

import numpy as np

from ..features import fit_basis
from ..model import ZERO_TOL, EdgeSet, extract_edges
from ..proxops import QuantileGrid
from ..solver import SolverConfig, fit_path, lambda_max, lambda_path
from .baselines import fit_laplace_path, fit_mb_path, laplace_lambda_max, mb_lambda_max
from .calibration import GaussianSampler, LaplaceSampler, MqgmSampler, cdf_calibration
from .roc import roc_auc, roc_from_edge_sets

METHODS = ("mqgm", "mb", "laplace")

# Looser than the single-fit defaults: sweeps need the support, not six digits.
SWEEP_SOLVER = SolverConfig(tol_abs=1e-3, tol_rel=1e-2, max_iters=300)


@dataclass(frozen=True)
class PathSpec:
    """``n_points`` log-spaced values from ``lambda_max`` down to ``ratio * lambda_max``."""

    n_points: int = 20
    ratio: float = 1e-3

    def __post_init__(self):
        if self.n_points < 1 or not 0.0 < self.ratio <= 1.0:
            raise ValueError("path needs n_points >= 1 and ratio in (0, 1]")

    def lambdas(self, lmax):
        return lambda_path(lmax, self.n_points, self.ratio)


@dataclass(frozen=True)
class MqgmSettings:
    m: int = 10
    r: int = 20
    solver: SolverConfig = SWEEP_SOLVER

    @property
    def grid(self):
        return QuantileGrid.uniform(self.r)


@dataclass
class PathResult:
    """One method's fits along a path, with the edge set at each point."""

    method: str
    lambdas: np.ndarray
    fits: list
    edges: list
    strengths: list


def _mb_edges(fit, d):
    s = fit.strengths()
    A = s > ZERO_TOL
    np.fill_diagonal(A, False)
    return EdgeSet(A, s)


def run_path(method, data, path=PathSpec(), settings=MqgmSettings(), threads=1):
    """Fit ``method`` along ``path`` and collect the edge sets."""
    if method == "mqgm":
        spec = fit_basis(data, settings.m)
        lams = path.lambdas(lambda_max(data, spec, settings.grid))
        fits = fit_path(data, spec, settings.grid, settings.solver, lams, threads=threads)
        edges = [extract_edges(f) for f in fits]
    elif method == "laplace":
        lams = path.lambdas(laplace_lambda_max(data))
        fits = fit_laplace_path(data, lams, settings.solver)
        edges = [extract_edges(f) for f in fits]
    elif method == "mb":
        lams = path.lambdas(mb_lambda_max(data))
        fits = fit_mb_path(data, lams)
        edges = [_mb_edges(f, data.d) for f in fits]
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return PathResult(method, np.asarray(lams), list(fits), edges, [e.strengths for e in edges])


def sampler_for(method, fit, data):
    if method == "mqgm":
        return MqgmSampler(fit)
    if method == "mb":
        return GaussianSampler(fit)
    if method == "laplace":
        return LaplaceSampler.from_training(fit, data)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class RecoveryResult:
    rate: float
    hits: tuple
    first_hit: tuple


def exact_recovery_index(result, truth):
    """First path index whose edge set equals ``truth`` exactly (or None)."""
    for i, e in enumerate(result.edges):
        if np.array_equal(e.adjacency, truth.adjacency):
            return i
    return None


def recovery_rate(trials, generator, method="mqgm", seed0=0, path=PathSpec(ratio=0.1),
                  settings=MqgmSettings(), on_trial=None):
    """Fraction of seeded trials in which some path point gives E_hat = E* exactly.

    ``generator(seed)`` returns a :class:`SyntheticInstance`; trial ``t``
    uses seed ``seed0 + t``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits, first = [], []
    for t in range(trials):
        inst = generator(seed0 + t)
        res = run_path(method, inst.data, path, settings)
        idx = exact_recovery_index(res, inst.truth)
        hits.append(idx is not None)
        first.append(idx)
        if on_trial is not None:
            on_trial(t, inst, res, idx)
    return RecoveryResult(rate=float(np.mean(hits)), hits=tuple(hits), first_hit=tuple(first))


def path_auc(result, truth, mode="refit"):
    """AUC along a path: ``"refit"`` uses one edge set per lambda, ``"threshold"``
    thresholds the strengths of the least-regularised fit."""
    if mode == "refit":
        return roc_from_edge_sets(result.edges, truth, result.lambdas)
    if mode == "threshold":
        return roc_auc(result.strengths[-1], truth)
    raise ValueError(f"unknown AUC mode {mode!r}")


def calibration_path(method, result, data, bins=5, n_points=200, seed=0):
    """Calibration report at every path point."""
    return [cdf_calibration(sampler_for(method, f, data), data, bins=bins, n_points=n_points, seed=seed)
            for f in result.fits]


def best_calibration(reports):
    """Best averaged TV and best averaged KS over a path (chosen separately)."""
    i_tv = int(np.argmin([r.tv for r in reports]))
    i_ks = int(np.argmin([r.ks for r in reports]))
    return {"tv": reports[i_tv].tv, "tv_normalized": reports[i_tv].tv_normalized,
            "ks": reports[i_ks].ks, "tv_index": i_tv, "ks_index": i_ks}


def with_solver(settings, **changes):
    return replace(settings, solver=replace(settings.solver, **changes))
