"""Fitted model: conditional quantiles, interpolated inverse CDF, edge sets."""

import json
from dataclasses import dataclass, asdict

import numpy as np

from .features import BasisSpec, expand, expand_point
from .proxops import QuantileGrid

FORMAT_VERSION = "mqgm-model/1"
ZERO_TOL = 1e-6


@dataclass(frozen=True)
class EdgeSet:
    adjacency: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=bool)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(A, A.T) or A.diagonal().any():
            raise ValueError("adjacency must be symmetric with an empty diagonal")
        object.__setattr__(self, "adjacency", A)
        object.__setattr__(self, "strengths", np.asarray(self.strengths, dtype=float))

    @classmethod
    def from_pairs(cls, d, pairs):
        A = np.zeros((d, d), dtype=bool)
        for j, k in pairs:
            A[j, k] = A[k, j] = True
        return cls(A, A.astype(float))

    @property
    def d(self):
        return self.adjacency.shape[0]

    def pairs(self):
        j, k = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(a), int(b)) for a, b in zip(j, k)]

    def __len__(self):
        return int(np.triu(self.adjacency, 1).sum())


@dataclass(frozen=True)
class MqgmModel:
    """All ``d`` neighbourhood fits plus what is needed to evaluate them."""

    basis: BasisSpec
    grid: QuantileGrid
    fits: tuple
    names: tuple
    exo_names: tuple = ()
    config: object = None
    medians: np.ndarray = None

    def __post_init__(self):
        d = len(self.fits)
        if d < 2 or d != self.basis.d:
            raise ValueError("model needs one fit per variable and d >= 2")
        dm, r, p = self.basis.d * self.basis.m, self.grid.r, len(self.exo_names)
        for f in self.fits:
            if f.theta.shape != (dm, r) or f.intercepts.shape != (r,) or f.theta_x.shape != (p, r):
                raise ValueError(f"fit {f.k} has inconsistent shapes")
        if self.medians is not None:
            med = np.array(self.medians, dtype=float).reshape(d)
            med.setflags(write=False)
            object.__setattr__(self, "medians", med)

    @property
    def d(self):
        return len(self.fits)

    @property
    def p(self):
        return len(self.exo_names)

    def group_norms(self):
        """Array ``N[k, j, l] = ||theta_{l k j}||_2``."""
        d, m, r = self.d, self.basis.m, self.grid.r
        T = np.stack([f.theta for f in self.fits]).reshape(d, d, m, r)
        return np.sqrt(np.einsum("kjml,kjml->kjl", T, T))

    def strengths(self):
        """Symmetric ``max_l max(||theta_lkj||, ||theta_ljk||)``."""
        s = self.group_norms().max(axis=2)
        s = np.maximum(s, s.T)
        np.fill_diagonal(s, 0.0)
        return s

    def offsets(self, x):
        """``x^T Theta^x_k`` for every k, shape (d, r)."""
        x = np.asarray(x, dtype=float).reshape(self.p)
        return np.stack([x @ f.theta_x for f in self.fits])

    def quantile_rows(self, k, Y, X=None):
        """Sorted conditional quantiles of ``y_k`` for every row of ``Y`` (n x r)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        Phi = expand(Y, self.basis).values
        f = self.fits[k]
        Q = Phi @ f.theta + f.intercepts
        if self.p:
            if X is None:
                raise ValueError("model was fitted with exogenous features; X required")
            Q = Q + np.asarray(X, dtype=float).reshape(len(Y), self.p) @ f.theta_x
        return np.sort(Q, axis=1)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def to_dict(self):
        m = self.basis.m
        fits = []
        for f in self.fits:
            blocks = {}
            for j in range(self.d):
                blk = f.theta[j * m:(j + 1) * m]
                if np.any(blk != 0.0):
                    blocks[str(j)] = blk.tolist()
            fits.append({
                "k": f.k,
                "intercepts": f.intercepts.tolist(),
                "blocks": blocks,
                "theta_x": f.theta_x.tolist(),
                "diagnostics": {
                    "iterations": int(f.iterations),
                    "primal_residual": float(f.primal_residual),
                    "dual_residual": float(f.dual_residual),
                    "objective": float(f.objective),
                    "converged": bool(f.converged),
                },
            })
        cfg = asdict(self.config) if self.config is not None else None
        return {
            "format": FORMAT_VERSION,
            "names": list(self.names),
            "exo_names": list(self.exo_names),
            "basis": self.basis.to_dict(),
            "grid": list(self.grid.levels),
            "solver": cfg,
            "medians": None if self.medians is None else self.medians.tolist(),
            "fits": fits,
        }

    @classmethod
    def from_dict(cls, obj):
        from .solver import NeighborhoodFit, SolverConfig

        if obj.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {obj.get('format')!r}")
        basis = BasisSpec.from_dict(obj["basis"])
        grid = QuantileGrid(tuple(obj["grid"]))
        d, m, r, p = basis.d, basis.m, grid.r, len(obj["exo_names"])
        fits = []
        for item in obj["fits"]:
            theta = np.zeros((d * m, r))
            for j, blk in item["blocks"].items():
                j = int(j)
                theta[j * m:(j + 1) * m] = np.asarray(blk, dtype=float)
            diag = item["diagnostics"]
            fits.append(NeighborhoodFit(
                k=int(item["k"]), theta=theta,
                intercepts=np.asarray(item["intercepts"], dtype=float),
                theta_x=np.asarray(item["theta_x"], dtype=float).reshape(p, r),
                iterations=diag["iterations"], primal_residual=diag["primal_residual"],
                dual_residual=diag["dual_residual"], objective=diag["objective"],
                converged=diag["converged"]))
        cfg = SolverConfig(**obj["solver"]) if obj.get("solver") else None
        return cls(basis=basis, grid=grid, fits=tuple(fits), names=tuple(obj["names"]),
                   exo_names=tuple(obj["exo_names"]), config=cfg, medians=obj.get("medians"))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return MqgmModel.from_dict(json.load(fh))


def conditional_quantiles(model, k, y, x=None):
    """Fitted quantiles of ``y_k`` given the rest of ``y`` (and ``x``).

    Only the coordinates ``j != k`` of ``y`` matter. The ``r`` values are
    sorted before being returned, so the result is always nondecreasing
    even away from the training points.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (model.d,):
        raise ValueError(f"y must have length {model.d}, got shape {y.shape}")
    if (x is None) != (model.p == 0):
        raise ValueError("x must be given iff the model has exogenous features")
    f = model.fits[k]
    q = expand_point(y, model.basis) @ f.theta + f.intercepts
    if model.p:
        x = np.asarray(x, dtype=float)
        if x.shape != (model.p,):
            raise ValueError(f"x must have length {model.p}")
        q = q + x @ f.theta_x
    return np.sort(q)


def inverse_cdf_sample_value(quantiles, grid, alpha):
    """Piecewise-linear inverse CDF through ``(alpha_l, Q_l)``.

    Levels outside ``[alpha_1, alpha_r]`` are clamped to the end values.
    ``alpha`` may be a scalar or an array.
    """
    levels = grid.array if isinstance(grid, QuantileGrid) else np.asarray(grid, dtype=float)
    out = np.interp(alpha, levels, np.asarray(quantiles, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def interpolate_rows(Q, levels, alpha):
    """Row-wise :func:`inverse_cdf_sample_value` for ``Q`` (n x r), ``alpha`` (n,)."""
    Q = np.asarray(Q, dtype=float)
    alpha = np.clip(np.asarray(alpha, dtype=float), levels[0], levels[-1])
    if len(levels) == 1:
        return Q[:, 0].copy()
    idx = np.clip(np.searchsorted(levels, alpha, side="right") - 1, 0, len(levels) - 2)
    a0, a1 = levels[idx], levels[idx + 1]
    rows = np.arange(Q.shape[0])
    q0, q1 = Q[rows, idx], Q[rows, idx + 1]
    return q0 + (q1 - q0) * (alpha - a0) / (a1 - a0)


def extract_edges(model, threshold=ZERO_TOL):
    """Edge set ``{j, k : strength(j, k) > threshold}``."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    s = model.strengths()
    A = s > threshold
    np.fill_diagonal(A, False)
    return EdgeSet(A, s)


def write_matrix_csv(path, matrix, names):
    """Square matrix as CSV with a header row and a leading name column."""
    import csv

    matrix = np.asarray(matrix)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["variable", *names])
        for name, row in zip(names, matrix):
            w.writerow([name, *(repr(float(v)) if matrix.dtype != bool else int(v) for v in row)])
