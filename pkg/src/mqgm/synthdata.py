"""Synthetic regimes with known conditional-dependence graphs."""

from dataclasses import dataclass, field

import numpy as np

from .features import Dataset
from .model import EdgeSet

_MAX_RETRIES = 100


@dataclass(frozen=True)
class SyntheticInstance:
    data: Dataset
    truth: EdgeSet
    descriptor: dict = field(default_factory=dict)
    precision: np.ndarray = None


def _ring_pair(rng, n, angle_max, radius_mean, radius_var):
    nu = rng.uniform(0.0, angle_max, size=n)
    radius = radius_mean + rng.normal(0.0, np.sqrt(radius_var), size=n)
    return radius * np.cos(nu), radius * np.sin(nu)


def gen_ring(n, seed, *, angle_max=2 * np.pi, radius_mean=1.0, radius_var=0.1):
    """Noisy ring in ``(y1, y2)`` plus two independent N(0, 1) coordinates.

    The angle is uniform on ``[0, angle_max)`` and the radius is
    ``radius_mean + N(0, radius_var)``; ``radius_var`` is a variance.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    y1, y2 = _ring_pair(rng, n, angle_max, radius_mean, radius_var)
    y34 = rng.normal(size=(n, 2))
    Y = np.column_stack([y1, y2, y34])
    desc = {"name": "ring", "n": n, "d": 4, "seed": seed, "angle_max": angle_max,
            "radius_mean": radius_mean, "radius_var": radius_var}
    return SyntheticInstance(Dataset(Y), EdgeSet.from_pairs(4, [(0, 1)]), desc)


def gen_autoregressive_ring(n, d, seed, *, angle_max=2 * np.pi, radius_mean=1.0, radius_var=0.1):
    """Independent ring pairs ``(y_{2t-1}, y_{2t})``; edges join each pair."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    Y = np.empty((n, d))
    for t in range(d // 2):
        Y[:, 2 * t], Y[:, 2 * t + 1] = _ring_pair(rng, n, angle_max, radius_mean, radius_var)
    truth = EdgeSet.from_pairs(d, [(2 * t, 2 * t + 1) for t in range(d // 2)])
    desc = {"name": "autoregressive", "n": n, "d": d, "seed": seed, "angle_max": angle_max,
            "radius_mean": radius_mean, "radius_var": radius_var}
    return SyntheticInstance(Dataset(Y), truth, desc)


def sparse_precision(d, edge_prob, rng, *, low=0.4, high=0.8, slack=0.5):
    """Random sparse, strictly diagonally dominant precision matrix.

    Off-diagonal entries are nonzero with probability ``edge_prob`` and
    drawn uniformly from ``+-[low, high]``; the diagonal is the row
    absolute sum plus ``slack``.
    """
    iu = np.triu_indices(d, 1)
    for _ in range(_MAX_RETRIES):
        mask = rng.uniform(size=iu[0].size) < edge_prob
        if mask.any() or edge_prob == 0:
            break
    else:
        raise RuntimeError("could not draw a precision matrix with at least one edge")
    vals = rng.uniform(low, high, size=mask.sum()) * rng.choice([-1.0, 1.0], size=mask.sum())
    Omega = np.zeros((d, d))
    Omega[iu[0][mask], iu[1][mask]] = vals
    Omega = Omega + Omega.T
    Omega[np.diag_indices(d)] = np.abs(Omega).sum(axis=1) + slack
    return Omega


def _sparse_instance(name, n, d, edge_prob, seed, dof=None):
    if d < 2:
        raise ValueError("d must be >= 2")
    if not 0.0 <= edge_prob < 1.0:
        raise ValueError("edge_prob must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    Omega = sparse_precision(d, edge_prob, rng)
    Sigma = np.linalg.inv(Omega)
    L = np.linalg.cholesky((Sigma + Sigma.T) / 2.0)
    Y = rng.normal(size=(n, d)) @ L.T
    if dof is not None:
        # Multivariate t: Gaussian scaled by sqrt(dof / chi2_dof).
        Y = Y / np.sqrt(rng.chisquare(dof, size=n) / dof)[:, None]
    A = (Omega != 0) & ~np.eye(d, dtype=bool)
    desc = {"name": name, "n": n, "d": d, "edge_prob": edge_prob, "seed": seed}
    if dof is not None:
        desc["dof"] = dof
    return SyntheticInstance(Dataset(Y), EdgeSet(A, A.astype(float)), desc, precision=Omega)


def gen_sparse_gaussian(n, d, edge_prob, seed):
    """``N(0, Omega^-1)`` samples for a random sparse precision ``Omega``."""
    return _sparse_instance("gaussian", n, d, edge_prob, seed)


def gen_sparse_t(n, d, edge_prob, seed, dof=3):
    """Multivariate t samples (``dof`` degrees of freedom, scale ``Omega^-1``)."""
    return _sparse_instance("t", n, d, edge_prob, seed, dof=dof)


GENERATORS = {
    "ring": gen_ring,
    "gaussian": gen_sparse_gaussian,
    "t": gen_sparse_t,
    "autoregressive": gen_autoregressive_ring,
}
