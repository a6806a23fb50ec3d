"""Proximal and projection operators used by the ADMM solver.

All operators are closed form (or a single linear pass) and act
elementwise, row-wise or group-wise on numpy arrays.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class QuantileGrid:
    """Ordered quantile levels, strictly increasing inside (0, 1)."""

    levels: tuple

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or lv.size == 0:
            raise ValueError("quantile grid must be a nonempty 1-d sequence")
        if not np.all((lv > 0.0) & (lv < 1.0)):
            raise ValueError("quantile levels must lie in the open interval (0, 1)")
        if np.any(np.diff(lv) <= 0.0):
            raise ValueError("quantile levels must be strictly increasing")
        object.__setattr__(self, "levels", tuple(float(a) for a in lv))

    @classmethod
    def uniform(cls, r):
        """``r`` equispaced levels ``l / (r + 1)``, l = 1..r."""
        if r < 1:
            raise ValueError("r must be >= 1")
        return cls(tuple((np.arange(1, r + 1) / (r + 1)).tolist()))

    @property
    def r(self):
        return len(self.levels)

    @property
    def array(self):
        return np.asarray(self.levels, dtype=float)


def pinball(z, alpha):
    """Quantile ("pinball") loss ``max(alpha * z, (alpha - 1) * z)``.

    Works elementwise on arrays; ``alpha`` broadcasts against ``z``.
    """
    z = np.asarray(z, dtype=float)
    return np.maximum(alpha * z, (alpha - 1.0) * z)


def prox_multiquantile(A, t, grid):
    """Prox of ``t * sum_l psi_{alpha_l}`` applied column-wise to ``A``.

    Column ``l`` of ``A`` is thresholded with level ``alpha_l``::

        x = a - t * alpha          if a > t * alpha
        x = a + t * (1 - alpha)    if a < t * (alpha - 1)
        x = 0                      otherwise

    Parameters
    ----------
    A : array-like, shape (n, r)
    t : float
        Positive step size.
    grid : QuantileGrid or array-like of length r

    Returns
    -------
    X : ndarray, shape (n, r)
    """
    if t <= 0:
        raise ValueError("t must be positive")
    A = np.asarray(A, dtype=float)
    alpha = grid.array if isinstance(grid, QuantileGrid) else np.asarray(grid, dtype=float)
    hi = t * alpha
    lo = t * (alpha - 1.0)
    return np.where(A > hi, A - hi, np.where(A < lo, A - lo, 0.0))


@njit(cache=True)
def _pav_rows(V, out):
    n, r = V.shape
    vals = np.empty(r)
    wts = np.empty(r)
    lens = np.empty(r, dtype=np.int64)
    for i in range(n):
        nb = 0
        for j in range(r):
            vals[nb] = V[i, j]
            wts[nb] = 1.0
            lens[nb] = 1
            nb += 1
            while nb > 1 and vals[nb - 2] > vals[nb - 1]:
                w = wts[nb - 2] + wts[nb - 1]
                vals[nb - 2] = (wts[nb - 2] * vals[nb - 2] + wts[nb - 1] * vals[nb - 1]) / w
                wts[nb - 2] = w
                lens[nb - 2] += lens[nb - 1]
                nb -= 1
        pos = 0
        for b in range(nb):
            for _ in range(lens[b]):
                out[i, pos] = vals[b]
                pos += 1


def project_isotonic_rows(V):
    """Euclidean projection of every row of ``V`` onto the isotonic cone.

    Pool-adjacent-violators with weighted block merging, linear in the
    row length. Rows that are already nondecreasing are returned
    unchanged bit for bit, so the projection is idempotent.
    """
    V = np.asarray(V, dtype=float)
    squeeze = V.ndim == 1
    V2 = np.ascontiguousarray(np.atleast_2d(V))
    out = np.empty_like(V2)
    if V2.size:
        _pav_rows(V2, out)
    return out[0] if squeeze else out


def group_shrink(v, kappa1, kappa2):
    """Prox of ``kappa1 * ||x||_2 + (kappa2 / 2) * ||x||_2^2`` at ``v``.

    Returns ``v / (1 + kappa2) * (1 - kappa1 / ||v||_2)_+``, and exactly
    zero when ``||v||_2 <= kappa1``.
    """
    if kappa1 < 0 or kappa2 < 0:
        raise ValueError("kappa1 and kappa2 must be nonnegative")
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm <= kappa1 or nrm == 0.0:
        return np.zeros_like(v)
    return v * ((1.0 - kappa1 / nrm) / (1.0 + kappa2))


def group_shrink_blocks(W, m, kappa1, kappa2):
    """Apply :func:`group_shrink` to every ``m``-row block of every column.

    ``W`` has shape ``(g * m, r)``; block ``(j, l)`` is
    ``W[j*m:(j+1)*m, l]``. Vectorised version used inside the solver.
    """
    g = W.shape[0] // m
    Wb = W.reshape(g, m, W.shape[1])
    nrm = np.sqrt(np.einsum("gmr,gmr->gr", Wb, Wb))
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(nrm > kappa1, (1.0 - kappa1 / nrm) / (1.0 + kappa2), 0.0)
    return (Wb * factor[:, None, :]).reshape(W.shape)
