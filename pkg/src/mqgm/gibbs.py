"""Gibbs sampling from the fitted conditional quantile models."""

from dataclasses import dataclass

import numpy as np

from .features import expand_block, expand_point
from .model import inverse_cdf_sample_value


@dataclass(frozen=True)
class GibbsConfig:
    """Chain length settings.

    ``thin`` is the number of full passes over all coordinates between
    retained samples; the scan order is always ascending in ``k``.
    """

    n_samples: int = 1000
    burn_in: int = 100
    thin: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 0 or self.burn_in < 0:
            raise ValueError("n_samples and burn_in must be nonnegative")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def precompute_offsets(model, x):
    """Rows ``x^T Theta^x_k`` (d x r) reused by every update of a chain."""
    return model.offsets(x)


def gibbs_sample(model, init=None, x=None, cfg=None, *, use_offset_cache=True,
                 check_every=0, stats=None):
    """Draw samples from the MQGM pseudolikelihood by Gibbs sampling.

    Each coordinate update draws ``alpha ~ U(0, 1)``, evaluates the ``r``
    fitted conditional quantiles of ``y_k`` and sets ``y_k`` to the
    piecewise-linear inverse CDF at ``alpha``. The feature vector
    ``phi(y)`` is maintained incrementally: only block ``k`` is
    recomputed after ``y_k`` changes.

    Parameters
    ----------
    model : MqgmModel
    init : array_like, shape (d,), optional
        Starting point; defaults to the training medians stored in the model.
    x : array_like, shape (p,), optional
        Exogenous features (required iff the model has them).
    cfg : GibbsConfig, optional
    use_offset_cache : bool
        Precompute ``x^T Theta^x_k`` once per chain. Turning it off
        recomputes the product at every update and gives the same chain.
    check_every : int
        If positive, compare the running feature vector with a fresh
        ``expand_point`` every ``check_every`` updates.
    stats : dict, optional
        Receives ``max_feature_deviation`` and ``checks``.

    Returns
    -------
    ndarray, shape (n_samples, d)
    """
    cfg = cfg or GibbsConfig()
    d = model.d
    if init is None:
        if model.medians is None:
            raise ValueError("init is required: model carries no training medians")
        init = model.medians
    y = np.array(init, dtype=float).reshape(-1)
    if y.shape != (d,) or not np.all(np.isfinite(y)):
        raise ValueError(f"init must be a finite vector of length {d}")
    if (x is None) != (model.p == 0):
        raise ValueError("x must be given iff the model has exogenous features")
    if x is not None:
        x = np.asarray(x, dtype=float).reshape(model.p)
    offsets = precompute_offsets(model, x) if (x is not None and use_offset_cache) else None

    spec = model.basis
    levels = model.grid.array
    thetas = [f.theta for f in model.fits]
    intercepts = [f.intercepts for f in model.fits]
    phi = expand_point(y, spec)
    rng = np.random.default_rng(cfg.seed)

    out = np.empty((cfg.n_samples, d))
    n_passes = cfg.burn_in + cfg.n_samples * cfg.thin
    max_dev = 0.0
    checks = 0
    updates = 0
    kept = 0
    for t in range(n_passes):
        alphas = rng.random(d)
        for k in range(d):
            with np.errstate(over="ignore", invalid="ignore"):  # checked just below
                q = phi @ thetas[k] + intercepts[k]
                if x is not None:
                    q = q + (offsets[k] if offsets is not None else x @ model.fits[k].theta_x)
            if not np.all(np.isfinite(q)):
                raise FloatingPointError(f"non-finite conditional quantile for variable {k} in pass {t}")
            q.sort()
            y[k] = inverse_cdf_sample_value(q, levels, alphas[k])
            phi[spec.block(k)] = expand_block(y[k], k, spec)
            updates += 1
            if check_every and updates % check_every == 0:
                max_dev = max(max_dev, float(np.max(np.abs(phi - expand_point(y, spec)))))
                checks += 1
        if t >= cfg.burn_in and (t - cfg.burn_in + 1) % cfg.thin == 0:
            out[kept] = y
            kept += 1
    if stats is not None:
        stats["max_feature_deviation"] = max_dev
        stats["checks"] = checks
    return out
