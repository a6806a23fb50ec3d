"""Datasets and radial basis function feature expansion.

Each variable ``y_j`` is mapped to ``m`` Gaussian bumps. The expanded
design has ``d * m`` columns laid out block by block, so block ``j``
(columns ``j*m .. (j+1)*m``) depends on ``y_j`` only.
"""

from dataclasses import dataclass, field

import numpy as np

_MIN_BANDWIDTH = 1e-8


@dataclass(frozen=True)
class Dataset:
    """Observations ``Y`` (n x d) and optional exogenous features ``X`` (n x p)."""

    Y: np.ndarray
    X: np.ndarray = None
    names: tuple = None
    exo_names: tuple = None

    def __post_init__(self):
        Y = np.array(self.Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError("Y must be a 2-d array")
        n, d = Y.shape
        if n < 2 or d < 2:
            raise ValueError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y contains non-finite entries")
        Y.setflags(write=False)
        object.__setattr__(self, "Y", Y)
        names = tuple(self.names) if self.names is not None else tuple(f"y{j + 1}" for j in range(d))
        if len(names) != d:
            raise ValueError(f"expected {d} variable names, got {len(names)}")
        object.__setattr__(self, "names", names)

        if self.X is not None:
            X = np.array(self.X, dtype=float)
            if X.ndim == 1:
                X = X[:, None]
            if X.shape[0] != n:
                raise ValueError(f"X has {X.shape[0]} rows but Y has {n}")
            if not np.all(np.isfinite(X)):
                raise ValueError("X contains non-finite entries")
            X.setflags(write=False)
            object.__setattr__(self, "X", X)
            p = X.shape[1]
            exo = tuple(self.exo_names) if self.exo_names is not None else tuple(f"x{j + 1}" for j in range(p))
            if len(exo) != p:
                raise ValueError(f"expected {p} exogenous names, got {len(exo)}")
            object.__setattr__(self, "exo_names", exo)
        else:
            object.__setattr__(self, "exo_names", ())

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def d(self):
        return self.Y.shape[1]

    @property
    def p(self):
        return 0 if self.X is None else self.X.shape[1]


@dataclass(frozen=True)
class BasisSpec:
    """Per-variable basis: ``kind`` is ``"rbf"`` or ``"linear"`` (phi(y) = y, m = 1).

    ``centers`` and ``bandwidths`` are (d, m); ``scale_factors`` has d*m
    entries and multiplies the raw feature columns.
    """

    m: int
    centers: np.ndarray
    bandwidths: np.ndarray
    scale_factors: np.ndarray
    kind: str = "rbf"

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        bw = np.array(self.bandwidths, dtype=float)
        s = np.array(self.scale_factors, dtype=float).ravel()
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.kind not in ("rbf", "linear"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "linear" and self.m != 1:
            raise ValueError("linear basis requires m = 1")
        if c.ndim != 2 or c.shape[1] != self.m or bw.shape != c.shape:
            raise ValueError("centers and bandwidths must both have shape (d, m)")
        if s.shape != (c.size,):
            raise ValueError("scale_factors must have d*m entries")
        if np.any(bw <= 0) or np.any(s <= 0):
            raise ValueError("bandwidths and scale factors must be positive")
        if self.m > 1 and np.any(np.diff(c, axis=1) <= 0):
            raise ValueError("centers must be strictly increasing per variable")
        for a in (c, bw, s):
            a.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "scale_factors", s)

    @property
    def d(self):
        return self.centers.shape[0]

    def block(self, j):
        """Column slice of variable ``j`` in the expanded design."""
        return slice(j * self.m, (j + 1) * self.m)

    def to_dict(self):
        return {
            "kind": self.kind,
            "m": int(self.m),
            "centers": self.centers.tolist(),
            "bandwidths": self.bandwidths.tolist(),
            "scale_factors": self.scale_factors.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            m=int(obj["m"]),
            centers=np.asarray(obj["centers"], dtype=float),
            bandwidths=np.asarray(obj["bandwidths"], dtype=float),
            scale_factors=np.asarray(obj["scale_factors"], dtype=float),
            kind=obj.get("kind", "rbf"),
        )


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    spec: BasisSpec = field(repr=False)

    def block(self, j):
        return self.spec.block(j)

    def without_block(self, k):
        """Design with the columns of variable ``k`` removed."""
        m = self.spec.m
        return np.delete(self.values, np.s_[k * m:(k + 1) * m], axis=1)


def _raw_block(values, j, spec):
    # Shared by expand and expand_point so both paths agree bit for bit.
    values = np.asarray(values, dtype=float)
    if spec.kind == "linear":
        return values[..., None] * 1.0
    diff = values[..., None] - spec.centers[j]
    return np.exp(-(diff * diff) / (2.0 * spec.bandwidths[j] ** 2))


def _dedupe(c, span):
    c = c.copy()
    eps = max(span, 1.0) * 1e-9
    for i in range(1, c.size):
        if c[i] <= c[i - 1]:
            c[i] = c[i - 1] + eps
    return c


def fit_basis(data, m, kind="rbf"):
    """Place RBF centers and bandwidths for every variable of ``data``.

    Centers sit at the empirical quantiles ``(i - 0.5) / m`` of each
    column; each bandwidth is the gap to the nearest neighbouring center
    (floored at 1e-8). With ``m = 1`` the single center is the median and
    the bandwidth is the sample half-range. Column scale factors are set
    so that every expanded column of ``data`` has norm at most sqrt(n).

    Parameters
    ----------
    data : Dataset
    m : int
        Number of basis functions per variable.
    kind : {"rbf", "linear"}
        ``"linear"`` gives the identity basis phi(y) = y (requires m = 1).

    Returns
    -------
    BasisSpec
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    Y = data.Y
    n, d = Y.shape
    centers = np.empty((d, m))
    bws = np.empty((d, m))
    for j in range(d):
        col = Y[:, j]
        lo, hi = col.min(), col.max()
        if hi - lo <= 0.0:
            raise ValueError(f"constant variable {data.names[j]!r}: basis cannot be fitted")
        if kind == "linear":
            centers[j] = 0.0
            bws[j] = 1.0
            continue
        c = np.quantile(col, (np.arange(1, m + 1) - 0.5) / m)
        c = _dedupe(c, hi - lo)
        centers[j] = c
        if m == 1:
            bws[j] = (hi - lo) / 2.0
        else:
            gaps = np.diff(c)
            nearest = np.minimum(np.r_[np.inf, gaps], np.r_[gaps, np.inf])
            bws[j] = np.maximum(nearest, _MIN_BANDWIDTH)
    unit = BasisSpec(m=m, centers=centers, bandwidths=bws, scale_factors=np.ones(d * m), kind=kind)
    raw = _expand_raw(Y, unit)
    norms = np.linalg.norm(raw, axis=0)
    root_n = np.sqrt(n)
    scale = np.where(norms > root_n, root_n / np.where(norms > 0, norms, 1.0), 1.0)
    return BasisSpec(m=m, centers=centers, bandwidths=bws, scale_factors=scale, kind=kind)


def _expand_raw(Y, spec):
    n, d = Y.shape
    out = np.empty((n, d * spec.m))
    for j in range(d):
        out[:, spec.block(j)] = _raw_block(Y[:, j], j, spec)
    return out


def expand(data, spec):
    """Expanded feature matrix ``Phi`` (n x d*m) with recorded column scaling."""
    Y = data.Y if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if Y.shape[1] != spec.d:
        raise ValueError(f"basis was built for d={spec.d}, data has d={Y.shape[1]}")
    vals = _expand_raw(Y, spec) * spec.scale_factors
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite features (bandwidth underflow?)")
    return FeatureMatrix(values=vals, spec=spec)


def expand_block(value, j, spec):
    """Scaled features of a single coordinate ``y_j = value`` (length m)."""
    return _raw_block(np.atleast_1d(value), j, spec)[0] * spec.scale_factors[spec.block(j)]


def expand_point(y, spec):
    """Feature vector phi(y) of length d*m for a single point."""
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.d,):
        raise ValueError(f"expected a vector of length {spec.d}")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite input")
    out = np.empty(spec.d * spec.m)
    for j in range(spec.d):
        out[spec.block(j)] = expand_block(y[j], j, spec)
    return out
