import numpy as np

from mqgm.features import BasisSpec
from mqgm.model import MqgmModel
from mqgm.proxops import QuantileGrid
from mqgm.solver import NeighborhoodFit


def linear_spec(d):
    return BasisSpec(m=1, centers=np.zeros((d, 1)), bandwidths=np.ones((d, 1)),
                     scale_factors=np.ones(d), kind="linear")


def hand_model(d, intercepts, thetas=None, levels=(0.25, 0.5, 0.75), theta_x=None, p=0,
               spec=None, medians=None):
    """Model with explicitly given coefficients (linear basis by default)."""
    grid = QuantileGrid(tuple(levels))
    spec = spec or linear_spec(d)
    r = grid.r
    fits = []
    for k in range(d):
        theta = np.zeros((d * spec.m, r)) if thetas is None else np.asarray(thetas[k], float)
        tx = np.zeros((p, r)) if theta_x is None else np.asarray(theta_x[k], float).reshape(p, r)
        fits.append(NeighborhoodFit(k=k, theta=theta, intercepts=np.asarray(intercepts[k], float),
                                    theta_x=tx, converged=True))
    return MqgmModel(basis=spec, grid=grid, fits=tuple(fits), names=tuple(f"y{j + 1}" for j in range(d)),
                     exo_names=tuple(f"x{j + 1}" for j in range(p)), medians=medians)
