"""
Sampling new data from a fitted model
=====================================

The fitted conditional quantiles define a conditional distribution for
each variable. Cycling through them with a Gibbs sampler produces new
joint samples; for ring data these should again lie on the circle.
"""

import logging

import numpy as np

from mqgm.features import fit_basis
from mqgm.gibbs import GibbsConfig, gibbs_sample
from mqgm.model import conditional_quantiles
from mqgm.proxops import QuantileGrid
from mqgm.solver import SolverConfig, fit_mqgm, lambda_max
from mqgm.synthdata import gen_ring

logging.disable(logging.WARNING)

inst = gen_ring(400, seed=1)
spec = fit_basis(inst.data, 10)
grid = QuantileGrid.uniform(20)
lam = 0.85 * lambda_max(inst.data, spec, grid)
model = fit_mqgm(inst.data, spec, grid, SolverConfig(lambda1=lam))

# Conditional quantiles of y1 given y2: spread out at y2 = 0, where the
# circle has two branches, and tight near the top of the circle.
for y2 in (0.0, 0.9):
    q = conditional_quantiles(model, 0, np.array([0.0, y2, 0.0, 0.0]))
    print(f"y2={y2}: 10%/50%/90% quantiles of y1 ~ {q[1]:.2f} / {q[9]:.2f} / {q[17]:.2f}")

# Five passes between retained samples, 100 burn-in passes.
stats = {}
S = gibbs_sample(model, cfg=GibbsConfig(n_samples=2000, burn_in=100, thin=5, seed=3),
                 check_every=100, stats=stats)
radius = np.hypot(S[:, 0], S[:, 1])
true_radius = np.hypot(inst.data.Y[:, 0], inst.data.Y[:, 1])
print("radius quartiles, data   :", np.round(np.quantile(true_radius, [0.25, 0.5, 0.75]), 2))
print("radius quartiles, samples:", np.round(np.quantile(radius, [0.25, 0.5, 0.75]), 2))
print("running feature vector drift:", stats["max_feature_deviation"])
