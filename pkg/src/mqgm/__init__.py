"""Graphical models from penalized multiple-quantile neighbourhood regressions."""

from .features import BasisSpec, Dataset, FeatureMatrix, expand, expand_block, expand_point, fit_basis
from .gibbs import GibbsConfig, gibbs_sample, precompute_offsets
from .model import (EdgeSet, MqgmModel, conditional_quantiles, extract_edges, inverse_cdf_sample_value,
                    load_model)
from .proxops import QuantileGrid, group_shrink, pinball, project_isotonic_rows, prox_multiquantile
from .solver import (AdmmState, NeighborhoodFit, SolverConfig, fit_mqgm, fit_neighborhood, fit_path,
                     lambda_max, lambda_path, objective)
from .synthdata import (SyntheticInstance, gen_autoregressive_ring, gen_ring, gen_sparse_gaussian,
                        gen_sparse_t)

__version__ = "0.1.0"
