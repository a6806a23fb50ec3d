"""Structure-recovery and calibration evaluation, with MB and Laplace baselines."""

from .baselines import (LAPLACE_GRID, MbFit, fit_laplace, fit_laplace_path, fit_mb, fit_mb_path,
                        laplace_basis, laplace_lambda_max, lasso, mb_lambda_max)
from .calibration import (CalibrationReport, GaussianSampler, LaplaceSampler, MqgmSampler,
                          RingTruthSampler, cdf_calibration, cdf_distance, empirical_cdf,
                          equal_count_bins)
from .experiments import (METHODS, SWEEP_SOLVER, MqgmSettings, PathResult, PathSpec,
                          RecoveryResult, best_calibration, calibration_path,
                          exact_recovery_index, path_auc, recovery_rate, run_path, sampler_for)
from .roc import RocCurve, roc_auc, roc_from_edge_sets
