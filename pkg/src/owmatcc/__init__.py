"""Optimally weighted moving-average T^2 control charts.

Fault detection for autocorrelated weakly stationary multivariate
processes: a weighted moving-average Hotelling chart whose window weights
are chosen to maximize detectability of a known fault direction, plus the
guaranteed-detectability calculus for intermittent faults, two benchmark
simulators, and classic baselines (MA-TCC, PCA, MA-PCA, DPCA).
"""

from .detectability import (DetectabilityVerdict, FaultEpisode,
                            FaultProfile, FaultSchedule,
                            schedule_from_profile, select_window, verdict)
from .detection import (ControlChart, DetectionMetrics, StatisticSeries,
                        evaluate, f_limit, kde_limit, monitor, train_chart,
                        wma_t2)
from .errors import (ConfigError, DivergenceError, NumericalError,
                     OwmatccError, SingularCovarianceError)
from .simulators import (AR1Config, CSTRConfig, disturbance_from_schedule,
                         inject_faults, sample_training_sets, simulate_ar1,
                         simulate_cstr, simulate_var1)
from .stationary_model import (AutocovarianceTable, BlockCovariance,
                               TrainingSet, WeightedCovariance,
                               assemble_block_covariance,
                               estimate_autocovariance, weighted_covariance,
                               weighted_means)
from .weight_solver import (HessianReport, SolverConfig, SolverReport,
                            beta_from_gamma, beta_value, build_kkt_matrix,
                            d_w_bound, equal_weight_necessity,
                            fixed_point_solve, gamma_matrix,
                            lagrangian_gradient, second_order_check,
                            solve_unidimensional)

__version__ = "0.1.0"
