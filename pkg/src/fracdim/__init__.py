"""Data-dependent fractal dimension of hypothesis-set point clouds.

The pipeline: record an SGD tail and its per-sample losses (trainer),
turn them into a pseudo-metric or Euclidean distance matrix (metric),
read off degree-0 persistence lifetimes (ph0), regress weighted lifetime
sums into a dimension estimate (dimest), and relate the estimates to
generalization gaps (stats, bounds). synth provides clouds with known
dimension for validation, matrix_io the on-disk formats, cli the
executable surface.
"""

__version__ = "0.1.0"

from .bounds import BoundInputs, bound_table, computable_bound
from .dimest import (
    BoxDimEstimate,
    DimComparison,
    DimensionEstimate,
    compare_dims,
    default_sizes,
    estimate_box_dim,
    estimate_ph_dim,
    greedy_cover_count,
    rho_subsample_robustness,
)
from .matrix_io import (
    DenseMatrix,
    DistanceMatrix,
    LossMatrix,
    load_distance_matrix,
    load_matrix,
    save_distance_matrix,
    save_matrix,
)
from .metric import (
    MetricSpec,
    build_distance_matrix,
    distance_matrix_euclidean,
    distance_matrix_from_losses,
    pseudo_distance,
)
from .ph0 import PersistenceDiagram0, persistence0, weighted_life_sum
from .stats import GridRecord, correlation_report, granulated_kendall, kendall_tau, spearman_rho
from .synth import FractalSpec, analytic_dimension, generate
from .trainer import (
    EstimatorOptions,
    GridRunRecord,
    StopRule,
    TrainConfig,
    Trajectory,
    run_grid,
    synthetic_classification,
    synthetic_regression,
    train,
)
