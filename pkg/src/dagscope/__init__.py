"""Continuous score-based DAG structure learning with scale diagnostics.

The package bundles a from-scratch augmented-Lagrangian DAG learner (least
squares and Gaussian log-likelihood scores under a trace-exponential
acyclicity constraint), a linear-SEM simulator, graph extraction and
metrics, a variance-ordering baseline, and a CLI harness for sweeps and
figure-style reports.  Data convention throughout: rows are samples, weight
entry (i, j) is the edge i -> j, standard deviations use the population
(denominator n) form.
"""

from .acyclicity import AcyclicityResult, find_cycle, h_and_grad, is_dag, matrix_exp
from .baselines import (
    VarsortReport,
    varsort_regress,
    varsort_report,
    varsortability,
    varsortability_values,
)
from .data import (
    BinaryDag,
    CyclicGraphError,
    DataFormatError,
    Dataset,
    WeightedGraph,
    center_and_scale,
    read_csv,
    read_matrix_csv,
    write_csv,
    write_matrix_csv,
)
from .estimators import ColumnScaler, NotearsDag, VarianceOrderDag
from .graphs import (
    GraphMetrics,
    ThresholdPolicy,
    orientation_of_pair,
    structural_metrics,
    threshold,
)
from .losses import (
    LossDomainError,
    LossEval,
    LossSpec,
    bind_loss,
    golem_ev,
    golem_nv,
    l1_norm_and_split,
    least_squares,
    weighted_ls,
)
from .simulate import (
    FlipSearchResult,
    GroundTruthSem,
    SemSpec,
    ToyPairSpec,
    effective_noise_covariance,
    fig1_like_spec,
    find_flip_seed,
    simulate,
    simulate_toy_pair,
)
from .solver import (
    InnerConfig,
    SolveResult,
    SolveTrace,
    SolverConfig,
    SolverError,
    TraceStep,
    fit,
    inner_minimize,
    outer_update,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # data model
    "Dataset",
    "WeightedGraph",
    "BinaryDag",
    "DataFormatError",
    "CyclicGraphError",
    "center_and_scale",
    "read_csv",
    "write_csv",
    "read_matrix_csv",
    "write_matrix_csv",
    # acyclicity
    "AcyclicityResult",
    "matrix_exp",
    "h_and_grad",
    "is_dag",
    "find_cycle",
    # losses
    "LossSpec",
    "LossEval",
    "LossDomainError",
    "least_squares",
    "golem_ev",
    "golem_nv",
    "weighted_ls",
    "l1_norm_and_split",
    "bind_loss",
    # simulation
    "SemSpec",
    "ToyPairSpec",
    "GroundTruthSem",
    "simulate",
    "simulate_toy_pair",
    "effective_noise_covariance",
    "fig1_like_spec",
    "find_flip_seed",
    "FlipSearchResult",
    # solver
    "SolverConfig",
    "InnerConfig",
    "SolveResult",
    "SolveTrace",
    "TraceStep",
    "SolverError",
    "fit",
    "inner_minimize",
    "outer_update",
    # graphs
    "ThresholdPolicy",
    "GraphMetrics",
    "threshold",
    "structural_metrics",
    "orientation_of_pair",
    # baselines
    "VarsortReport",
    "varsort_regress",
    "varsortability",
    "varsortability_values",
    "varsort_report",
    # estimators
    "NotearsDag",
    "VarianceOrderDag",
    "ColumnScaler",
]
