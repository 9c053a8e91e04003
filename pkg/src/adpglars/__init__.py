"""Adaptive generalized LARS: LARS paths with adaptive weights and biased-estimator directions."""
from ._accel import JIT_ENABLED, backend_name
from .errors import *  # noqa: F401,F403
from .estimators import (
    ALGORITHM_NAMES,
    EigenBasis,
    EstimatorKind,
    EstimatorSpec,
    fit_biased,
    fit_olse,
    full_transform,
    principal_eigenvectors,
    restricted_transform,
    selector,
)
from .glars_path import (
    ActiveSet,
    AdaptiveWeights,
    CoefficientPath,
    Event,
    EventKind,
    StandardizedDataset,
    coefficients_at,
    compute_direction,
    compute_weights,
    run_path,
    standardize,
    step_length,
)
from .model_selection import Dataset, EvaluationResult, SearchGrid, grid_search_cv, holdout_evaluate, rmse
from .simulation import SimulationConfig, SimulationReport, evaluate_split, make_replicate, run_replications
from .data_io import Diagnostics, TabularDataset, diagnostics, load_csv, load_prostate, read_report, write_report

__version__ = "0.1.0"
