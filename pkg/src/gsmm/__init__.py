"""Stochastic minimax optimization under generalized smoothness.

Normalized momentum gradient descent-ascent solvers for nonconvex-strongly-
concave problems whose primal smoothness grows with the gradient norm, plus
theorem-derived hyperparameter schedules, a distributionally robust logistic
regression benchmark problem, oracle verification probes, and a benchmark CLI.
"""

from .core import (
    ConfigError,
    DataError,
    DegenerateConstantError,
    DerivedConstants,
    DualDomain,
    IterateState,
    MinimaxProblem,
    ProblemConstants,
    RunRecord,
    derive_constants,
    make_streams,
    membership_check,
)
from .projections import ProjectionReport, project, project_simplex
from .optimizers import (
    ExactEvaluator,
    HyperParams,
    NumericalAbortError,
    Recorder,
    RunResult,
    ScheduleRequest,
    ScheduleResult,
    check_init,
    nsgda_m_run,
    nsgda_m_step,
    nsgda_run,
    schedule_thm1,
    schedule_thm2,
    schedule_thm3,
    schedule_thm4,
    sgda_run,
)
from .problems import (
    DroProblem,
    SyntheticProblem,
    dro_best_response,
    dro_gradients,
    dro_loss,
    dro_primal_grad,
    synthetic_oracles,
)
from .data import (
    Dataset,
    TABLE_COUNTS,
    load_dataset,
    normalize_labels,
    parse_libsvm,
    take_subsample,
    to_feature_matrix,
    write_libsvm,
)
from .verify import (
    AscentResult,
    ProbeReport,
    approx_best_response,
    finite_diff,
    probe_generalized_smoothness,
    probe_lipschitz_best_response,
    probe_unbiasedness,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DegenerateConstantError",
    "ProblemConstants",
    "DerivedConstants",
    "derive_constants",
    "DualDomain",
    "membership_check",
    "IterateState",
    "RunRecord",
    "MinimaxProblem",
    "make_streams",
    "ProjectionReport",
    "project",
    "project_simplex",
    "HyperParams",
    "ScheduleRequest",
    "ScheduleResult",
    "NumericalAbortError",
    "ExactEvaluator",
    "Recorder",
    "RunResult",
    "check_init",
    "schedule_thm1",
    "schedule_thm2",
    "schedule_thm3",
    "schedule_thm4",
    "nsgda_m_step",
    "nsgda_m_run",
    "nsgda_run",
    "sgda_run",
    "DroProblem",
    "SyntheticProblem",
    "synthetic_oracles",
    "dro_loss",
    "dro_gradients",
    "dro_best_response",
    "dro_primal_grad",
    "Dataset",
    "TABLE_COUNTS",
    "parse_libsvm",
    "write_libsvm",
    "normalize_labels",
    "take_subsample",
    "to_feature_matrix",
    "load_dataset",
    "AscentResult",
    "ProbeReport",
    "finite_diff",
    "approx_best_response",
    "probe_generalized_smoothness",
    "probe_lipschitz_best_response",
    "probe_unbiasedness",
    "__version__",
]
