"""PARSIM subspace identification with finite-sample error quantities."""

from .bounds import (
    BoundReport,
    bound_reports,
    burn_in_time,
    choose_past_horizon,
    covariate_covariance,
    pe_check,
    realization_bound,
    snr,
    stacked_bound,
    theta_error_bound,
)
from .data_assembly import (
    HankelBundle,
    RegressorBank,
    build_hankels,
    build_regressor_bank,
    empirical_covariance,
)
from .errors import (
    ConditionViolatedError,
    ConfigurationError,
    ParsimError,
    PersistenceOfExcitationError,
    SweepError,
)
from .estimators import (
    ArxBankEstimate,
    estimate_classical_projection,
    estimate_parsim_bank,
    true_gamma_lp,
    true_theta,
)
from .harness import (
    ExperimentConfig,
    SweepResult,
    coverage_check,
    fit_loglog_slope,
    replay_row,
    run_sweep,
    run_trial,
    write_sweep,
)
from .realization import (
    AlignmentResult,
    RealizationResult,
    align_similarity,
    check_svd_condition,
    extract_system,
    procrustes_errors,
    procrustes_transform,
    realization_from_factors,
    realize,
    shift_sigma,
    svd_realize,
)
from .system_model import (
    StateSpaceModel,
    Trajectory,
    extended_controllability,
    extended_observability,
    markov_parameter,
    random_model,
    s1,
    simulate,
    state_covariance,
    toeplitz_markov,
    validate_model,
)

__version__ = "0.1.0"
