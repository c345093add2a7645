"""Annealed dilute Curie-Weiss model: exact laws, saddle-point asymptotics,
contour cumulants, and limit-theorem diagnostics."""

from .errors import (
    BetaOutOfRange,
    ConfigError,
    ContourExitsStrip,
    DiluteCWError,
    EffectiveBetaOutOfRange,
    ImaginaryResidueTooLarge,
    InvariantViolation,
    NoConvergence,
    NonpositiveN,
    NTooLargeForBruteForce,
    NumericalError,
    OrderTooHigh,
    OutsideAdmissibleRegion,
    OutsideStrip,
    PartitionNearZero,
    PhaseUnwrapFailure,
    PoleProximity,
    ProbabilityOutOfRange,
    QuadratureNotConverged,
    TailUnderflow,
)
from .params import (
    EffectiveParams,
    ModelParams,
    effective_params,
    strip_fixed_point_t,
    strip_membership,
    validate_params,
)
from .exact import (
    BruteForceResult,
    ExactCumulants,
    MagnetizationDistribution,
    brute_force_oracle,
    characteristic_function,
    characteristic_function_standardized,
    exact_cumulants,
    kolmogorov_distance,
    log_partition_exact,
    magnetization_pmf,
    resolve_dps,
    tail_prob,
)
from .saddle import (
    PressureValue,
    SaddleSolution,
    asymptotic_log_partition,
    asymptotic_pressure,
    hs_quadrature_log_partition,
    limit_pressure,
    limit_saddle,
    mean_field_magnetization,
    phi,
    solve_saddle,
    susceptibility,
)
from .cumulants import (
    CalibrationResult,
    ContourConfig,
    CumulantReport,
    StatuleviciusSummary,
    calibrate_constants,
    cumulants_contour,
    radius_default,
    reports_from_exact,
    resolve_contour_config,
    statulevicius_check,
)
from .limits import (
    BerryEsseenReport,
    ConcentrationReport,
    CramerReport,
    LimitDiagnostics,
    LimitSuite,
    MDPReport,
    ModGaussianReport,
    berry_esseen_report,
    concentration_check,
    cramer_diagnostic,
    limit_diagnostics,
    mdp_diagnostic,
    mod_gaussian_diagnostic,
)
from .verify import CriterionResult, run_profile

__version__ = "0.1.0"
