"""Exception hierarchy for the dilute Curie-Weiss toolkit.

Every exception carries an ``exit_code`` used by the CLI:
2 = configuration / precondition violation, 3 = numerical failure,
4 = invariant violation (verification found the math broken).
"""


class DiluteCWError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3


# -- configuration / precondition violations (exit code 2) -------------------

class ConfigError(DiluteCWError):
    """Malformed or inconsistent run configuration."""

    exit_code = 2


class BetaOutOfRange(ConfigError):
    """Inverse temperature outside (0, 1)."""


class ProbabilityOutOfRange(ConfigError):
    """Edge probability outside (0, 1]."""


class NonpositiveN(ConfigError):
    """System size N must be a positive integer."""


class EffectiveBetaOutOfRange(ConfigError):
    """Derived beta_eff = b/p fell outside (0, 1)."""


class OutsideAdmissibleRegion(ConfigError):
    """Offset y outside [0, arccos(sqrt(beta')) - sqrt(beta'(1-beta')))."""


class OutsideStrip(ConfigError):
    """Field h lies outside the holomorphy strip |Im h| < w_N."""


class ContourExitsStrip(ConfigError):
    """Contour radius R >= strip half-width; the closed disc leaves U_N."""


class OrderTooHigh(ConfigError):
    """Cumulant order beyond the supported precision-safe range."""


class NTooLargeForBruteForce(ConfigError):
    """Brute-force enumeration limited to N <= 12 (2^N configurations)."""


# -- numerical failures (exit code 3) -----------------------------------------

class NumericalError(DiluteCWError):
    """A computation could not be completed to the certified tolerance."""

    exit_code = 3


class PartitionNearZero(NumericalError):
    """|sum| < 1e-30 * max term: probable Lee-Yang zero proximity."""


class NoConvergence(NumericalError):
    """Saddle iteration budget exhausted or certificate failed."""


class PoleProximity(NumericalError):
    """cosh(h + s) vanishes to working precision; log(2cosh) unusable."""


class QuadratureNotConverged(NumericalError):
    """Hubbard-Stratonovich quadrature refinement did not stabilize."""


class PhaseUnwrapFailure(NumericalError):
    """log Z branch could not be tracked continuously along the contour
    (residual arg step >= pi/2 or nonzero winding: a Lee-Yang zero is
    inside or near the disc)."""


class ImaginaryResidueTooLarge(NumericalError):
    """Cumulant Fourier sum has imaginary part above 1e-8 of its scale."""


class TailUnderflow(NumericalError):
    """Tail probability vanished (or < 1e-300) where a diagnostic needs it."""


# -- invariant violations (exit code 4) ---------------------------------------

class InvariantViolation(DiluteCWError):
    """A verification criterion failed: the numbers contradict the theory."""

    exit_code = 4
