"""Model inputs, effective parameters, and holomorphy-strip geometry.

The annealed dilute Curie-Weiss model with size N, edge probability p,
inverse temperature beta and external field h0 reduces, after averaging
out the disorder, to a Curie-Weiss-type weight with effective coupling
b and a per-site-pair prefactor a.  With x = beta/(2pN):

    b     = pN * [log(1 + p(e^x - 1)) - log(1 + p(e^-x - 1))]
    log a = 1/2 * [log(1 + p(e^x - 1)) + log(1 + p(e^-x - 1))]
    beta_eff = b / p

All subsequent analysis is valid only for beta_eff in (0, 1) and inside
the strip |Im h| < w_N = arccos(sqrt(beta_eff)) - sqrt(beta_eff(1-beta_eff)),
which this module computes and certifies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    BetaOutOfRange,
    EffectiveBetaOutOfRange,
    NonpositiveN,
    OutsideAdmissibleRegion,
    ProbabilityOutOfRange,
)

# p^3 N^2 below this: the dilute asymptotics are not trustworthy.  The
# theory only requires p^3 N^2 -> infinity; the finite threshold is a
# surfaced heuristic, not a hard gate.
REGIME_THRESHOLD = 10.0


@dataclass(frozen=True)
class ModelParams:
    """Validated user inputs plus the diluteness indicator p^3 N^2."""

    N: int
    p: float
    beta: float
    h0: float
    diluteness: float
    regime_warning: bool


@dataclass(frozen=True)
class EffectiveParams:
    """Derived coupling, prefactor, and strip geometry.

    alpha_N = arccos(sqrt(beta_eff)), delta_N = sqrt(beta_eff(1-beta_eff)),
    strip_halfwidth = alpha_N - delta_N > 0 for beta_eff in (0, 1).
    """

    log_a: float
    b: float
    beta_eff: float
    alpha_N: float
    delta_N: float
    strip_halfwidth: float


def validate_params(N: int, p: float, beta: float, h0: float = 0.0) -> ModelParams:
    """Validate (N, p, beta, h0) and compute the regime indicator."""
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise NonpositiveN(f"N must be a positive integer, got {N!r}")
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ProbabilityOutOfRange(f"p must lie in (0, 1], got {p}")
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise BetaOutOfRange(f"beta must lie in (0, 1), got {beta}")
    diluteness = p ** 3 * N ** 2
    return ModelParams(
        N=N,
        p=p,
        beta=beta,
        h0=float(h0),
        diluteness=diluteness,
        regime_warning=diluteness < REGIME_THRESHOLD,
    )


def effective_params(params: ModelParams) -> EffectiveParams:
    """Compute (log_a, b, beta_eff) and the strip geometry.

    Cancellation-safe: x = beta/(2pN) can be ~1e-6 or smaller, so both
    logs go through expm1/log1p, and their sum uses the identity
    (e^x - 1)(e^-x - 1) = -4 sinh^2(x/2), giving
    log_a = 1/2 * log1p(4 p (1-p) sinh^2(x/2)) with full relative
    accuracy (and exactly 0.0 at p = 1).
    """
    N, p, beta = params.N, params.p, params.beta
    x = beta / (2.0 * p * N)
    t_plus = math.log1p(p * math.expm1(x))
    t_minus = math.log1p(p * math.expm1(-x))
    beta_eff = N * (t_plus - t_minus)
    b = p * beta_eff
    log_a = 0.5 * math.log1p(4.0 * p * (1.0 - p) * math.sinh(0.5 * x) ** 2)
    if not 0.0 < beta_eff < 1.0:
        raise EffectiveBetaOutOfRange(
            f"beta_eff = {beta_eff} outside (0, 1) for N={N}, p={p}, beta={beta}"
        )
    alpha_N = math.acos(math.sqrt(beta_eff))
    delta_N = math.sqrt(beta_eff * (1.0 - beta_eff))
    return EffectiveParams(
        log_a=log_a,
        b=b,
        beta_eff=beta_eff,
        alpha_N=alpha_N,
        delta_N=delta_N,
        strip_halfwidth=alpha_N - delta_N,
    )


def strip_membership(h: complex, eff: EffectiveParams) -> bool:
    """True iff h lies in the open strip |Im h| < strip_halfwidth."""
    return abs(complex(h).imag) < eff.strip_halfwidth


def strip_fixed_point_t(beta_prime: float, y: float) -> float:
    """Unique fixed point of t = beta' * tan(y + t) on [0, delta'].

    delta' = sqrt(beta'(1-beta')).  Exists and is unique for
    0 <= y < arccos(sqrt(beta')) - delta'; it bounds |Im s_N(h)| for
    |Im h| <= y and thereby certifies the saddle solver's contraction
    region.  Safeguarded bisection (the plain iteration's contraction
    constant approaches 1 as y -> width); residual <= 1e-14.
    """
    beta_prime = float(beta_prime)
    if not 0.0 < beta_prime < 1.0:
        raise BetaOutOfRange(f"beta' must lie in (0, 1), got {beta_prime}")
    y = float(y)
    delta = math.sqrt(beta_prime * (1.0 - beta_prime))
    width = math.acos(math.sqrt(beta_prime)) - delta
    if not 0.0 <= y < width:
        raise OutsideAdmissibleRegion(
            f"y = {y} outside [0, {width}) for beta' = {beta_prime}"
        )
    if y == 0.0:
        return 0.0

    def g(t: float) -> float:
        return t - beta_prime * math.tan(y + t)

    lo, hi = 0.0, delta
    # g(lo) < 0 and g(hi) > 0 on the admissible region; g is increasing.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    if abs(g(t)) > 1e-14:
        t = hi if abs(g(hi)) < abs(g(t)) else t
    return t
