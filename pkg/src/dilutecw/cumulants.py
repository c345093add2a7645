"""Cauchy-contour cumulant extraction and the Statulevicius bound check.

Cumulants of M_N are N times derivatives of the per-site pressure
psi_N(h) = log Z(h) / N at the real center h0.  Since psi_N is analytic
on the strip, the derivatives are Cauchy integrals over a circle
|h - h0| = R inside the strip, discretized by the trapezoid rule:

    kappa_j = N * (j!/R^j) * (1/K) * sum_k psi(h_k) * exp(-i j theta_k).

The pressure on the contour comes either from the exact collapsed sum
(extended precision — the j!/R^j amplification would otherwise surface
double-precision noise) or from the saddle-point asymptotics.  The one
dangerous step on the exact path is the branch of log Z: the principal
imaginary part jumps by 2 pi between nodes whenever Re Z changes sign,
and near a Lee-Yang zero the true phase can move fast.  We track an
integer branch offset per node against the saddle predictor
N*Phi_N(s_N(h), h) — the raw phase moves by more than pi/2 per step at
practical K, but the step *residual* against the predictor stays tiny
unless a zero is nearby, so the pi/2 rejection is applied to the
residual.

Standardized cumulants kappa_j(m_N) = kappa_j(M_N)/kappa_2^{j/2} are
checked against the bound j!/Delta^{j-2}, Delta = (R/C_tilde)*sqrt(N),
with C_tilde calibrated once at a pilot size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath as mp
from mpmath import mpc, mpf

from .errors import (
    ConfigError,
    ContourExitsStrip,
    ImaginaryResidueTooLarge,
    InvariantViolation,
    OrderTooHigh,
    PhaseUnwrapFailure,
)
from .exact import (
    MAX_CUMULANT_ORDER,
    NEAR_ZERO_THRESHOLD,
    collapsed_base,
    exact_cumulants,
    magnetization_pmf,
    resolve_dps,
)
from .errors import PartitionNearZero
from .params import EffectiveParams, ModelParams, effective_params, validate_params
from .saddle import asymptotic_pressure, phi, solve_saddle

RADIUS_FRACTION = 0.9
EXACT_SOURCE_MAX_N = 5_000
MIN_CONTOUR_NODES = 64
NODES_PER_ORDER = 8
IMAG_RESIDUE_RTOL = 1e-8
# relative floor on the residue denominator for cumulants that vanish by
# symmetry (odd j at h0 = 0): measured against the raw Fourier amplitude
IMAG_RESIDUE_FLOOR = 1e-10
DEFAULT_PILOT_N = 100
DEFAULT_CALIBRATION_ORDER = 10


@dataclass(frozen=True)
class ContourConfig:
    """Cauchy-contour layout: center h0, radius R, K nodes, pressure source."""

    h0: float
    R: float
    K: int
    pressure_source: str = "exact"


@dataclass(frozen=True)
class CumulantReport:
    """One cumulant order with its Statulevicius bound and margin.

    kappa_raw is kappa_j(M_N); kappa_std is kappa_j(m_N) for the
    standardized magnetization (0 and 1 by construction for j = 1, 2).
    bound/margin are filled by statulevicius_check for j >= 3.
    """

    j: int
    kappa_raw: float
    kappa_std: float
    bound: float | None
    margin: float | None
    method: str


@dataclass(frozen=True)
class StatuleviciusSummary:
    """Outcome of the bound check: annotated reports plus aggregates."""

    reports: tuple
    delta: float
    tightest_j: int | None
    all_nonnegative: bool
    intermediate_margins: tuple | None


@dataclass(frozen=True)
class CalibrationResult:
    """Constants fitted at a pilot size.

    C and C_tilde come from the measured cumulant ratios
    |kappa_j(m_N)| * (R sqrt(N))^{j-2} / j!; C_cauchy and R_cauchy are
    the constructive pair from the Cauchy estimate
    |kappa_j(M_N)| <= N j! sup|psi| / R^j, which satisfies the bound
    uniformly in j and is the pair the concentration inequality needs.
    """

    C: float
    C_tilde: float
    C_cauchy: float
    R_cauchy: float
    R: float
    pilot_N: int


def radius_default(eff: EffectiveParams) -> float:
    """Default contour radius: 0.9 of the strip half-width."""
    return RADIUS_FRACTION * eff.strip_halfwidth


def default_pressure_source(N: int) -> str:
    """exact below 5000 sites (the oracle), asymptotic above."""
    return "exact" if N <= EXACT_SOURCE_MAX_N else "asymptotic"


def resolve_contour_config(
    params: ModelParams,
    eff: EffectiveParams,
    h0: float,
    J: int,
    R: float | None = None,
    K: int | None = None,
    pressure_source: str | None = None,
) -> ContourConfig:
    """Fill unset contour knobs with their defaults."""
    if R is None:
        R = radius_default(eff)
    if K is None:
        K = max(MIN_CONTOUR_NODES, NODES_PER_ORDER * J)
    if pressure_source is None:
        pressure_source = default_pressure_source(params.N)
    return ContourConfig(h0=float(h0), R=float(R), K=int(K), pressure_source=pressure_source)


def _validate_contour(cfg: ContourConfig, eff: EffectiveParams, J: int) -> None:
    if not 1 <= J <= MAX_CUMULANT_ORDER:
        raise OrderTooHigh(f"cumulant order J = {J} outside [1, {MAX_CUMULANT_ORDER}]")
    if not math.isfinite(cfg.h0):
        raise ConfigError(f"contour center h0 = {cfg.h0} not finite")
    if not cfg.R > 0.0:
        raise ConfigError(f"contour radius R = {cfg.R} must be positive")
    if cfg.R >= eff.strip_halfwidth:
        raise ContourExitsStrip(
            f"R = {cfg.R:.6g} >= strip half-width {eff.strip_halfwidth:.6g}"
        )
    if cfg.K < max(MIN_CONTOUR_NODES, NODES_PER_ORDER * J):
        raise ConfigError(
            f"K = {cfg.K} below minimum {max(MIN_CONTOUR_NODES, NODES_PER_ORDER * J)}"
            f" for J = {J}"
        )
    if cfg.pressure_source not in ("exact", "asymptotic"):
        raise ConfigError(f"unknown pressure source {cfg.pressure_source!r}")


def _exact_contour_pressures(params, eff, nodes, dps):
    """psi_N at each contour node from the exact collapsed sum, with the
    log Z branch made continuous along the contour.

    nodes are mpc points.  Principal-branch phases are corrected by
    integer multiples of 2 pi chosen so each step matches the saddle
    predictor N*Phi_N(s_N(h), h) to better than pi/2; a nonzero winding
    after closing the loop means a Lee-Yang zero inside the contour.
    """
    N = params.N
    base, ms = collapsed_base(params, eff, dps)
    log_s = []
    with mp.workdps(dps):
        for h in nodes:
            lws = [b + h * M for b, M in zip(base, ms)]
            shift = max(lw.real for lw in lws)
            total = mp.fsum(mp.exp(lw - shift) for lw in lws)
            if abs(total) < NEAR_ZERO_THRESHOLD:
                raise PartitionNearZero(
                    f"partition sum vanished on the contour at h = {complex(h)}"
                )
            log_s.append(shift + mp.log(total))

    # branch tracking in double precision (only integer offsets are kept)
    predictor = []
    for h in nodes:
        hc = complex(h)
        sol = solve_saddle(eff, hc)
        predictor.append((N * phi(sol.s, hc, eff)).imag)
    u = [float(ls.imag) for ls in log_s]
    K = len(nodes)
    branch = [0] * K
    for k in range(K):
        nxt = (k + 1) % K
        du = u[nxt] - u[k]
        dp = predictor[nxt] - predictor[k]
        resid = du - dp
        wraps = round(resid / (2.0 * math.pi))
        if abs(resid - 2.0 * math.pi * wraps) >= math.pi / 2.0:
            raise PhaseUnwrapFailure(
                f"phase step residual {resid - 2.0 * math.pi * wraps:+.3f} rad "
                f"at node {k} exceeds pi/2 (Lee-Yang zero near the contour)"
            )
        if nxt == 0:
            if branch[k] - wraps != branch[0]:
                raise PhaseUnwrapFailure(
                    f"nonzero winding {branch[k] - wraps - branch[0]} after closing "
                    f"the contour (Lee-Yang zero inside)"
                )
        else:
            branch[nxt] = branch[k] - wraps

    with mp.workdps(dps):
        two_pi = 2 * mp.pi
        n2_log_a = mpf(params.N) ** 2 * mpf(eff.log_a)
        return [
            (n2_log_a + ls + mpc(0, two_pi * n)) / N
            for ls, n in zip(log_s, branch)
        ]


def _asymptotic_contour_pressures(params, eff, nodes):
    """psi_N at each node from the saddle-point asymptotics (double).

    Smooth in h by construction (principal branches never cross cuts on
    the strip), so no unwrapping is needed.
    """
    out = []
    for h in nodes:
        pv = asymptotic_pressure(params, eff, complex(h), include_correction=True)
        out.append(pv.value)
    return out


def cumulants_contour(
    params: ModelParams,
    eff: EffectiveParams,
    cfg: ContourConfig,
    J: int,
    dps: int | None = None,
) -> list[CumulantReport]:
    """kappa_1..kappa_J of M_N from the Cauchy contour around h0.

    Imaginary residues of the Fourier sums are sanity (they must vanish
    for real h0 up to discretization); they are checked against
    1e-8 relative — with an absolute floor keyed to the raw Fourier
    amplitude so symmetry-zero cumulants do not trip 0/0 — and then
    discarded.
    """
    _validate_contour(cfg, eff, J)
    dps = resolve_dps(dps)
    N = params.N
    with mp.workdps(dps):
        r_mp = mpf(cfg.R)
        h0_mp = mpf(cfg.h0)
        thetas = [2 * mp.pi * k / cfg.K for k in range(cfg.K)]
        nodes = [h0_mp + r_mp * mp.exp(mpc(0, t)) for t in thetas]
    if cfg.pressure_source == "exact":
        psis = _exact_contour_pressures(params, eff, nodes, dps)
    else:
        psis = [mpc(v) for v in _asymptotic_contour_pressures(params, eff, nodes)]

    with mp.workdps(dps):
        mean_abs_psi = mp.fsum(abs(v) for v in psis) / cfg.K
        raw = [mpf(0)] * (J + 1)
        for j in range(1, J + 1):
            total = mp.fsum(
                v * mp.exp(mpc(0, -j * t)) for v, t in zip(psis, thetas)
            )
            kappa = N * mp.factorial(j) / r_mp**j * (total / cfg.K)
            amplitude = N * mp.factorial(j) / r_mp**j * mean_abs_psi
            denom = max(abs(kappa.real), IMAG_RESIDUE_FLOOR * amplitude)
            if abs(kappa.imag) > IMAG_RESIDUE_RTOL * denom:
                raise ImaginaryResidueTooLarge(
                    f"Im kappa_{j} = {float(kappa.imag):.3e} exceeds "
                    f"{IMAG_RESIDUE_RTOL:.0e} of {float(denom):.3e}"
                )
            raw[j] = kappa.real

        if J >= 3 and raw[2] <= 0:
            raise InvariantViolation(
                f"contour kappa_2 = {float(raw[2]):.6g} <= 0; cannot standardize"
            )
        reports = []
        for j in range(1, J + 1):
            if j == 1:
                std = 0.0
            elif j == 2:
                std = 1.0
            else:
                std = float(raw[j] / raw[2] ** (mpf(j) / 2))
            reports.append(
                CumulantReport(
                    j=j,
                    kappa_raw=float(raw[j]),
                    kappa_std=std,
                    bound=None,
                    margin=None,
                    method="contour",
                )
            )
        return reports


def reports_from_exact(
    params: ModelParams,
    eff: EffectiveParams,
    h0: float,
    J: int,
    dps: int | None = None,
) -> list[CumulantReport]:
    """kappa_1..kappa_J via the exact pmf and the moment recursion."""
    dist = magnetization_pmf(params, eff, h0, dps=dps)
    ec = exact_cumulants(dist, J)
    reports = []
    for j in range(1, J + 1):
        if j == 1:
            std = 0.0
        elif j == 2:
            std = 1.0
        else:
            std = float(ec.std(j))
        reports.append(
            CumulantReport(
                j=j,
                kappa_raw=float(ec.kappa(j)),
                kappa_std=std,
                bound=None,
                margin=None,
                method="exact-recursion",
            )
        )
    return reports


def statulevicius_check(
    reports,
    R: float,
    C_tilde: float,
    N: int,
    C: float | None = None,
) -> StatuleviciusSummary:
    """Annotate reports with bounds |kappa_j(m_N)| <= j!/Delta^{j-2}.

    Delta = (R/C_tilde)*sqrt(N).  Violations are reported through
    negative margins, never raised.  When the intermediate constant C is
    supplied, the margins of C*j!/(R sqrt(N))^{j-2} are returned too.
    """
    delta = (R / C_tilde) * math.sqrt(N)
    annotated = []
    tightest_j = None
    tightest_rel = None
    all_nonneg = True
    intermediate = [] if C is not None else None
    for rep in reports:
        if rep.j < 3:
            annotated.append(rep)
            continue
        bound = math.factorial(rep.j) / delta ** (rep.j - 2)
        margin = bound - abs(rep.kappa_std)
        annotated.append(replace(rep, bound=bound, margin=margin))
        if margin < 0:
            all_nonneg = False
        rel = margin / bound
        if tightest_rel is None or rel < tightest_rel:
            tightest_rel = rel
            tightest_j = rep.j
        if intermediate is not None:
            ib = C * math.factorial(rep.j) / (R * math.sqrt(N)) ** (rep.j - 2)
            intermediate.append((rep.j, ib - abs(rep.kappa_std)))
    return StatuleviciusSummary(
        reports=tuple(annotated),
        delta=delta,
        tightest_j=tightest_j,
        all_nonnegative=all_nonneg,
        intermediate_margins=tuple(intermediate) if intermediate is not None else None,
    )


def calibrate_constants(
    beta: float,
    p: float,
    h0: float,
    pilot_N: int = DEFAULT_PILOT_N,
    R: float | None = None,
    J: int = DEFAULT_CALIBRATION_ORDER,
    dps: int | None = None,
) -> CalibrationResult:
    """Fit the Statulevicius constants at a pilot size.

    Ratio constants: C = max_j |kappa_j(m_N)| (R sqrt(N))^{j-2} / j! and
    C_tilde = max(1, max_j ratio_j^{1/(j-2)}) over 3 <= j <= J.  Cauchy
    constants: with S = sup_{|h-h0|=R} |psi_N(h)|, the estimate
    |kappa_j(M_N)| <= N j! S / R^j rewrites exactly as
    |kappa_j(m_N)| <= C_c * j! / (R_c sqrt(N))^{j-2} for
    C_c = N S / (R^2 kappa_2(M_N)) and R_c = R sqrt(kappa_2(M_N)/N) —
    valid uniformly in j, which is what the concentration bound needs.
    """
    params = validate_params(pilot_N, p, beta, h0)
    eff = effective_params(params)
    if R is None:
        R = radius_default(eff)
    dps = resolve_dps(dps)
    cfg = resolve_contour_config(params, eff, h0, J, R=R)
    _validate_contour(cfg, eff, J)

    with mp.workdps(dps):
        r_mp = mpf(R)
        h0_mp = mpf(h0)
        thetas = [2 * mp.pi * k / cfg.K for k in range(cfg.K)]
        nodes = [h0_mp + r_mp * mp.exp(mpc(0, t)) for t in thetas]
    psis = _exact_contour_pressures(params, eff, nodes, dps)
    with mp.workdps(dps):
        sup_psi = max(abs(v) for v in psis)

    reports = reports_from_exact(params, eff, h0, J, dps=dps)
    kappa2 = reports[1].kappa_raw
    if kappa2 <= 0:
        raise InvariantViolation(f"pilot kappa_2 = {kappa2:.6g} <= 0")
    root_n = math.sqrt(pilot_N)
    ratios = []
    for rep in reports:
        if rep.j < 3:
            continue
        ratios.append(
            (rep.j, abs(rep.kappa_std) * (R * root_n) ** (rep.j - 2) / math.factorial(rep.j))
        )
    c_ratio = max(r for _, r in ratios)
    c_tilde = max(1.0, max(r ** (1.0 / (j - 2)) for j, r in ratios))
    c_cauchy = pilot_N * float(sup_psi) / (R * R * kappa2)
    r_cauchy = R * math.sqrt(kappa2 / pilot_N)
    return CalibrationResult(
        C=c_ratio,
        C_tilde=c_tilde,
        C_cauchy=c_cauchy,
        R_cauchy=r_cauchy,
        R=R,
        pilot_N=pilot_N,
    )


def report_records(reports) -> list[dict]:
    """Rows (j, kappa_raw, kappa_std, bound, margin, method) for export."""
    return [
        {
            "j": rep.j,
            "kappa_raw": rep.kappa_raw,
            "kappa_std": rep.kappa_std,
            "bound": rep.bound,
            "margin": rep.margin,
            "method": rep.method,
        }
        for rep in reports
    ]
