"""Limit-theorem diagnostics driven by the exact finite-N distributions.

Five consequences of the cumulant bound are checked numerically, each
against the exact magnetization law (no sampling, so reruns are bitwise
identical):

  * Berry-Esseen: Kolmogorov distance to the standard normal decays
    like 1/sqrt(N).
  * Concentration: P(m_N >= x) <= exp(-x^2/2 / (2C + x^2/(R sqrt(N))))
    with (C, R) from the Cauchy calibration.
  * Cramer correction: log of the tail ratio against the Gaussian tail
    is O(max(x^3, x)/sqrt(N)) on a window x in (0, c sqrt(N)).
  * Moderate deviations: -log P(m_N >= a_N x)/a_N^2 -> x^2/2 for
    a_N = N^(1/4).
  * Mod-Gaussian convergence: exp(Delta^(2/3) s^2/2) E[exp(i s
    Delta^(1/3) m_N)] approaches exp(c3 (is)^3/6) with c3 = kappa_3 *
    Delta.

Everything asymptotic is asserted as a trend with slack, not as a limit:
the statements come with unspecified rates.  Tails are evaluated in
extended precision because moderate-deviation probabilities underflow
double precision well before N = 6400.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
from mpmath import mpf

from .errors import ConfigError, TailUnderflow
from .exact import (
    MagnetizationDistribution,
    characteristic_function_standardized,
    exact_cumulants,
    kolmogorov_distance,
    magnetization_pmf,
    tail_prob,
)
from .params import validate_params, effective_params

DEFAULT_N_SCHEDULE = (400, 1600, 6400)
DEFAULT_X_GRID = (0.5, 1.0, 2.0, 4.0)
DEFAULT_MDP_X_GRID = (0.5, 1.0)
DEFAULT_S_GRID = tuple(-2.0 + 4.0 * i / 20 for i in range(21))
TAIL_FLOOR = mpf("1e-300")
BERRY_ESSEEN_SLACK = 1.30
TREND_SLACK = 1.20


@dataclass(frozen=True)
class LimitDiagnostics:
    """All five diagnostics at one system size."""

    N: int
    ks_distance: float
    ks_times_sqrtN: float
    concentration_violations: int
    cramer_ratio_sup: float
    mdp_errors: tuple
    mod_gaussian_sup_error: float


@dataclass(frozen=True)
class BerryEsseenReport:
    """Kolmogorov distances over an N sweep and the fitted constant."""

    entries: tuple  # (N, ks, ks*sqrt(N))
    constant: float  # max of ks*sqrt(N) over included sizes
    trend_ok: bool  # ks*sqrt(N) non-increasing within 30% slack
    excluded: tuple  # degenerate sizes (N=1) left out of the trend


@dataclass(frozen=True)
class ConcentrationReport:
    """Tail-vs-bound comparison on an x grid."""

    entries: tuple  # (x, tail, bound, ok)
    violations: int


@dataclass(frozen=True)
class CramerReport:
    """Tail-ratio corrections; both one-sided tails at each x."""

    entries: tuple  # (x, l_closed, l_open, ratio)
    ratio_sup: float  # sup of |l_closed| * sqrt(N) / max(x^3, x)


@dataclass(frozen=True)
class MDPReport:
    """Moderate-deviation rate errors over (N, x)."""

    entries: tuple  # (N, a_N, x, r_value, error)
    max_error_by_N: tuple  # (N, max error over x)
    trend_ok: bool  # max error non-increasing within 20% slack


@dataclass(frozen=True)
class ModGaussianReport:
    """Sup distance of the renormalized characteristic function."""

    entries: tuple  # (s, error)
    sup_error: float
    c3: float
    delta: float


@dataclass(frozen=True)
class LimitSuite:
    """Driver output: per-N diagnostics plus cross-N trend summaries."""

    per_n: tuple  # LimitDiagnostics per size
    berry: BerryEsseenReport
    mdp: MDPReport
    mod_trend_ok: bool
    cramer_max_over_min: float
    c3: float


def berry_esseen_report(dists) -> BerryEsseenReport:
    """Kolmogorov distances for a sweep of distributions.

    Degenerate sizes (N = 1) are computed but excluded from the trend
    fit; at least three non-degenerate sizes are required.
    """
    dists = sorted(dists, key=lambda d: d.N)
    entries = []
    included = []
    excluded = []
    for dist in dists:
        ks = kolmogorov_distance(dist)
        row = (dist.N, ks, ks * math.sqrt(dist.N))
        entries.append(row)
        if dist.N <= 1:
            excluded.append(dist.N)
        else:
            included.append(row)
    if len(included) < 3:
        raise ConfigError(
            f"need at least 3 non-degenerate sizes, got {len(included)}"
        )
    constant = max(row[2] for row in included)
    trend_ok = all(
        included[i + 1][2] <= BERRY_ESSEEN_SLACK * included[i][2]
        for i in range(len(included) - 1)
    )
    return BerryEsseenReport(
        entries=tuple(entries),
        constant=constant,
        trend_ok=trend_ok,
        excluded=tuple(excluded),
    )


def concentration_check(
    dist: MagnetizationDistribution, C: float, R: float, x_grid=DEFAULT_X_GRID
) -> ConcentrationReport:
    """Compare exact tails to exp(-x^2/2 / (2C + x^2/(R sqrt(N)))).

    Violations are counted only where the bound applies (x >= 0).
    """
    entries = []
    violations = 0
    root_n = math.sqrt(dist.N)
    for x in x_grid:
        if x < 0:
            continue
        tail = tail_prob(dist, x)
        denom = 2.0 * C + x * x / (R * root_n)
        bound = math.exp(-0.5 * x * x / denom) if denom > 0 else 1.0
        ok = tail <= mpf(bound)
        if not ok:
            violations += 1
        entries.append((float(x), float(tail), bound, ok))
    return ConcentrationReport(entries=tuple(entries), violations=violations)


def cramer_diagnostic(
    dist: MagnetizationDistribution, x_grid=DEFAULT_X_GRID
) -> CramerReport:
    """Tail-ratio corrections L(x) = log[P(m_N >= x) / P(Z >= x)].

    The Gaussian tail uses the complementary error function for relative
    accuracy.  Because the exact cdf is a step function, both one-sided
    tails (M >= threshold and M > threshold) are evaluated; the sup
    statistic uses the closed tail.  The grid is capped at N^(1/3) to
    stay inside the x = O(sqrt(N)) validity window with room to spare.
    """
    cap = dist.N ** (1.0 / 3.0)
    entries = []
    sup_ratio = 0.0
    with mp.workdps(dist.dps):
        for x in x_grid:
            if not 0.0 < x < cap:
                continue
            tail_closed = tail_prob(dist, x)
            tail_open = tail_prob(dist, x, strict=True)
            if tail_closed < TAIL_FLOOR or tail_open < TAIL_FLOOR:
                raise TailUnderflow(
                    f"tail at x = {x} below 1e-300 for N = {dist.N}"
                )
            gauss = 0.5 * mp.erfc(mpf(x) / mp.sqrt(2))
            l_closed = float(mp.log(tail_closed / gauss))
            l_open = float(mp.log(tail_open / gauss))
            ratio = abs(l_closed) * math.sqrt(dist.N) / max(x**3, x)
            sup_ratio = max(sup_ratio, ratio)
            entries.append((float(x), l_closed, l_open, ratio))
    if not entries:
        raise ConfigError(f"empty Cramer grid after the N^(1/3) cap at N = {dist.N}")
    return CramerReport(entries=tuple(entries), ratio_sup=sup_ratio)


def mdp_diagnostic(dists, x_grid=DEFAULT_MDP_X_GRID) -> MDPReport:
    """Moderate-deviation rates r_N(x) = -log P(m_N >= a_N x)/a_N^2.

    a_N = N^(1/4) (grows, but slower than sqrt(N)); the rate must
    approach x^2/2, and the max error over the grid must not increase
    along the sweep beyond 20% slack.
    """
    dists = sorted(dists, key=lambda d: d.N)
    entries = []
    max_by_n = []
    for dist in dists:
        a_n = dist.N**0.25
        worst = 0.0
        with mp.workdps(dist.dps):
            for x in x_grid:
                tail = tail_prob(dist, a_n * x)
                if tail < TAIL_FLOOR:
                    raise TailUnderflow(
                        f"MDP tail at x = {x}, N = {dist.N} below 1e-300"
                    )
                r_val = float(-mp.log(tail)) / (a_n * a_n)
                err = abs(r_val - 0.5 * x * x)
                worst = max(worst, err)
                entries.append((dist.N, a_n, float(x), r_val, err))
        max_by_n.append((dist.N, worst))
    trend_ok = all(
        max_by_n[i + 1][1] <= TREND_SLACK * max_by_n[i][1]
        for i in range(len(max_by_n) - 1)
    )
    return MDPReport(
        entries=tuple(entries), max_error_by_N=tuple(max_by_n), trend_ok=trend_ok
    )


def mod_gaussian_diagnostic(
    dist: MagnetizationDistribution,
    delta: float,
    s_grid=DEFAULT_S_GRID,
    c3: float | None = None,
) -> ModGaussianReport:
    """Sup distance of the Gaussian-renormalized characteristic function.

    Compares exp(Delta^(2/3) s^2 / 2) * E[exp(i s Delta^(1/3) m_N)]
    against exp(c3 (is)^3 / 6) on the s grid.  c3 defaults to
    kappa_3(m_N) * Delta of this distribution; pass the value fitted at
    the largest size when comparing across a sweep.
    """
    if c3 is None:
        ec = exact_cumulants(dist, 3)
        c3 = float(ec.std(3)) * delta
    t_n = delta ** (1.0 / 3.0)
    entries = []
    sup_err = 0.0
    with mp.workdps(dist.dps):
        for s in s_grid:
            cf = characteristic_function_standardized(dist, t_n * s)
            left = mp.exp(mpf(t_n * t_n) * mpf(s) ** 2 / 2) * cf
            # (is)^3 = -i s^3, so the limit is exp(-i c3 s^3 / 6)
            target = mp.exp(mp.mpc(0, -c3 * s**3 / 6.0))
            err = float(abs(left - target))
            sup_err = max(sup_err, err)
            entries.append((float(s), err))
    return ModGaussianReport(
        entries=tuple(entries), sup_error=sup_err, c3=float(c3), delta=float(delta)
    )


def limit_diagnostics(
    beta: float,
    p: float,
    h0: float,
    calibration,
    n_schedule=DEFAULT_N_SCHEDULE,
    x_grid=DEFAULT_X_GRID,
    mdp_x_grid=DEFAULT_MDP_X_GRID,
    s_grid=DEFAULT_S_GRID,
    dps: int | None = None,
) -> LimitSuite:
    """Run all five diagnostics over an N schedule with fixed (beta, p, h0).

    The concentration bound uses the Cauchy pair (C_cauchy, R_cauchy)
    from the calibration — the constructive constants for which the
    cumulant bound holds uniformly in j — while the mod-Gaussian scale
    is Delta_N = (R/C_tilde) sqrt(N).  c3 is fitted at the largest size
    and reused across the sweep.
    """
    if len(n_schedule) < 2:
        raise ConfigError("N schedule needs at least 2 sizes")
    sizes = sorted(set(int(n) for n in n_schedule))
    dists = []
    for n in sizes:
        prm = validate_params(n, p, beta, h0)
        dists.append(magnetization_pmf(prm, effective_params(prm), h0, dps=dps))

    largest = dists[-1]
    delta_largest = (calibration.R / calibration.C_tilde) * math.sqrt(largest.N)
    ec3 = exact_cumulants(largest, 3)
    c3 = float(ec3.std(3)) * delta_largest

    berry = berry_esseen_report(dists) if len(dists) >= 3 else None
    mdp = mdp_diagnostic(dists, x_grid=mdp_x_grid)
    mdp_by_n = dict(
        (n, tuple(e for e in mdp.entries if e[0] == n)) for n, _ in mdp.max_error_by_N
    )

    per_n = []
    mod_sups = []
    cramer_sups = []
    ks_by_n = dict((row[0], row) for row in berry.entries) if berry else {}
    for dist in dists:
        if dist.N in ks_by_n:
            _, ks, ks_sqrt = ks_by_n[dist.N]
        else:
            ks = kolmogorov_distance(dist)
            ks_sqrt = ks * math.sqrt(dist.N)
        conc = concentration_check(
            dist, calibration.C_cauchy, calibration.R_cauchy, x_grid=x_grid
        )
        cramer = cramer_diagnostic(dist, x_grid=x_grid)
        cramer_sups.append(cramer.ratio_sup)
        delta_n = (calibration.R / calibration.C_tilde) * math.sqrt(dist.N)
        mod = mod_gaussian_diagnostic(dist, delta_n, s_grid=s_grid, c3=c3)
        mod_sups.append(mod.sup_error)
        per_n.append(
            LimitDiagnostics(
                N=dist.N,
                ks_distance=ks,
                ks_times_sqrtN=ks_sqrt,
                concentration_violations=conc.violations,
                cramer_ratio_sup=cramer.ratio_sup,
                mdp_errors=mdp_by_n.get(dist.N, ()),
                mod_gaussian_sup_error=mod.sup_error,
            )
        )

    mod_trend_ok = all(
        mod_sups[i + 1] <= TREND_SLACK * mod_sups[i] for i in range(len(mod_sups) - 1)
    )
    cramer_ratio = max(cramer_sups) / min(cramer_sups) if min(cramer_sups) > 0 else math.inf
    return LimitSuite(
        per_n=tuple(per_n),
        berry=berry,
        mdp=mdp,
        mod_trend_ok=mod_trend_ok,
        cramer_max_over_min=cramer_ratio,
        c3=c3,
    )


def diagnostics_records(suite: LimitSuite) -> list[dict]:
    """Long-format rows (N, metric, value) for export."""
    rows = []
    for diag in suite.per_n:
        rows.append({"N": diag.N, "metric": "ks_distance", "value": diag.ks_distance})
        rows.append(
            {"N": diag.N, "metric": "ks_times_sqrtN", "value": diag.ks_times_sqrtN}
        )
        rows.append(
            {
                "N": diag.N,
                "metric": "concentration_violations",
                "value": diag.concentration_violations,
            }
        )
        rows.append(
            {"N": diag.N, "metric": "cramer_ratio_sup", "value": diag.cramer_ratio_sup}
        )
        for (_, a_n, x, _, err) in diag.mdp_errors:
            rows.append(
                {"N": diag.N, "metric": f"mdp_error_x={x:g}", "value": err}
            )
        rows.append(
            {
                "N": diag.N,
                "metric": "mod_gaussian_sup_error",
                "value": diag.mod_gaussian_sup_error,
            }
        )
    return rows
