"""Acceptance checks shared by the test suite and the `verify` CLI command.

Each criterion function runs one end-to-end verification — oracle
equivalence, classical reduction, quadrature identities, saddle
certificates, cross-method cumulants, bound margins, limit-theorem
trends — and returns a CriterionResult with a pass flag and a one-line
detail.  Randomized checks use fixed seeds so reruns are bitwise
reproducible.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

import mpmath as mp

from .errors import ConfigError
from .cumulants import (
    calibrate_constants,
    cumulants_contour,
    radius_default,
    reports_from_exact,
    resolve_contour_config,
    statulevicius_check,
)
from .exact import (
    MagnetizationDistribution,
    brute_force_oracle,
    exact_cumulants,
    kolmogorov_distance,
    log_partition_exact,
    magnetization_pmf,
)
from .limits import limit_diagnostics
from .params import effective_params, validate_params
from .saddle import (
    hs_quadrature_log_partition,
    limit_pressure,
    mean_field_magnetization,
    solve_saddle,
    susceptibility,
)

ORACLE_SEED = 20240817
REDUCTION_SEED = 31415926


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float


def _wrap_imag(delta: complex) -> float:
    """Modulus of a log difference with the imaginary part taken mod 2 pi."""
    im = (delta.imag + math.pi) % (2.0 * math.pi) - math.pi
    return math.hypot(delta.real, im)


def criterion_oracle_equivalence(tuples: int = 50, seed: int = ORACLE_SEED) -> CriterionResult:
    """Collapsed-sum engine vs. 2^N enumeration on randomized parameters."""
    start = time.perf_counter()
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(tuples):
        n = rng.randint(1, 12)
        beta = rng.uniform(0.05, 0.95)
        p = 1.0 if rng.random() < 0.3 else rng.uniform(0.1, 1.0)
        h = rng.uniform(-1.0, 1.0)
        params = validate_params(n, p, beta, h)
        eff = effective_params(params)
        bf = brute_force_oracle(params, h)
        dist = magnetization_pmf(params, eff, h)
        bf_dist = MagnetizationDistribution.from_log_weights(n, bf.log_weights)
        with mp.workdps(dist.dps):
            for pe, pb in zip(dist.pmf_extended(), bf_dist.pmf_extended()):
                worst = max(worst, float(abs(pe - pb) / pb))
            lz = log_partition_exact(params, eff, h)
            worst = max(worst, float(abs(lz - bf.log_z) / abs(bf.log_z)))
            ec = exact_cumulants(dist, 6)
            ecb = exact_cumulants(bf_dist, 6)
            for j in range(1, 7):
                denom = max(abs(ecb.kappa(j)), mp.mpf("1e-30"))
                worst = max(worst, float(abs(ec.kappa(j) - ecb.kappa(j)) / denom))
        hc = complex(h, 0.5 * eff.strip_halfwidth * rng.uniform(-1.0, 1.0))
        bfc = brute_force_oracle(params, hc)
        lzc = log_partition_exact(params, eff, hc)
        with mp.workdps(dist.dps):
            worst = max(worst, float(abs(lzc - bfc.log_z) / abs(bfc.log_z)))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-10 and elapsed < 5.0
    return CriterionResult(
        1,
        "oracle-equivalence",
        passed,
        f"worst rel err {worst:.2e} over {tuples} tuples, {elapsed:.2f}s",
        elapsed,
    )


def criterion_classical_reduction(samples: int = 100, seed: int = REDUCTION_SEED) -> CriterionResult:
    """p = 1 must give log_a = 0 and beta_eff = beta to <= 4 eps."""
    start = time.perf_counter()
    rng = random.Random(seed)
    eps = 2.0**-52
    worst_rel = 0.0
    log_a_zero = True
    for _ in range(samples):
        beta = rng.uniform(0.01, 0.99)
        n = rng.randint(1, 10_000)
        eff = effective_params(validate_params(n, 1.0, beta, 0.0))
        if eff.log_a != 0.0:
            log_a_zero = False
        worst_rel = max(worst_rel, abs(eff.beta_eff - beta) / beta)
    elapsed = time.perf_counter() - start
    passed = log_a_zero and worst_rel <= 4.0 * eps
    return CriterionResult(
        2,
        "classical-reduction",
        passed,
        f"log_a all zero: {log_a_zero}, worst |beta_eff-beta|/beta = "
        f"{worst_rel / eps:.2f} eps over {samples} samples",
        elapsed,
    )


def criterion_hs_contour_shift() -> CriterionResult:
    """Quadrature (shifted and unshifted) vs. the exact log partition."""
    start = time.perf_counter()
    worst = 0.0
    for n in (20, 40):
        params = validate_params(n, 1.0, 0.5, 0.0)
        eff = effective_params(params)
        for h in (0.3, 0.2 + 0.15j):
            exact = complex(log_partition_exact(params, eff, h))
            for shift in (False, True):
                quad = hs_quadrature_log_partition(params, eff, h, shift=shift)
                worst = max(worst, _wrap_imag(quad - exact))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-7
    return CriterionResult(
        3,
        "hs-contour-shift",
        passed,
        f"worst |quadrature - exact| = {worst:.2e} (tol 1e-7)",
        elapsed,
    )


def criterion_saddle_certificates(grid: int = 20) -> CriterionResult:
    """Residual, strip, and curvature certificates on a grid inside the strip."""
    start = time.perf_counter()
    params = validate_params(400, 1.0, 0.5, 0.2)
    eff = effective_params(params)
    w = eff.strip_halfwidth
    worst_resid = 0.0
    worst_im_excess = -math.inf
    worst_curv = -math.inf
    for i in range(grid):
        re = -0.1 + 0.6 * i / (grid - 1)
        for k in range(grid):
            im = -0.8 * w + 1.6 * w * k / (grid - 1)
            sol = solve_saddle(eff, complex(re, im))
            worst_resid = max(worst_resid, sol.residual)
            worst_im_excess = max(worst_im_excess, abs(sol.s.imag) - eff.delta_N)
            worst_curv = max(worst_curv, sol.curvature.real)
    elapsed = time.perf_counter() - start
    passed = worst_resid <= 1e-13 and worst_im_excess <= 0.0 and worst_curv < 0.0
    return CriterionResult(
        4,
        "saddle-certificates",
        passed,
        f"max residual {worst_resid:.2e}, max |Im s|-delta {worst_im_excess:.2e}, "
        f"max Re H {worst_curv:.3f} on {grid}x{grid} grid",
        elapsed,
    )


def criterion_cross_method_cumulants() -> CriterionResult:
    """Contour vs. exact-recursion cumulants, plus radius independence."""
    start = time.perf_counter()
    params = validate_params(200, 1.0, 0.5, 0.2)
    eff = effective_params(params)
    j_max = 6
    cfg1 = resolve_contour_config(params, eff, 0.2, j_max, R=radius_default(eff), K=128)
    contour1 = cumulants_contour(params, eff, cfg1, j_max)
    exact = reports_from_exact(params, eff, 0.2, j_max)
    worst_cross = max(
        abs(c.kappa_raw - e.kappa_raw) / abs(e.kappa_raw)
        for c, e in zip(contour1, exact)
    )
    cfg2 = resolve_contour_config(
        params, eff, 0.2, j_max, R=0.5 * eff.strip_halfwidth, K=128
    )
    contour2 = cumulants_contour(params, eff, cfg2, j_max)
    worst_radius = max(
        abs(c1.kappa_raw - c2.kappa_raw) / abs(c1.kappa_raw)
        for c1, c2 in zip(contour1, contour2)
    )
    elapsed = time.perf_counter() - start
    passed = worst_cross <= 1e-6 and worst_radius <= 1e-8 and elapsed < 30.0
    return CriterionResult(
        5,
        "cross-method-cumulants",
        passed,
        f"cross-method rel err {worst_cross:.2e} (tol 1e-6), radius rel err "
        f"{worst_radius:.2e} (tol 1e-8), {elapsed:.2f}s",
        elapsed,
    )


def criterion_statulevicius_scaling() -> CriterionResult:
    """Calibrated bound margins and the sqrt(N) scaling of kappa_3, kappa_4."""
    start = time.perf_counter()
    j_max = 10
    cases = [(0.5, 0.0), (0.5, 0.3), (0.8, 0.1)]
    sizes = (400, 1600)
    all_nonneg = True
    worst_margin = math.inf
    worst_variation = 0.0
    for beta, h0 in cases:
        for schedule in (False, True):
            def p_of(n):
                return n ** -0.25 if schedule else 1.0

            calib = calibrate_constants(beta, p_of(100), h0, pilot_N=100, J=j_max)
            scaled = {3: [], 4: []}
            for n in sizes:
                params = validate_params(n, p_of(n), beta, h0)
                eff = effective_params(params)
                reports = reports_from_exact(params, eff, h0, j_max)
                summary = statulevicius_check(reports, calib.R, calib.C_tilde, n)
                for rep in summary.reports:
                    if rep.margin is not None:
                        worst_margin = min(worst_margin, rep.margin)
                if not summary.all_nonnegative:
                    all_nonneg = False
                for j in (3, 4):
                    scaled[j].append(
                        abs(reports[j - 1].kappa_std) * n ** ((j - 2) / 2.0)
                    )
            for j in (3, 4):
                top = max(scaled[j])
                variation = 0.0 if top < 1e-12 else (top - min(scaled[j])) / top
                worst_variation = max(worst_variation, variation)
    elapsed = time.perf_counter() - start
    passed = all_nonneg and worst_variation <= 0.50
    return CriterionResult(
        6,
        "statulevicius-scaling",
        passed,
        f"all margins nonneg: {all_nonneg} (min {worst_margin:.3g}), "
        f"max scaling variation {worst_variation:.1%} (tol 50%)",
        elapsed,
    )


def criterion_mean_variance_limits() -> CriterionResult:
    """kappa_1/N -> m(h) and kappa_2/N -> chi(h) at N = 1600."""
    start = time.perf_counter()
    beta, h = 0.5, 0.2
    params = validate_params(1600, 1.0, beta, h)
    eff = effective_params(params)
    dist = magnetization_pmf(params, eff, h)
    ec = exact_cumulants(dist, 2)
    m = mean_field_magnetization(beta, h)
    chi = susceptibility(beta, m)
    err_mean = abs(float(ec.kappa(1)) / params.N - m)
    err_var = abs(float(ec.kappa(2)) / params.N - chi)
    elapsed = time.perf_counter() - start
    passed = err_mean <= 1e-2 and err_var <= 3e-2
    return CriterionResult(
        7,
        "mean-variance-limits",
        passed,
        f"|kappa_1/N - m| = {err_mean:.2e} (tol 1e-2), "
        f"|kappa_2/N - chi| = {err_var:.2e} (tol 3e-2)",
        elapsed,
    )


def criterion_berry_esseen_trend() -> CriterionResult:
    """ks * sqrt(N) bounded with consecutive ratios in [0.35, 0.65]."""
    start = time.perf_counter()
    sizes = (100, 400, 1600)
    ks_values = []
    for n in sizes:
        params = validate_params(n, 1.0, 0.5, 0.0)
        dist = magnetization_pmf(params, effective_params(params), 0.0)
        ks_values.append(kolmogorov_distance(dist))
    ratios = [ks_values[i + 1] / ks_values[i] for i in range(len(sizes) - 1)]
    ratios_ok = all(0.35 <= r <= 0.65 for r in ratios)
    constant = max(k * math.sqrt(n) for k, n in zip(ks_values, sizes))
    elapsed = time.perf_counter() - start
    passed = ratios_ok and math.isfinite(constant)
    return CriterionResult(
        8,
        "berry-esseen-trend",
        passed,
        f"ks ratios {', '.join(f'{r:.3f}' for r in ratios)} (window [0.35, 0.65]), "
        f"c = max ks*sqrt(N) = {constant:.3f}",
        elapsed,
    )


def criterion_pressure_convergence() -> CriterionResult:
    """|psi_N - Phi(s(h), h)| * pN bounded along the p = N^(-1/4) schedule."""
    start = time.perf_counter()
    beta = 0.5
    worst_factor = 0.0
    details = []
    for h in (0.0, 0.2):
        limit = limit_pressure(beta, h).real
        scaled = []
        for n in (256, 1024, 4096):
            p = n**-0.25
            params = validate_params(n, p, beta, h)
            eff = effective_params(params)
            psi = float(log_partition_exact(params, eff, h)) / n
            scaled.append(abs(psi - limit) * p * n)
        factor = max(scaled) / min(scaled)
        worst_factor = max(worst_factor, factor)
        details.append(f"h={h:g}: spread x{factor:.2f}")
    elapsed = time.perf_counter() - start
    passed = worst_factor <= 3.0
    return CriterionResult(
        9,
        "pressure-convergence",
        passed,
        f"{'; '.join(details)} (tol x3)",
        elapsed,
    )


def criterion_corollary_diagnostics() -> CriterionResult:
    """Concentration, MDP, mod-Gaussian, and Cramer diagnostics at defaults."""
    start = time.perf_counter()
    beta, p, h0 = 0.5, 1.0, 0.0
    calib = calibrate_constants(beta, p, h0, pilot_N=100)
    suite = limit_diagnostics(beta, p, h0, calib)
    violations = sum(d.concentration_violations for d in suite.per_n)
    cramer_pair = [d.cramer_ratio_sup for d in suite.per_n if d.N in (400, 1600)]
    cramer_factor = max(cramer_pair) / min(cramer_pair)
    elapsed = time.perf_counter() - start
    passed = (
        violations == 0
        and suite.mdp.trend_ok
        and suite.mod_trend_ok
        and cramer_factor <= 2.0
    )
    mdp_errs = ", ".join(f"{e:.3f}" for _, e in suite.mdp.max_error_by_N)
    mod_errs = ", ".join(f"{d.mod_gaussian_sup_error:.3f}" for d in suite.per_n)
    return CriterionResult(
        10,
        "corollary-diagnostics",
        passed,
        f"violations {violations}, MDP errors [{mdp_errs}] trend "
        f"{suite.mdp.trend_ok}, mod-Gaussian [{mod_errs}] trend "
        f"{suite.mod_trend_ok}, Cramer factor {cramer_factor:.2f} (tol 2)",
        elapsed,
    )


ALL_CRITERIA = (
    criterion_oracle_equivalence,
    criterion_classical_reduction,
    criterion_hs_contour_shift,
    criterion_saddle_certificates,
    criterion_cross_method_cumulants,
    criterion_statulevicius_scaling,
    criterion_mean_variance_limits,
    criterion_berry_esseen_trend,
    criterion_pressure_convergence,
    criterion_corollary_diagnostics,
)


def run_profile(profile: str) -> list[CriterionResult]:
    """quick: oracles + reduction + saddle grid (< 10 s); full: all ten."""
    if profile == "quick":
        return [
            criterion_oracle_equivalence(tuples=10),
            criterion_classical_reduction(),
            criterion_saddle_certificates(),
        ]
    if profile == "full":
        return [fn() for fn in ALL_CRITERIA]
    raise ConfigError(f"unknown profile {profile!r}")
