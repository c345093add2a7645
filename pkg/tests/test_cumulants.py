"""Cauchy-contour cumulants, calibration, and the bound checker.

The contour extraction is compared against the moment recursion on the
exact law (two genuinely different routes to kappa_j), the asymptotic
pressure source against both, and the phase-unwrap and imaginary-residue
guards are driven to their raise points with corrupted pressure sources.
"""
import math

import pytest

import dilutecw.cumulants as cumulants_module
from dilutecw.cumulants import (
    CalibrationResult,
    ContourConfig,
    CumulantReport,
    calibrate_constants,
    cumulants_contour,
    default_pressure_source,
    radius_default,
    report_records,
    reports_from_exact,
    resolve_contour_config,
    statulevicius_check,
)
from dilutecw.errors import (
    ConfigError,
    ContourExitsStrip,
    ImaginaryResidueTooLarge,
    OrderTooHigh,
    PhaseUnwrapFailure,
)
from dilutecw.params import effective_params, validate_params


def make(N, p, beta, h0=0.0):
    params = validate_params(N, p, beta, h0)
    return params, effective_params(params)


# ---------------------------------------------------------------------------
# contour vs moment recursion (exact source)


def test_contour_matches_moment_recursion():
    params, eff = make(200, 0.7, 0.6, h0=0.3)
    cfg = resolve_contour_config(params, eff, 0.3, 8)
    assert cfg.pressure_source == "exact"
    ct = cumulants_contour(params, eff, cfg, 8)
    ex = reports_from_exact(params, eff, 0.3, 8)
    for c, e in zip(ct, ex):
        scale = max(abs(e.kappa_raw), 1.0)
        assert abs(c.kappa_raw - e.kappa_raw) / scale < 1e-12, f"j = {c.j}"
        assert abs(c.kappa_std - e.kappa_std) < 1e-12
    assert ct[0].kappa_std == 0.0 and ct[1].kappa_std == 1.0
    assert all(c.method == "contour" for c in ct)
    assert all(e.method == "exact-recursion" for e in ex)


def test_contour_node_refinement_is_converged():
    # doubling K at half the default radius must not move any cumulant:
    # the trapezoidal Fourier sum of an analytic integrand converges
    # geometrically and 64 nodes are already past the knee
    params, eff = make(150, 0.7, 0.6, h0=0.3)
    R = 0.5 * eff.strip_halfwidth
    coarse = cumulants_contour(params, eff, ContourConfig(0.3, R, 64, "exact"), 6)
    fine = cumulants_contour(params, eff, ContourConfig(0.3, R, 128, "exact"), 6)
    for c, f in zip(coarse, fine):
        scale = max(abs(f.kappa_raw), 1.0)
        assert abs(c.kappa_raw - f.kappa_raw) / scale < 1e-10


def test_asymptotic_source_agrees_at_large_N():
    params, eff = make(800, 0.7, 0.6, h0=0.3)
    cfg = ContourConfig(h0=0.3, R=radius_default(eff), K=64,
                        pressure_source="asymptotic")
    ct = cumulants_contour(params, eff, cfg, 4)
    ex = reports_from_exact(params, eff, 0.3, 4)
    for c, e in zip(ct, ex):
        scale = max(abs(e.kappa_raw), 1.0)
        assert abs(c.kappa_raw - e.kappa_raw) / scale < 1e-3, f"j = {c.j}"


def test_odd_cumulants_vanish_at_zero_field():
    params, eff = make(100, 0.7, 0.6, h0=0.0)
    cfg = resolve_contour_config(params, eff, 0.0, 6)
    ct = cumulants_contour(params, eff, cfg, 6)
    for c in ct:
        if c.j in (3, 5):
            assert abs(c.kappa_std) < 1e-30
        if c.j in (4, 6):
            assert abs(c.kappa_std) > 1e-3


# ---------------------------------------------------------------------------
# configuration resolution and validation


def test_resolve_contour_defaults():
    params, eff = make(120, 0.8, 0.5)
    cfg = resolve_contour_config(params, eff, 0.1, 10)
    assert cfg.R == pytest.approx(0.9 * eff.strip_halfwidth)
    assert cfg.K == 80  # 8 nodes per order beats the 64 floor at J = 10
    assert cfg.pressure_source == "exact"
    cfg2 = resolve_contour_config(params, eff, 0.1, 4, R=0.05, K=200,
                                  pressure_source="asymptotic")
    assert (cfg2.R, cfg2.K, cfg2.pressure_source) == (0.05, 200, "asymptotic")
    assert default_pressure_source(5000) == "exact"
    assert default_pressure_source(5001) == "asymptotic"


def test_contour_validation_errors():
    params, eff = make(100, 0.7, 0.6)
    w = eff.strip_halfwidth
    with pytest.raises(ContourExitsStrip):
        cumulants_contour(params, eff, ContourConfig(0.0, w, 64, "exact"), 4)
    with pytest.raises(ConfigError):
        cumulants_contour(params, eff, ContourConfig(0.0, -0.1, 64, "exact"), 4)
    with pytest.raises(ConfigError):
        cumulants_contour(params, eff, ContourConfig(0.0, 0.5 * w, 32, "exact"), 4)
    with pytest.raises(ConfigError):
        cumulants_contour(params, eff, ContourConfig(0.0, 0.5 * w, 64, "exact"), 12)
    with pytest.raises(ConfigError):
        cumulants_contour(params, eff, ContourConfig(0.0, 0.5 * w, 64, "mystery"), 4)
    with pytest.raises(ConfigError):
        cumulants_contour(
            params, eff, ContourConfig(math.inf, 0.5 * w, 64, "exact"), 4
        )
    with pytest.raises(OrderTooHigh):
        cumulants_contour(params, eff, ContourConfig(0.0, 0.5 * w, 200, "exact"), 17)


# ---------------------------------------------------------------------------
# guard rails: corrupted pressure sources must be caught, not averaged away


def test_imaginary_residue_guard(monkeypatch):
    params, eff = make(300, 0.7, 0.6, h0=0.2)
    cfg = ContourConfig(0.2, radius_default(eff), 64, "asymptotic")
    orig = cumulants_module._asymptotic_contour_pressures

    def biased(params, eff, nodes):
        return [v + 0.05j * k for k, v in enumerate(orig(params, eff, nodes))]

    monkeypatch.setattr(cumulants_module, "_asymptotic_contour_pressures", biased)
    with pytest.raises(ImaginaryResidueTooLarge):
        cumulants_contour(params, eff, cfg, 4)


def test_phase_unwrap_guard(monkeypatch):
    # zeroing the saddle predictor makes the raw principal-branch phase
    # steps (several radians at N = 600) land outside the +-pi/2 trust
    # window, which must abort the extraction rather than alias
    params, eff = make(600, 0.7, 0.6, h0=0.3)
    cfg = ContourConfig(0.3, radius_default(eff), 64, "exact")
    monkeypatch.setattr(cumulants_module, "phi", lambda *a, **k: 0j)
    with pytest.raises(PhaseUnwrapFailure):
        cumulants_contour(params, eff, cfg, 4)


# ---------------------------------------------------------------------------
# bound checker arithmetic


def _report(j, std):
    return CumulantReport(j=j, kappa_raw=float("nan"), kappa_std=std,
                          bound=None, margin=None, method="contour")


def test_statulevicius_check_annotations():
    # Delta = (R/C_tilde) sqrt(N) = 10, so bounds are 3!/10 = 0.6 and
    # 4!/100 = 0.24
    reports = [_report(1, 0.0), _report(2, 1.0), _report(3, 0.5), _report(4, 0.3)]
    summary = statulevicius_check(reports, R=1.0, C_tilde=1.0, N=100)
    assert summary.delta == pytest.approx(10.0)
    a3, a4 = summary.reports[2], summary.reports[3]
    assert a3.bound == pytest.approx(0.6) and a3.margin == pytest.approx(0.1)
    assert a4.bound == pytest.approx(0.24) and a4.margin == pytest.approx(-0.06)
    assert not summary.all_nonnegative
    assert summary.tightest_j == 4
    assert summary.reports[0].bound is None and summary.reports[1].bound is None
    assert summary.intermediate_margins is None

    with_c = statulevicius_check(reports, R=1.0, C_tilde=1.0, N=100, C=2.0)
    assert len(with_c.intermediate_margins) == 2
    j3_margin = with_c.intermediate_margins[0]
    assert j3_margin == (3, pytest.approx(2.0 * 0.6 - 0.5))


def test_statulevicius_all_nonnegative_when_loose():
    reports = [_report(3, 1e-6), _report(4, 1e-6)]
    summary = statulevicius_check(reports, R=1.0, C_tilde=1.0, N=4)
    assert summary.all_nonnegative
    # Delta = 2 > 1, so the j = 3 bound (3.0) is the smallest and carries
    # the least relative headroom
    assert summary.tightest_j == 3


# ---------------------------------------------------------------------------
# calibration


def test_calibrate_constants_pilot():
    cal = calibrate_constants(0.6, 0.7, 0.2, pilot_N=100, J=8)
    assert isinstance(cal, CalibrationResult)
    assert cal.pilot_N == 100
    assert cal.C > 0 and cal.C_tilde >= 1.0
    assert cal.C <= cal.C_cauchy  # the uniform-in-j pair is cruder
    _, eff = make(100, 0.7, 0.6, h0=0.2)
    assert cal.R == pytest.approx(0.9 * eff.strip_halfwidth)

    # the Cauchy pair must dominate every measured pilot cumulant: it is
    # an actual inequality, not a fit
    params, eff = make(100, 0.7, 0.6, h0=0.2)
    for rep in reports_from_exact(params, eff, 0.2, 8):
        if rep.j < 3:
            continue
        bound = cal.C_cauchy * math.factorial(rep.j) / (
            cal.R_cauchy * math.sqrt(100)
        ) ** (rep.j - 2)
        assert abs(rep.kappa_std) <= bound


def test_calibration_bound_transfers_to_larger_N():
    # constants fitted at the pilot must hold (with the ratio constant
    # C_tilde) at a four-fold larger size: that is the scaling claim
    cal = calibrate_constants(0.6, 0.7, 0.2, pilot_N=100, J=8)
    params, eff = make(400, 0.7, 0.6, h0=0.2)
    reports = reports_from_exact(params, eff, 0.2, 8)
    summary = statulevicius_check(reports, R=cal.R, C_tilde=cal.C_tilde, N=400)
    assert summary.all_nonnegative, [
        (r.j, r.margin) for r in summary.reports if r.j >= 3
    ]


def test_report_records_shape():
    params, eff = make(80, 0.9, 0.5, h0=0.1)
    reports = reports_from_exact(params, eff, 0.1, 4)
    rows = report_records(reports)
    assert [r["j"] for r in rows] == [1, 2, 3, 4]
    assert set(rows[0]) == {"j", "kappa_raw", "kappa_std", "bound", "margin", "method"}
    assert rows[0]["bound"] is None
