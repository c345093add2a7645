"""Limit-theorem diagnostics on exact finite-N laws.

Each diagnostic is exercised on real distributions (no mocks except for
the tail-underflow guard, whose natural trigger sits beyond unit-test
sizes), and the driver is run end to end on a small schedule.
"""
import math

import mpmath as mp
import pytest
from mpmath import mpf

import dilutecw.limits as limits_module
from dilutecw.cumulants import calibrate_constants
from dilutecw.errors import ConfigError, TailUnderflow
from dilutecw.exact import exact_cumulants, magnetization_pmf
from dilutecw.limits import (
    berry_esseen_report,
    concentration_check,
    cramer_diagnostic,
    diagnostics_records,
    limit_diagnostics,
    mdp_diagnostic,
    mod_gaussian_diagnostic,
)
from dilutecw.params import effective_params, validate_params

P, BETA, H0 = 0.7, 0.6, 0.2


def dist_at(N, p=P, beta=BETA, h0=H0):
    params = validate_params(N, p, beta, h0)
    return magnetization_pmf(params, effective_params(params), h0)


# ---------------------------------------------------------------------------
# Berry-Esseen


def test_berry_esseen_sweep():
    report = berry_esseen_report([dist_at(n) for n in (50, 100, 200)])
    assert [row[0] for row in report.entries] == [50, 100, 200]
    assert report.trend_ok
    assert report.excluded == ()
    assert 0.3 < report.constant < 0.6
    for N, ks, ks_sqrt in report.entries:
        assert ks_sqrt == pytest.approx(ks * math.sqrt(N))


def test_berry_esseen_excludes_degenerate_size():
    report = berry_esseen_report([dist_at(n) for n in (1, 50, 100, 200)])
    assert report.excluded == (1,)
    assert len(report.entries) == 4
    # the N = 1 row exists but must not drive the constant
    included_max = max(row[2] for row in report.entries if row[0] > 1)
    assert report.constant == included_max


def test_berry_esseen_needs_three_sizes():
    with pytest.raises(ConfigError):
        berry_esseen_report([dist_at(50), dist_at(100)])


# ---------------------------------------------------------------------------
# concentration


def test_concentration_bound_holds_with_calibrated_pair():
    cal = calibrate_constants(BETA, P, H0, pilot_N=100, J=8)
    report = concentration_check(dist_at(400), cal.C_cauchy, cal.R_cauchy)
    assert report.violations == 0
    assert all(ok for (_, _, _, ok) in report.entries)
    # tails and bounds are both probabilities
    for x, tail, bound, _ in report.entries:
        assert 0 <= tail <= 1 and 0 <= bound <= 1


def test_concentration_counts_forced_violation():
    # C ~ 0 with huge R collapses the bound to ~exp(-R sqrt(N) / 2) = 0,
    # which a genuine tail must violate; negative x is skipped entirely
    report = concentration_check(dist_at(200), C=1e-9, R=1e6, x_grid=(-1.0, 0.5))
    assert len(report.entries) == 1
    assert report.violations == 1


# ---------------------------------------------------------------------------
# Cramer correction


def test_cramer_caps_grid_and_orders_tails():
    report = cramer_diagnostic(dist_at(200), x_grid=(0.5, 1.0, 2.0, 4.0, 8.0))
    # 200^(1/3) = 5.85 drops the x = 8 point
    assert [e[0] for e in report.entries] == [0.5, 1.0, 2.0, 4.0]
    for _, l_closed, l_open, _ in report.entries:
        assert l_closed >= l_open  # P(>= x) >= P(> x)
    assert report.ratio_sup == max(
        abs(l) * math.sqrt(200) / max(x**3, x) for x, l, _, _ in report.entries
    )


def test_cramer_empty_grid_raises():
    with pytest.raises(ConfigError):
        cramer_diagnostic(dist_at(8), x_grid=(3.0,))


def test_cramer_tail_underflow_guard(monkeypatch):
    monkeypatch.setattr(
        limits_module, "tail_prob", lambda *a, **k: mpf("1e-310")
    )
    with pytest.raises(TailUnderflow):
        cramer_diagnostic(dist_at(50), x_grid=(1.0,))


# ---------------------------------------------------------------------------
# moderate deviations


def test_mdp_rates_approach_half_x_squared():
    report = mdp_diagnostic([dist_at(n) for n in (200, 800, 3200)])
    errs = [err for _, err in report.max_error_by_N]
    assert report.trend_ok
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 0.15
    for N, a_n, x, r_val, err in report.entries:
        assert a_n == pytest.approx(N**0.25)
        assert err == pytest.approx(abs(r_val - 0.5 * x * x))


def test_mdp_tail_underflow_at_deep_threshold():
    # at N = 6400 and x = 5 the threshold sits ~45 sigma out: inside the
    # support but far below the 1e-300 floor
    with pytest.raises(TailUnderflow):
        mdp_diagnostic([dist_at(6400)], x_grid=(5.0,))


# ---------------------------------------------------------------------------
# mod-Gaussian renormalization


def test_mod_gaussian_default_c3_is_kappa3_times_delta():
    dist = dist_at(400)
    delta = 5.0
    report = mod_gaussian_diagnostic(dist, delta)
    ec = exact_cumulants(dist, 3)
    assert report.c3 == pytest.approx(float(ec.std(3)) * delta)
    assert report.delta == delta
    assert 0 < report.sup_error < 0.2
    forced = mod_gaussian_diagnostic(dist, delta, c3=0.123)
    assert forced.c3 == 0.123


def test_mod_gaussian_error_shrinks_with_N():
    cal = calibrate_constants(BETA, P, H0, pilot_N=100, J=8)
    sups = []
    for n in (100, 400, 1600):
        delta_n = (cal.R / cal.C_tilde) * math.sqrt(n)
        dist = dist_at(n)
        ec = exact_cumulants(dist, 3)
        sups.append(
            mod_gaussian_diagnostic(dist, delta_n, c3=float(ec.std(3)) * delta_n).sup_error
        )
    assert sups[0] > sups[1] > sups[2]


# ---------------------------------------------------------------------------
# driver


def test_limit_suite_driver_end_to_end():
    cal = calibrate_constants(BETA, P, H0, pilot_N=100, J=8)
    suite = limit_diagnostics(BETA, P, H0, cal, n_schedule=(100, 400, 900))
    assert [d.N for d in suite.per_n] == [100, 400, 900]
    assert all(d.concentration_violations == 0 for d in suite.per_n)
    assert suite.berry.trend_ok
    assert suite.cramer_max_over_min < 3.0

    largest = dist_at(900)
    delta = (cal.R / cal.C_tilde) * math.sqrt(900)
    ec = exact_cumulants(largest, 3)
    assert suite.c3 == pytest.approx(float(ec.std(3)) * delta)

    rows = diagnostics_records(suite)
    assert all(set(r) == {"N", "metric", "value"} for r in rows)
    metrics = {r["metric"] for r in rows if r["N"] == 400}
    assert {
        "ks_distance",
        "ks_times_sqrtN",
        "concentration_violations",
        "cramer_ratio_sup",
        "mod_gaussian_sup_error",
    } <= metrics
    assert any(m.startswith("mdp_error_x=") for m in metrics)


def test_limit_suite_rejects_short_schedule():
    cal = calibrate_constants(BETA, P, H0, pilot_N=100, J=8)
    with pytest.raises(ConfigError):
        limit_diagnostics(BETA, P, H0, cal, n_schedule=(400,))
