"""Exact finite-N engine vs independent oracles.

The collapsed magnetization sum is checked against a configuration-level
2^N enumeration, cumulants against numerical h-derivatives of log Z,
the Kolmogorov distance against an exact rational binomial computation
in the decoupled limit, and the Lee-Yang failure mode against a zero of
the partition function located by bisection on the imaginary axis.
"""
import math
from fractions import Fraction

import mpmath as mp
import pytest
from mpmath import mpc, mpf

from dilutecw.errors import (
    NTooLargeForBruteForce,
    OrderTooHigh,
    PartitionNearZero,
)
from dilutecw.exact import (
    brute_force_oracle,
    characteristic_function,
    characteristic_function_standardized,
    cumulant_records,
    exact_cumulants,
    kolmogorov_distance,
    log_partition_exact,
    magnetization_pmf,
    pmf_records,
    resolve_dps,
    tail_prob,
)
from dilutecw.params import effective_params, validate_params


def make(N, p, beta, h0=0.0):
    params = validate_params(N, p, beta, h0)
    return params, effective_params(params)


# ---------------------------------------------------------------------------
# brute-force oracle


@pytest.mark.parametrize(
    "N,p,beta,h",
    [
        (2, 1.0, 0.5, 0.0),
        (5, 0.7, 0.3, 0.2),
        (8, 0.4, 0.8, -0.35),
        (10, 1.0, 0.9, 0.1),
        (11, 0.25, 0.6, 0.0),
    ],
)
def test_collapsed_sum_matches_configuration_enumeration(N, p, beta, h):
    params, eff = make(N, p, beta)
    oracle = brute_force_oracle(params, h)
    lz = log_partition_exact(params, eff, h)
    with mp.workdps(50):
        rel = abs(lz - oracle.log_z) / abs(oracle.log_z)
        assert rel < mpf("1e-40")
    dist = magnetization_pmf(params, eff, h)
    worst = max(abs(a - b) for a, b in zip(dist.pmf, oracle.pmf))
    assert worst < 1e-15


def test_brute_force_rejects_large_N():
    params, _ = make(13, 0.5, 0.5)
    with pytest.raises(NTooLargeForBruteForce):
        brute_force_oracle(params, 0.0)


def test_brute_force_complex_field():
    params, eff = make(6, 0.8, 0.4)
    h = complex(0.1, 0.05)
    oracle = brute_force_oracle(params, h)
    assert oracle.pmf is None and oracle.log_weights is None
    lz = log_partition_exact(params, eff, mpc(h))
    with mp.workdps(50):
        diff = lz - oracle.log_z
        # same principal branch: compare the exponentials, not the logs
        assert abs(mp.expm1(diff)) < mpf("1e-40")


# ---------------------------------------------------------------------------
# distribution invariants


def test_pmf_normalization_and_support():
    params, eff = make(40, 0.6, 0.7)
    dist = magnetization_pmf(params, eff, 0.15)
    assert dist.magnetizations == [40 - 2 * k for k in range(41)]
    assert abs(math.fsum(dist.pmf) - 1.0) < 1e-12
    with mp.workdps(dist.dps):
        total = mp.fsum(dist.pmf_extended())
        assert abs(total - 1) < mpf("1e-45")


def test_field_reversal_is_bitwise_exact():
    params, eff = make(25, 0.5, 0.6)
    fwd = magnetization_pmf(params, eff, 0.3)
    rev = magnetization_pmf(params, eff, -0.3)
    assert fwd.log_weights == list(reversed(rev.log_weights))
    assert fwd.pmf == list(reversed(rev.pmf))
    assert log_partition_exact(params, eff, 0.3) == log_partition_exact(
        params, eff, -0.3
    )


def test_zero_field_palindrome_and_odd_cumulants_vanish():
    params, eff = make(30, 0.7, 0.5)
    dist = magnetization_pmf(params, eff, 0.0)
    assert dist.log_weights == list(reversed(dist.log_weights))
    ec = exact_cumulants(dist, 5)
    assert ec.kappa(1) == 0
    assert ec.kappa(3) == 0
    assert ec.kappa(5) == 0
    assert ec.kappa(2) > 0


# ---------------------------------------------------------------------------
# cumulants vs h-derivatives of log Z


def test_cumulants_match_log_partition_derivatives():
    # kappa_j = d^j/dh^j log Z, evaluated by central differences with an
    # exactly representable step at 150 digits (j = 4 burns ~50 digits
    # in cancellation; the O(step^2) truncation error is ~1e-20)
    params, eff = make(30, 0.7, 0.8)
    dps = 150
    with mp.workdps(dps):
        x = mpf("0.2")
        step = mpf(2) ** -40
        f = {
            k: log_partition_exact(params, eff, x + k * step, dps=dps)
            for k in range(-2, 3)
        }
        derivs = {
            1: (f[1] - f[-1]) / (2 * step),
            2: (f[1] - 2 * f[0] + f[-1]) / step**2,
            3: (f[2] - 2 * f[1] + 2 * f[-1] - f[-2]) / (2 * step**3),
            4: (f[2] - 4 * f[1] + 6 * f[0] - 4 * f[-1] + f[-2]) / step**4,
        }
        dist = magnetization_pmf(params, eff, 0.2)
        ec = exact_cumulants(dist, 4)
        for j in range(1, 5):
            scale = max(abs(ec.kappa(j)), mpf(1))
            assert abs(derivs[j] - ec.kappa(j)) / scale < mpf("1e-15"), (
                f"kappa_{j}: derivative {mp.nstr(derivs[j], 20)} vs "
                f"moment recursion {mp.nstr(ec.kappa(j), 20)}"
            )


def test_standardized_cumulants_consistent_with_raw():
    params, eff = make(50, 0.9, 0.6)
    dist = magnetization_pmf(params, eff, 0.1)
    ec = exact_cumulants(dist, 6)
    with mp.workdps(dist.dps):
        for j in range(3, 7):
            expected = ec.kappa(j) / ec.kappa(2) ** (mpf(j) / 2)
            assert abs(ec.std(j) - expected) <= abs(expected) * mpf("1e-45")


def test_cumulant_order_limits():
    params, eff = make(10, 1.0, 0.5)
    dist = magnetization_pmf(params, eff, 0.0)
    with pytest.raises(OrderTooHigh):
        exact_cumulants(dist, 17)
    with pytest.raises(OrderTooHigh):
        exact_cumulants(dist, 0)


# ---------------------------------------------------------------------------
# Kolmogorov distance: binomial oracle in the decoupled limit


def test_kolmogorov_distance_matches_binomial_oracle():
    # at beta = 1e-8 the pair coupling is negligible and M_N is a shifted
    # Binomial(N, 1/2); the Kolmogorov distance to the Gaussian can then
    # be computed independently from exact rational binomial weights
    N = 400
    params, eff = make(N, 1.0, 1e-8)
    dist = magnetization_pmf(params, eff, 0.0)
    got = kolmogorov_distance(dist)

    sd = math.sqrt(N)  # Var(N - 2*Binom(N,1/2)) = N
    denom = 1 << N
    F = Fraction(0)
    worst = 0.0
    for k in range(N, -1, -1):  # ascending magnetization
        M = N - 2 * k
        z = M / sd
        gauss = mp.ncdf(z)
        worst = max(worst, abs(float(F) - gauss))
        F += Fraction(math.comb(N, k), denom)
        worst = max(worst, abs(float(F) - gauss))
    assert abs(got - worst) < 0.1 * worst


# ---------------------------------------------------------------------------
# tails and characteristic functions


def test_tail_prob_strict_vs_nonstrict():
    params, eff = make(24, 0.8, 0.7)
    dist = magnetization_pmf(params, eff, 0.0)
    with mp.workdps(dist.dps):
        sigma = dist.sigma
        # standardized location of the atom M = 6 and of the gap above it
        at_atom = (6 - dist.mean) / sigma
        in_gap = (7 - dist.mean) / sigma
        below = tail_prob(dist, at_atom - mpf(1) / sigma / 2)
        at_ns = tail_prob(dist, at_atom)
        at_s = tail_prob(dist, at_atom, strict=True)
        atom_mass = dist.pmf_extended()[(24 - 6) // 2]
        assert abs((at_ns - at_s) - atom_mass) < mpf("1e-40")
        assert at_ns <= below
        # between atoms the strict/non-strict distinction disappears
        assert tail_prob(dist, in_gap) == tail_prob(dist, in_gap, strict=True)
        # beyond the support the tail is exactly zero
        assert tail_prob(dist, (params.N + 2 - dist.mean) / sigma) == 0


def test_tail_prob_is_monotone():
    params, eff = make(30, 0.6, 0.5)
    dist = magnetization_pmf(params, eff, 0.2)
    xs = [0.0, 0.5, 1.0, 2.0, 4.0]
    vals = [tail_prob(dist, x) for x in xs]
    for lo, hi in zip(vals[1:], vals[:-1]):
        assert lo <= hi
    assert vals[0] > 0


def test_characteristic_function_basics():
    params, eff = make(35, 0.7, 0.6)
    dist = magnetization_pmf(params, eff, 0.25)
    with mp.workdps(dist.dps):
        assert abs(characteristic_function(dist, 0.0) - 1) < mpf("1e-45")
        assert abs(characteristic_function(dist, 0.7)) <= 1 + mpf("1e-45")
    sym = magnetization_pmf(params, eff, 0.0)
    with mp.workdps(sym.dps):
        val = characteristic_function_standardized(sym, 1.3)
        assert abs(val.imag) < mpf("1e-40")
        assert abs(val) <= 1


# ---------------------------------------------------------------------------
# Lee-Yang zero on the imaginary axis


def test_partition_near_zero_at_lee_yang_zero():
    # locate the first zero of the (real-valued) partition sum along
    # h = i y by scan + bisection, then check the guarded evaluation
    # refuses to return a logarithm there
    N, beta = 8, 0.5
    params, eff = make(N, 1.0, beta)
    dps = 80

    def partition_sum(y):
        c = mpf(eff.b) / (2 * N)
        return mp.fsum(
            mp.binomial(N, k) * mp.exp(c * (N - 2 * k) ** 2) * mp.cos(y * (N - 2 * k))
            for k in range(N + 1)
        )

    with mp.workdps(dps):
        lo = hi = None
        grid = [mpf(i) / 2000 * mp.pi / 2 for i in range(1, 2001)]
        prev_y, prev_f = grid[0], partition_sum(grid[0])
        for y in grid[1:]:
            f = partition_sum(y)
            if prev_f * f < 0:
                lo, hi = prev_y, y
                break
            prev_y, prev_f = y, f
        assert lo is not None, "no sign change of the partition sum on (0, pi/2)"
        f_lo = partition_sum(lo)
        for _ in range(300):
            mid = (lo + hi) / 2
            f_mid = partition_sum(mid)
            if f_mid == 0:
                lo = hi = mid
                break
            if f_lo * f_mid < 0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        y_zero = (lo + hi) / 2
        assert y_zero > eff.strip_halfwidth  # zero-free strip is respected
        with pytest.raises(PartitionNearZero):
            log_partition_exact(params, eff, mpc(0, y_zero), dps=dps)


# ---------------------------------------------------------------------------
# precision resolution and record shapes


def test_resolve_dps_precedence(monkeypatch):
    monkeypatch.delenv("DILUTE_CW_PRECISION", raising=False)
    assert resolve_dps() == 50
    assert resolve_dps(30) == 30
    assert resolve_dps(5) == 15
    monkeypatch.setenv("DILUTE_CW_PRECISION", "35")
    assert resolve_dps() == 35
    assert resolve_dps(20) == 20


def test_record_shapes():
    params, eff = make(12, 0.9, 0.4)
    dist = magnetization_pmf(params, eff, 0.1)
    rows = pmf_records(dist)
    assert len(rows) == 13
    assert set(rows[0]) == {"k", "M", "log_weight", "pmf"}
    assert rows[0]["M"] == 12 and rows[-1]["M"] == -12
    ec = exact_cumulants(dist, 4)
    crows = cumulant_records(ec)
    assert [r["j"] for r in crows] == [1, 2, 3, 4]
    assert crows[0]["kappa_std"] == "" and crows[1]["kappa_std"] == ""
    assert crows[2]["kappa_std"] != ""
