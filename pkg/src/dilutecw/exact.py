"""Exact finite-N engine: partition function, magnetization law, cumulants.

After integrating out spins with equal magnetization, the annealed
partition function collapses to

    Z = a^(N^2) * sum_k binom(N, k) * exp((b/(2pN)) M_k^2 + h M_k),

with M_k = N - 2k and k the number of -1 spins.  Everything here runs in
mpmath extended precision (default 50 significant digits; override via
the DILUTE_CW_PRECISION environment variable or a dps argument): the
central-moment cancellation in high-order cumulants and the
moderate-deviation tails both destroy double precision.  All sums go
through mp.fsum, which rounds once, so permutation-symmetric identities
(h -> -h reversal, h = 0 palindromy) hold bitwise.

This module is the ground-truth oracle for the saddle-point and contour
modules; its own oracle is brute_force_oracle, an independent sum over
all 2^N spin configurations for N <= 12.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import mpmath as mp
from mpmath import mpc, mpf

from .errors import NTooLargeForBruteForce, OrderTooHigh, PartitionNearZero
from .params import ModelParams, EffectiveParams, effective_params

DEFAULT_DPS = 50
# |sum of max-normalized terms| below this means a Lee-Yang zero, not roundoff
NEAR_ZERO_THRESHOLD = mpf("1e-30")
BRUTE_FORCE_MAX_N = 12
MAX_CUMULANT_ORDER = 16


def resolve_dps(dps: int | None = None) -> int:
    """Working precision in significant digits: argument, env var, default."""
    if dps is not None:
        return max(15, int(dps))
    env = os.environ.get("DILUTE_CW_PRECISION")
    if env:
        return max(15, int(env))
    return DEFAULT_DPS


class MagnetizationDistribution:
    """Exact law of M_N on {-N, -N+2, ..., N} as normalized log-weights.

    log_weights[k] = logBinomial(N,k) + (b/(2pN))(N-2k)^2 + h(N-2k) as mpf;
    log_norm is their exact log-sum-exp; pmf holds float conversions of
    exp(log_weights - log_norm).  Use pmf_extended() where double
    precision underflows (tails, high moments).
    """

    def __init__(self, N, log_weights, log_norm, pmf, dps):
        self.N = N
        self.log_weights = log_weights
        self.log_norm = log_norm
        self.pmf = pmf
        self.magnetizations = [N - 2 * k for k in range(N + 1)]
        self.dps = dps
        self._pmf_mp = None
        self._mean = None
        self._var = None

    @classmethod
    def from_log_weights(cls, N, log_weights, dps=None):
        """Normalize a vector of N+1 log-weights into a distribution."""
        dps = resolve_dps(dps)
        with mp.workdps(dps):
            m = max(log_weights)
            total = mp.fsum(mp.exp(lw - m) for lw in log_weights)
            log_norm = m + mp.log(total)
            pmf = [float(mp.exp(lw - log_norm)) for lw in log_weights]
        return cls(N, list(log_weights), log_norm, pmf, dps)

    def pmf_extended(self):
        """pmf as exact-precision mpf values (cached)."""
        if self._pmf_mp is None:
            with mp.workdps(self.dps):
                self._pmf_mp = [
                    mp.exp(lw - self.log_norm) for lw in self.log_weights
                ]
        return self._pmf_mp

    @property
    def mean(self):
        if self._mean is None:
            with mp.workdps(self.dps):
                self._mean = mp.fsum(
                    p * M for p, M in zip(self.pmf_extended(), self.magnetizations)
                )
        return self._mean

    @property
    def variance(self):
        if self._var is None:
            with mp.workdps(self.dps):
                mu = self.mean
                self._var = mp.fsum(
                    p * (M - mu) ** 2
                    for p, M in zip(self.pmf_extended(), self.magnetizations)
                )
        return self._var

    @property
    def sigma(self):
        with mp.workdps(self.dps):
            return mp.sqrt(self.variance)


@dataclass(frozen=True)
class ExactCumulants:
    """Cumulants of M_N (raw, kappa_1..kappa_J) and of the standardized
    m_N = (M_N - kappa_1)/sqrt(kappa_2) for orders j >= 3."""

    J: int
    raw: tuple
    standardized: tuple

    def kappa(self, j: int):
        return self.raw[j - 1]

    def std(self, j: int):
        if j < 3:
            raise ValueError("standardized cumulants defined for j >= 3")
        return self.standardized[j - 3]


@dataclass(frozen=True)
class BruteForceResult:
    """2^N enumeration result: log Z, pmf (real h only), bucket log-weights."""

    log_z: object
    pmf: list | None
    log_weights: list | None


def collapsed_base(params: ModelParams, eff: EffectiveParams, dps: int):
    """Field-independent part of the collapsed log-weights.

    Returns (base, magnetizations) with base[k] = logBinomial(N,k)
    + (b/(2pN)) M_k^2; the weight at field h is base[k] + h*M_k.  Shared
    by the pmf builder and the contour pipeline, which evaluates many
    fields against one table.
    """
    N, p = params.N, params.p
    with mp.workdps(dps):
        c = mpf(eff.b) / (2 * mpf(p) * N)
        lg = [mp.loggamma(i + 1) for i in range(N + 1)]
        lg_N = lg[N]
        base = []
        ms = []
        for k in range(N + 1):
            M = N - 2 * k
            base.append(lg_N - (lg[k] + lg[N - k]) + c * (M * M))
            ms.append(M)
        return base, ms


def _collapsed_log_weights(params: ModelParams, eff: EffectiveParams, h, dps: int):
    """log-weights of the collapsed sum at (possibly complex) field h."""
    with mp.workdps(dps):
        if isinstance(h, mpc):
            hh = h
        elif isinstance(h, complex):
            hh = mpc(h)
        else:
            hh = mpf(h)
        base, ms = collapsed_base(params, eff, dps)
        return [b + hh * M for b, M in zip(base, ms)]


def magnetization_pmf(
    params: ModelParams, eff: EffectiveParams, h: float, dps: int | None = None
) -> MagnetizationDistribution:
    """Exact distribution of M_N at real field h."""
    dps = resolve_dps(dps)
    h = float(h)
    lws = _collapsed_log_weights(params, eff, h, dps)
    return MagnetizationDistribution.from_log_weights(params.N, lws, dps)


def log_partition_exact(
    params: ModelParams, eff: EffectiveParams, h, dps: int | None = None
):
    """log Z at (possibly complex) field h: N^2 log_a + logSumExp_k l_k(h).

    Returns mpf for real h, mpc for complex h (principal-branch
    imaginary part; continuous branch tracking along contours is the
    caller's job).  Raises PartitionNearZero when the max-normalized sum
    has magnitude < 1e-30, which signals a Lee-Yang zero rather than
    roundoff.
    """
    dps = resolve_dps(dps)
    N = params.N
    if isinstance(h, mpc):
        is_complex = h.imag != 0
        hh = h if is_complex else h.real
    elif isinstance(h, mpf):
        is_complex = False
        hh = h
    else:
        hc = complex(h)
        is_complex = hc.imag != 0.0
        hh = hc if is_complex else hc.real
    lws = _collapsed_log_weights(params, eff, hh, dps)
    with mp.workdps(dps):
        m = max((lw.real if is_complex else lw) for lw in lws)
        total = mp.fsum(mp.exp(lw - m) for lw in lws)
        if abs(total) < NEAR_ZERO_THRESHOLD:
            raise PartitionNearZero(
                f"|partition sum| < 1e-30 of max term at h = {h}"
            )
        return N * N * mpf(eff.log_a) + m + mp.log(total)


def exact_cumulants(
    dist: MagnetizationDistribution, J: int, dps: int | None = None
) -> ExactCumulants:
    """Cumulants kappa_1..kappa_J of M_N from central moments.

    Central moments are taken about the exact mean, then the recursion
    kappa_j = mu'_j - sum_{i=1}^{j-1} binom(j-1, i-1) kappa_i mu'_{j-i}
    runs on the shifted (mean-zero) moments; the kappa_1 = 0 shift is
    folded back afterwards.  J is capped at 16: beyond that the
    recursion's cancellation outruns the default 50-digit precision.
    """
    if not 1 <= J <= MAX_CUMULANT_ORDER:
        raise OrderTooHigh(f"cumulant order J = {J} outside [1, {MAX_CUMULANT_ORDER}]")
    dps = resolve_dps(dps) if dps is not None else dist.dps
    with mp.workdps(dps):
        pk = dist.pmf_extended()
        Ms = dist.magnetizations
        mean = dist.mean
        mu = [mpf(1)]
        for j in range(1, J + 1):
            mu.append(mp.fsum(p * (M - mean) ** j for p, M in zip(pk, Ms)))
        kap = [mpf(0)] * (J + 1)
        for j in range(1, J + 1):
            acc = mpf(0)
            for i in range(1, j):
                acc += mp.binomial(j - 1, i - 1) * kap[i] * mu[j - i]
            kap[j] = mu[j] - acc
        kap[1] = mean
        std = []
        if J >= 3 and kap[2] > 0:
            for j in range(3, J + 1):
                std.append(kap[j] / kap[2] ** (mpf(j) / 2))
        return ExactCumulants(J=J, raw=tuple(kap[1:]), standardized=tuple(std))


def kolmogorov_distance(dist: MagnetizationDistribution, dps: int | None = None) -> float:
    """sup_x |F_{m_N}(x) - Phi(x)| with both one-sided cdf limits at atoms."""
    dps = resolve_dps(dps) if dps is not None else dist.dps
    with mp.workdps(dps):
        mean, sd = dist.mean, dist.sigma
        pk = dist.pmf_extended()
        d = mpf(0)
        F = mpf(0)
        # k = N..0 walks the atoms in ascending magnetization
        for k in range(dist.N, -1, -1):
            z = (dist.magnetizations[k] - mean) / sd
            gauss = mp.ncdf(z)
            d = max(d, abs(F - gauss))
            F += pk[k]
            d = max(d, abs(F - gauss))
        return float(d)


def tail_prob(
    dist: MagnetizationDistribution, x, strict: bool = False, dps: int | None = None
):
    """P(m_N >= x) — or P(m_N > x) with strict=True — summed smallest-first.

    x is a standardized threshold.  Returns an mpf: moderate-deviation
    tails underflow double precision.
    """
    dps = resolve_dps(dps) if dps is not None else dist.dps
    with mp.workdps(dps):
        thresh = dist.mean + mpf(x) * dist.sigma
        included = sorted(
            lw
            for lw, M in zip(dist.log_weights, dist.magnetizations)
            if (M > thresh if strict else M >= thresh)
        )
        if not included:
            return mpf(0)
        return mp.fsum(mp.exp(lw - dist.log_norm) for lw in included)


def characteristic_function(dist: MagnetizationDistribution, t, dps: int | None = None):
    """E[exp(i t M_N)] as mpc."""
    dps = resolve_dps(dps) if dps is not None else dist.dps
    with mp.workdps(dps):
        tt = mpf(t)
        return mp.fsum(
            p * mp.exp(1j * tt * M)
            for p, M in zip(dist.pmf_extended(), dist.magnetizations)
        )


def characteristic_function_standardized(
    dist: MagnetizationDistribution, t, dps: int | None = None
):
    """E[exp(i t m_N)] for the standardized magnetization, as mpc."""
    dps = resolve_dps(dps) if dps is not None else dist.dps
    with mp.workdps(dps):
        tt = mpf(t)
        mean, sd = dist.mean, dist.sigma
        return mp.fsum(
            p * mp.exp(1j * tt * (M - mean) / sd)
            for p, M in zip(dist.pmf_extended(), dist.magnetizations)
        )


def brute_force_oracle(params: ModelParams, h, dps: int | None = None) -> BruteForceResult:
    """Sum over all 2^N spin configurations (N <= 12): the independent oracle.

    Accumulates exp((b/(2pN)) M(sigma)^2 + h M(sigma)) configuration by
    configuration (weights memoized per magnetization value — identical
    arithmetic, no binomial collapse) plus the a^(N^2) prefactor in log
    scale.  pmf and bucket log-weights are produced for real h only.
    """
    N = params.N
    if N > BRUTE_FORCE_MAX_N:
        raise NTooLargeForBruteForce(f"N = {N} > {BRUTE_FORCE_MAX_N}")
    dps = resolve_dps(dps)
    eff = effective_params(params)
    is_complex = isinstance(h, complex) and h.imag != 0.0
    with mp.workdps(dps):
        c = mpf(eff.b) / (2 * mpf(params.p) * N)
        hh = mpc(h) if is_complex else mpf(complex(h).real)
        memo = {}
        buckets = [mpf(0)] * (N + 1) if not is_complex else None
        values = []
        for config in range(1 << N):
            k = bin(config).count("1")
            M = N - 2 * k
            w = memo.get(M)
            if w is None:
                w = mp.exp(c * (M * M) + hh * M)
                memo[M] = w
            values.append(w)
            if buckets is not None:
                buckets[k] += w
        total = mp.fsum(values)
        if abs(total) < NEAR_ZERO_THRESHOLD * max(abs(v) for v in memo.values()):
            raise PartitionNearZero(f"brute-force sum vanished at h = {h}")
        log_z = N * N * mpf(eff.log_a) + mp.log(total)
        if buckets is None:
            return BruteForceResult(log_z=log_z, pmf=None, log_weights=None)
        log_weights = [mp.log(bk) for bk in buckets]
        pmf = [float(bk / total) for bk in buckets]
        return BruteForceResult(log_z=log_z, pmf=pmf, log_weights=log_weights)


def pmf_records(dist: MagnetizationDistribution) -> list[dict]:
    """Rows (k, M, log_weight, pmf) with mpf fields as decimal strings."""
    with mp.workdps(dist.dps):
        return [
            {
                "k": k,
                "M": dist.magnetizations[k],
                "log_weight": mp.nstr(dist.log_weights[k], dist.dps),
                "pmf": dist.pmf[k],
            }
            for k in range(dist.N + 1)
        ]


def cumulant_records(ec: ExactCumulants, dps: int | None = None) -> list[dict]:
    """Rows (j, kappa_raw, kappa_std) with mpf fields as decimal strings."""
    dps = resolve_dps(dps)
    with mp.workdps(dps):
        rows = []
        for j in range(1, ec.J + 1):
            rows.append(
                {
                    "j": j,
                    "kappa_raw": mp.nstr(ec.kappa(j), dps),
                    "kappa_std": mp.nstr(ec.std(j), dps) if j >= 3 else "",
                }
            )
        return rows
