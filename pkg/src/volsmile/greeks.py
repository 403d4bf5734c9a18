"""Spot deltas of calls.

A delta depends on which distribution parameters move with spot, so every
result carries an ``assumption`` tag:

* ``const_kappa``: gamma shape fixed, ``theta = F / kappa`` moves
* ``const_variance``: gamma variance ``kappa * theta^2`` fixed, both move
* ``exact``: a location family (or the upper end ``b = 2F - a`` of the
  uniform) shifts one-for-one with the forward
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import dists, pricer, specfun
from .dists import Gamma, MarketParams, StudentT, Uniform
from .errors import ConvergenceError, DomainError

CONST_KAPPA = "const_kappa"
CONST_VARIANCE = "const_variance"
EXACT = "exact"

FD_REL_STEP = 1e-5
FD_CONVERGENCE_TOL = 1e-8


@dataclass(frozen=True)
class DeltaResult:
    delta: float
    assumption: str


def _growth(market: MarketParams) -> float:
    return math.exp((market.domestic_rate - market.foreign_rate) * market.expiry)


def gamma_delta_const_kappa(market: MarketParams, K: float, spec: Gamma) -> DeltaResult:
    pricer.check_forward(spec, market)
    K = float(K)
    kappa, theta = spec.kappa, spec.theta
    if K <= 0.0:
        return DeltaResult(market.foreign_discount, CONST_KAPPA)
    x = K / theta
    p0 = specfun.reg_inc_gamma(kappa, x)
    p1 = specfun.reg_inc_gamma(kappa + 1.0, x)
    p2 = specfun.reg_inc_gamma(kappa + 2.0, x)
    bracket = 1.0 - x * p0 - (kappa + 1.0) * p2 + p1 * (x + kappa)
    return DeltaResult(market.foreign_discount * bracket, CONST_KAPPA)


def gamma_call_const_variance(market: MarketParams, K: float, dist_variance: float) -> float:
    """Gamma call with ``kappa = F^2 / v`` and ``theta = v / F``.

    ``dist_variance`` is the variance of S_T (not an implied vol squared).
    """
    fwd = market.forward
    spec = Gamma(fwd * fwd / dist_variance, dist_variance / fwd)
    return pricer.gamma_call(market, K, spec)


def gamma_delta_const_variance(market: MarketParams, K: float, spec: Gamma,
                               rel_step: float = FD_REL_STEP) -> DeltaResult:
    """Central difference in spot of the variance-parameterized gamma call.

    The step is halved once and the two estimates must agree to
    ``FD_CONVERGENCE_TOL``.
    """
    pricer.check_forward(spec, market)
    dist_variance = spec.variance
    s0 = market.spot

    def price(spot):
        return gamma_call_const_variance(market.with_spot(spot), K, dist_variance)

    h = rel_step * s0
    d_h = (price(s0 + h) - price(s0 - h)) / (2.0 * h)
    d_half = (price(s0 + 0.5 * h) - price(s0 - 0.5 * h)) / h
    if abs(d_h - d_half) > FD_CONVERGENCE_TOL:
        raise ConvergenceError(
            f"const-variance delta at K={K} not converged: {d_h!r} vs {d_half!r}",
            estimate=d_half, error_bound=abs(d_h - d_half))
    return DeltaResult(d_h, CONST_VARIANCE)


def student_delta(market: MarketParams, K: float, spec: StudentT) -> DeltaResult:
    pricer.check_forward(spec, market)
    K = float(K)
    nu, mu = spec.nu, spec.mu
    z = mu - K
    dist2 = z * z + nu
    ibeta = specfun.reg_inc_beta(nu / dist2, 0.5 * nu, 0.5)
    first = -z * math.exp(spec.log_norm_const - 0.5 * (nu + 1.0) * math.log1p(z * z / nu))
    if z == 0.0:
        corr = 0.0
    else:
        log_corr = (0.5 * nu * math.log(nu) + math.log(abs(z))
                    - 0.5 * (nu + 1.0) * math.log(dist2) - specfun.log_beta(0.5 * nu, 0.5))
        corr = 2.0 * math.exp(log_corr)
    inner = ibeta - corr
    branch = inner if K >= mu else 2.0 - inner
    return DeltaResult(market.foreign_discount * (first + 0.5 * branch), EXACT)


def uniform_delta(market: MarketParams, K: float, spec: Uniform) -> DeltaResult:
    pricer.check_forward(spec, market)
    K = float(K)
    a, b = spec.a, spec.b
    if K >= b:
        return DeltaResult(0.0, EXACT)
    frac = (max(K, a) - a) / (b - a)
    return DeltaResult(market.foreign_discount * (1.0 - frac * frac), EXACT)


def uniform_strike_from_delta(delta: float, market: MarketParams, spec: Uniform) -> float:
    """Strike in ``(a, b)`` whose uniform call delta equals ``delta``."""
    scaled = float(delta) / market.foreign_discount
    if not scaled > 0.0:
        raise DomainError(f"delta * exp(qT) = {scaled!r} must be > 0 (strike would be >= b)")
    if not scaled < 1.0:
        raise DomainError(f"delta * exp(qT) = {scaled!r} must be < 1 (strike would be <= a)")
    return spec.a + (spec.b - spec.a) * math.sqrt(1.0 - scaled)


def bsm_delta(market: MarketParams, K: float, sigma: float) -> DeltaResult:
    d1, _ = pricer.bsm_d1_d2(market, K, sigma)
    return DeltaResult(market.foreign_discount * specfun.std_normal_cdf(d1), EXACT)


def bachelier_delta(market: MarketParams, K: float, sigma_n: float) -> DeltaResult:
    """Delta with annualized normal vol held fixed while the forward moves."""
    stdev = sigma_n * math.sqrt(market.expiry)
    d = (market.forward - K) / stdev
    return DeltaResult(market.foreign_discount * specfun.std_normal_cdf(d), EXACT)


def delta(spec: dists.DistributionSpec, market: MarketParams, K: float,
          assumption: str = CONST_KAPPA) -> DeltaResult:
    """Analytic call delta for families that have one.

    Lognormal and normal specs are priced as BSM and Bachelier with
    ``sigma = s / sqrt(T)`` and ``sigma_n / sqrt(T)``.
    """
    root_t = math.sqrt(market.expiry)
    if isinstance(spec, Gamma):
        if assumption == CONST_KAPPA:
            return gamma_delta_const_kappa(market, K, spec)
        if assumption == CONST_VARIANCE:
            return gamma_delta_const_variance(market, K, spec)
        raise DomainError(f"unknown gamma delta assumption {assumption!r}")
    if isinstance(spec, StudentT):
        return student_delta(market, K, spec)
    if isinstance(spec, Uniform):
        return uniform_delta(market, K, spec)
    if isinstance(spec, dists.Lognormal):
        pricer.check_forward(spec, market)
        return bsm_delta(market, K, spec.s / root_t)
    if isinstance(spec, dists.Normal):
        pricer.check_forward(spec, market)
        return bachelier_delta(market, K, spec.sigma_n / root_t)
    raise DomainError(f"no analytic delta for family {spec.family!r}")


HAS_ANALYTIC_DELTA = ("gamma", "student_t", "uniform", "lognormal", "normal")


def comoving_call(spec: dists.DistributionSpec, market: MarketParams, K: float,
                  assumption: str = CONST_KAPPA):
    """``spot -> call price`` with the parameters moving as the delta assumes.

    Used for finite-difference checks of every delta above, including the
    families without an analytic one.
    """
    if isinstance(spec, Gamma):
        if assumption == CONST_VARIANCE:
            dist_variance = spec.variance
            return lambda s: gamma_call_const_variance(market.with_spot(s), K, dist_variance)
        kappa = spec.kappa

        def gamma_price(s):
            m = market.with_spot(s)
            return pricer.gamma_call(m, K, Gamma(kappa, m.forward / kappa))

        return gamma_price
    if isinstance(spec, dists.Lognormal):
        sigma = spec.s / math.sqrt(market.expiry)
        return lambda s: pricer.bsm_call(market.with_spot(s), K, sigma)
    if isinstance(spec, dists.Normal):
        sigma_n = spec.sigma_n / math.sqrt(market.expiry)
        return lambda s: pricer.bachelier_call(market.with_spot(s), K, sigma_n)

    def generic(s):
        m = market.with_spot(s)
        return pricer.call_price(dists.recalibrate(spec, m), m, K)

    return generic
