"""Closed-form European call and put prices for every distribution family.

Family-specific functions take ``(market, K, ...)``.  ``call_price`` and
``put_price`` dispatch on the spec type and ``quote`` bundles both legs with
the parity check.  Spec-based prices use the spec's own mean as the
forward, so a spec that is not calibrated to the market still satisfies
put-call parity against its own mean; a ``ForwardMismatchWarning`` is
issued in that case.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from . import dists, specfun
from .dists import (DistributionSpec, Gamma, LogUniform, Lognormal, MarketParams,
                    Mixture, Normal, StudentT, Uniform)
from .errors import (ArbitrageBoundError, DomainError, ForwardMismatchWarning,
                     ParityViolationError)

FORWARD_TOLERANCE = 1e-8

N = specfun.std_normal_cdf
n = specfun.std_normal_pdf


def check_forward(spec: DistributionSpec, market: MarketParams) -> str | None:
    """Warn (and return the message) when the spec mean is off the forward."""
    gap = dists.forward_mismatch(spec, market)
    if gap <= FORWARD_TOLERANCE:
        return None
    msg = (f"{spec.family} mean {dists.mean(spec):.12g} differs from forward "
           f"{market.forward:.12g} (relative gap {gap:.3g}); prices admit arbitrage")
    warnings.warn(ForwardMismatchWarning(msg, dists.mean(spec), market.forward),
                  stacklevel=3)
    return msg


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


# -- lognormal / Black-Scholes-Merton ---------------------------------------

def bsm_d1_d2(market: MarketParams, K: float, sigma: float) -> tuple[float, float]:
    vol_t = sigma * math.sqrt(market.expiry)
    d1 = (math.log(market.spot / K)
          + (market.domestic_rate - market.foreign_rate + 0.5 * sigma * sigma)
          * market.expiry) / vol_t
    return d1, d1 - vol_t


def bsm_call(market: MarketParams, K: float, sigma: float) -> float:
    K = _positive("strike", K)
    sigma = _positive("sigma", sigma)
    d1, d2 = bsm_d1_d2(market, K, sigma)
    return market.foreign_discount * market.spot * N(d1) - market.discount * K * N(d2)


def bsm_put(market: MarketParams, K: float, sigma: float) -> float:
    K = _positive("strike", K)
    sigma = _positive("sigma", sigma)
    d1, d2 = bsm_d1_d2(market, K, sigma)
    return market.discount * K * N(-d2) - market.foreign_discount * market.spot * N(-d1)


def bsm_vega(market: MarketParams, K: float, sigma: float) -> float:
    d1, _ = bsm_d1_d2(market, K, sigma)
    return market.foreign_discount * market.spot * n(d1) * math.sqrt(market.expiry)


def _black(mean: float, s: float, K: float, df: float, call: bool) -> float:
    # undiscounted lognormal expectation with the distribution's own mean
    if K <= 0.0:
        return df * (mean - K) if call else 0.0
    d1 = (math.log(mean / K) + 0.5 * s * s) / s
    d2 = d1 - s
    if call:
        return df * (mean * N(d1) - K * N(d2))
    return df * (K * N(-d2) - mean * N(-d1))


def component_market(comp: Lognormal, market: MarketParams) -> tuple[MarketParams, float]:
    """BSM inputs ``(market with spot replaced, sigma)`` reproducing one lognormal."""
    growth = (market.domestic_rate - market.foreign_rate) * market.expiry
    spot = dists.mean(comp) * math.exp(-growth)
    return market.with_spot(spot), comp.s / math.sqrt(market.expiry)


def lognormal_call(market: MarketParams, K: float, spec: Lognormal) -> float:
    check_forward(spec, market)
    return _black(dists.mean(spec), spec.s, float(K), market.discount, True)


def lognormal_put(market: MarketParams, K: float, spec: Lognormal) -> float:
    check_forward(spec, market)
    return _black(dists.mean(spec), spec.s, float(K), market.discount, False)


# -- normal / Bachelier -------------------------------------------------------

def _bachelier(mean: float, stdev: float, K: float, df: float, call: bool) -> float:
    gap = (mean - K) if call else (K - mean)
    d = gap / stdev
    return df * (gap * N(d) + stdev * n(d))


def bachelier_call(market: MarketParams, K: float, sigma_n: float) -> float:
    """Bachelier call with annualized normal volatility ``sigma_n``; any real K."""
    sigma_n = _positive("sigma_n", sigma_n)
    stdev = sigma_n * math.sqrt(market.expiry)
    return _bachelier(market.forward, stdev, float(K), market.discount, True)


def bachelier_put(market: MarketParams, K: float, sigma_n: float) -> float:
    sigma_n = _positive("sigma_n", sigma_n)
    stdev = sigma_n * math.sqrt(market.expiry)
    return _bachelier(market.forward, stdev, float(K), market.discount, False)


def normal_call(market: MarketParams, K: float, spec: Normal) -> float:
    check_forward(spec, market)
    return _bachelier(spec.mu, spec.sigma_n, float(K), market.discount, True)


def normal_put(market: MarketParams, K: float, spec: Normal) -> float:
    check_forward(spec, market)
    return _bachelier(spec.mu, spec.sigma_n, float(K), market.discount, False)


# -- gamma --------------------------------------------------------------------

def gamma_call(market: MarketParams, K: float, spec: Gamma) -> float:
    check_forward(spec, market)
    K = float(K)
    kappa, theta = spec.kappa, spec.theta
    if K <= 0.0:
        return market.discount * (kappa * theta - K)
    x = K / theta
    upper_k1 = specfun.reg_inc_gamma_upper(kappa + 1.0, x)
    upper_k = specfun.reg_inc_gamma_upper(kappa, x)
    return market.discount * (kappa * theta * upper_k1 - K * upper_k)


def gamma_put(market: MarketParams, K: float, spec: Gamma) -> float:
    # parity of the call formula gives  K P(K; kappa) - kappa theta P(K; kappa + 1)
    check_forward(spec, market)
    K = float(K)
    if K <= 0.0:
        return 0.0
    kappa, theta = spec.kappa, spec.theta
    x = K / theta
    return market.discount * (K * specfun.reg_inc_gamma(kappa, x)
                              - kappa * theta * specfun.reg_inc_gamma(kappa + 1.0, x))


# -- translated Student t -----------------------------------------------------

def _student_terms(spec: StudentT, K: float) -> tuple[float, float]:
    nu = spec.nu
    z = spec.mu - K
    log_a = math.log(nu / (nu - 1.0)) + spec.log_norm_const
    power_term = math.exp(log_a + 0.5 * (1.0 - nu) * math.log1p(z * z / nu))
    ibeta = specfun.reg_inc_beta(dists.student_y(spec, K), 0.5 * nu, 0.5)
    return power_term, ibeta


def student_call(market: MarketParams, K: float, spec: StudentT) -> float:
    check_forward(spec, market)
    K = float(K)
    power_term, ibeta = _student_terms(spec, K)
    z = spec.mu - K
    branch = ibeta if K >= spec.mu else 2.0 - ibeta
    return market.discount * (power_term + 0.5 * z * branch)


def student_put(market: MarketParams, K: float, spec: StudentT) -> float:
    check_forward(spec, market)
    K = float(K)
    power_term, ibeta = _student_terms(spec, K)
    z = spec.mu - K
    branch = ibeta - 2.0 if K >= spec.mu else -ibeta
    return market.discount * (power_term + 0.5 * z * branch)


# -- uniform and log-uniform --------------------------------------------------

def uniform_call(market: MarketParams, K: float, spec: Uniform) -> float:
    check_forward(spec, market)
    K = float(K)
    a, b = spec.a, spec.b
    if K >= b:
        return 0.0
    m = max(K, a)
    return market.discount / (b - a) * (b - m) * (0.5 * b + 0.5 * m - K)


def uniform_put(market: MarketParams, K: float, spec: Uniform) -> float:
    check_forward(spec, market)
    K = float(K)
    a, b = spec.a, spec.b
    if K <= a:
        return 0.0
    if K >= b:
        return market.discount * (K - 0.5 * (a + b))
    return market.discount * (K - a) ** 2 / (2.0 * (b - a))


def loguniform_call(market: MarketParams, K: float, spec: LogUniform) -> float:
    check_forward(spec, market)
    K = float(K)
    a, b = spec.a, spec.b
    if K >= b:
        return 0.0
    m = max(K, a)
    return market.discount / math.log(b / a) * (b - m - K * math.log(b / m))


def loguniform_put(market: MarketParams, K: float, spec: LogUniform) -> float:
    check_forward(spec, market)
    K = float(K)
    a, b = spec.a, spec.b
    if K <= a:
        return 0.0
    m = min(K, b)
    return market.discount / math.log(b / a) * (K * math.log(m / a) - (m - a))


# -- lognormal mixture --------------------------------------------------------

def mixture_call(market: MarketParams, K: float, spec: Mixture) -> float:
    check_forward(spec, market)
    K = float(K)
    return math.fsum(w * _black(dists.mean(c), c.s, K, market.discount, True)
                     for w, c in zip(spec.weights, spec.components))


def mixture_put(market: MarketParams, K: float, spec: Mixture) -> float:
    check_forward(spec, market)
    K = float(K)
    return math.fsum(w * _black(dists.mean(c), c.s, K, market.discount, False)
                     for w, c in zip(spec.weights, spec.components))


# -- dispatch -----------------------------------------------------------------

_CALLS = {
    Lognormal: lognormal_call, Gamma: gamma_call, Normal: normal_call,
    StudentT: student_call, Uniform: uniform_call, LogUniform: loguniform_call,
    Mixture: mixture_call,
}
_PUTS = {
    Lognormal: lognormal_put, Gamma: gamma_put, Normal: normal_put,
    StudentT: student_put, Uniform: uniform_put, LogUniform: loguniform_put,
    Mixture: mixture_put,
}


def call_price(spec: DistributionSpec, market: MarketParams, K: float) -> float:
    try:
        fn = _CALLS[type(spec)]
    except KeyError:
        raise TypeError(f"unsupported distribution {spec!r}") from None
    return fn(market, K, spec)


def put_price(spec: DistributionSpec, market: MarketParams, K: float) -> float:
    try:
        fn = _PUTS[type(spec)]
    except KeyError:
        raise TypeError(f"unsupported distribution {spec!r}") from None
    return fn(market, K, spec)


def put_from_call(call: float, market: MarketParams, K: float,
                  forward: float | None = None) -> float:
    """Put price from a call price via put-call parity.

    ``forward`` defaults to the market forward.  The result is never clamped;
    a put below ``-1e-12 * S0`` means the inputs are inconsistent.
    """
    fwd = market.forward if forward is None else float(forward)
    put = call - market.discount * (fwd - K)
    if put < -1e-12 * market.spot:
        raise ParityViolationError(
            f"parity gives a negative put {put:.6g} for call {call:.6g} at K={K}")
    return put


@dataclass(frozen=True)
class OptionQuote:
    strike: float
    call: float
    put: float
    forward: float
    discount: float
    warnings: tuple = field(default=())

    @property
    def parity_error(self) -> float:
        """``call - put - discount * (forward - strike)``."""
        return self.call - self.put - self.discount * (self.forward - self.strike)


def quote(spec: DistributionSpec, market: MarketParams, K: float) -> OptionQuote:
    """Call and put at one strike, bound-checked, with any forward warning attached."""
    K = float(K)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ForwardMismatchWarning)
        call = call_price(spec, market, K)
        put = put_price(spec, market, K)
    msgs = tuple(dict.fromkeys(str(w.message) for w in caught
                               if issubclass(w.category, ForwardMismatchWarning)))
    for msg in msgs:
        warnings.warn(ForwardMismatchWarning(msg), stacklevel=2)
    fwd = dists.mean(spec)
    df = market.discount
    tol = 1e-12 * max(market.spot, abs(fwd), abs(K))
    if call < max(df * (fwd - K), 0.0) - tol or put < max(df * (K - fwd), 0.0) - tol:
        raise ArbitrageBoundError(
            f"{spec.family} quote at K={K} breaks static bounds: call={call}, put={put}")
    return OptionQuote(K, call, put, fwd, df, msgs)
