"""Cross-checks of closed forms against the quadrature / finite-difference oracle."""

from __future__ import annotations

import warnings

from . import dists, greeks, oracle, pricer
from .dists import DistributionSpec, MarketParams
from .errors import ForwardMismatchWarning
from .oracle import QuadratureConfig, VerificationReport, make_check

PRICE_REL_TOL = 1e-6
PRICE_ABS_TOL = 1e-8
PARITY_TOL = 1e-10        # times spot
MEAN_REL_TOL = 1e-8
DELTA_REL_TOL = 1e-6
DELTA_ABS_TOL = 1e-10
FD_DELTA_REL_TOL = 1e-5
FD_DELTA_ABS_TOL = 1e-6

CHECK_SETS = ("prices", "parity", "means", "deltas")


def _label(spec: DistributionSpec, what: str, K: float | None = None) -> str:
    return f"{spec.family}:{what}" if K is None else f"{spec.family}:{what}@{K:.6g}"


def run_checks(spec: DistributionSpec, market: MarketParams, strikes,
               checks=CHECK_SETS, fd_delta: bool = False,
               assumptions=(greeks.CONST_KAPPA, greeks.CONST_VARIANCE),
               config: QuadratureConfig = oracle.DEFAULT_CONFIG) -> VerificationReport:
    """Build a report of the selected check sets over ``strikes``.

    ``fd_delta`` adds, for every family, a comparison of the spot finite
    difference of closed-form prices with that of quadrature prices.
    """
    report = VerificationReport()
    checks = set(checks)
    fwd = dists.mean(spec)
    df = market.discount
    h = greeks.FD_REL_STEP * market.spot
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ForwardMismatchWarning)
        if "means" in checks:
            report.add(make_check(_label(spec, "mean"), fwd, oracle.quad_mean(spec, config),
                                  MEAN_REL_TOL))
        for K in strikes:
            K = float(K)
            if "prices" in checks:
                report.add(make_check(_label(spec, "call", K), pricer.call_price(spec, market, K),
                                      oracle.quad_call(spec, market, K, config),
                                      PRICE_REL_TOL, PRICE_ABS_TOL))
                report.add(make_check(_label(spec, "put", K), pricer.put_price(spec, market, K),
                                      oracle.quad_put(spec, market, K, config),
                                      PRICE_REL_TOL, PRICE_ABS_TOL))
            if "parity" in checks:
                q = pricer.quote(spec, market, K)
                report.add(make_check(_label(spec, "parity", K), q.call - q.put,
                                      df * (fwd - K), 0.0, PARITY_TOL * market.spot))
            if "deltas" in checks and spec.family in greeks.HAS_ANALYTIC_DELTA:
                for assumption in (assumptions if isinstance(spec, dists.Gamma) else (None,)):
                    tag = assumption or greeks.EXACT
                    analytic = greeks.delta(spec, market, K, assumption or greeks.CONST_KAPPA)
                    fd = oracle.fd_derivative(
                        greeks.comoving_call(spec, market, K, assumption or greeks.CONST_KAPPA),
                        market.spot, h)
                    report.add(make_check(_label(spec, f"delta[{tag}]", K), analytic.delta, fd,
                                          DELTA_REL_TOL, DELTA_ABS_TOL))
            if fd_delta:
                closed = oracle.fd_derivative(greeks.comoving_call(spec, market, K),
                                              market.spot, h)
                quad = oracle.fd_derivative(_quad_comoving(spec, market, K, config),
                                            market.spot, h)
                report.add(make_check(_label(spec, "fd_delta", K), closed, quad,
                                      FD_DELTA_REL_TOL, FD_DELTA_ABS_TOL))
    return report


def _quad_comoving(spec, market, K, config):
    def price(s):
        m = market.with_spot(s)
        return oracle.quad_call(dists.recalibrate(spec, m), m, K, config)
    return price
