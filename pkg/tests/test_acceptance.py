"""Acceptance criteria 1-10, one test and one printed PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v``; the summary lines are also printed
at the end of the session (see conftest.py).  Running this file directly
prints them too.
"""

import math
import random
import sys
import time
import warnings

import pytest

from volsmile import dists, greeks, oracle, pricer, smile
from volsmile.dists import Lognormal, MarketParams, Mixture, StudentT, Uniform
from volsmile.errors import ConvergenceError, NoSolutionError
from volsmile.smile import StrikeGrid

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


# -- shared draws for criteria 3 and 4 ---------------------------------------------

FAMILIES = ("lognormal", "gamma", "normal", "student_t", "uniform", "log_uniform", "mixture")
DRAWS_PER_FAMILY = 15


def _draw(rng, family):
    market = MarketParams(rng.uniform(1.0, 200.0), rng.uniform(-0.02, 0.08),
                          rng.uniform(0.0, 0.05), rng.uniform(0.1, 3.0))
    F = market.forward
    if family == "lognormal":
        free = {"s": rng.uniform(0.05, 0.8)}
    elif family == "gamma":
        free = {"kappa": rng.uniform(0.5, 50.0)}
    elif family == "normal":
        free = {"sigma_n": rng.uniform(0.05, 0.5) * F}
    elif family == "student_t":
        free = {"nu": rng.uniform(1.2, 10.0)}
    elif family in ("uniform", "log_uniform"):
        free = {"a": rng.uniform(0.1, 0.95) * F}
    else:
        n = rng.choice((2, 3))
        raw = [rng.uniform(0.1, 1.0) for _ in range(n)]
        free = {"components": [{"family": "lognormal", "mu": math.log(F * rng.uniform(0.6, 1.5)),
                                "s": rng.uniform(0.05, 0.5)} for _ in range(n)],
                "weights": [w / sum(raw) for w in raw]}
        free["weights"][-1] = 1.0 - sum(free["weights"][:-1])
    spec = dists.calibrate_forward(family, free, market)
    K = F * rng.uniform(0.5, 1.8)
    return spec, market, K


def draw_matrix(seed=20261014):
    rng = random.Random(seed)
    return [_draw(rng, fam) for fam in FAMILIES for _ in range(DRAWS_PER_FAMILY)]


# -- criteria ----------------------------------------------------------------------------------

def test_criterion_01_flat_smile():
    t0 = time.perf_counter()
    market = MarketParams(100.0, 0.0, 0.0, 1.0)
    F = market.forward
    spec = dists.calibrate_forward("lognormal", {"s": 0.2}, market)
    curve = smile.build_smile(spec, market, StrikeGrid(0.5 * F, 2.0 * F, 61))
    elapsed = time.perf_counter() - t0
    spread = max(curve.vols) - min(curve.vols)
    ok = not curve.skipped and len(curve.points) == 61 and spread <= 1e-6 and elapsed < 1.0
    record(1, ok, f"max-min vol {spread:.2e} (tol 1e-6), {elapsed:.3f} s (< 1 s)")


def test_criterion_02_round_trip():
    # T is not fixed by the criterion; T = 1 matches criterion 1 and the
    # library default.  Cells whose call price carries no resolvable time
    # value fail here (see the ledger).
    t0 = time.perf_counter()
    market = MarketParams(100.0, 0.0, 0.0, 1.0)
    F = market.forward
    strikes = [0.5 * F + 1.5 * F * i / 20 for i in range(21)]
    worst, bad, no_solution = 0.0, [], 0
    for j in range(1, 21):
        sigma = 0.05 * j
        for K in strikes:
            c = pricer.bsm_call(market, K, sigma)
            try:
                err = abs(smile.implied_vol(c, market, K) - sigma)
            except (NoSolutionError, ConvergenceError):
                no_solution += 1
                bad.append((sigma, K))
                continue
            worst = max(worst, err)
            if err > 1e-8:
                bad.append((sigma, K))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 5.0
    record(2, ok, f"T=1: {420 - len(bad)}/420 cells within 1e-8 "
                  f"({no_solution} rejected at the price bounds, "
                  f"worst error among solved {worst:.2e}), {elapsed:.3f} s (< 5 s)")


def test_criterion_03_oracle_equivalence():
    t0 = time.perf_counter()
    draws = draw_matrix()
    worst_rel, failures = 0.0, []
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for spec, market, K in draws:
            c = pricer.call_price(spec, market, K)
            q = oracle.quad_call(spec, market, K)
            err = abs(c - q)
            if q:
                worst_rel = max(worst_rel, err / abs(q))
            if err > max(1e-6 * abs(q), 1e-8):
                failures.append((spec, K, c, q))
    elapsed = time.perf_counter() - t0
    ok = len(draws) >= 100 and not failures and elapsed < 60.0
    record(3, ok, f"{len(draws)} draws over 7 families, {len(failures)} outside tolerance, "
                  f"worst rel {worst_rel:.2e}, {elapsed:.2f} s (< 60 s)")


def test_criterion_04_parity():
    draws = draw_matrix()
    worst = 0.0
    for spec, market, K in draws:
        c = pricer.call_price(spec, market, K)
        p = pricer.put_price(spec, market, K)
        worst = max(worst, abs(c - p - market.discount * (market.forward - K)) / market.spot)
    record(4, worst <= 1e-10, f"{len(draws)} draws, worst |c-p-D(F-K)|/S0 = {worst:.2e} "
                              f"(tol 1e-10)")


def _interior_strikes(spec, n=10):
    return [oracle.quantile(spec, 0.05 + 0.9 * i / (n - 1)) for i in range(n)]


def _family_specs(market):
    F = market.forward
    return {
        "lognormal": dists.calibrate_forward("lognormal", {"s": 0.25}, market),
        "gamma": dists.calibrate_forward("gamma", {"kappa": 4.0}, market),
        "normal": dists.calibrate_forward("normal", {"sigma_n": 0.2 * F}, market),
        "student_t": dists.calibrate_forward("student_t", {"nu": 1.5}, market),
        "uniform": dists.calibrate_forward("uniform", {"a": 0.8 * F}, market),
        "log_uniform": dists.calibrate_forward("log_uniform", {"a": 0.6 * F}, market),
        "mixture": dists.calibrate_forward("mixture", {
            "components": [{"family": "lognormal", "mu": math.log(0.8 * F), "s": 0.1},
                           {"family": "lognormal", "mu": math.log(1.25 * F), "s": 0.12}],
            "weights": [0.45, 0.55]}, market),
    }


def test_criterion_05_density_recovery():
    market = MarketParams(5.0, 0.03, 0.01, 0.5)
    worst_pdf, worst_cdf = 0.0, 0.0
    for spec in _family_specs(market).values():
        price = lambda k, s=spec: pricer.call_price(s, market, k)  # noqa: E731
        for K in _interior_strikes(spec):
            worst_pdf = max(worst_pdf, abs(smile.recover_density(price, market, K)
                                           - dists.density(spec, K)))
            worst_cdf = max(worst_cdf, abs(smile.recover_cdf(price, market, K)
                                           - dists.cdf(spec, K)))
    ok = worst_pdf <= 1e-4 and worst_cdf <= 1e-5
    record(5, ok, f"7 families x 10 strikes, worst density gap {worst_pdf:.2e} (tol 1e-4), "
                  f"worst CDF gap {worst_cdf:.2e} (tol 1e-5)")


def test_criterion_06_deltas():
    market = MarketParams(5.0, 0.03, 0.01, 0.5)
    F = market.forward
    h = 1e-5 * market.spot
    specs = _family_specs(market)
    cases = [("gamma", specs["gamma"], greeks.CONST_KAPPA),
             ("gamma", specs["gamma"], greeks.CONST_VARIANCE),
             ("student_t", specs["student_t"], None),
             ("uniform", specs["uniform"], None)]
    worst = 0.0
    for _, spec, assumption in cases:
        for K in _interior_strikes(spec):
            a = greeks.delta(spec, market, K, assumption or greeks.CONST_KAPPA).delta
            fd = oracle.fd_derivative(
                greeks.comoving_call(spec, market, K, assumption or greeks.CONST_KAPPA),
                market.spot, h)
            worst = max(worst, abs(a - fd) / abs(fd))
    strikes = [F * (0.7 + 0.07 * i) for i in range(10)]
    for K in strikes:
        a = greeks.bsm_delta(market, K, 0.3).delta
        fd = oracle.fd_derivative(lambda s: pricer.bsm_call(market.with_spot(s), K, 0.3),
                                  market.spot, h)
        worst = max(worst, abs(a - fd) / abs(fd))
        a = greeks.bachelier_delta(market, K, 1.2).delta
        fd = oracle.fd_derivative(lambda s: pricer.bachelier_call(market.with_spot(s), K, 1.2),
                                  market.spot, h)
        worst = max(worst, abs(a - fd) / abs(fd))
    rng = random.Random(6)
    u = specs["uniform"]
    worst_inv = 0.0
    for _ in range(1000):
        target = rng.uniform(1e-9, 1.0 - 1e-9) * market.foreign_discount
        K = greeks.uniform_strike_from_delta(target, market, u)
        worst_inv = max(worst_inv, abs(greeks.uniform_delta(market, K, u).delta - target))
    ok = worst <= 1e-6 and worst_inv <= 1e-12
    record(6, ok, f"6 delta routes x 10 strikes, worst rel gap to FD {worst:.2e} (tol 1e-6); "
                  f"uniform strike-from-delta round trip {worst_inv:.2e} (tol 1e-12)")


def test_criterion_07_figure2():
    t0 = time.perf_counter()
    market = MarketParams(5.0, 0.0, 0.0, 0.5)
    curve = smile.build_smile(StudentT(5.0, 1.5), market, StrikeGrid(3.5, 6.5, 61))
    elapsed = time.perf_counter() - t0
    vols = curve.vols
    i_min = vols.index(min(vols))
    flat = max(vols) - min(vols)
    ok = (not curve.skipped and flat > 1e-3 and 0 < i_min < len(vols) - 1
          and vols[0] > vols[-1] and elapsed < 1.0)
    record(7, ok, f"vol range {flat:.3f}, minimum at K={curve.strikes[i_min]:.2f} "
                  f"(interior), left {vols[0]:.3f} > right {vols[-1]:.3f}, {elapsed:.3f} s")


def _second_differences(vols):
    return [vols[i - 1] - 2 * vols[i] + vols[i + 1] for i in range(1, len(vols) - 1)]


def test_criterion_08_figures5_6():
    market = MarketParams(5.0, 0.0, 0.0, 0.5)
    uni = smile.build_smile(Uniform(4.0, 6.0), market, StrikeGrid(4.05, 5.95, 39))
    lu = dists.calibrate_forward("log_uniform", {"a": 3.0}, market)
    logu = smile.build_smile(lu, market, StrikeGrid(3.05, 7.7, 94))
    worst_u = max(_second_differences(uni.vols))
    worst_l = max(_second_differences(logu.vols))
    ok = not uni.skipped and not logu.skipped and worst_u < 0 and worst_l < 0
    record(8, ok, f"largest second difference: uniform {worst_u:.2e}, "
                  f"log-uniform {worst_l:.2e} (must be < 0) over grids inside the support")


def test_criterion_09_forward_consistency():
    worst = 0.0
    for market in (MarketParams(5.0, 0.0, 0.0, 0.5), MarketParams(5.0, 0.03, 0.01, 0.5),
                   MarketParams(100.0, 0.05, 0.0, 2.0), MarketParams(1.3, -0.01, 0.02, 3.0)):
        for name, spec in _family_specs(market).items():
            worst = max(worst, abs(oracle.quad_mean(spec) - market.forward) / market.forward)
    record(9, worst <= 1e-8, f"7 families x 4 markets, worst |quad_mean - F|/F = {worst:.2e} "
                             f"(tol 1e-8)")


def test_criterion_10_mixture_linearity():
    market = MarketParams(100.0, 0.02, 0.01, 1.0)
    spec = dists.calibrate_forward("mixture", {
        "components": [{"family": "lognormal", "mu": 4.3, "s": 0.08},
                       {"family": "lognormal", "mu": 4.9, "s": 0.08}],
        "weights": [0.5, 0.5]}, market)
    modes = [math.exp(c.mu - c.s ** 2) for c in spec.components]
    growth = math.exp((market.domestic_rate - market.foreign_rate) * market.expiry)
    root_t = math.sqrt(market.expiry)
    worst_lin, worst_quad = 0.0, 0.0
    for K in [60.0, 75.0, 0.5 * (modes[0] + modes[1]), 110.0, 140.0, 170.0]:
        c = pricer.mixture_call(market, K, spec)
        bsm_sum = math.fsum(
            w * pricer.bsm_call(market.with_spot(dists.mean(comp) / growth), K, comp.s / root_t)
            for comp, w in zip(spec.components, spec.weights))
        worst_lin = max(worst_lin, abs(c - bsm_sum) / max(abs(bsm_sum), 1.0))
        q = oracle.quad_call(spec, market, K)
        worst_quad = max(worst_quad, abs(c - q) / abs(q))
    ok = worst_lin <= 1e-12 and worst_quad <= 1e-6
    record(10, ok, f"bimodal modes {modes[0]:.1f}/{modes[1]:.1f}: "
                   f"|mixture - sum q_i bsm_i| {worst_lin:.2e} (tol 1e-12), "
                   f"rel gap to quadrature {worst_quad:.2e} (tol 1e-6)")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
