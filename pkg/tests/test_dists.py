import json
import math

import pytest
from scipy import integrate

from volsmile import dists, oracle
from volsmile.dists import (Gamma, LogUniform, Lognormal, MarketParams, Mixture, Normal,
                            StudentT, Uniform)
from volsmile.errors import CalibrationError, DomainError

from conftest import REF, calibrated_specs


def test_market_forward_and_discounts():
    m = MarketParams(100.0, 0.05, 0.02, 2.0)
    assert m.forward == pytest.approx(100 * math.exp(0.06), rel=1e-15)
    assert m.discount == pytest.approx(math.exp(-0.1), rel=1e-15)
    assert m.foreign_discount == pytest.approx(math.exp(-0.04), rel=1e-15)
    assert MarketParams.from_dict(m.to_dict()) == m


@pytest.mark.parametrize("kwargs", [dict(spot=0.0), dict(spot=1.0, expiry=0.0),
                                    dict(spot=math.inf), dict(spot="x")])
def test_market_validation(kwargs):
    with pytest.raises(DomainError):
        MarketParams(**kwargs)


def test_market_from_dict_names_field():
    with pytest.raises(DomainError, match="market.spot"):
        MarketParams.from_dict({"expiry": 1.0})
    with pytest.raises(DomainError, match="unknown"):
        MarketParams.from_dict({"spot": 1.0, "rate": 0.1})


@pytest.mark.parametrize("make", [
    lambda: Lognormal(0.0, 0.0), lambda: Gamma(0.0, 1.0), lambda: Gamma(1.0, -1.0),
    lambda: Normal(5.0, 0.0), lambda: StudentT(0.0, 1.0), lambda: Uniform(2.0, 2.0),
    lambda: LogUniform(0.0, 2.0), lambda: LogUniform(3.0, 2.0),
    lambda: Mixture((Lognormal(0, 0.1),), (0.9,)),
    lambda: Mixture((Lognormal(0, 0.1), Lognormal(1, 0.1)), (1.2, -0.2)),
    lambda: Mixture((), ()),
])
def test_invalid_parameters(make):
    with pytest.raises(DomainError):
        make()


def test_density_examples():
    assert dists.density(Uniform(1, 3), 2) == 0.5
    assert dists.density(Uniform(1, 3), 4) == 0.0
    p0 = dists.density(StudentT(0, 1.5), 0.0)
    assert p0 == pytest.approx(math.gamma(1.25) / (math.sqrt(1.5 * math.pi) * math.gamma(0.75)),
                               rel=1e-14)
    assert p0 == pytest.approx(REF["student_pdf_0_1.5"], rel=1e-14)
    assert oracle.quad_mass(StudentT(0, 1.5)) == pytest.approx(1.0, abs=1e-10)
    assert dists.density(Gamma(2, 2.5), -1.0) == 0.0
    assert dists.density(LogUniform(1, 2), 2.5) == 0.0


@pytest.mark.parametrize("name", ["lognormal", "gamma", "normal", "student_t", "uniform",
                                  "log_uniform", "mixture"])
def test_density_normalized_and_cdf_consistent(name, m5):
    spec = calibrated_specs(m5)[name]
    assert oracle.quad_mass(spec) == pytest.approx(1.0, abs=1e-9)
    lo, hi = oracle.integration_domain(spec)
    for frac in (0.2, 0.5, 0.8):
        x = lo + frac * (hi - lo)
        assert dists.cdf(spec, x) == pytest.approx(oracle.quad_mass(spec, hi=x), abs=1e-9)


def test_cdf_examples():
    assert dists.cdf(StudentT(5, 1.5), 5.0) == pytest.approx(0.5, abs=1e-15)
    assert dists.cdf(Uniform(1, 3), 2.0) == 0.5
    ref, _ = integrate.quad(lambda x: dists.density(Gamma(2, 2.5), x), 0, 5,
                            epsabs=1e-14, epsrel=1e-13)
    assert abs(dists.cdf(Gamma(2, 2.5), 5.0) - ref) <= 1e-10
    assert dists.cdf(Gamma(2, 2.5), 5.0) == pytest.approx(REF["gamma_cdf_5"], rel=1e-14)
    assert dists.cdf(Uniform(1, 3), 0.0) == 0.0 and dists.cdf(Uniform(1, 3), 9.0) == 1.0


def test_mean_examples():
    assert dists.mean(Gamma(2, 2.5)) == 5.0
    assert dists.mean(Uniform(1, 3)) == 2.0
    assert dists.mean(LogUniform(1, math.e)) == pytest.approx(math.e - 1, rel=1e-15)
    assert dists.mean(StudentT(5, 1.5)) == 5.0
    assert dists.mean(Lognormal(0.1, 0.3)) == pytest.approx(math.exp(0.1 + 0.045), rel=1e-15)


def test_mixture_variance_examples():
    one = Lognormal(0.2, 0.3)
    var = (math.exp(0.09) - 1) * math.exp(0.4 + 0.09)
    assert dists.mixture_variance(Mixture((one,), (1.0,))) == pytest.approx(var, rel=1e-14)
    # the documented formula weights by q_i^2, so two identical halves give half
    assert dists.mixture_variance(Mixture((one, one), (0.5, 0.5))) == pytest.approx(0.5 * var)
    mix = Mixture((Lognormal(0.0, 0.2), Lognormal(0.1, 0.3)), (0.3, 0.7))
    assert dists.mixture_variance(mix) == pytest.approx(REF["mixvar_0.3_0.7"], rel=1e-14)


def test_lognormal_variance_by_quadrature():
    mu, s = 0.1, 0.3
    m = dists.lognormal_mean(mu, s)
    spec = Lognormal(mu, s)
    second = oracle._expect(spec, lambda x: (x - m) ** 2, 0.0, math.inf,
                            oracle.DEFAULT_CONFIG, "direct")
    assert dists.lognormal_variance(mu, s) == pytest.approx(second, rel=1e-10)


def test_calibration_examples(m5, m100):
    assert dists.calibrate_forward("gamma", {"theta": 2.5}, m5).kappa == pytest.approx(2.0)
    ln = dists.calibrate_forward("lognormal", {"s": 0.2}, m100)
    assert ln.mu == pytest.approx(math.log(100) - 0.02, rel=1e-15)
    lu = dists.calibrate_forward("log_uniform", {"a": 3.0}, m5)
    assert lu.b == pytest.approx(REF["loguniform_b_a3_F5"], rel=1e-14)
    assert oracle.quad_mean(lu) == pytest.approx(5.0, rel=1e-12)


def test_calibration_variants(carry):
    f = carry.forward
    g = dists.calibrate_forward("gamma", {"variance": 0.5}, carry)
    assert g.kappa * g.theta == pytest.approx(f, rel=1e-15)
    assert g.variance == pytest.approx(0.5, rel=1e-14)
    u = dists.calibrate_forward("uniform", {"a": 4.0}, carry)
    assert (u.a + u.b) / 2 == pytest.approx(f, rel=1e-15)
    for spec in calibrated_specs(carry).values():
        assert dists.forward_mismatch(spec, carry) <= 1e-12


@pytest.mark.parametrize("family,free", [
    ("uniform", {"a": 6.0}),                 # a >= F leaves no room for b
    ("gamma", {"theta": 1.0, "kappa": 2.0}),
    ("lognormal", {"sigma": 0.2}),
    ("student_t", {"nu": 0.5}),
    ("nope", {}),
])
def test_calibration_failures(family, free, m5):
    with pytest.raises(CalibrationError):
        dists.calibrate_forward(family, free, m5)


def test_recalibrate_moves_location(m5):
    spec = StudentT(4.0, 3.0)
    moved = dists.recalibrate(spec, m5)
    assert moved == StudentT(5.0, 3.0)
    mix = Mixture((Lognormal(1.0, 0.1), Lognormal(2.0, 0.2)), (0.3, 0.7))
    again = dists.recalibrate(mix, m5)
    assert dists.mean(again) == pytest.approx(5.0, rel=1e-14)
    assert again.components[1].mu - again.components[0].mu == pytest.approx(1.0, rel=1e-14)


def test_json_round_trip(m5):
    for spec in calibrated_specs(m5).values():
        doc = json.loads(json.dumps(dists.to_dict(spec)))
        assert dists.from_dict(doc) == spec


@pytest.mark.parametrize("doc,field", [
    ({"family": "gamma", "kappa": 2.0}, "theta"),
    ({"family": "gamma", "kappa": 2.0, "theta": 1.0, "mu": 3.0}, "mu"),
    ({"family": "student_t", "mu": 0.0, "nu": "many"}, "nu"),
    ({"family": "weibull"}, "family"),
    ({"family": "mixture", "components": [{"family": "gamma", "kappa": 1, "theta": 1}],
      "weights": [1.0]}, "components"),
])
def test_from_dict_names_offending_field(doc, field):
    with pytest.raises(DomainError) as info:
        dists.from_dict(doc)
    assert str(info.value).startswith(field)
