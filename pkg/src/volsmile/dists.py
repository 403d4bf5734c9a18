"""Risk-neutral distributions of the asset price at expiry.

Each family is an immutable dataclass whose constructor enforces its
parameter invariants.  ``density``, ``cdf`` and ``mean`` dispatch on the
family; ``calibrate_forward`` solves the one free parameter that makes the
mean equal to the forward ``S0 * exp((r - q) T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Mapping, Sequence, Union

from scipy.optimize import brentq

from . import specfun
from .errors import CalibrationError, DomainError


def _finite(name: str, value: Any) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MarketParams:
    """Spot, domestic rate ``r``, foreign (dividend) rate ``q`` and expiry in years."""

    spot: float
    domestic_rate: float = 0.0
    foreign_rate: float = 0.0
    expiry: float = 1.0

    def __post_init__(self):
        for name in ("spot", "domestic_rate", "foreign_rate", "expiry"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.spot <= 0.0:
            raise DomainError(f"spot must be > 0, got {self.spot}")
        if self.expiry <= 0.0:
            raise DomainError(f"expiry must be > 0, got {self.expiry}")

    @property
    def forward(self) -> float:
        """At-the-money forward, the risk-neutral mean of the price at expiry."""
        return self.spot * math.exp((self.domestic_rate - self.foreign_rate) * self.expiry)

    @property
    def discount(self) -> float:
        return math.exp(-self.domestic_rate * self.expiry)

    @property
    def foreign_discount(self) -> float:
        return math.exp(-self.foreign_rate * self.expiry)

    def with_spot(self, spot: float) -> "MarketParams":
        return MarketParams(spot, self.domestic_rate, self.foreign_rate, self.expiry)

    def to_dict(self) -> dict:
        return {
            "spot": self.spot,
            "domestic_rate": self.domestic_rate,
            "foreign_rate": self.foreign_rate,
            "expiry": self.expiry,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MarketParams":
        unknown = set(data) - {"spot", "domestic_rate", "foreign_rate", "expiry"}
        if unknown:
            raise DomainError(f"market: unknown field(s) {sorted(unknown)}")
        if "spot" not in data:
            raise DomainError("market.spot: missing")
        return cls(**data)


@dataclass(frozen=True)
class Lognormal:
    """``ln S_T ~ N(mu, s^2)``; ``s`` is the stdev of the log price, not a vol."""

    mu: float
    s: float
    family: ClassVar[str] = "lognormal"

    def __post_init__(self):
        object.__setattr__(self, "mu", _finite("mu", self.mu))
        object.__setattr__(self, "s", _finite("s", self.s))
        if self.s <= 0.0:
            raise DomainError(f"s must be > 0, got {self.s}")


@dataclass(frozen=True)
class Gamma:
    kappa: float
    theta: float
    family: ClassVar[str] = "gamma"

    def __post_init__(self):
        object.__setattr__(self, "kappa", _finite("kappa", self.kappa))
        object.__setattr__(self, "theta", _finite("theta", self.theta))
        if self.kappa <= 0.0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")
        if self.theta <= 0.0:
            raise DomainError(f"theta must be > 0, got {self.theta}")

    @property
    def variance(self) -> float:
        return self.kappa * self.theta**2


@dataclass(frozen=True)
class Normal:
    """``S_T ~ N(mu, sigma_n^2)``; ``sigma_n`` is the stdev of the price at expiry.

    The annualized Bachelier volatility is ``sigma_n / sqrt(T)``.
    """

    mu: float
    sigma_n: float
    family: ClassVar[str] = "normal"

    def __post_init__(self):
        object.__setattr__(self, "mu", _finite("mu", self.mu))
        object.__setattr__(self, "sigma_n", _finite("sigma_n", self.sigma_n))
        if self.sigma_n <= 0.0:
            raise DomainError(f"sigma_n must be > 0, got {self.sigma_n}")


@dataclass(frozen=True)
class StudentT:
    """Student's t with ``nu`` degrees of freedom translated to location ``mu``."""

    mu: float
    nu: float
    family: ClassVar[str] = "student_t"

    def __post_init__(self):
        object.__setattr__(self, "mu", _finite("mu", self.mu))
        object.__setattr__(self, "nu", _finite("nu", self.nu))
        if self.nu <= 1.0:
            raise DomainError(f"nu must be > 1 for a finite mean, got {self.nu}")

    @property
    def log_norm_const(self) -> float:
        """Log of Gamma((nu+1)/2) / (sqrt(nu pi) Gamma(nu/2))."""
        nu = self.nu
        return (specfun.log_gamma(0.5 * (nu + 1.0)) - specfun.log_gamma(0.5 * nu)
                - 0.5 * math.log(nu * math.pi))


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "a", _finite("a", self.a))
        object.__setattr__(self, "b", _finite("b", self.b))
        if not self.a < self.b:
            raise DomainError(f"uniform requires a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class LogUniform:
    a: float
    b: float
    family: ClassVar[str] = "log_uniform"

    def __post_init__(self):
        object.__setattr__(self, "a", _finite("a", self.a))
        object.__setattr__(self, "b", _finite("b", self.b))
        if self.a <= 0.0:
            raise DomainError(f"log_uniform requires a > 0, got a={self.a}")
        if not self.a < self.b:
            raise DomainError(f"log_uniform requires a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class Mixture:
    """Mixture density ``sum_i w_i p_i`` of lognormal components."""

    components: tuple
    weights: tuple
    family: ClassVar[str] = "mixture"

    def __post_init__(self):
        comps = tuple(self.components)
        weights = tuple(_finite(f"weights[{i}]", w) for i, w in enumerate(self.weights))
        if not comps:
            raise DomainError("mixture requires at least one component")
        if len(comps) != len(weights):
            raise DomainError(
                f"mixture has {len(comps)} components but {len(weights)} weights")
        for i, comp in enumerate(comps):
            if not isinstance(comp, Lognormal):
                raise DomainError(f"components[{i}] must be lognormal")
        if any(w < 0.0 for w in weights):
            raise DomainError("mixture weights must be >= 0")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise DomainError(f"mixture weights must sum to 1, got {math.fsum(weights)}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", weights)


DistributionSpec = Union[Lognormal, Gamma, Normal, StudentT, Uniform, LogUniform, Mixture]

FAMILIES = {cls.family: cls for cls in (Lognormal, Gamma, Normal, StudentT, Uniform,
                                        LogUniform, Mixture)}


def support(spec: DistributionSpec) -> tuple[float, float]:
    """Closed support interval (possibly infinite)."""
    if isinstance(spec, (Uniform, LogUniform)):
        return spec.a, spec.b
    if isinstance(spec, (Lognormal, Gamma, Mixture)):
        return 0.0, math.inf
    return -math.inf, math.inf


def _lognormal_pdf(mu: float, s: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    z = (math.log(x) - mu) / s
    return math.exp(-0.5 * z * z) / (x * s * math.sqrt(2.0 * math.pi))


def density(spec: DistributionSpec, x: float) -> float:
    """Probability density at ``x``; zero outside the support."""
    x = float(x)
    if isinstance(spec, Lognormal):
        return _lognormal_pdf(spec.mu, spec.s, x)
    if isinstance(spec, Gamma):
        if x < 0.0:
            return 0.0
        if x == 0.0:
            if spec.kappa == 1.0:
                return 1.0 / spec.theta
            return 0.0 if spec.kappa > 1.0 else math.inf
        log_p = ((spec.kappa - 1.0) * math.log(x) - x / spec.theta
                 - spec.kappa * math.log(spec.theta) - math.lgamma(spec.kappa))
        return math.exp(log_p)
    if isinstance(spec, Normal):
        return specfun.std_normal_pdf((x - spec.mu) / spec.sigma_n) / spec.sigma_n
    if isinstance(spec, StudentT):
        nu = spec.nu
        z = x - spec.mu
        return math.exp(spec.log_norm_const - 0.5 * (nu + 1.0) * math.log1p(z * z / nu))
    if isinstance(spec, Uniform):
        return 1.0 / (spec.b - spec.a) if spec.a <= x <= spec.b else 0.0
    if isinstance(spec, LogUniform):
        if spec.a <= x <= spec.b:
            return 1.0 / (x * math.log(spec.b / spec.a))
        return 0.0
    if isinstance(spec, Mixture):
        return math.fsum(w * _lognormal_pdf(c.mu, c.s, x)
                         for w, c in zip(spec.weights, spec.components))
    raise TypeError(f"unsupported distribution {spec!r}")


def student_y(spec: StudentT, x: float) -> float:
    """Incomplete-beta argument ``nu / ((x - mu)^2 + nu)``."""
    z = x - spec.mu
    return spec.nu / (z * z + spec.nu)


def _lognormal_cdf(mu: float, s: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    return specfun.std_normal_cdf((math.log(x) - mu) / s)


def cdf(spec: DistributionSpec, x: float) -> float:
    x = specfun._require_finite("x", x)
    if isinstance(spec, Lognormal):
        return _lognormal_cdf(spec.mu, spec.s, x)
    if isinstance(spec, Gamma):
        return 0.0 if x <= 0.0 else specfun.reg_inc_gamma(spec.kappa, x / spec.theta)
    if isinstance(spec, Normal):
        return specfun.std_normal_cdf((x - spec.mu) / spec.sigma_n)
    if isinstance(spec, StudentT):
        tail = 0.5 * specfun.reg_inc_beta(student_y(spec, x), 0.5 * spec.nu, 0.5)
        return 1.0 - tail if x >= spec.mu else tail
    if isinstance(spec, Uniform):
        if x <= spec.a:
            return 0.0
        if x >= spec.b:
            return 1.0
        return (x - spec.a) / (spec.b - spec.a)
    if isinstance(spec, LogUniform):
        if x <= spec.a:
            return 0.0
        if x >= spec.b:
            return 1.0
        return math.log(x / spec.a) / math.log(spec.b / spec.a)
    if isinstance(spec, Mixture):
        return math.fsum(w * _lognormal_cdf(c.mu, c.s, x)
                         for w, c in zip(spec.weights, spec.components))
    raise TypeError(f"unsupported distribution {spec!r}")


def lognormal_mean(mu: float, s: float) -> float:
    return math.exp(mu + 0.5 * s * s)


def mean(spec: DistributionSpec) -> float:
    """Analytic expectation of the price at expiry."""
    if isinstance(spec, Lognormal):
        return lognormal_mean(spec.mu, spec.s)
    if isinstance(spec, Gamma):
        return spec.kappa * spec.theta
    if isinstance(spec, (Normal, StudentT)):
        return spec.mu
    if isinstance(spec, Uniform):
        return 0.5 * (spec.a + spec.b)
    if isinstance(spec, LogUniform):
        return (spec.b - spec.a) / math.log(spec.b / spec.a)
    if isinstance(spec, Mixture):
        return math.fsum(w * lognormal_mean(c.mu, c.s)
                         for w, c in zip(spec.weights, spec.components))
    raise TypeError(f"unsupported distribution {spec!r}")


def lognormal_variance(mu: float, s: float) -> float:
    return math.expm1(s * s) * math.exp(2.0 * mu + s * s)


def mixture_variance(spec: Mixture) -> float:
    """``sum_i w_i^2 Var(exp(X_i))``.

    This is the variance of the weighted *sum* ``sum_i w_i exp(X_i)`` of
    independent lognormals, which is a different random variable from the
    mixture density used for pricing.  It is exposed as that formula and is
    not the variance of the mixture density.
    """
    if not isinstance(spec, Mixture):
        raise TypeError("mixture_variance requires a Mixture")
    return math.fsum(w * w * lognormal_variance(c.mu, c.s)
                     for w, c in zip(spec.weights, spec.components))


# -- calibration -------------------------------------------------------------

_LOGUNIFORM_MAX_RATIO = 1e6


def _loguniform_mean(a: float, b: float) -> float:
    return (b - a) / math.log(b / a)


def _solve_loguniform_b(a: float, forward: float) -> float:
    if not 0.0 < a < forward:
        raise CalibrationError(
            f"log_uniform needs 0 < a < forward, got a={a}, forward={forward}")
    lo = forward
    hi = 2.0 * forward
    while _loguniform_mean(a, hi) <= forward:
        if hi >= _LOGUNIFORM_MAX_RATIO * forward:
            raise CalibrationError(
                f"log_uniform: no b <= {_LOGUNIFORM_MAX_RATIO:g} * forward matches a={a}")
        lo, hi = hi, min(2.0 * hi, _LOGUNIFORM_MAX_RATIO * forward)
    return brentq(lambda b: _loguniform_mean(a, b) - forward, lo, hi,
                  xtol=1e-15 * forward, rtol=1e-15, maxiter=500)


def _take(free: dict, family: str, allowed: set) -> dict:
    unknown = set(free) - allowed
    if unknown:
        raise CalibrationError(f"{family}: unexpected parameter(s) {sorted(unknown)}")
    return {k: _finite(k, v) for k, v in free.items()}


def calibrate_forward(family: str, free_params: Mapping[str, Any],
                      market: MarketParams) -> DistributionSpec:
    """Build a spec of ``family`` whose mean equals ``market.forward``.

    ``free_params`` holds every parameter except the one being solved:

    * lognormal: ``s`` (solves ``mu``); normal: ``sigma_n``; student_t: ``nu``
    * gamma: ``theta`` (solves kappa), ``kappa`` (solves theta) or
      ``variance`` (solves both)
    * uniform / log_uniform: ``a`` (solves ``b``)
    * mixture: ``components`` and ``weights``; every component log-mean is
      shifted by one common constant
    """
    fwd = market.forward
    free = dict(free_params)
    try:
        if family == "lognormal":
            p = _take(free, family, {"s"})
            s = p["s"]
            return Lognormal(mu=math.log(fwd) - 0.5 * s * s, s=s)
        if family == "gamma":
            given = set(free)
            if given == {"theta"}:
                theta = _take(free, family, {"theta"})["theta"]
                return Gamma(kappa=fwd / theta, theta=theta)
            if given == {"kappa"}:
                kappa = _take(free, family, {"kappa"})["kappa"]
                return Gamma(kappa=kappa, theta=fwd / kappa)
            if given == {"variance"}:
                var = _take(free, family, {"variance"})["variance"]
                if var <= 0.0:
                    raise CalibrationError("gamma variance must be > 0")
                return Gamma(kappa=fwd * fwd / var, theta=var / fwd)
            raise CalibrationError(
                "gamma calibration needs exactly one of theta, kappa or variance")
        if family == "normal":
            return Normal(mu=fwd, sigma_n=_take(free, family, {"sigma_n"})["sigma_n"])
        if family == "student_t":
            return StudentT(mu=fwd, nu=_take(free, family, {"nu"})["nu"])
        if family == "uniform":
            a = _take(free, family, {"a"})["a"]
            if a >= fwd:
                raise CalibrationError(
                    f"uniform needs a < forward so that b = 2F - a > a; a={a}, forward={fwd}")
            return Uniform(a=a, b=2.0 * fwd - a)
        if family == "log_uniform":
            a = _take(free, family, {"a"})["a"]
            return LogUniform(a=a, b=_solve_loguniform_b(a, fwd))
        if family == "mixture":
            base = mixture_from_dict({"family": "mixture", **free})
            shift = math.log(fwd / mean(base))
            comps = tuple(Lognormal(c.mu + shift, c.s) for c in base.components)
            return Mixture(comps, base.weights)
    except DomainError as exc:
        raise CalibrationError(f"{family}: {exc}") from exc
    raise CalibrationError(f"unknown family {family!r}")


def recalibrate(spec: DistributionSpec, market: MarketParams) -> DistributionSpec:
    """Re-solve the location (or upper bound) of ``spec`` against ``market``."""
    if isinstance(spec, Lognormal):
        return calibrate_forward("lognormal", {"s": spec.s}, market)
    if isinstance(spec, Gamma):
        return calibrate_forward("gamma", {"kappa": spec.kappa}, market)
    if isinstance(spec, Normal):
        return calibrate_forward("normal", {"sigma_n": spec.sigma_n}, market)
    if isinstance(spec, StudentT):
        return calibrate_forward("student_t", {"nu": spec.nu}, market)
    if isinstance(spec, (Uniform, LogUniform)):
        return calibrate_forward(spec.family, {"a": spec.a}, market)
    if isinstance(spec, Mixture):
        return calibrate_forward("mixture", {
            "components": [to_dict(c) for c in spec.components],
            "weights": list(spec.weights)}, market)
    raise TypeError(f"unsupported distribution {spec!r}")


def forward_mismatch(spec: DistributionSpec, market: MarketParams) -> float:
    """Relative gap ``|mean - F| / |F|`` between the spec mean and the forward."""
    fwd = market.forward
    return abs(mean(spec) - fwd) / abs(fwd)


# -- JSON ---------------------------------------------------------------------

_FIELDS = {
    "lognormal": ("mu", "s"),
    "gamma": ("kappa", "theta"),
    "normal": ("mu", "sigma_n"),
    "student_t": ("mu", "nu"),
    "uniform": ("a", "b"),
    "log_uniform": ("a", "b"),
}


def to_dict(spec: DistributionSpec) -> dict:
    if isinstance(spec, Mixture):
        return {
            "family": "mixture",
            "components": [to_dict(c) for c in spec.components],
            "weights": list(spec.weights),
        }
    out: dict = {"family": spec.family}
    for name in _FIELDS[spec.family]:
        out[name] = getattr(spec, name)
    return out


def mixture_from_dict(data: Mapping[str, Any]) -> Mixture:
    comps_raw = data.get("components")
    weights = data.get("weights")
    if not isinstance(comps_raw, Sequence) or isinstance(comps_raw, str):
        raise DomainError("components: must be a list")
    if not isinstance(weights, Sequence) or isinstance(weights, str):
        raise DomainError("weights: must be a list")
    comps = []
    for i, raw in enumerate(comps_raw):
        if not isinstance(raw, Mapping):
            raise DomainError(f"components[{i}]: must be an object")
        raw = dict(raw)
        fam = raw.pop("family", "lognormal")
        if fam != "lognormal":
            raise DomainError(f"components[{i}].family: must be lognormal")
        try:
            comps.append(_build("lognormal", raw))
        except DomainError as exc:
            raise DomainError(f"components[{i}].{exc}") from None
    return Mixture(tuple(comps), tuple(weights))


def _build(family: str, data: Mapping[str, Any]) -> DistributionSpec:
    names = _FIELDS[family]
    unknown = set(data) - set(names)
    if unknown:
        raise DomainError(f"{sorted(unknown)[0]}: unknown field for {family}")
    for name in names:
        if name not in data:
            raise DomainError(f"{name}: missing for {family}")
    kwargs = {}
    for name in names:
        try:
            kwargs[name] = _finite(name, data[name])
        except DomainError:
            raise DomainError(f"{name}: must be a finite number, got {data[name]!r}") from None
    try:
        return FAMILIES[family](**kwargs)
    except DomainError as exc:
        first = str(exc).split()[0]
        bad = first if first in names else names[-1]
        raise DomainError(f"{bad}: {exc}") from None


def from_dict(data: Mapping[str, Any]) -> DistributionSpec:
    """Parse the JSON form; error messages start with the offending field name."""
    if not isinstance(data, Mapping):
        raise DomainError("distribution: must be an object")
    family = data.get("family")
    if family not in FAMILIES:
        raise DomainError(f"family: unknown distribution family {family!r}")
    if family == "mixture":
        extra = set(data) - {"family", "components", "weights"}
        if extra:
            raise DomainError(f"{sorted(extra)[0]}: unknown field for mixture")
        return mixture_from_dict(data)
    body = {k: v for k, v in data.items() if k != "family"}
    return _build(family, body)
