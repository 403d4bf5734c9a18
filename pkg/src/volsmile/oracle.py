"""Independent numerical reference values.

Prices and means come from adaptive Gauss-Kronrod quadrature
(``scipy.integrate.quad``) of the payoff against ``dists.density``; nothing
here calls the closed-form pricers.  Unbounded supports are split at the
``tail_quantile`` quantiles into a finite core plus two tails integrated
separately.  Student's t is by default mapped onto a finite interval by
``x = mu + sqrt(nu) * tan(phi)`` instead; its heavy tails make the x-space
route slow for ``nu <= 2``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

from scipy import integrate
from scipy.optimize import brentq

from . import dists
from .dists import DistributionSpec, LogUniform, MarketParams, Mixture, StudentT, Uniform
from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    tail_quantile: float = 1e-10

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 50:
            raise DomainError("max_subdivisions must be >= 50")
        if not 0.0 < self.tail_quantile < 0.5:
            raise DomainError("tail_quantile must lie in (0, 0.5)")


DEFAULT_CONFIG = QuadratureConfig()


def _quad(f: Callable[[float], float], lo: float, hi: float, config: QuadratureConfig,
          points=None) -> float:
    if not hi > lo:
        return 0.0
    inner = None
    if points:
        inner = sorted(p for p in set(points) if lo < p < hi) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info, *rest = integrate.quad(
            f, lo, hi, epsabs=config.abs_tol, epsrel=config.rel_tol,
            limit=config.max_subdivisions, points=inner, full_output=1)
    if rest:
        # quad attaches a message to any non-clean exit (roundoff, slow
        # convergence near an endpoint singularity, ...).  The result is kept
        # when its error bound is still within 100x the requested tolerance.
        message = str(rest[0])
        tol = max(config.abs_tol, config.rel_tol * abs(value))
        if not err <= 100.0 * tol:
            raise ConvergenceError(
                f"quadrature on [{lo:.6g}, {hi:.6g}] failed: {message.splitlines()[0]} "
                f"(estimate={value:.12g}, error bound={err:.3g})",
                estimate=value, error_bound=err)
    return value


def quantile(spec: DistributionSpec, prob: float) -> float:
    """Inverse CDF by bracketed root finding on ``dists.cdf``."""
    lo_s, hi_s = dists.support(spec)
    m = dists.mean(spec)
    scale = max(abs(m), 1.0)
    lo = lo_s if math.isfinite(lo_s) else m - scale
    hi = hi_s if math.isfinite(hi_s) else m + scale
    if not math.isfinite(lo_s):
        while dists.cdf(spec, lo) > prob:
            lo = m - 2.0 * (m - lo)
    if not math.isfinite(hi_s):
        while dists.cdf(spec, hi) < prob:
            hi = m + 2.0 * (hi - m)
    return brentq(lambda x: dists.cdf(spec, x) - prob, lo, hi,
                  xtol=1e-14 * scale, rtol=1e-15, maxiter=500)


def integration_domain(spec: DistributionSpec,
                       config: QuadratureConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Finite interval carrying all but ``tail_quantile`` mass in each tail."""
    if isinstance(spec, (Uniform, LogUniform)):
        return spec.a, spec.b
    return quantile(spec, config.tail_quantile), quantile(spec, 1.0 - config.tail_quantile)


def _breakpoints(spec: DistributionSpec) -> list[float]:
    if isinstance(spec, Mixture):
        return [math.exp(c.mu) for c in spec.components]
    return [dists.mean(spec)]


# Student's t on phi in (-pi/2, pi/2): dx = sqrt(nu) / cos(phi)^2 dphi

def _phi_of(spec: StudentT, x: float) -> float:
    return math.atan((x - spec.mu) / math.sqrt(spec.nu))


def _student_sub(spec: StudentT, g: Callable[[float], float]) -> Callable[[float], float]:
    root_nu = math.sqrt(spec.nu)

    def integrand(phi):
        c = math.cos(phi)
        if c <= 0.0:
            return 0.0
        x = spec.mu + root_nu * math.tan(phi)
        return g(x) * dists.density(spec, x) * root_nu / (c * c)

    return integrand


def _expect(spec: DistributionSpec, g: Callable[[float], float], lo: float, hi: float,
            config: QuadratureConfig, strategy: str) -> float:
    """``int_lo^hi g(x) p(x) dx`` with the family's integration strategy."""
    if isinstance(spec, StudentT) and strategy == "tan":
        a = -0.5 * math.pi if lo == -math.inf else _phi_of(spec, lo)
        b = 0.5 * math.pi if hi == math.inf else _phi_of(spec, hi)
        return _quad(_student_sub(spec, g), a, b, config, points=[0.0])
    s_lo, s_hi = dists.support(spec)
    lo, hi = max(lo, s_lo), min(hi, s_hi)
    if not hi > lo:
        return 0.0
    core_lo, core_hi = integration_domain(spec, config)
    f = lambda x: g(x) * dists.density(spec, x)  # noqa: E731
    total = 0.0
    # core between the tail quantiles, then each tail to the support edge
    for a, b, pts in ((core_lo, core_hi, _breakpoints(spec)), (s_lo, core_lo, None),
                      (core_hi, s_hi, None)):
        a, b = max(a, lo), min(b, hi)
        if b > a:
            total += _quad(f, a, b, config, points=pts if math.isfinite(a + b) else None)
    return total


def quad_call(spec: DistributionSpec, market: MarketParams, K: float,
              config: QuadratureConfig = DEFAULT_CONFIG, strategy: str = "tan") -> float:
    """``exp(-rT) * int_K^inf (S - K) p(S) dS``.

    ``strategy`` only affects Student's t: ``"tan"`` (default) integrates in
    the tangent variable, ``"direct"`` integrates in ``x``
    like every other family.
    """
    K = float(K)
    val = _expect(spec, lambda s: s - K, K, math.inf, config, strategy)
    return market.discount * val


def quad_put(spec: DistributionSpec, market: MarketParams, K: float,
             config: QuadratureConfig = DEFAULT_CONFIG, strategy: str = "tan") -> float:
    K = float(K)
    val = _expect(spec, lambda s: K - s, -math.inf, K, config, strategy)
    return market.discount * val


def quad_mean(spec: DistributionSpec, config: QuadratureConfig = DEFAULT_CONFIG,
              strategy: str = "tan") -> float:
    """``int S p(S) dS``.

    For Student's t the two halves about ``mu`` are integrated separately as
    ``mu * mass + int (x - mu) p dx`` so the heavy tails cancel symmetrically.
    """
    if isinstance(spec, StudentT):
        mu = spec.mu
        left = _expect(spec, lambda x: x - mu, -math.inf, mu, config, strategy)
        right = _expect(spec, lambda x: x - mu, mu, math.inf, config, strategy)
        mass = _expect(spec, lambda x: 1.0, -math.inf, math.inf, config, strategy)
        return mu * mass + (left + right)
    return _expect(spec, lambda x: x, -math.inf, math.inf, config, "direct")


def quad_mass(spec: DistributionSpec, config: QuadratureConfig = DEFAULT_CONFIG,
              lo: float = -math.inf, hi: float = math.inf) -> float:
    """Probability mass on ``[lo, hi]`` by quadrature of the density."""
    return _expect(spec, lambda x: 1.0, lo, hi, config, "tan")


def fd_derivative(f: Callable[[float], float], x: float, h: float, order: int = 1) -> float:
    """Central finite difference of order 1 or 2."""
    if not h > 0.0:
        raise DomainError(f"step h must be > 0, got {h!r}")
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    raise DomainError(f"order must be 1 or 2, got {order!r}")


# -- verification records -----------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    name: str
    closed_form_value: float
    oracle_value: float
    abs_err: float
    rel_err: float
    passed: bool
    rel_tol: float
    abs_tol: float


def make_check(name: str, closed_form_value: float, oracle_value: float,
               rel_tol: float, abs_tol: float = 0.0) -> CheckRecord:
    """Passes when ``abs_err <= max(rel_tol * |oracle|, abs_tol)``."""
    abs_err = abs(closed_form_value - oracle_value)
    rel_err = abs_err / abs(oracle_value) if oracle_value != 0.0 else (
        0.0 if abs_err == 0.0 else math.inf)
    passed = abs_err <= max(rel_tol * abs(oracle_value), abs_tol)
    return CheckRecord(name, closed_form_value, oracle_value, abs_err, rel_err,
                       passed, rel_tol, abs_tol)


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, record: CheckRecord) -> None:
        self.checks.append(record)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures),
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)

    def render_table(self) -> str:
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{width}}  {'closed_form':>22}  {'oracle':>22}  "
                 f"{'abs_err':>9}  {'rel_err':>9}  result"]
        for c in self.checks:
            lines.append(
                f"{c.name:<{width}}  {c.closed_form_value:>22.15g}  {c.oracle_value:>22.15g}  "
                f"{c.abs_err:>9.2e}  {c.rel_err:>9.2e}  {'PASS' if c.passed else 'FAIL'}")
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} passed")
        return "\n".join(lines)
