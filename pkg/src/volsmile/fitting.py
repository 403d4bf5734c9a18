"""Mean-preserving least-squares fit of gamma or lognormal densities to a normal one.

The fit grid is ``points`` evenly spaced abscissae over
``mu +/- stdevs * sigma_n`` and the residuals are unweighted.
"""

from __future__ import annotations

import math

from scipy.optimize import minimize_scalar

from . import dists
from .errors import DomainError


def _grid(target: dists.Normal, points: int, stdevs: float) -> list[float]:
    lo = target.mu - stdevs * target.sigma_n
    hi = target.mu + stdevs * target.sigma_n
    return [lo + (hi - lo) * i / (points - 1) for i in range(points)]


def _with_stdev(family: str, mean: float, stdev: float) -> dists.DistributionSpec:
    if family == "gamma":
        var = stdev * stdev
        return dists.Gamma(mean * mean / var, var / mean)
    if family == "lognormal":
        s = math.sqrt(math.log1p((stdev / mean) ** 2))
        return dists.Lognormal(math.log(mean) - 0.5 * s * s, s)
    raise DomainError(f"fit_to_normal supports gamma and lognormal, not {family!r}")


def fit_to_normal(family: str, target: dists.Normal, points: int = 401,
                  stdevs: float = 4.0) -> dists.DistributionSpec:
    """Spec of ``family`` with mean ``target.mu`` whose density best matches ``target``."""
    if target.mu <= 0.0:
        raise DomainError("fit_to_normal needs a positive normal mean")
    if points < 3:
        raise DomainError("fit grid needs at least 3 points")
    xs = [x for x in _grid(target, points, stdevs)]
    ref = [dists.density(target, x) for x in xs]

    def loss(log_sd):
        spec = _with_stdev(family, target.mu, math.exp(log_sd))
        return math.fsum((dists.density(spec, x) - r) ** 2 for x, r in zip(xs, ref))

    centre = math.log(target.sigma_n)
    res = minimize_scalar(loss, bounds=(centre - math.log(10.0), centre + math.log(10.0)),
                          method="bounded", options={"xatol": 1e-10})
    return _with_stdev(family, target.mu, math.exp(res.x))
