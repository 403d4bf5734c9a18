"""Implied volatility inversion, smile construction and density recovery."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from . import dists, pricer
from .dists import DistributionSpec, MarketParams
from .errors import (ConvergenceError, DomainError, EmptyCurveError,
                     ForwardMismatchWarning, NoSolutionError)

SIGMA_MIN = 1e-6
SIGMA_MAX = 5.0
NEWTON_SWITCH_WIDTH = 1e-2
MAX_ITER = 200
PRICE_TOL = 1e-12      # residual target, in units of spot
BOUND_EPS = 1e-14      # strict-interior margin, in units of spot
POLISH_STEPS = 100

BELOW_LOWER = "below_lower_bound"
ABOVE_UPPER = "above_upper_bound"
NO_CONVERGENCE = "no_convergence"


def call_bounds(market: MarketParams, K: float) -> tuple[float, float]:
    """Static no-arbitrage bounds ``(lower, upper)`` for a call."""
    fwd_spot = market.foreign_discount * market.spot
    return max(fwd_spot - market.discount * K, 0.0), fwd_spot


def implied_vol(price: float, market: MarketParams, K: float) -> float:
    """Black-Scholes volatility reproducing a call ``price`` at strike ``K``.

    Bisection on ``[SIGMA_MIN, SIGMA_MAX]`` until the bracket is narrower than
    ``NEWTON_SWITCH_WIDTH``, then safeguarded Newton steps with the analytic
    vega.  Once the price residual is within ``PRICE_TOL * spot`` a few more
    Newton steps are taken while they still reduce it.
    """
    return _invert(price, market, K)[0]


def _invert(price: float, market: MarketParams, K: float) -> tuple[float, float, int]:
    price = float(price)
    K = float(K)
    if not math.isfinite(price):
        raise DomainError(f"price must be finite, got {price!r}")
    if not K > 0.0:
        raise DomainError(f"strike must be > 0, got {K!r}")
    lower, upper = call_bounds(market, K)
    eps = BOUND_EPS * market.spot
    if price <= lower + eps:
        raise NoSolutionError(
            f"call price {price:.17g} is not above the lower bound {lower:.17g} at K={K}",
            BELOW_LOWER)
    if price >= upper - eps:
        raise NoSolutionError(
            f"call price {price:.17g} is not below the upper bound {upper:.17g} at K={K}",
            ABOVE_UPPER)

    tol = PRICE_TOL * market.spot
    lo, hi = SIGMA_MIN, SIGMA_MAX
    f_lo = pricer.bsm_call(market, K, lo) - price
    f_hi = pricer.bsm_call(market, K, hi) - price
    if f_lo > 0.0 or f_hi < 0.0:
        best = lo if abs(f_lo) < abs(f_hi) else hi
        raise ConvergenceError(
            f"implied vol at K={K} lies outside [{SIGMA_MIN}, {SIGMA_MAX}]",
            estimate=best, error_bound=min(abs(f_lo), abs(f_hi)))
    # endpoints are only accepted on an exact hit; a small residual there can
    # still sit far from the root when vega is tiny
    if f_lo == 0.0:
        return lo, f_lo, 0
    if f_hi == 0.0:
        return hi, f_hi, 0

    sigma = 0.5 * (lo + hi)
    resid = math.inf
    for it in range(1, MAX_ITER + 1):
        resid = pricer.bsm_call(market, K, sigma) - price
        if abs(resid) <= tol:
            return _polish(price, market, K, sigma, resid, lo, hi, it)
        if resid > 0.0:
            hi = sigma
        else:
            lo = sigma
        nxt = 0.5 * (lo + hi)
        if hi - lo < NEWTON_SWITCH_WIDTH:
            vega = pricer.bsm_vega(market, K, sigma)
            if vega > 0.0:
                step = sigma - resid / vega
                if lo < step < hi:
                    nxt = step
        if nxt == sigma:
            break
        sigma = nxt
    raise ConvergenceError(
        f"implied vol at K={K} did not reach residual {tol:.3g}", estimate=sigma,
        error_bound=abs(resid))


def _polish(price, market, K, sigma, resid, lo, hi, it):
    """Keep refining past the residual target, down to price rounding level.

    With small vega a residual of ``PRICE_TOL * spot`` can still leave sigma
    loose.  Newton steps that leave the bracket fall back to bisection; the
    iterate with the smallest residual is returned.
    """
    best = (abs(resid), sigma, resid)
    for _ in range(POLISH_STEPS):
        if resid == 0.0:
            break
        if resid > 0.0:
            hi = sigma
        else:
            lo = sigma
        vega = pricer.bsm_vega(market, K, sigma)
        step = sigma - resid / vega if vega > 0.0 else math.nan
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if abs(step - sigma) <= 2e-16 * sigma:
            break
        sigma = step
        resid = pricer.bsm_call(market, K, sigma) - price
        it += 1
        best = min(best, (abs(resid), sigma, resid))
    return best[1], best[2], it


def implied_vol_from_put(put: float, market: MarketParams, K: float) -> float:
    """Implied vol of a put, inverted through the parity-equivalent call."""
    call = put + market.discount * (market.forward - K)
    return implied_vol(call, market, K)


@dataclass(frozen=True)
class StrikeGrid:
    lo: float
    hi: float
    n: int = 61
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError("strike grid bounds must be finite")
        if self.lo <= 0.0:
            raise DomainError(f"strikes must be > 0, got lo={self.lo}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if self.n > 1 and not self.hi > self.lo:
            raise DomainError(f"strike grid needs hi > lo, got lo={self.lo}, hi={self.hi}")

    def strikes(self) -> list[float]:
        n = int(self.n)
        if n == 1:
            return [float(self.lo)]
        if self.spacing == "log":
            a, b = math.log(self.lo), math.log(self.hi)
            pts = [math.exp(a + (b - a) * i / (n - 1)) for i in range(n)]
        else:
            pts = [self.lo + (self.hi - self.lo) * i / (n - 1) for i in range(n)]
        pts[0], pts[-1] = float(self.lo), float(self.hi)
        return pts

    @classmethod
    def parse(cls, text: str) -> "StrikeGrid":
        """Parse ``lo:hi:n`` or ``lo:hi:n:log``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise DomainError(f"strikes: expected lo:hi:n[:log], got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise DomainError(f"strikes: expected lo:hi:n[:log], got {text!r}") from None
        spacing = parts[3] if len(parts) == 4 else "linear"
        return cls(lo, hi, n, spacing)


@dataclass(frozen=True)
class SmilePoint:
    strike: float
    implied_vol: float
    call_price: float
    put_price: float
    inversion_residual: float


@dataclass(frozen=True)
class SkippedStrike:
    strike: float
    reason: str
    detail: str


@dataclass
class SmileCurve:
    market: MarketParams
    points: list
    skipped: list = field(default_factory=list)
    source_spec: Optional[DistributionSpec] = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        ks = [p.strike for p in self.points]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise DomainError("smile strikes must be strictly increasing")

    @property
    def strikes(self) -> list[float]:
        return [p.strike for p in self.points]

    @property
    def vols(self) -> list[float]:
        return [p.implied_vol for p in self.points]

    def to_csv(self) -> str:
        rows = ["strike,call_price,put_price,implied_vol,residual"]
        for p in self.points:
            rows.append(",".join(fmt(v) for v in (
                p.strike, p.call_price, p.put_price, p.implied_vol, p.inversion_residual)))
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "market": self.market.to_dict(),
            "source_spec": dists.to_dict(self.source_spec) if self.source_spec else None,
            "points": [asdict(p) for p in self.points],
            "skipped": [asdict(s) for s in self.skipped],
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def fmt(x: float) -> str:
    """17 significant digits: exact round trip for any double."""
    return format(float(x), ".17g")


def build_smile(spec: DistributionSpec, market: MarketParams, grid: StrikeGrid) -> SmileCurve:
    """Price every grid strike under ``spec`` and invert to implied vols.

    Strikes whose call price has no implied vol are kept in ``skipped`` with
    a reason code; an empty curve raises ``EmptyCurveError``.
    """
    points, skipped = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ForwardMismatchWarning)
        for K in grid.strikes():
            call = pricer.call_price(spec, market, K)
            put = pricer.put_price(spec, market, K)
            try:
                sigma, resid, _ = _invert(call, market, K)
            except NoSolutionError as exc:
                skipped.append(SkippedStrike(K, exc.bound, str(exc)))
                continue
            except ConvergenceError as exc:
                skipped.append(SkippedStrike(K, NO_CONVERGENCE, str(exc)))
                continue
            points.append(SmilePoint(K, sigma, call, put, resid))
    msgs = list(dict.fromkeys(str(w.message) for w in caught
                              if issubclass(w.category, ForwardMismatchWarning)))
    for msg in msgs:
        warnings.warn(ForwardMismatchWarning(msg), stacklevel=2)
    if not points:
        raise EmptyCurveError("no strike on the grid has an implied volatility", skipped)
    return SmileCurve(market, points, skipped, spec, msgs)


def default_step(K: float) -> float:
    return 1e-3 * max(abs(K), 1.0)


def recover_density(price_fn: Callable[[float], float], market: MarketParams, K: float,
                    h: float | None = None) -> float:
    """Density at ``K`` from the second strike-derivative of call prices."""
    h = default_step(K) if h is None else float(h)
    if not h > 0.0:
        raise DomainError(f"step h must be > 0, got {h!r}")
    second = (price_fn(K - h) - 2.0 * price_fn(K) + price_fn(K + h)) / (h * h)
    return second / market.discount


def recover_cdf(price_fn: Callable[[float], float], market: MarketParams, K: float,
                h: float | None = None) -> float:
    """Cumulative probability at ``K`` from the first strike-derivative of call prices."""
    h = default_step(K) if h is None else float(h)
    if not h > 0.0:
        raise DomainError(f"step h must be > 0, got {h!r}")
    first = (price_fn(K + h) - price_fn(K - h)) / (2.0 * h)
    return 1.0 + first / market.discount
