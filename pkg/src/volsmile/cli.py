"""``volsmile`` command line: smile, price, delta, density and verify.

Every subcommand reads one JSON run config::

    {
      "market": {"spot": 5, "domestic_rate": 0, "foreign_rate": 0, "expiry": 0.5},
      "distribution": {"family": "student_t", "mu": 5, "nu": 1.5},
      "strikes": "3.5:6.5:61",
      "output": {"path": null, "format": "csv"},
      "policy": "warn"
    }

``distribution`` may instead carry ``"calibrate": {...}`` (free parameters for
``dists.calibrate_forward``) or ``"fit_to_normal": {"mu", "sigma_n", "points",
"stdevs"}`` for a gamma/lognormal least-squares fit.  ``strikes`` is either
``lo:hi:n[:log]`` or an object with ``lo``, ``hi``, ``n`` and ``spacing``.

Exit codes: 0 ok, 1 input error, 2 partial smile, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from typing import Any

from . import dists, fitting, greeks, pricer, smile, verify
from .dists import DistributionSpec, MarketParams
from .errors import EmptyCurveError, ForwardMismatchWarning, VolSmileError
from .smile import StrikeGrid, fmt

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL, EXIT_VERIFY = 0, 1, 2, 3
POLICIES = ("warn", "recalibrate", "error")
FORMATS = ("csv", "json")
_CONFIG_KEYS = {"market", "distribution", "strikes", "output", "policy"}


class ConfigError(VolSmileError):
    """Bad run config; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams
    spec: DistributionSpec
    grid: StrikeGrid
    out_path: str | None = None
    out_format: str = "csv"
    policy: str = "warn"


def _field(prefix: str, exc: Exception) -> ConfigError:
    msg = str(exc)
    if msg.startswith(prefix):
        return ConfigError(msg)
    head, sep, rest = msg.partition(" ")
    if head.isidentifier() and not head.endswith(":"):
        # "spot must be > 0" -> "market.spot: must be > 0"
        return ConfigError(f"{prefix}.{head}: {rest}")
    return ConfigError(f"{prefix}.{msg}")


def _parse_grid(raw: Any) -> StrikeGrid:
    try:
        if isinstance(raw, str):
            return StrikeGrid.parse(raw)
        if isinstance(raw, dict):
            unknown = set(raw) - {"lo", "hi", "n", "spacing"}
            if unknown:
                raise ConfigError(f"strikes: unknown field(s) {sorted(unknown)}")
            return StrikeGrid(float(raw["lo"]), float(raw["hi"]), raw.get("n", 61),
                              raw.get("spacing", "linear"))
    except KeyError as exc:
        raise ConfigError(f"strikes.{exc.args[0]}: missing") from None
    except (TypeError, ValueError) as exc:
        raise _field("strikes", exc) from None
    raise ConfigError("strikes: expected 'lo:hi:n[:log]' or an object")


def _parse_spec(raw: Any, market: MarketParams) -> DistributionSpec:
    if not isinstance(raw, dict):
        raise ConfigError("distribution: must be an object")
    try:
        if "calibrate" in raw:
            extra = set(raw) - {"family", "calibrate"}
            if extra:
                raise ConfigError(f"distribution.{sorted(extra)[0]}: not allowed with calibrate")
            return dists.calibrate_forward(raw.get("family"), raw["calibrate"], market)
        if "fit_to_normal" in raw:
            fit = dict(raw["fit_to_normal"])
            target = dists.Normal(fit.pop("mu"), fit.pop("sigma_n"))
            return fitting.fit_to_normal(raw.get("family"), target, **fit)
    except KeyError as exc:
        raise ConfigError(f"distribution.fit_to_normal.{exc.args[0]}: missing") from None
    except TypeError as exc:
        raise ConfigError(f"distribution.fit_to_normal: {exc}") from None
    except (ValueError, VolSmileError) as exc:
        raise _field("distribution", exc) from None
    try:
        return dists.from_dict(raw)
    except (ValueError, TypeError, VolSmileError) as exc:
        raise _field("distribution", exc) from None


def load_config(path: str, overrides: argparse.Namespace | None = None) -> RunConfig:
    """Read ``path`` and apply command-line overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown config field")
    for key in ("market", "distribution"):
        if key not in raw:
            raise ConfigError(f"{key}: missing")
    ov = overrides or argparse.Namespace()

    mdata = raw["market"]
    if not isinstance(mdata, dict):
        raise ConfigError("market: must be an object")
    mdata = dict(mdata)
    for flag, key in (("spot", "spot"), ("rate", "domestic_rate"),
                      ("div_yield", "foreign_rate"), ("expiry", "expiry")):
        if getattr(ov, flag, None) is not None:
            mdata[key] = getattr(ov, flag)
    try:
        market = MarketParams.from_dict(mdata)
    except (TypeError, ValueError) as exc:
        raise _field("market", exc) from None

    strikes = getattr(ov, "strikes", None) or raw.get("strikes")
    if strikes is None:
        raise ConfigError("strikes: missing")
    grid = _parse_grid(strikes)

    out = raw.get("output") or {}
    if not isinstance(out, dict):
        raise ConfigError("output: must be an object")
    out_path = getattr(ov, "out", None) or out.get("path")
    out_format = getattr(ov, "format", None) or out.get("format", "csv")
    if out_format not in FORMATS:
        raise ConfigError(f"output.format: must be csv or json, got {out_format!r}")
    policy = getattr(ov, "policy", None) or raw.get("policy", "warn")
    if policy not in POLICIES:
        raise ConfigError(f"policy: must be one of {', '.join(POLICIES)}, got {policy!r}")

    spec = _parse_spec(raw["distribution"], market)
    gap = dists.forward_mismatch(spec, market)
    if gap > pricer.FORWARD_TOLERANCE:
        if policy == "error":
            raise ConfigError(
                f"distribution: mean {dists.mean(spec):.12g} differs from forward "
                f"{market.forward:.12g} (relative gap {gap:.3g})")
        if policy == "recalibrate":
            try:
                spec = dists.recalibrate(spec, market)
            except VolSmileError as exc:
                raise _field("distribution", exc) from None
    return RunConfig(market, spec, grid, out_path, out_format, policy)


# -- rendering ------------------------------------------------------------------

def _csv(header: list[str], rows, footer: list[str] = ()) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    lines.extend(footer)
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------

def cmd_smile(cfg: RunConfig, args=None) -> int:
    try:
        curve = smile.build_smile(cfg.spec, cfg.market, cfg.grid)
    except EmptyCurveError as exc:
        for s in exc.skipped:
            print(f"skipped strike {fmt(s.strike)}: {s.reason}", file=sys.stderr)
        raise
    text = curve.to_csv() if cfg.out_format == "csv" else curve.to_json()
    _emit(text, cfg)
    for s in curve.skipped:
        print(f"skipped strike {fmt(s.strike)}: {s.reason}", file=sys.stderr)
    return EXIT_PARTIAL if curve.skipped else EXIT_OK


def cmd_price(cfg: RunConfig, args=None) -> int:
    kind = getattr(args, "kind", "call")
    quotes = [pricer.quote(cfg.spec, cfg.market, K) for K in cfg.grid.strikes()]
    if cfg.out_format == "json":
        _emit(_json({"kind": kind, "market": cfg.market.to_dict(),
                     "spec": dists.to_dict(cfg.spec),
                     "quotes": [{"strike": q.strike, "price": q.call if kind == "call" else q.put,
                                 "call_price": q.call, "put_price": q.put,
                                 "forward": q.forward, "discount": q.discount,
                                 "parity_error": q.parity_error} for q in quotes]}), cfg)
    else:
        rows = [(q.strike, kind, q.call if kind == "call" else q.put, q.call, q.put,
                 q.parity_error) for q in quotes]
        _emit(_csv(["strike", "kind", "price", "call_price", "put_price", "parity_error"],
                   rows), cfg)
    return EXIT_OK


def cmd_delta(cfg: RunConfig, args=None) -> int:
    assumption = getattr(args, "assumption", None) or greeks.CONST_KAPPA
    if cfg.spec.family not in greeks.HAS_ANALYTIC_DELTA:
        raise ConfigError(
            f"distribution.family: no analytic delta for {cfg.spec.family!r}; "
            f"use `volsmile verify --fd-delta` for a finite-difference delta check")
    results = [(K, greeks.delta(cfg.spec, cfg.market, K, assumption))
               for K in cfg.grid.strikes()]
    if cfg.out_format == "json":
        _emit(_json({"spec": dists.to_dict(cfg.spec),
                     "deltas": [{"strike": K, "delta": r.delta, "assumption": r.assumption}
                                for K, r in results]}), cfg)
    else:
        _emit(_csv(["strike", "delta", "assumption"],
                   [(K, r.delta, r.assumption) for K, r in results]), cfg)
    return EXIT_OK


def cmd_density(cfg: RunConfig, args=None) -> int:
    spec, market = cfg.spec, cfg.market
    price = lambda k: pricer.call_price(spec, market, k)  # noqa: E731
    rows = []
    for K in cfg.grid.strikes():
        analytic = dists.density(spec, K)
        recovered = smile.recover_density(price, market, K)
        rows.append((K, analytic, recovered, abs(analytic - recovered)))
    max_gap = max(r[3] for r in rows)
    if cfg.out_format == "json":
        _emit(_json({"spec": dists.to_dict(spec), "max_abs_gap": max_gap,
                     "rows": [dict(zip(("strike", "analytic_density", "recovered_density",
                                        "abs_gap"), r)) for r in rows]}), cfg)
    else:
        _emit(_csv(["strike", "analytic_density", "recovered_density", "abs_gap"], rows,
                   [f"# max_abs_gap={fmt(max_gap)}"]), cfg)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args=None) -> int:
    choice = getattr(args, "checks", "all")
    checks = verify.CHECK_SETS if choice == "all" else (choice,)
    report = verify.run_checks(cfg.spec, cfg.market, cfg.grid.strikes(), checks,
                               fd_delta=bool(getattr(args, "fd_delta", False)))
    text = report.to_json() + "\n" if cfg.out_format == "json" else report.render_table() + "\n"
    _emit(text, cfg)
    if not report.passed:
        for c in report.failures:
            print(f"FAILED {c.name}: abs_err={c.abs_err:.3g}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"smile": cmd_smile, "price": cmd_price, "delta": cmd_delta,
            "density": cmd_density, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volsmile", description="Implied-volatility smiles of risk-neutral distributions.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON run config")
    common.add_argument("--spot", type=float)
    common.add_argument("--rate", type=float, help="domestic rate r")
    common.add_argument("--div-yield", type=float, help="foreign rate / dividend yield q")
    common.add_argument("--expiry", type=float, help="years")
    common.add_argument("--strikes", help="lo:hi:n[:log]")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--policy", choices=POLICIES, help="forward-mismatch policy")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("smile", parents=[common], help="implied-vol smile")
    p = sub.add_parser("price", parents=[common], help="call/put quotes with parity column")
    p.add_argument("--kind", choices=("call", "put"), default="call")
    p = sub.add_parser("delta", parents=[common], help="analytic call deltas")
    p.add_argument("--assumption", choices=(greeks.CONST_KAPPA, greeks.CONST_VARIANCE),
                   default=greeks.CONST_KAPPA, help="gamma parameter co-movement")
    sub.add_parser("density", parents=[common], help="analytic vs recovered density")
    p = sub.add_parser("verify", parents=[common], help="oracle cross-checks")
    p.add_argument("--checks", choices=("all",) + verify.CHECK_SETS, default="all")
    p.add_argument("--fd-delta", action="store_true",
                   help="compare spot finite differences of closed-form and quadrature prices")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ForwardMismatchWarning)
        try:
            cfg = load_config(args.config, args)
            status = COMMANDS[args.command](cfg, args)
        except (VolSmileError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = EXIT_INPUT
        except OSError as exc:
            print(f"error: output: {exc}", file=sys.stderr)
            status = EXIT_INPUT
    for msg in dict.fromkeys(str(w.message) for w in caught
                             if issubclass(w.category, ForwardMismatchWarning)):
        print(f"warning: {msg}", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
