"""Batch command-line front end.

Every command writes a CSV table (stdout or ``--out``) with a fixed header and
numbers at 10 significant digits.  Columns per command:

``moments``         case, m2, m3, m4, volatility, excess_kurtosis
``price-caplet``    strike, P0, P1_total, P2_total
``price-swaption``  strike, frozen_order0, P0, P1_total, P2_total
``mc``              strike, estimate, ci_low, ci_high, stderr, negative_fraction, rejected_paths, paths
``smile``           strike, price_order2, iv_order2, mc_price, iv_mc, iv_mc_low, iv_mc_high
``compare``         strike, P0, P1_total, P2_total, mc_estimate, ci_low, ci_high, inside_ci

Totals are ``P0 + alpha P1 + alpha^2 P2`` truncated at ``--order``; columns above
the requested order are left empty.  Exit status is 0 on success, 2 for an
invalid scenario or arguments, 3 when a computation leaves its numerical domain.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import config as cfgmod
from .expansion import caplet_implied_vol, price_caplet
from .montecarlo import mc_caplet_price, mc_swaption_price
from .swaption import price_swaption_corrections, price_swaption_order0

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

HEADERS = {
    "moments": ["case", "m2", "m3", "m4", "volatility", "excess_kurtosis"],
    "price-caplet": ["strike", "P0", "P1_total", "P2_total"],
    "price-swaption": ["strike", "frozen_order0", "P0", "P1_total", "P2_total"],
    "mc": ["strike", "estimate", "ci_low", "ci_high", "stderr", "negative_fraction", "rejected_paths", "paths"],
    "smile": ["strike", "price_order2", "iv_order2", "mc_price", "iv_mc", "iv_mc_low", "iv_mc_high"],
    "compare": ["strike", "P0", "P1_total", "P2_total", "mc_estimate", "ci_low", "ci_high", "inside_ci"],
}


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    return f"{v:.10g}"


def render(command: str, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADERS[command])
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _scenario(args) -> cfgmod.ScenarioConfig:
    if args.config and args.case:
        raise cfgmod.ConfigError("use either --config or --case, not both")
    if args.config:
        return cfgmod.load(args.config)
    return cfgmod.bundled_case(args.case or 1)


def _strikes(args, scenario) -> list:
    if args.strikes:
        try:
            ks = [float(s) for s in args.strikes.split(",")]
        except ValueError as exc:
            raise cfgmod.ConfigError(f"bad strike list: {args.strikes}") from exc
        if any(k <= 0 for k in ks):
            raise cfgmod.ConfigError("strikes must be positive")
        return ks
    return [float(k) for k in scenario.strikes]


def _alpha(args) -> float:
    if not 0 <= args.alpha <= 1:
        raise cfgmod.ConfigError("--alpha must lie in [0, 1]")
    return args.alpha


def _mc_model(args, scenario):
    """The model simulated by MC: the scenario's driver scaled to ``alpha``."""
    alpha = _alpha(args)
    if alpha == 0:
        raise cfgmod.ConfigError("Monte Carlo needs --alpha > 0")
    return scenario.model(scenario.levy_measure().scale(alpha))


def _sim_config(args, scenario):
    try:
        return scenario.sim_config(paths=args.paths, seed=args.seed, epsilon=args.epsilon)
    except ValueError as exc:
        raise cfgmod.ConfigError(str(exc)) from exc


def _caplet_index(args, scenario) -> int:
    k = args.caplet or scenario.caplet
    if not 1 <= k <= len(scenario.tenor) - 1:
        raise cfgmod.ConfigError("caplet index out of range")
    return k


def _totals(br, alpha, order) -> list:
    return [br.total(alpha, o) if o <= order else None for o in (0, 1, 2)]


def _mc(args, scenario, strikes):
    model = _mc_model(args, scenario)
    sim = _sim_config(args, scenario)
    if args.product == "swaption":
        return mc_swaption_price(model, list(strikes), sim)
    return mc_caplet_price(model, _caplet_index(args, scenario), list(strikes), sim)


def cmd_moments(args):
    if args.config or args.case:
        scenarios = [_scenario(args)]
    else:
        scenarios = [cfgmod.bundled_case(c) for c in (1, 2, 3, 4)]
    rows = []
    for sc in scenarios:
        mu = sc.levy_measure()
        m2 = float(mu.c[0, 0]) + mu.raw_moment(2)
        m3, m4 = (mu.raw_moment(k) for k in (3, 4))
        kurt = m4 / m2**2 if m2 > 0 else math.nan
        rows.append([sc.name, m2, m3, m4, math.sqrt(m2), kurt])
    return rows


def cmd_price_caplet(args):
    sc = _scenario(args)
    model, k, alpha = sc.model(), _caplet_index(args, sc), _alpha(args)
    rows = []
    for K in _strikes(args, sc):
        br = price_caplet(model, k, K, order=args.order)
        rows.append([K] + _totals(br, alpha, args.order))
    return rows


def cmd_price_swaption(args):
    sc = _scenario(args)
    model, alpha = sc.model(), _alpha(args)
    rows = []
    for K in _strikes(args, sc):
        br = price_swaption_corrections(model, K, order=args.order)
        rows.append([K, price_swaption_order0(model, K)] + _totals(br, alpha, args.order))
    return rows


def cmd_mc(args):
    sc = _scenario(args)
    strikes = _strikes(args, sc)
    rows = []
    for K, res in zip(strikes, _mc(args, sc, strikes)):
        lo, hi = res.ci
        rows.append([K, res.estimate, lo, hi, res.stderr, res.negative_fraction, res.rejected, res.paths])
    return rows


def cmd_smile(args):
    sc = _scenario(args)
    if args.product != "caplet":
        raise cfgmod.ConfigError("smile is defined for caplets only")
    model, k, alpha = sc.model(), _caplet_index(args, sc), _alpha(args)
    strikes = _strikes(args, sc)
    mc = _mc(args, sc, strikes)
    rows = []
    for K, res in zip(strikes, mc):
        price = price_caplet(model, k, K, order=args.order).total(alpha, args.order)
        lo, hi = res.interval(args.level)
        rows.append([K, price, _iv(model, k, K, price), res.estimate,
                     _iv(model, k, K, res.estimate), _iv(model, k, K, lo, floor=True), _iv(model, k, K, hi)])
    return rows


def _iv(model, k, K, price, floor=False):
    """Implied vol, or nan where the price sits outside the no-arbitrage bounds.

    With ``floor`` a price at or below intrinsic value maps to zero volatility,
    which is the right reading for the lower edge of a confidence band.
    """
    if not np.isfinite(price):
        return math.nan
    intrinsic = model.bonds()[k] * model.accruals[k - 1] * max(model.libors[k - 1] - K, 0.0)
    if floor and price <= intrinsic:
        return 0.0
    try:
        return caplet_implied_vol(model, k, K, price)
    except ValueError:
        return math.nan


def cmd_compare(args):
    sc = _scenario(args)
    model, alpha = sc.model(), _alpha(args)
    strikes = _strikes(args, sc)
    mc = _mc(args, sc, strikes)
    rows = []
    for K, res in zip(strikes, mc):
        if args.product == "swaption":
            br = price_swaption_corrections(model, K, order=args.order)
        else:
            br = price_caplet(model, _caplet_index(args, sc), K, order=args.order)
        totals = _totals(br, alpha, args.order)
        lo, hi = res.interval(args.level)
        best = totals[args.order]
        rows.append([K] + totals + [res.estimate, lo, hi, bool(lo <= best <= hi)])
    return rows


COMMANDS = {
    "moments": cmd_moments,
    "price-caplet": cmd_price_caplet,
    "price-swaption": cmd_price_swaption,
    "mc": cmd_mc,
    "smile": cmd_smile,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levylibor", description="Lévy Libor model pricing tool")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario JSON document")
        p.add_argument("--case", type=int, choices=(1, 2, 3, 4), help="bundled CGMY scenario")
        p.add_argument("--order", type=int, choices=(0, 1, 2), default=2)
        p.add_argument("--alpha", type=float, default=1.0)
        p.add_argument("--paths", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--epsilon", type=float, help="small-jump truncation level")
        p.add_argument("--out", help="write the CSV here instead of stdout")
        p.add_argument("--strikes", help="comma-separated strikes overriding the scenario")
        p.add_argument("--caplet", type=int, help="caplet index k (1-based)")
        p.add_argument("--product", choices=("caplet", "swaption"), default="caplet")
        p.add_argument("--level", type=float, default=0.95, help="confidence level for MC bands")
    return parser


def main(argv=None) -> int:
    # argparse itself exits with status 2 on malformed arguments
    args = build_parser().parse_args(argv)
    try:
        text = render(args.command, COMMANDS[args.command](args))
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
