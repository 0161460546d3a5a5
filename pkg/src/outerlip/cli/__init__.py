"""Command-line interface: ``outerlip {modulus,outer,check,carleson}``.

Every option can also be set in an INI file passed with ``--config``; the
section named after the subcommand supplies defaults and explicit flags win.
Exit codes: 0 success, 2 configuration or validation failure, 3 accuracy or
divergence failure in a required quantity.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import __version__
from ..carleson import (carleson_sum, build_hE, depth_sweep, derivative_sweep,
                        make_cantor, make_noncarleson)
from ..boundary import log_integral
from ..diagnostics import GridSpec, nested_trend, run_checks
from ..errors import AccuracyError, ConfigError, DivergenceError, DomainError, MarginError
from ..modulus import (Modulus, fast_constant, rho_slow_eta, slow_constant, validate)
from ..outer import OuterEvaluator
from .specs import (is_noncarleson, noncarleson_levels, parse_boundary, parse_modulus,
                    parse_points, parse_set, split_hE)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCURACY = 3

OUTER_HEADER = ["re_z", "im_z", "re_O", "im_O", "abs_O", "u", "v", "err_flag"]


def _clean(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _grid(args) -> GridSpec:
    if args.levels < 2:
        raise ConfigError("grid levels must be >= 2 so stability verdicts are defined")
    if min(args.n0, args.depth0, args.radial0) < 1:
        raise ConfigError("grid sizes must be positive")
    return GridSpec(args.n0, args.depth0, args.radial0, args.levels)


# ---------------------------------------------------------------------------
# subcommands


def _modulus_from_args(args) -> Modulus:
    if args.table:
        return Modulus.from_csv(args.table)
    if args.family == "power":
        return Modulus.power(args.alpha)
    if args.family == "logtype":
        return Modulus.logtype()
    if args.family is None and args.spec:
        return parse_modulus(args.spec)
    raise ConfigError("give --family, --table or --spec")


def cmd_modulus(args) -> int:
    m = _modulus_from_args(args)
    if args.action == "validate":
        violations = validate(m)
        _emit_json({"modulus": m.name, "valid": not violations,
                    "violations": violations}, args.out)
        return EXIT_CONFIG if violations else EXIT_OK
    if args.action == "inverse":
        if args.t is None:
            raise ConfigError("inverse needs --t")
        t = np.array([float(x) for x in args.t.split(",")])
        u = np.atleast_1d(m.inverse_star(t))
        _emit_json({"modulus": m.name, "t": t.tolist(), "inverse_star": u.tolist()}, args.out)
        return EXIT_OK
    violations = validate(m)
    if violations:
        _emit_json({"modulus": m.name, "valid": False, "violations": violations}, args.out)
        return EXIT_CONFIG
    payload = {"modulus": m.name,
               "fast": fast_constant(m).to_json(),
               "slow": slow_constant(m).to_json(),
               "rho_slow": {"rho": args.rho, **rho_slow_eta(m, args.rho).to_json()}}
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_outer(args) -> int:
    h = parse_boundary(args.h, args.omega)
    z = parse_points(args.points)
    ev = OuterEvaluator(h, tol=args.tol)
    vals, u, v, flags = ev.evaluate(z, args.rho)
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(OUTER_HEADER)
        for zk, ok, uk, vk, fk in zip(z, vals, u, v, flags):
            writer.writerow([repr(float(zk.real)), repr(float(zk.imag)),
                             repr(float(ok.real)), repr(float(ok.imag)),
                             repr(float(abs(ok))), repr(float(uk)), repr(float(vk)), fk])
    finally:
        if args.out:
            fh.close()
    return EXIT_ACCURACY if np.any(flags == "divergent") else EXIT_OK


def _noncarleson_trend(args, omega: Modulus, psi: Modulus, grid: GridSpec) -> dict:
    _, mod_spec = split_hE(args.h, args.omega)
    set_modulus = parse_modulus(mod_spec)
    depths = noncarleson_levels(args.h, grid.levels)
    trend = nested_trend(lambda lvl: build_hE(make_noncarleson(depths[lvl]), set_modulus),
                         args.rho, omega, psi, grid)
    return {"context": {"h": args.h, "rho": args.rho, "omega": omega.name,
                        "psi": psi.name, "depths": depths, "grid": grid.to_json()},
            "trend": trend.to_json()}


def cmd_check(args) -> int:
    omega = parse_modulus(args.omega)
    psi = parse_modulus(args.psi) if args.psi else omega
    grid = _grid(args)
    if is_noncarleson(args.h):
        payload = _noncarleson_trend(args, omega, psi, grid)
        _emit_json(payload, args.out)
        return EXIT_OK
    h = parse_boundary(args.h, args.omega)
    bundle = run_checks(h, args.rho, omega, psi, grid, args.delta,
                        OuterEvaluator(h, tol=args.tol), hscj=not args.no_hscj)
    payload = bundle.to_json()
    payload["context"]["grid"] = grid.to_json()
    _emit_json(payload, args.out)
    if args.strict and any(r.divergent for r in bundle.reports):
        return EXIT_ACCURACY
    return EXIT_OK


def _parse_depths(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad depth list {text!r}") from None


def cmd_carleson(args) -> int:
    omega = parse_modulus(args.omega)
    E = parse_set(args.set)
    s = carleson_sum(E, omega)
    h = build_hE(E, omega)
    li = log_integral(h)
    payload = {"set": E.describe(), "omega": omega.name, "arcs": E.size,
               "residual_measure": E.residual_measure,
               "carleson_sum": s.to_json(),
               "log_integral": {"value": li.value, "divergent": li.divergent,
                                "error": li.error}}
    depths = _parse_depths(args.depths)
    if depths:
        kind = E.generator.get("kind")
        if kind == "cantor":
            ratio = float(E.generator["ratio"])
            make = lambda d: make_cantor(ratio, d)  # noqa: E731
        elif kind == "schedule":
            make = make_noncarleson
        else:
            raise ConfigError("--depths needs a cantor or noncarleson set")
        payload["depth_sweep"] = [row.to_json() for row in depth_sweep(make, depths, omega)]
    if args.derivatives:
        rows = derivative_sweep(E, omega, args.divisions)
        first = [r.first for r in rows]
        second = [r.second for r in rows]
        payload["derivative_bounds"] = {
            "divisions": args.divisions,
            "first": {"min": min(first), "max": max(first)},
            "second": {"min": min(second), "max": max(second)},
            "arcs": [r.to_json() for r in rows]}
    if args.save_set:
        E.to_csv(args.save_set)
    _emit_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_grid(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("grid levels")
    g.add_argument("--n0", type=int, default=64, help="base angles at level 0")
    g.add_argument("--depth0", type=int, default=8, help="dyadic pair depth at level 0")
    g.add_argument("--radial0", type=int, default=6, help="disk rings at level 0")
    g.add_argument("--levels", type=int, default=3, help="number of nested levels (>= 2)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="outerlip", formatter_class=fmt,
                                     description="Outer functions and Lipschitz-algebra membership checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None,
                        help="INI file; the section named after the subcommand sets defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modulus", formatter_class=fmt, help="classify, validate or invert a modulus")
    p.add_argument("action", choices=["classify", "validate", "inverse"])
    p.add_argument("--family", choices=["power", "logtype"], default=None)
    p.add_argument("--alpha", type=float, default=0.5, help="exponent of the power family")
    p.add_argument("--table", default=None, help="CSV with header 't,omega'")
    p.add_argument("--spec", default=None, help="modulus spec: power:A, logtype or table:FILE")
    p.add_argument("--rho", type=float, default=2.0, help="rho for the rho-slow infimum")
    p.add_argument("--t", default=None, help="comma-separated arguments for inverse")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("outer", formatter_class=fmt, help="evaluate O_h^rho at points, CSV output")
    p.add_argument("--h", required=True, help="boundary spec: const:C, chord:T,B[,C];..., tab:FILE, hE:SET[,MOD]")
    p.add_argument("--points", required=True, help="grid:interior:N, boundary:N or csv:FILE")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--omega", default="power:0.5", help="modulus for hE specs without one")
    p.add_argument("--tol", type=float, default=1e-11, help="quadrature tolerance")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_outer)

    p = sub.add_parser("check", formatter_class=fmt, help="membership conditions, JSON report bundle")
    p.add_argument("--h", required=True, help="boundary spec (hE:noncarleson runs the nested trend)")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--omega", default="power:0.5", help="target modulus")
    p.add_argument("--psi", default=None, help="regularity modulus of h (default: omega)")
    p.add_argument("--delta", type=float, default=None, help="override of the C3 radius")
    p.add_argument("--tol", type=float, default=1e-11, help="quadrature tolerance")
    p.add_argument("--no-hscj", action="store_true", help="skip the HSCJ check")
    p.add_argument("--strict", action="store_true", help="exit 3 if any condition is not finite")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    _add_grid(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("carleson", formatter_class=fmt, help="Carleson sums and h_E bounds for a set")
    p.add_argument("--set", required=True,
                   help="pm1, points:T;T;..., cantor:RATIO:DEPTH, noncarleson[:DEPTH], arcs:FILE")
    p.add_argument("--omega", default="power:0.5")
    p.add_argument("--depths", default=None, help="comma-separated depths for a depth sweep")
    p.add_argument("--derivatives", action="store_true", help="per-arc derivative bounds of h_E")
    p.add_argument("--divisions", type=int, default=2048, help="finite-difference divisions per arc")
    p.add_argument("--save-set", default=None, help="write the arcs as CSV")
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_carleson)
    return parser


_FLAGS = {"no_hscj", "strict", "derivatives"}


def _apply_config(parser: argparse.ArgumentParser, path: str, command: str) -> None:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not cp.has_section(command):
        return
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub.choices[command]
    known = {a.dest: a for a in sp._actions}
    values = {}
    for key, raw in cp.items(command):
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "func"):
            raise ConfigError(f"unknown key {key!r} in section [{command}]")
        if dest in _FLAGS:
            values[dest] = cp.getboolean(command, key)
            continue
        action = known[dest]
        try:
            values[dest] = action.type(raw) if action.type else raw
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for {key!r}") from None
        if dest in ("h", "points", "set"):
            action.required = False
    sp.set_defaults(**values)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, rest = pre.parse_known_args(argv)
        if known.config:
            command = next((a for a in rest if not a.startswith("-")), None)
            if command:
                _apply_config(parser, known.config, command)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"outerlip: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, DivergenceError, MarginError) as exc:
        print(f"outerlip: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


def main_exit() -> None:
    sys.exit(main())
