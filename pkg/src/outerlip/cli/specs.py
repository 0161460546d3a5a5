"""Parsing of the compact command-line specs for moduli, boundary data and point sets.

Modulus:   power:A | logtype | table:FILE.csv
Boundary:  const:C | chord:T,B[,C];T,B... | tab:FILE.csv | hE:SET[,MODULUS]
Set:       pm1 | points:T;T;... | cantor:RATIO:DEPTH | noncarleson[:DEPTH] | arcs:FILE.csv
Points:    grid:interior:N | boundary:N | csv:FILE.csv
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..boundary import TWO_PI, BoundaryFunction, ChordProduct, Tabulated
from ..carleson import (CarlesonSet, build_hE, make_cantor, make_noncarleson, pm1)
from ..errors import ConfigError
from ..modulus import Modulus

NONCARLESON_DEPTH = 8


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad number {text!r} in {what}") from None


def parse_modulus(spec: str) -> Modulus:
    kind, _, rest = spec.strip().partition(":")
    if kind == "power":
        if not rest:
            raise ConfigError("power modulus needs an exponent, e.g. power:0.5")
        return Modulus.power(_float(rest, spec))
    if kind == "logtype" and not rest:
        return Modulus.logtype()
    if kind == "table" and rest:
        return Modulus.from_csv(rest)
    raise ConfigError(f"unknown modulus spec {spec!r}")


def parse_set(spec: str) -> CarlesonSet:
    kind, _, rest = spec.strip().partition(":")
    if kind == "pm1" and not rest:
        return pm1()
    if kind == "points" and rest:
        return CarlesonSet.from_points([_float(x, spec) for x in rest.split(";")])
    if kind == "cantor":
        parts = rest.split(":")
        if len(parts) != 2:
            raise ConfigError("cantor set spec is cantor:RATIO:DEPTH")
        return make_cantor(_float(parts[0], spec), int(_float(parts[1], spec)))
    if kind == "noncarleson":
        depth = int(_float(rest, spec)) if rest else NONCARLESON_DEPTH
        return make_noncarleson(depth)
    if kind == "arcs" and rest:
        return CarlesonSet.from_csv(rest)
    raise ConfigError(f"unknown set spec {spec!r}")


def split_hE(spec: str, default_modulus: str | None = None) -> tuple[str, str]:
    """'hE:SET[,MODULUS]' -> (SET, MODULUS)."""
    body = spec.strip()[3:]
    set_spec, sep, mod = body.partition(",")
    if not sep:
        mod = default_modulus or "power:0.5"
    return set_spec, mod


def parse_boundary(spec: str, default_modulus: str | None = None) -> BoundaryFunction:
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    if kind == "const":
        return ChordProduct.constant(_float(rest, spec))
    if kind == "chord":
        factors, scale = [], 1.0
        for item in filter(None, rest.split(";")):
            vals = [_float(x, spec) for x in item.split(",")]
            if len(vals) not in (2, 3):
                raise ConfigError("chord factor is THETA,BETA[,SCALE]")
            factors.append((vals[0], vals[1]))
            if len(vals) == 3:
                scale *= vals[2]
        if not factors:
            raise ConfigError("chord spec needs at least one factor")
        return ChordProduct(factors, scale)
    if kind == "tab" and rest:
        return Tabulated.from_csv(rest)
    if kind == "hE":
        set_spec, mod = split_hE(spec, default_modulus)
        return build_hE(parse_set(set_spec), parse_modulus(mod))
    raise ConfigError(f"unknown boundary spec {spec!r}")


def parse_points(spec: str) -> np.ndarray:
    parts = spec.strip().split(":")
    if parts[0] == "grid" and len(parts) == 3 and parts[1] == "interior":
        n = int(_float(parts[2], spec))
        r = (np.arange(n) + 0.5) / n
        th = TWO_PI * np.arange(n) / n
        return (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    if parts[0] == "boundary" and len(parts) == 2:
        n = int(_float(parts[1], spec))
        return np.exp(1j * TWO_PI * np.arange(n) / n)
    if parts[0] == "csv" and len(parts) >= 2:
        path = Path(":".join(parts[1:]))
        try:
            with path.open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["re_z", "im_z"]:
            raise ConfigError(f"{path}: expected header 're_z,im_z'")
        pts = [complex(_float(a, spec), _float(b, spec)) for a, b in rows[1:] if (a, b)]
        return np.array(pts, dtype=complex)
    raise ConfigError(f"unknown points spec {spec!r}")


def is_noncarleson(spec: str) -> bool:
    return spec.strip().startswith("hE:noncarleson")


def noncarleson_levels(spec: str, levels: int) -> list[int]:
    """Nested depths for 'hE:noncarleson[:D]': D, D + 2, D + 4, ... (D defaults to 3)."""
    set_spec, _ = split_hE(spec)
    _, _, rest = set_spec.partition(":")
    start = int(_float(rest, spec)) if rest else 3
    return [start + 2 * k for k in range(levels)]
