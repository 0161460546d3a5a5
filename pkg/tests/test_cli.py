from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from outerlip.cli import OUTER_HEADER, main
from outerlip.cli.specs import (noncarleson_levels, parse_boundary, parse_modulus,
                                parse_points, parse_set)
from outerlip.errors import ConfigError

GOLDEN = Path(__file__).parent / "golden"
SMALL_GRID = ["--n0", "16", "--depth0", "4", "--radial0", "3", "--levels", "2"]


def schema(obj):
    """Key structure and value types of a JSON document."""
    if isinstance(obj, dict):
        return {k: schema(v) for k, v in sorted(obj.items())}
    if isinstance(obj, list):
        out = []
        for item in obj:
            sub = schema(item)
            if sub not in out:
                out.append(sub)
        return out
    if isinstance(obj, bool):
        return "bool"
    if isinstance(obj, (int, float)):
        return "number"
    if obj is None:
        return "null"
    return "string"


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, argv):
    code, out, _ = run(capsys, argv)
    return code, json.loads(out)


def check_golden(name, doc):
    expected = json.loads((GOLDEN / name).read_text())
    assert schema(doc) == expected


# -- spec parsing ----------------------------------------------------------------


def test_parse_modulus_specs():
    assert parse_modulus("power:0.25").name == "power:0.25"
    assert parse_modulus("logtype").name == "logtype"
    for bad in ("power", "power:x", "cubic:2", "logtype:1"):
        with pytest.raises(ConfigError):
            parse_modulus(bad)


def test_parse_boundary_specs():
    h = parse_boundary("chord:0,1;3.14159,0.5,2")
    assert h.scale == 2.0 and len(h.factors) == 2
    assert parse_boundary("const:3")(1.0) == 3.0
    assert parse_boundary("hE:pm1").omega.name == "power:0.5"
    assert parse_boundary("hE:pm1", "logtype").omega.name == "logtype"
    assert parse_boundary("hE:cantor:0.3:4,power:0.25").omega.name == "power:0.25"
    for bad in ("chord:", "chord:0", "spline:1", "hE:nothing"):
        with pytest.raises(ConfigError):
            parse_boundary(bad)


def test_parse_set_specs():
    assert parse_set("pm1").size == 2
    assert parse_set("points:0;1;2").size == 3
    assert parse_set("noncarleson:4").generator["depth"] == 4
    with pytest.raises(ConfigError):
        parse_set("cantor:0.3")


def test_parse_points():
    z = parse_points("grid:interior:8")
    assert z.size == 64 and np.max(np.abs(z)) < 1.0
    b = parse_points("boundary:16")
    np.testing.assert_allclose(np.abs(b), 1.0)
    with pytest.raises(ConfigError):
        parse_points("grid:8")


def test_parse_points_csv(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("re_z,im_z\n0.1,0.2\n0,0.5\n")
    np.testing.assert_allclose(parse_points(f"csv:{p}"), [0.1 + 0.2j, 0.5j])


def test_noncarleson_levels():
    assert noncarleson_levels("hE:noncarleson", 3) == [3, 5, 7]
    assert noncarleson_levels("hE:noncarleson:4,power:0.5", 2) == [4, 6]


# -- modulus ------------------------------------------------------------------------


def test_modulus_classify_power(capsys):
    code, doc = run_json(capsys, ["modulus", "--family", "power", "--alpha", "0.5", "classify"])
    assert code == 0
    assert abs(doc["fast"]["constant"] - 2.0) < 1e-4
    assert abs(doc["slow"]["constant"] - 2.0) < 1e-4
    assert doc["rho_slow"]["constant"] == 1.0
    check_golden("modulus_classify.json", doc)


def test_modulus_classify_logtype_divergent(capsys):
    code, doc = run_json(capsys, ["modulus", "--family", "logtype", "classify"])
    assert code == 0
    assert doc["fast"]["divergent"] is True and doc["fast"]["constant"] is None


def test_modulus_validate_bad_table(capsys, tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,omega\n0,0\n0.5,0.9\n1,0.8\n2,2\n")
    code, doc = run_json(capsys, ["modulus", "--table", str(p), "validate"])
    assert code == 2
    assert doc["valid"] is False and doc["violations"]


def test_modulus_inverse(capsys):
    code, doc = run_json(capsys, ["modulus", "--spec", "power:0.5", "inverse", "--t", "0.5"])
    assert code == 0 and doc["inverse_star"] == [0.25]


def test_modulus_errors_exit_2(capsys):
    code, _, err = run(capsys, ["modulus", "classify"])
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, ["modulus", "--family", "power", "--alpha", "2", "classify"])
    assert code == 2


# -- outer ----------------------------------------------------------------------------


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_outer_chord_grid(capsys, tmp_path):
    out = tmp_path / "o.csv"
    code, _, _ = run(capsys, ["outer", "--h", "chord:0,1", "--points", "grid:interior:64",
                              "--out", str(out)])
    assert code == 0
    with out.open(newline="") as fh:
        reader = csv.reader(fh)
        assert next(reader) == OUTER_HEADER
        rows = list(reader)
    assert len(rows) == 4096
    z = np.array([complex(float(r[0]), float(r[1])) for r in rows])
    a = np.array([float(r[4]) for r in rows])
    assert np.max(np.abs(a - np.abs(1 - z))) < 1e-6


def test_outer_constant_boundary(capsys):
    code, text, _ = run(capsys, ["outer", "--h", "const:1", "--points", "boundary:128"])
    rows = read_rows(text)
    assert code == 0 and len(rows) == 128
    assert all(float(r["re_O"]) == 1.0 and float(r["im_O"]) == 0.0 for r in rows)


def test_outer_hE_flags(capsys, tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("re_z,im_z\n1,0\n" + f"{math.cos(1e-11)!r},{math.sin(1e-11)!r}\n0,1\n")
    code, text, _ = run(capsys, ["outer", "--h", "hE:pm1,power:0.5", "--points", f"csv:{p}"])
    flags = [r["err_flag"] for r in read_rows(text)]
    assert code == 0 and flags == ["zero", "margin", "ok"]
    code, text, _ = run(capsys, ["outer", "--h", "hE:pm1,power:0.5", "--points", "boundary:256"])
    flags = [r["err_flag"] for r in read_rows(text)]
    assert flags.count("zero") == 2 and flags.count("ok") == 254


def test_outer_is_deterministic(capsys):
    argv = ["outer", "--h", "chord:0,0.5", "--points", "grid:interior:8"]
    assert run(capsys, argv)[1] == run(capsys, argv)[1]


def test_outer_bad_spec_exit_2(capsys):
    assert run(capsys, ["outer", "--h", "wave:1", "--points", "boundary:4"])[0] == 2
    assert run(capsys, ["outer", "--h", "const:1", "--points", "csv:/nonexistent.csv"])[0] == 2


# -- check -------------------------------------------------------------------------------


def test_check_chord_all_finite(capsys):
    code, doc = run_json(capsys, ["check", "--h", "chord:0,1", "--rho", "1", "--omega",
                                  "power:1", "--strict"] + SMALL_GRID)
    assert code == 0
    assert all(not r["divergent"] for r in doc["reports"])
    assert doc["hscj"]["finite"] is True
    check_golden("check_bundle.json", doc)


def test_check_noncarleson_trend(capsys):
    code, doc = run_json(capsys, ["check", "--h", "hE:noncarleson", "--rho", "2",
                                  "--omega", "power:0.5", "--no-hscj"] + SMALL_GRID)
    assert code == 0
    assert doc["context"]["depths"] == [3, 5]
    assert len(doc["trend"]["C2"]) == 2 and len(doc["trend"]["C4_growth"]) == 1
    check_golden("check_trend.json", doc)


def test_check_requires_two_levels(capsys):
    code, _, err = run(capsys, ["check", "--h", "const:1", "--levels", "1"])
    assert code == 2 and "levels" in err


def test_check_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[check]\nh = const:2\nrho = 2\nomega = power:0.5\nn0 = 8\ndepth0 = 3\n"
                   "radial0 = 2\nlevels = 2\nno-hscj = yes\n")
    code, doc = run_json(capsys, ["--config", str(cfg), "check"])
    assert code == 0
    assert doc["context"]["rho"] == 2.0 and doc["hscj"] is None
    assert doc["context"]["grid"]["n0"] == 8
    code, doc = run_json(capsys, ["--config", str(cfg), "check", "--rho", "1"])
    assert doc["context"]["rho"] == 1.0


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[check]\ncolour = blue\n")
    assert run(capsys, ["--config", str(cfg), "check", "--h", "const:1"])[0] == 2


# -- carleson -------------------------------------------------------------------------------


def test_carleson_cantor(capsys, tmp_path):
    saved = tmp_path / "arcs.csv"
    code, doc = run_json(capsys, ["carleson", "--set", "cantor:0.3333333333333333:4",
                                  "--depths", "2,3", "--derivatives", "--divisions", "256",
                                  "--save-set", str(saved)])
    assert code == 0
    assert doc["arcs"] == 31 and [r["depth"] for r in doc["depth_sweep"]] == [2, 3]
    assert abs(doc["derivative_bounds"]["first"]["max"] - 1.0) < 1e-3
    check_golden("carleson.json", doc)
    code, doc2 = run_json(capsys, ["carleson", "--set", f"arcs:{saved}"])
    assert doc2["arcs"] == 31
    assert abs(doc2["carleson_sum"]["value"] - doc["carleson_sum"]["value"]) < 1e-12


def test_carleson_pm1_sum(capsys):
    code, doc = run_json(capsys, ["carleson", "--set", "pm1"])
    assert abs(doc["carleson_sum"]["value"] - 2.0 * math.log(2.0)) < 1e-14


def test_carleson_depths_need_generator(capsys):
    assert run(capsys, ["carleson", "--set", "pm1", "--depths", "2"])[0] == 2
