import json
import subprocess
import sys
import warnings

import numpy as np
import pytest

from solitonlab.cli import main
from solitonlab.curves import count_intersections
from solitonlab.output import read_csv, read_curve_csv


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


ROTATION = "[metric]\npreset = euclidean\ndomain = [[-1, 1], [-1, 1]]\n[field]\npreset = rotation\n"
RADIAL = "[metric]\ndomain = [[-1, 1], [-1, 1]]\n[field]\nX[1] = x\nX[2] = y\n"


def test_trace_yinyang_preset(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("trace-soliton", "--config", "yinyang", "--out", out) == 0
    svg = (out / "curves.svg").read_text()
    assert svg.count("<polyline") == 2 and "<!-- config:" in svg
    _, a = read_curve_csv(out / "curve-0.csv")
    _, b = read_curve_csv(out / "curve-1.csv")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert count_intersections(a, b).count == 1
    assert "curve-1: length 12" in capsys.readouterr().out


def test_trace_outputs_are_byte_identical(tmp_path):
    for d, jobs in (("a", 1), ("b", 8)):
        assert run("trace-soliton", "--config", "yinyang", "--out", tmp_path / d, "--jobs", jobs) == 0
    for name in ("curve-0.csv", "curve-1.csv", "curves.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_trace_zero_field_straight_line(tmp_path):
    cfg = write(tmp_path, "line.cfg", "[field]\npreset = zero\n[run]\ninitial = [[0, 0]]\ndirection = [[1, 0]]\nlength = 2\n")
    assert run("trace-soliton", "--config", cfg, "--out", tmp_path / "o") == 0
    meta, header, data = read_csv(tmp_path / "o" / "curve-0.csv")
    assert any(line.startswith("# config:") for line in meta)
    assert np.all(data[:, header.index("x2")] == 0.0)
    assert np.allclose(data[-1, 1:3], [2.0, 0.0], atol=1e-12)


def test_trace_json_format(tmp_path):
    assert run("trace-soliton", "--config", "yinyang", "--out", tmp_path, "--format", "json") == 0
    d = json.loads((tmp_path / "curve-0.json").read_text())
    assert d["columns"][0] == "s" and d["config"]["field"]["preset"] == "rotation"


def test_malformed_expression_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", "[field]\nX[1] = sin(x +* 2)\nX[2] = y\n")
    assert run("trace-soliton", "--config", cfg, "--out", tmp_path / "o") == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "'*'" in err


def test_no_traceback_reaches_the_shell(tmp_path):
    cfg = write(tmp_path, "bad.cfg", "[field]\nX[1] = foo(x)\n")
    proc = subprocess.run(
        [sys.executable, "-m", "solitonlab", "gradient-check", "--config", cfg, "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "Traceback" not in proc.stderr and "'foo'" in proc.stderr


def test_gradient_check_rotation(tmp_path):
    cfg = write(tmp_path, "rot.cfg", ROTATION)
    assert run("gradient-check", "--config", cfg, "--out", tmp_path / "o") == 3
    rep = json.loads((tmp_path / "o" / "gradient.json").read_text())
    assert rep["verdict"]["kind"] == "NOT_GRADIENT"
    assert abs(rep["verdict"]["witness"]["max_curl_residual"] - 2.0) < 1e-5
    assert not (tmp_path / "o" / "potential.csv").exists()


def test_gradient_check_radial_writes_potential(tmp_path):
    cfg = write(tmp_path, "rad.cfg", RADIAL)
    assert run("gradient-check", "--config", cfg, "--out", tmp_path / "o") == 0
    _, header, data = read_csv(tmp_path / "o" / "potential.csv")
    assert header == ["x1", "x2", "u"]
    assert np.allclose(data[:, 2], 0.5 * (data[:, 0] ** 2 + data[:, 1] ** 2), atol=1e-8)


def test_gradient_check_zero_field(tmp_path):
    cfg = write(tmp_path, "zero.cfg", "[metric]\ndomain = [[-1, 1], [-1, 1]]\n[field]\npreset = zero\n")
    assert run("gradient-check", "--config", cfg, "--out", tmp_path / "o") == 0
    _, _, data = read_csv(tmp_path / "o" / "potential.csv")
    assert np.all(data[:, 2] == 0.0)


def test_verify_single_suite_and_tightened_tolerance(tmp_path, capsys):
    assert run("verify", "--suite", "sign", "--out", tmp_path / "a") == 0
    assert "pass" in capsys.readouterr().out
    assert run("verify", "--suite", "sign", "--tol-scale", "0.01", "--out", tmp_path / "b") == 1
    rep = json.loads((tmp_path / "b" / "verify.json").read_text())
    assert not rep["all_pass"] and rep["schema"] == "solitonlab.verify/1"


def test_verify_unknown_suite(tmp_path):
    assert run("verify", "--suite", "nope", "--out", tmp_path) == 2


def test_profile_sphere(tmp_path):
    cfg = write(tmp_path, "p.cfg", "[field]\npreset = radial\n[run]\nn = 2\ninitial = [1, 0, 1.5707963267948966]\nlength = 1.4\n")
    assert run("profile", "--config", cfg, "--out", tmp_path / "o") == 0
    rep = json.loads((tmp_path / "o" / "profile.json").read_text())
    assert rep["summary"]["max_soliton_residual"] <= 1e-6
    _, header, data = read_csv(tmp_path / "o" / "profile.csv")
    assert np.allclose(np.hypot(data[:, 1], data[:, 2]), 1.0, atol=1e-8)


def test_profile_axis_hit_is_reported(tmp_path, capsys):
    cfg = write(tmp_path, "p.cfg", "[field]\npreset = radial\n[run]\ninitial = [1, 0, 1.5707963267948966]\nlength = 3\n")
    assert run("profile", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "CoordinateSingularityError" in capsys.readouterr().err


def test_trace_weyl_great_circle(tmp_path):
    cfg = write(
        tmp_path, "w.cfg",
        "[metric]\npreset = sphere-stereographic\n[field]\npreset = zero\n[run]\ninitial = [0, 0]\nvelocity = [0.6, 0.8]\nlength = 1.2\n",
    )
    assert run("trace-weyl", "--config", cfg, "--out", tmp_path / "o") == 0
    _, header, data = read_csv(tmp_path / "o" / "geodesic.csv")
    t, x = data[:, 0], data[:, 1:3]
    expected = np.tan(t)[:, None] * np.array([0.6, 0.8])
    assert np.allclose(x, expected, atol=1e-6)


def test_certify_grim_reaper(tmp_path):
    cfg = write(tmp_path, "c.cfg", "[metric]\npreset = euclidean\n[potential]\nu = -y\ngrad[1] = 0\ngrad[2] = -1\n")
    assert run("certify", "--config", cfg, "--out", tmp_path / "o", "--seed", "3") == 0
    rep = json.loads((tmp_path / "o" / "certify.json").read_text())
    assert rep["inputs"]["seed"] == 3 and len(rep["rows"]) == 5
    for row in rep["rows"]:
        assert row["soliton_residual"] <= 1e-5 and row["minimality_residual"] <= 1e-5


def test_surface_gap_refusal_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "g.cfg", RADIAL)
    assert run("surface-gap", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "RefusalError" in capsys.readouterr().err


def test_render_from_csv(tmp_path):
    run("trace-soliton", "--config", "yinyang", "--out", tmp_path)
    assert run("render", tmp_path / "curve-0.csv", tmp_path / "curve-1.csv", "--out", tmp_path / "r") == 0
    assert (tmp_path / "r" / "render.svg").read_text().count("<polyline") == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["trace-soliton", "--config", "yinyang", "--tol", "0"],
        ["trace-soliton"],
        ["trace-soliton", "--config", "missing-file.cfg"],
        ["nonsense"],
        ["verify", "--jobs", "0"],
    ],
)
def test_usage_errors_exit_2(tmp_path, argv):
    assert run(*argv, *(["--out", tmp_path] if argv[0] != "nonsense" else [])) == 2
