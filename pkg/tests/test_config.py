import numpy as np
import pytest

from solitonlab.config import build_field, build_metric, build_patch, build_potential, load_config, parse_config
from solitonlab.errors import ConfigError, ExpressionError

EXPR_METRIC = """
# conformally flat metric
[metric]
dim = 2
domain = [[-1, 1], [0.5, 2]]
g[1][1] = 1 / y^2
g[2][2] = 1 / y^2

[field]
X[1] = -y
X[2] = x
"""


def test_expression_metric_and_field():
    cfg = parse_config(EXPR_METRIC)
    m = build_metric(cfg)
    assert np.allclose(m.at([0.0, 2.0]), 0.25 * np.eye(2))
    X = build_field(cfg, 2)
    assert np.allclose(X([1.0, 0.5]), [-0.5, 1.0])


def test_presets_and_parameters():
    cfg = parse_config("[metric]\npreset = sphere-stereographic\ndim = 3\n[field]\npreset = rotation\nomega = 2\n")
    assert build_metric(cfg).dim == 3
    assert np.allclose(build_field(cfg, 3)([1.0, 0.0, 0.0]), [0.0, 2.0, 0.0])


def test_potential_and_patch():
    cfg = parse_config("[potential]\nu = x^2 + y\ngrad[1] = 2*x\ngrad[2] = 1\n[patch]\npreset = sphere\nradius = 2\n")
    u = build_potential(cfg, 2)
    assert u([3.0, 1.0]) == 10.0
    assert np.allclose(u.gradient([3.0, 1.0]), [6.0, 1.0])
    patch = build_patch(cfg, 3)
    assert np.linalg.norm(patch.f([1.0, 0.3])) == pytest.approx(2.0)


def test_expression_patch():
    cfg = parse_config("[patch]\nf[1] = t1\nf[2] = t2\nf[3] = t1*t2\nbox = [[-1, 1], [-1, 1]]\n")
    assert np.allclose(build_patch(cfg, 3).f([2.0, 3.0]), [2.0, 3.0, 6.0])


def test_resolved_is_sorted_plain_dict():
    cfg = parse_config("[run]\nb = 2\na = [1, 2]\nflag = true\nname = hello\n")
    assert cfg.resolved() == {"run": {"a": [1, 2], "b": 2, "flag": True, "name": "hello"}}


@pytest.mark.parametrize(
    "text, line",
    [
        ("[metric]\ndim = 2\n[bogus]\n", 3),
        ("[metric]\n\nthis is not an entry\n", 3),
        ("dim = 2\n", 1),
        ("[run]\na = 1\na = 2\n", 3),
        ("[run]\na =\n", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_bad_expression_reports_token_and_line():
    cfg = parse_config("[field]\nX[1] = x\nX[2] = cos(x ** 2)\n")
    with pytest.raises(ExpressionError) as info:
        build_field(cfg, 2)
    assert info.value.line == 3
    assert info.value.token == "*"


def test_unknown_preset_line():
    cfg = parse_config("[metric]\ndim = 2\npreset = torus\n")
    with pytest.raises(ConfigError) as info:
        build_metric(cfg)
    assert info.value.line == 3


def test_domain_shape_checked():
    with pytest.raises(ConfigError):
        build_metric(parse_config("[metric]\ndim = 3\ndomain = [[0, 1]]\n"))


def test_shipped_preset_by_name():
    cfg = load_config("yinyang")
    assert cfg.get("field", "preset") == "rotation"
    with pytest.raises(ConfigError):
        load_config("no-such-config")


def test_extra_presets_from_environment(tmp_path, monkeypatch):
    extra = tmp_path / "extra.cfg"
    extra.write_text("[field:swirl]\nX[1] = -2*y\nX[2] = 2*x\n")
    monkeypatch.setenv("SOLITONLAB_PRESETS", str(extra))
    cfg = parse_config("[field]\npreset = swirl\n")
    assert np.allclose(build_field(cfg, 2)([1.0, 0.0]), [0.0, 2.0])
