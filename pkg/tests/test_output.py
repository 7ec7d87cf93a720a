import json

import numpy as np

from solitonlab import chart, fields
from solitonlab.curves import CurveState, integrate_soliton
from solitonlab.output import dumps, read_csv, read_curve_csv, render_svg, write_csv, write_curve_csv


def test_csv_round_trip_is_exact(tmp_path):
    rows = [[0.1, 1 / 3, -2e-300], [np.pi, np.e, 1e17]]
    path = tmp_path / "a.csv"
    write_csv(path, ["a", "b", "c"], rows, {"z": 1, "a": {"k": [1, 2]}})
    meta, header, data = read_csv(path)
    assert header == ["a", "b", "c"]
    assert np.array_equal(data, np.array(rows))
    assert meta == ['# a: {"k": [1, 2]}', "# z: 1"]


def test_curve_csv(tmp_path):
    m = chart.euclidean(2)
    X = fields.rotation(2)
    c = integrate_soliton(m, X, CurveState.from_direction(m, [1, 0], [0, 1]), 2.0, max_step=0.01)
    path = tmp_path / "c.csv"
    write_curve_csv(path, m, X, c, {"config": {"run": {"length": 2}}})
    text = path.read_text()
    assert '# config: {"run": {"length": 2}}' in text
    assert "s,x1,x2,T1,T2,nu1,nu2,kappa_g,residual" in text
    s, pts = read_curve_csv(path)
    assert np.array_equal(pts, c.x)
    _, header, data = read_csv(path)
    assert np.max(data[:, header.index("residual")]) < 1e-6


def test_json_sorted_and_plain():
    out = dumps({"b": np.float64(1.5), "a": np.arange(2), "c": np.bool_(True)})
    assert out.index('"a"') < out.index('"b"')
    assert json.loads(out) == {"a": [0, 1], "b": 1.5, "c": True}


def test_svg_has_polylines_axes_caption_and_config():
    t = np.linspace(-1, 1, 5)
    svg = render_svg([np.column_stack([t, t**2]), np.column_stack([t, -t])], "two <curves>", {"k": "a--b"})
    assert svg.count("<polyline") == 2
    assert svg.count("<line") == 2
    assert "two &lt;curves&gt;" in svg
    assert "<!-- config:" in svg and "a--b" not in svg
    assert svg == render_svg([np.column_stack([t, t**2]), np.column_stack([t, -t])], "two <curves>", {"k": "a--b"})
