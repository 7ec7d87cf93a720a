"""CSV, JSON and SVG writers.

CSV: '.' decimal point, comma separated, '#'-prefixed metadata lines, floats
written with 17 significant digits (round-trip exact).  JSON: sorted keys,
2-space indent.  SVG: coordinates with 9 significant digits.
"""

import csv
import io
import json

import numpy as np

from .curves import measured_soliton_residual


def _fmt(v):
    return format(float(v), ".17g")


def _meta_lines(meta):
    return [f"# {key}: {json.dumps(meta[key], sort_keys=True)}" for key in sorted(meta)]


def write_csv(path, header, rows, meta):
    buf = io.StringIO()
    for line in _meta_lines(meta):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating, int, np.integer)) else v for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    """Return ``(meta_lines, header, float_rows)``."""
    meta, rows = [], []
    header = None
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                meta.append(line.rstrip("\n"))
            elif header is None:
                header = next(csv.reader([line]))
            elif line.strip():
                rows.append([float(v) for v in next(csv.reader([line]))])
    return meta, header, np.array(rows)


def curve_rows(metric, X, curve):
    """Rows ``s, x.., T.., nu.., kappa_g, residual`` for a soliton curve.

    ``residual`` is the soliton defect with the curvature measured from the
    sampled positions (independent of the integrator's ``kappa_g``).
    """
    d = curve.x.shape[1]
    header = (
        ["s"] + [f"x{i + 1}" for i in range(d)] + [f"T{i + 1}" for i in range(d)]
        + [f"nu{i + 1}" for i in range(d)] + ["kappa_g", "residual"]
    )
    if len(curve.s) >= 5:
        res = measured_soliton_residual(metric, X, curve)
    else:
        res = np.full(len(curve.s), np.nan)
    rows = [
        [s, *x, *T, *nu, k, r]
        for s, x, T, nu, k, r in zip(curve.s, curve.x, curve.T, curve.nu, curve.kappa, res)
    ]
    return header, rows


def write_curve_csv(path, metric, X, curve, meta):
    header, rows = curve_rows(metric, X, curve)
    meta = dict(meta, metric=curve.metric_name, field=curve.field_name, tol=curve.tol,
                partial=curve.partial)
    write_csv(path, header, rows, meta)


def read_curve_csv(path):
    """Parameter and points from a curve CSV (soliton or geodesic)."""
    _, header, data = read_csv(path)
    param = header[0]
    xcols = [i for i, h in enumerate(header) if h.startswith("x") and h[1:].isdigit()]
    return data[:, header.index(param)], data[:, xcols]


def read_profile_csv(path):
    _, header, data = read_csv(path)
    return data[:, header.index("r")], data[:, header.index("z")]


def write_json(path, payload):
    with open(path, "w") as fh:
        fh.write(dumps(payload))


def dumps(payload):
    return json.dumps(_plain(payload), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- SVG ----------------------------------------------------------------------

_COLOURS = ["#1f4e79", "#b22222", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"]


def _g9(v):
    return format(float(v), ".9g")


def render_svg(polylines, caption="", meta=None, size=480, margin=40):
    """Static SVG of 2-D polylines with axes through the origin and a caption."""
    pts = np.concatenate([np.asarray(p, dtype=float) for p in polylines])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    centre = 0.5 * (lo + hi)
    lo, hi = centre - 0.55 * span, centre + 0.55 * span
    scale = (size - 2 * margin) / (hi[0] - lo[0])

    def sx(x):
        return margin + (x - lo[0]) * scale

    def sy(y):
        return size - margin - (y - lo[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 30}" '
        f'viewBox="0 0 {size} {size + 30}">'
    ]
    if meta:
        body = json.dumps(_plain(meta), sort_keys=True).replace("--", "- -")
        out.append(f"<!-- config: {body} -->")
    out.append(f'<rect x="0" y="0" width="{size}" height="{size + 30}" fill="white"/>')
    if lo[0] < 0 < hi[0]:
        out.append(
            f'<line x1="{_g9(sx(0))}" y1="{_g9(margin)}" x2="{_g9(sx(0))}" '
            f'y2="{_g9(size - margin)}" stroke="#999" stroke-width="0.5"/>'
        )
    if lo[1] < 0 < hi[1]:
        out.append(
            f'<line x1="{_g9(margin)}" y1="{_g9(sy(0))}" x2="{_g9(size - margin)}" '
            f'y2="{_g9(sy(0))}" stroke="#999" stroke-width="0.5"/>'
        )
    for i, p in enumerate(polylines):
        p = np.asarray(p, dtype=float)
        coords = " ".join(f"{_g9(sx(x))},{_g9(sy(y))}" for x, y in p[:, :2])
        out.append(
            f'<polyline fill="none" stroke="{_COLOURS[i % len(_COLOURS)]}" '
            f'stroke-width="1.5" points="{coords}"/>'
        )
    if caption:
        text = caption.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(
            f'<text x="{size / 2:g}" y="{size + 15}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{text}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, polylines, caption="", meta=None):
    with open(path, "w") as fh:
        fh.write(render_svg(polylines, caption, meta))
