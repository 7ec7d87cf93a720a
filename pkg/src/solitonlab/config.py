"""Run configuration files.

A config is a line-oriented text file::

    # comment
    [metric]
    dim = 2
    domain = [[-1, 1], [-1, 1]]
    g[1][1] = exp(2*y)
    g[2][2] = exp(2*y)

    [field]
    preset = rotation
    omega = 1

Values are parsed as JSON when possible (numbers, lists, booleans) and kept
as text otherwise.  Indices in ``g[i][j]``, ``dg[k][i][j]``, ``X[i]``,
``grad[i]`` and ``f[i]`` start at 1.  Every key remembers its line number so
errors can point at it.

Extra named presets can be provided by files listed in ``SOLITONLAB_PRESETS``
(``os.pathsep`` separated).  Such files use sections ``[metric:NAME]``,
``[field:NAME]``, ``[potential:NAME]`` or ``[patch:NAME]`` with the same keys.
"""

import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import chart, fields, hypersurfaces
from .errors import ConfigError, ExpressionError
from .expr import compile_expression

_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_.:-]+)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_\[\]]*)\s*=\s*(.*)$")
_INDEXED = re.compile(r"^([A-Za-z_]+)((?:\[\d+\])+)$")

SECTIONS = ("metric", "field", "potential", "patch", "run")


@dataclass
class Entry:
    value: object
    line: int
    raw: str


@dataclass
class Config:
    sections: dict = field(default_factory=dict)
    source: str = "<string>"
    text: str = ""

    def section(self, name):
        return self.sections.get(name, {})

    def get(self, section, key, default=None):
        e = self.section(section).get(key)
        return default if e is None else e.value

    def line(self, section, key):
        e = self.section(section).get(key)
        return None if e is None else e.line

    def set(self, section, key, value):
        self.sections.setdefault(section, {})[key] = Entry(value, None, str(value))

    def resolved(self):
        """Plain-dict view of every section, used as output metadata."""
        return {
            name: {k: e.value for k, e in sorted(sec.items())}
            for name, sec in sorted(self.sections.items())
        }


def _value(raw):
    try:
        return json.loads(raw)
    except ValueError:
        low = raw.lower()
        if low in ("true", "false"):
            return low == "true"
        return raw


def parse_config(text, source="<string>"):
    cfg = Config(source=source, text=text)
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _SECTION.match(stripped)
        if m:
            current = m.group(1)
            base = current.split(":", 1)[0]
            if base not in SECTIONS:
                raise ConfigError(f"unknown section [{current}]", line=lineno)
            cfg.sections.setdefault(current, {})
            continue
        m = _ENTRY.match(stripped)
        if not m:
            raise ConfigError(f"cannot parse {stripped!r}; expected 'key = value'", line=lineno)
        if current is None:
            raise ConfigError("entry before any [section]", line=lineno)
        key, raw = m.group(1), m.group(2).strip()
        if raw == "":
            raise ConfigError(f"missing value for {key!r}", line=lineno)
        if key in cfg.sections[current]:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        cfg.sections[current][key] = Entry(_value(raw), lineno, raw)
    return cfg


def load_config(path):
    """Read a config file; bare names resolve to the configs shipped with the package."""
    if not os.path.exists(path):
        shipped = resources.files("solitonlab") / "presets" / f"{path}.cfg"
        if shipped.is_file():
            return parse_config(shipped.read_text(), source=f"preset:{path}")
        raise ConfigError(f"config file {path!r} not found")
    with open(path) as fh:
        return parse_config(fh.read(), source=path)


def _extra_presets():
    out = {}
    for path in filter(None, os.environ.get("SOLITONLAB_PRESETS", "").split(os.pathsep)):
        cfg = load_config(path)
        for name, sec in cfg.sections.items():
            if ":" in name:
                out[name] = sec
    return out


# -- builders ------------------------------------------------------------------


def _indexed(section, name):
    """Collect ``name[i][j]...`` entries as ``{(i, j, ...): Entry}`` with 0-based indices."""
    out = {}
    for key, e in section.items():
        m = _INDEXED.match(key)
        if m and m.group(1) == name:
            idx = tuple(int(v) - 1 for v in re.findall(r"\d+", m.group(2)))
            out[idx] = e
    return out


def _expr(entry, dim, prefix="x"):
    try:
        return compile_expression(str(entry.value), dim, prefix)
    except ExpressionError as exc:
        raise ExpressionError(
            str(exc).split(" (token")[0], token=exc.token, position=exc.position, line=entry.line
        ) from None


def _lookup(cfg, kind):
    sec = cfg.section(kind)
    name = sec.get("preset")
    if name is not None:
        extra = _extra_presets().get(f"{kind}:{name.value}")
        if extra is not None:
            merged = dict(extra)
            merged.update({k: v for k, v in sec.items() if k != "preset"})
            return merged
    return sec


def _domain(sec, dim):
    e = sec.get("domain")
    if e is None:
        return None
    dom = np.asarray(e.value, dtype=float)
    if dom.shape != (dim, 2):
        raise ConfigError(f"domain must be a list of {dim} [lo, hi] pairs", line=e.line)
    return dom


def _int(sec, key, default):
    e = sec.get(key)
    if e is None:
        return default
    if not isinstance(e.value, (int, float)) or int(e.value) != e.value or e.value < 1:
        raise ConfigError(f"{key} must be a positive integer", line=e.line)
    return int(e.value)


def build_metric(cfg):
    sec = _lookup(cfg, "metric")
    dim = _int(sec, "dim", 2)
    domain = _domain(sec, dim)
    preset = sec.get("preset")
    if preset is not None:
        try:
            return chart.metric_preset(str(preset.value), dim=dim, domain=domain)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), line=preset.line) from None
    entries = _indexed(sec, "g")
    if not entries:
        return chart.euclidean(dim, domain)
    if domain is None:
        raise ConfigError("expression metrics need a domain")
    comps = {}
    for (i, j), e in entries.items():
        if not (0 <= i < dim and 0 <= j < dim):
            raise ConfigError(f"index out of range for dim {dim}", line=e.line)
        comps[(i, j)] = _expr(e, dim)
    for i in range(dim):
        if (i, i) not in comps:
            raise ConfigError(f"missing diagonal entry g[{i + 1}][{i + 1}]")
    table = [[comps.get((i, j)) or comps.get((j, i)) for j in range(dim)] for i in range(dim)]

    def g(x):
        return np.array([[0.0 if c is None else float(c(x)) for c in row] for row in table])

    dg = None
    d_entries = _indexed(sec, "dg")
    if d_entries:
        dexpr = {idx: _expr(e, dim) for idx, e in d_entries.items()}

        def dg(x):
            out = np.zeros((dim, dim, dim))
            for (k, i, j), c in dexpr.items():
                out[k, i, j] = out[k, j, i] = float(c(x))
            return out

    name = sec["name"].value if "name" in sec else "config-metric"
    return chart.MetricChart(dim, domain, g=g, dg=dg, name=str(name))


def build_field(cfg, dim):
    sec = _lookup(cfg, "field")
    preset = sec.get("preset")
    if preset is not None:
        params = {k: e.value for k, e in sec.items() if k not in ("preset", "name")}
        try:
            return fields.field_preset(str(preset.value), dim=dim, **params)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), line=preset.line) from None
        except TypeError as exc:
            raise ConfigError(f"bad preset parameters: {exc}", line=preset.line) from None
    entries = _indexed(sec, "X")
    if not entries:
        return fields.zero(dim)
    comps = [None] * dim
    for (i,), e in entries.items():
        if not 0 <= i < dim:
            raise ConfigError(f"index out of range for dim {dim}", line=e.line)
        comps[i] = _expr(e, dim)

    def X(p):
        return np.array([0.0 if c is None else float(c(p)) for c in comps])

    name = sec["name"].value if "name" in sec else "config-field"
    return fields.VectorFieldSpec(dim, X, name=str(name))


def build_potential(cfg, dim):
    sec = _lookup(cfg, "potential")
    if "u" not in sec:
        raise ConfigError("[potential] needs u = <expr>")
    u = _expr(sec["u"], dim)
    grads = _indexed(sec, "grad")
    grad_u = None
    if grads:
        gexpr = [None] * dim
        for (i,), e in grads.items():
            gexpr[i] = _expr(e, dim)

        def grad_u(p):
            return np.array([0.0 if c is None else float(c(p)) for c in gexpr])

    return chart.ConformalFactor(lambda p: float(u(p)), grad_u, name=str(sec["u"].value))


def build_patch(cfg, dim):
    sec = _lookup(cfg, "patch")
    preset = sec.get("preset")
    if preset is not None:
        params = {k: e.value for k, e in sec.items() if k not in ("preset", "name")}
        if preset.value == "rotational-from-profile-csv":
            from .output import read_profile_csv

            r, z = read_profile_csv(params["path"])
            return hypersurfaces.profile_patch_from_samples(r, z, n=dim - 1)
        try:
            factory = hypersurfaces.PATCH_PRESETS[str(preset.value)]
        except KeyError:
            raise ConfigError(
                f"unknown patch preset {preset.value!r}; choose from "
                f"{sorted(hypersurfaces.PATCH_PRESETS) + ['rotational-from-profile-csv']}",
                line=preset.line,
            ) from None
        return factory(dim=dim, **params)
    entries = _indexed(sec, "f")
    if not entries:
        raise ConfigError("[patch] needs a preset or f[i] = <expr of t1..tn>")
    n = dim - 1
    comps = [None] * dim
    for (i,), e in entries.items():
        comps[i] = _expr(e, n, prefix="t")
    if any(c is None for c in comps):
        raise ConfigError(f"[patch] needs f[1]..f[{dim}]")
    box = sec.get("box")
    if box is None:
        raise ConfigError("[patch] with f[i] needs box = [[lo, hi], ...]")
    return hypersurfaces.ImmersedPatch(
        n, lambda t: np.array([float(c(t)) for c in comps]), box.value, name="config-patch"
    )
