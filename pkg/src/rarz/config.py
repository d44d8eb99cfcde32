"""Experiment configuration files.

Experiments are described in TOML::

    command = "sim1d"            # fd | riemann | sim1d | sim2d | micro | compare
    t_end = 0.02

    [params]                     # rho_star, u_star, gamma, v_star
    u_star = 25.0

    [scheme]                     # name, cfl, resolution, boundary, models
    name = "hybrid"

    [initial]                    # 1D: rho_left, u_left, rho_right, u_right, x_split, x_min, x_max
    rho_left = 0.8               # 2D: q1 .. q4 = [rho, u, v], x_split, y_split
    u_left = 15.0
    rho_right = 0.7
    u_right = 15.0

``[fd]`` (models, w, gamma, samples, margin) and ``[platoon]`` (x, u, y, v,
d, dx_len, dy_len, d_x, d_y, dt, steps, store_every) configure the
fundamental-diagram and vehicle experiments.  Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .model import CLOSURES, DomainError, ModelParams

COMMANDS = ("fd", "riemann", "sim1d", "sim2d", "micro", "compare")
SCHEMES = ("godunov", "hybrid", "hll")
BOUNDARIES = ("outflow", "periodic")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}: {message}{where}" if field else f"{message}{where}")


@dataclass(frozen=True)
class SchemeOptions:
    name: str = "hybrid"
    cfl: float = 0.45
    resolution: int = 400
    boundary: str = "outflow"
    models: tuple = ("RARZ",)


@dataclass(frozen=True)
class RiemannSpec:
    rho_left: float
    u_left: float
    rho_right: float
    u_right: float
    x_split: float = 1.0
    x_min: float = 0.0
    x_max: float = 2.0


@dataclass(frozen=True)
class QuadrantSpec:
    q1: tuple
    q2: tuple
    q3: tuple
    q4: tuple
    x_split: float = 1.0
    y_split: float = 1.0
    x_min: float = 0.0
    x_max: float = 2.0
    y_min: float = 0.0
    y_max: float = 2.0


@dataclass(frozen=True)
class FdOptions:
    models: tuple = ("ARZ", "MAR", "RARZ")
    w: tuple = (1.0,)
    gamma: tuple = (2.0,)
    samples: int = 400
    margin: float = 1e-9


@dataclass(frozen=True)
class PlatoonSpec:
    x: tuple
    u: tuple
    y: tuple | None = None
    v: tuple | None = None
    d: float = 0.5
    dx_len: float = 1.0
    dy_len: float = 1.0
    d_x: float = 0.5
    d_y: float = 0.5
    dt: float = 1e-3
    steps: int = 1000
    store_every: int = 10

    @property
    def is_2d(self):
        return self.y is not None


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    t_end: float = 0.0
    name: str = ""
    params: ModelParams = field(default_factory=ModelParams)
    scheme: SchemeOptions = field(default_factory=SchemeOptions)
    initial: RiemannSpec | QuadrantSpec | None = None
    fd: FdOptions | None = None
    platoon: PlatoonSpec | None = None
    snapshots: tuple = ()

    @property
    def is_2d(self) -> bool:
        return isinstance(self.initial, QuadrantSpec)


# -- parsing ----------------------------------------------------------------

_TOP = {"command", "t_end", "name", "snapshots", "params", "scheme", "initial", "fd", "platoon"}


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, flags=re.M)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_keys(table, allowed, prefix, text):
    for key in table:
        if key not in allowed:
            name = f"{prefix}{key}"
            raise ConfigError("unknown key", name, _line_of(text, key))


def _number(table, key, prefix, default=None, text=None, integer=False):
    if key not in table:
        if default is None:
            raise ConfigError("missing required value", f"{prefix}{key}")
        return default
    value = table[key]
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if not ok or isinstance(value, bool):
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"expected {kind}, got {value!r}", f"{prefix}{key}", _line_of(text, key))
    return int(value) if integer else float(value)


def _float_list(table, key, prefix, text, length=None, required=True):
    if key not in table:
        if required:
            raise ConfigError("missing required value", f"{prefix}{key}")
        return None
    value = table[key]
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                              for v in value):
        raise ConfigError("expected a list of numbers", f"{prefix}{key}", _line_of(text, key))
    if length is not None and len(value) != length:
        raise ConfigError(f"expected {length} values, got {len(value)}", f"{prefix}{key}", _line_of(text, key))
    return tuple(float(v) for v in value)


def _choice(table, key, choices, prefix, default, text):
    value = table.get(key, default)
    if value not in choices:
        raise ConfigError(f"must be one of {list(choices)}, got {value!r}", f"{prefix}{key}", _line_of(text, key))
    return value


def _parse_params(table, text):
    _check_keys(table, {"rho_star", "u_star", "gamma", "v_star"}, "params.", text)
    base = ModelParams()
    values = {k: _number(table, k, "params.", getattr(base, k), text) for k in ("rho_star", "u_star", "gamma", "v_star")}
    try:
        return ModelParams(**values)
    except DomainError as exc:
        bad = next((k for k, v in values.items() if not v > 0), None)
        raise ConfigError(str(exc), f"params.{bad}" if bad else None) from None


def _parse_scheme(table, text):
    _check_keys(table, {"name", "cfl", "resolution", "boundary", "models"}, "scheme.", text)
    d = SchemeOptions()
    name = _choice(table, "name", SCHEMES, "scheme.", d.name, text)
    cfl = _number(table, "cfl", "scheme.", d.cfl, text)
    if not 0 < cfl <= 1:
        raise ConfigError("must lie in (0, 1]", "scheme.cfl", _line_of(text, "cfl"))
    res = _number(table, "resolution", "scheme.", d.resolution, text, integer=True)
    if res < 2:
        raise ConfigError("must be at least 2", "scheme.resolution", _line_of(text, "resolution"))
    boundary = _choice(table, "boundary", BOUNDARIES, "scheme.", d.boundary, text)
    models = table.get("models", list(d.models))
    if not isinstance(models, list) or not models:
        raise ConfigError("expected a non-empty list", "scheme.models", _line_of(text, "models"))
    for m in models:
        if not isinstance(m, str) or m.upper() not in CLOSURES:
            raise ConfigError(f"unknown model {m!r}", "scheme.models", _line_of(text, "models"))
    return SchemeOptions(name, cfl, res, boundary, tuple(m.upper() for m in models))


def _admissible(value, name, params, upper, text, strict_upper=False, key=None):
    key = key or name.split(".")[-1]
    bad = value < 0 or (value >= upper if strict_upper else value > upper)
    if bad:
        rel = "<" if strict_upper else "<="
        raise ConfigError(f"{value!r} not admissible (need 0 <= value {rel} {upper!r})", name, _line_of(text, key))


def _parse_initial(table, params, text):
    if any(k.startswith("q") for k in table):
        keys = {"q1", "q2", "q3", "q4", "x_split", "y_split", "x_min", "x_max", "y_min", "y_max"}
        _check_keys(table, keys, "initial.", text)
        qs = {}
        for k in ("q1", "q2", "q3", "q4"):
            q = _float_list(table, k, "initial.", text, 3)
            _admissible(q[0], f"initial.{k}", params, params.rho_star, text, True, k)
            _admissible(q[1], f"initial.{k}", params, params.u_star, text, key=k)
            _admissible(q[2], f"initial.{k}", params, params.v_star, text, key=k)
            qs[k] = q
        geo = {k: _number(table, k, "initial.", getattr(QuadrantSpec, k), text)
               for k in ("x_split", "y_split", "x_min", "x_max", "y_min", "y_max")}
        spec = QuadrantSpec(**qs, **geo)
        if not (spec.x_min < spec.x_split < spec.x_max and spec.y_min < spec.y_split < spec.y_max):
            raise ConfigError("split must lie inside the domain", "initial.x_split")
        return spec
    keys = {"rho_left", "u_left", "rho_right", "u_right", "x_split", "x_min", "x_max"}
    _check_keys(table, keys, "initial.", text)
    vals = {k: _number(table, k, "initial.", None, text) for k in ("rho_left", "u_left", "rho_right", "u_right")}
    for side in ("left", "right"):
        _admissible(vals[f"rho_{side}"], f"initial.rho_{side}", params, params.rho_star, text, True)
        _admissible(vals[f"u_{side}"], f"initial.u_{side}", params, params.u_star, text)
    geo = {k: _number(table, k, "initial.", getattr(RiemannSpec, k), text) for k in ("x_split", "x_min", "x_max")}
    spec = RiemannSpec(**vals, **geo)
    if not spec.x_min < spec.x_split < spec.x_max:
        raise ConfigError("must lie inside (x_min, x_max)", "initial.x_split", _line_of(text, "x_split"))
    return spec


def _parse_fd(table, text):
    _check_keys(table, {"models", "w", "gamma", "samples", "margin"}, "fd.", text)
    d = FdOptions()
    models = table.get("models", list(d.models))
    if not isinstance(models, list) or not models or any(
            not isinstance(m, str) or m.upper() not in CLOSURES for m in models):
        raise ConfigError(f"expected a list drawn from {sorted(CLOSURES)}", "fd.models", _line_of(text, "models"))
    w = _float_list(table, "w", "fd.", text, required=False) or d.w
    gamma = _float_list(table, "gamma", "fd.", text, required=False) or d.gamma
    if any(v <= 0 for v in w):
        raise ConfigError("values must be positive", "fd.w", _line_of(text, "w"))
    if any(v <= 0 for v in gamma):
        raise ConfigError("values must be positive", "fd.gamma", _line_of(text, "gamma"))
    samples = _number(table, "samples", "fd.", d.samples, text, integer=True)
    if samples < 2:
        raise ConfigError("must be at least 2", "fd.samples", _line_of(text, "samples"))
    margin = _number(table, "margin", "fd.", d.margin, text)
    if not 0 < margin < 0.5:
        raise ConfigError("must lie in (0, 0.5)", "fd.margin", _line_of(text, "margin"))
    return FdOptions(tuple(m.upper() for m in models), w, gamma, samples, margin)


def _parse_platoon(table, params, text):
    keys = {"x", "u", "y", "v", "d", "dx_len", "dy_len", "d_x", "d_y", "dt", "steps", "store_every"}
    _check_keys(table, keys, "platoon.", text)
    x = _float_list(table, "x", "platoon.", text)
    n = len(x)
    if n < 2:
        raise ConfigError("need at least two vehicles", "platoon.x", _line_of(text, "x"))
    u = _float_list(table, "u", "platoon.", text, n)
    y = _float_list(table, "y", "platoon.", text, n, required=False)
    v = _float_list(table, "v", "platoon.", text, n, required=False)
    if (y is None) != (v is None):
        raise ConfigError("y and v must be given together", "platoon.y" if y is None else "platoon.v")
    for value in u:
        _admissible(value, "platoon.u", params, params.u_star, text)
    for value in v or ():
        _admissible(value, "platoon.v", params, params.v_star, text)
    d = PlatoonSpec(x, u)
    nums = {k: _number(table, k, "platoon.", getattr(d, k), text) for k in ("d", "dx_len", "dy_len", "d_x", "d_y", "dt")}
    for k, value in nums.items():
        if value <= 0:
            raise ConfigError("must be positive", f"platoon.{k}", _line_of(text, k))
    steps = _number(table, "steps", "platoon.", d.steps, text, integer=True)
    store = _number(table, "store_every", "platoon.", d.store_every, text, integer=True)
    if steps < 0:
        raise ConfigError("must be non-negative", "platoon.steps", _line_of(text, "steps"))
    if store < 1:
        raise ConfigError("must be at least 1", "platoon.store_every", _line_of(text, "store_every"))
    gap = nums["d"] if y is None else 0.0
    if any(b - a <= gap for a, b in zip(x, x[1:])):
        raise ConfigError("vehicles must be ordered back to front with gaps above d", "platoon.x",
                          _line_of(text, "x"))
    return PlatoonSpec(x, u, y, v, steps=steps, store_every=store, **nums)


def from_dict(doc: dict, text: str | None = None) -> ExperimentConfig:
    """Validate a parsed document and fill in defaults."""
    _check_keys(doc, _TOP, "", text)
    command = _choice(doc, "command", COMMANDS, "", None, text)
    t_end = _number(doc, "t_end", "", 0.0, text)
    if t_end < 0:
        raise ConfigError("must be non-negative", "t_end", _line_of(text, "t_end"))
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("expected a string", "name", _line_of(text, "name"))
    snaps = _float_list(doc, "snapshots", "", text, required=False) or ()
    if any(s < 0 or s > t_end for s in snaps):
        raise ConfigError("snapshot times must lie in [0, t_end]", "snapshots", _line_of(text, "snapshots"))
    for key in ("params", "scheme", "initial", "fd", "platoon"):
        if key in doc and not isinstance(doc[key], dict):
            raise ConfigError("expected a table", key, _line_of(text, key))
    params = _parse_params(doc.get("params", {}), text)
    scheme = _parse_scheme(doc.get("scheme", {}), text)
    initial = _parse_initial(doc["initial"], params, text) if "initial" in doc else None
    fd = _parse_fd(doc["fd"], text) if "fd" in doc else None
    platoon = _parse_platoon(doc["platoon"], params, text) if "platoon" in doc else None

    if command in ("riemann", "sim1d", "sim2d", "compare") and initial is None:
        raise ConfigError(f"required by command {command!r}", "initial")
    if command in ("riemann", "sim1d") and isinstance(initial, QuadrantSpec):
        raise ConfigError(f"command {command!r} needs left/right states", "initial")
    if command == "sim2d" and not isinstance(initial, QuadrantSpec):
        raise ConfigError("command 'sim2d' needs quadrant states q1..q4", "initial")
    if command == "fd" and fd is None:
        fd = FdOptions()
    if command == "micro" and platoon is None:
        raise ConfigError("required by command 'micro'", "platoon")
    return ExperimentConfig(command, t_end, name, params, scheme, initial, fd, platoon, snaps)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment description."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"parse error: {exc}", line=int(m.group(1)) if m else None) from None
    return from_dict(doc, text)


def bundled_names() -> list:
    return sorted(p.name[:-5] for p in resources.files("rarz.configs").iterdir() if p.name.endswith(".toml"))


def load_config(path_or_name) -> ExperimentConfig:
    """Load a config file, or a bundled experiment by name (e.g. ``"test4_1d"``)."""
    path = Path(path_or_name)
    if path.is_file():
        return parse_config(path.read_text())
    name = str(path_or_name)
    name = name[:-5] if name.endswith(".toml") else name
    bundled = resources.files("rarz.configs") / f"{name}.toml"
    if bundled.is_file():
        return parse_config(bundled.read_text())
    raise ConfigError(f"no such file or bundled config: {path_or_name!r} (bundled: {', '.join(bundled_names())})")


# -- serialization ----------------------------------------------------------

def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        # JSON string escapes are valid TOML; DEL must be escaped as well
        return json.dumps(value, ensure_ascii=False).replace("\x7f", "\\u007f")
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def _table(name, obj):
    lines = [f"[{name}]"]
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if value is not None:
            lines.append(f"{f.name} = {_fmt(value)}")
    return lines


def to_toml(config: ExperimentConfig) -> str:
    """Serialize a config; ``parse_config(to_toml(c)) == c``."""
    lines = [f"command = {_fmt(config.command)}", f"t_end = {_fmt(config.t_end)}"]
    if config.name:
        lines.append(f"name = {_fmt(config.name)}")
    if config.snapshots:
        lines.append(f"snapshots = {_fmt(config.snapshots)}")
    for name in ("params", "scheme", "initial", "fd", "platoon"):
        obj = getattr(config, name)
        if obj is not None:
            lines += [""] + _table(name, obj)
    return "\n".join(lines) + "\n"


def override(config: ExperimentConfig, command=None, scheme=None, resolution=None) -> ExperimentConfig:
    """Apply command-line overrides and revalidate the result."""
    doc = tomllib.loads(to_toml(config))
    if command is not None:
        doc["command"] = command
    if scheme is not None:
        doc.setdefault("scheme", {})["name"] = scheme
    if resolution is not None:
        doc.setdefault("scheme", {})["resolution"] = resolution
    return from_dict(doc)
