"""Run configuration: a line-oriented ``key = value`` format with ``[sections]``.

Example::

    command = sensitivity
    grid = auto

    [model]
    name = lotka_volterra
    eps = 0.2

    [diffusion]
    Dbar = 1 0; 0 -1

``#`` starts a comment.  Matrices are written row by row, rows separated by
``;``.  Lists are comma separated.  Every key not given is filled with a
default and its provenance is recorded.  :func:`serialize` writes the
resolved configuration in canonical form; parsing that text and serialising
again reproduces it byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .models import MODELS

COMMANDS = ("front", "spectrum", "sensitivity", "simulate", "sweep", "validate")
BACKENDS = ("auto", "compiled", "python")

SECTIONS = ("model", "grid", "diffusion", "sweep", "simulation", "tolerances")

DEFAULT_L = 40.0
DEFAULT_N = 1601
DEFAULT_AUTO_H = 0.05


class ConfigParseError(ConfigurationError):
    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{where}{what}{message}")
        self.line = line
        self.key = key


@dataclass
class RunConfig:
    command: str = "front"
    out: str = "run"
    seed: int = 0
    backend: str = "auto"
    order: int = 6
    model: str = "toy"
    params: dict = field(default_factory=dict)
    grid_mode: str = "explicit"  # explicit | auto
    L: float = DEFAULT_L
    N: int = DEFAULT_N
    h: float = DEFAULT_AUTO_H
    D: np.ndarray = None
    Dbar: np.ndarray = None
    sweep_parameter: str = ""
    sweep_values: list = field(default_factory=list)
    eps_list: list = field(default_factory=lambda: [0.02, 0.05])
    T: float = 600.0
    samples: int = 400
    newton_tol: float = 1e-12
    newton_accept: float = 1e-10
    newton_max_iter: int = 50
    gap_tol: float = 1e-4
    provenance: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return serialize(self) == serialize(other)


# ---------------------------------------------------------------- values


def _fmt_float(v):
    # repr round-trips exactly
    return repr(float(v))


def _fmt_list(values):
    return ", ".join(_fmt_float(v) for v in values)


def _fmt_matrix(m):
    m = np.atleast_2d(m)
    return "; ".join(" ".join(_fmt_float(v) for v in row) for row in m)


def _parse_float(text, line, key):
    try:
        v = float(text)
    except ValueError:
        raise ConfigParseError(f"expected a number, got {text!r}", line, key) from None
    if not math.isfinite(v):
        raise ConfigParseError(f"expected a finite number, got {text!r}", line, key)
    return v


def _parse_int(text, line, key):
    try:
        return int(text)
    except ValueError:
        raise ConfigParseError(f"expected an integer, got {text!r}", line, key) from None


def _parse_list(text, line, key):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigParseError("empty list", line, key)
    return [_parse_float(p, line, key) for p in parts]


def _parse_matrix(text, line, key):
    rows = [r.split() for r in text.replace(",", " ").split(";")]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ConfigParseError(f"malformed matrix {text!r}: expected a square matrix written row by row", line, key)
    return np.array([[_parse_float(v, line, key) for v in r] for r in rows])


# ---------------------------------------------------------------- parsing

_TOP = {"command", "out", "seed", "grid", "backend", "order"}
_KEYS = {
    "grid": {"L", "N", "h"},
    "diffusion": {"D", "Dbar"},
    "sweep": {"parameter", "values"},
    "simulation": {"eps_list", "T", "samples"},
    "tolerances": {"newton_tol", "newton_accept", "newton_max_iter", "gap_tol"},
}


def _tokenize(text):
    """Yield ``(line_no, section, key, value)``."""
    section = ""
    seen = set()
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError(f"malformed section header {raw.strip()!r}", no)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigParseError(f"unknown section [{section}]", no)
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigParseError("missing key", no)
        full = f"{section}.{key}" if section else key
        if full in seen:
            raise ConfigParseError("duplicate key", no, full)
        seen.add(full)
        yield no, section, key, value


def _apply(cfg, section, key, value, line, source):
    full = f"{section}.{key}" if section else key
    if section == "":
        if key not in _TOP:
            raise ConfigParseError("unknown key", line, full)
        if key == "command":
            if value not in COMMANDS:
                raise ConfigParseError(f"unknown command {value!r}; choose from {', '.join(COMMANDS)}", line, full)
            cfg.command = value
        elif key == "out":
            if not value:
                raise ConfigParseError("empty output prefix", line, full)
            cfg.out = value
        elif key == "seed":
            cfg.seed = _parse_int(value, line, full)
        elif key == "backend":
            if value not in BACKENDS:
                raise ConfigParseError(f"unknown backend {value!r}", line, full)
            cfg.backend = value
        elif key == "order":
            order = _parse_int(value, line, full)
            if order < 2 or order % 2:
                raise ConfigParseError("stencil order must be even and >= 2", line, full)
            cfg.order = order
        elif key == "grid":
            if value not in ("auto", "explicit"):
                raise ConfigParseError(f"grid must be 'auto' or 'explicit', got {value!r}", line, full)
            cfg.grid_mode = value
    elif section == "model":
        if key == "name":
            if value not in MODELS:
                raise ConfigParseError(f"unknown model {value!r}; choose from {', '.join(sorted(MODELS))}", line, full)
            cfg.model = value
        else:
            cfg.params[key] = _parse_float(value, line, full)
            cfg.provenance[full] = source
            return
    else:
        if key not in _KEYS[section]:
            raise ConfigParseError("unknown key", line, full)
        if section == "grid":
            if key == "L":
                v = _parse_float(value, line, full)
                if v <= 0:
                    raise ConfigParseError(f"half-length must be positive, got {value}", line, full)
                cfg.L = v
            elif key == "N":
                v = _parse_int(value, line, full)
                if v < 3 or v % 2 == 0:
                    raise ConfigParseError(f"node count must be odd and >= 3, got {v}", line, full)
                cfg.N = v
            else:
                v = _parse_float(value, line, full)
                if v <= 0:
                    raise ConfigParseError(f"spacing must be positive, got {value}", line, full)
                cfg.h = v
        elif section == "diffusion":
            setattr(cfg, key, _parse_matrix(value, line, full))
        elif section == "sweep":
            if key == "parameter":
                cfg.sweep_parameter = value
            else:
                cfg.sweep_values = _parse_list(value, line, full)
        elif section == "simulation":
            if key == "eps_list":
                cfg.eps_list = _parse_list(value, line, full)
            elif key == "T":
                v = _parse_float(value, line, full)
                if v <= 0:
                    raise ConfigParseError("simulation horizon must be positive", line, full)
                cfg.T = v
            else:
                cfg.samples = _parse_int(value, line, full)
        elif section == "tolerances":
            if key == "newton_max_iter":
                cfg.newton_max_iter = _parse_int(value, line, full)
            else:
                v = _parse_float(value, line, full)
                if v <= 0:
                    raise ConfigParseError("tolerance must be positive", line, full)
                setattr(cfg, key, v)
    cfg.provenance[full] = source


def _defaults_for_model(name):
    cls = MODELS[name]
    dim = cls.dimension
    defaults = {
        "toy": {"mu": 0.5},
        "lotka_volterra": {"eps": 0.2},
        "ginzburg_landau_polar": {"eps": 0.1, "omega": 0.5},
        "nagumo": {"a": 0.25},
        "gradient_double_well": {"tilt": 0.0, "bend": 0.5, "stiffness": 2.0},
    }[name]
    Dbar = np.diag([1.0, -1.0]) if dim == 2 else np.eye(dim)
    return defaults, np.eye(dim), Dbar


def _finalize(cfg):
    defaults, D, Dbar = _defaults_for_model(cfg.model)
    cls = MODELS[cfg.model]
    allowed = set(cls.param_names) | ({"eps"} if cfg.model == "lotka_volterra" else set())
    for key in cfg.params:
        if key not in allowed:
            raise ConfigParseError(f"unknown parameter for model {cfg.model!r}", None, f"model.{key}")
    if cfg.model == "lotka_volterra" and {"mu", "eps"} <= set(cfg.params):
        raise ConfigParseError("give either mu or eps for lotka_volterra, not both", None, "model.eps")
    if cfg.model == "lotka_volterra" and "mu" in cfg.params:
        defaults = {}
    for key, value in defaults.items():
        if key not in cfg.params:
            cfg.params[key] = value
            cfg.provenance[f"model.{key}"] = "default"
    for key, value in (("D", D), ("Dbar", Dbar)):
        if getattr(cfg, key) is None:
            setattr(cfg, key, value)
            cfg.provenance[f"diffusion.{key}"] = "default"
        elif getattr(cfg, key).shape != (cls.dimension, cls.dimension):
            raise ConfigParseError(
                f"matrix must be {cls.dimension}x{cls.dimension} for model {cfg.model!r}", None, f"diffusion.{key}"
            )
    if cfg.command == "sweep":
        if not cfg.sweep_parameter:
            cfg.sweep_parameter = next(iter(defaults))
            cfg.provenance["sweep.parameter"] = "default"
        if cfg.sweep_parameter not in allowed:
            raise ConfigParseError(f"cannot sweep {cfg.sweep_parameter!r} for model {cfg.model!r}", None, "sweep.parameter")
        if not cfg.sweep_values:
            raise ConfigParseError("sweep needs a non-empty values list", None, "sweep.values")
    if cfg.grid_mode == "auto":
        cfg.L, cfg.N = auto_grid(cfg, cfg.params)
        cfg.provenance["grid.L"] = cfg.provenance["grid.N"] = "auto"
    for key in ("command", "out", "seed", "backend", "order", "grid", "model.name", "grid.L", "grid.N", "grid.h",
                "sweep.parameter", "sweep.values", "simulation.eps_list", "simulation.T", "simulation.samples",
                "tolerances.newton_tol", "tolerances.newton_accept", "tolerances.newton_max_iter",
                "tolerances.gap_tol"):
        cfg.provenance.setdefault(key, "default")
    return cfg


def build_model(cfg, params=None):
    from .models import make_model

    return make_model(cfg.model, **(cfg.params if params is None else params))


def auto_grid(cfg, params):
    """``L = 24 / nu`` from the slowest decay rate at the end states and the
    smallest odd ``N`` with spacing at most ``cfg.h``."""
    from .front_solver import auto_half_length

    model = build_model(cfg, params)
    L = float(auto_half_length(model, cfg.D))
    n = int(math.ceil(2 * L / cfg.h)) + 1
    if n % 2 == 0:
        n += 1
    return L, n


def parse_config(text, overrides=()):
    """Parse configuration text; ``overrides`` are ``"section.key=value"``
    strings applied after the file."""
    cfg = RunConfig()
    for line, section, key, value in _tokenize(text):
        _apply(cfg, section, key, value, line, "file")
    for item in overrides:
        if "=" not in item:
            raise ConfigParseError(f"override must be key=value, got {item!r}", key=item)
        key, value = (s.strip() for s in item.split("=", 1))
        section, _, name = key.rpartition(".")
        if section and section not in SECTIONS:
            raise ConfigParseError(f"unknown section [{section}]", key=key)
        if section == "model" and name != "name":
            cfg.params.pop(name, None)
        _apply(cfg, section, name, value, None, "override")
    return _finalize(cfg)


def load_config(path, overrides=()):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, overrides)


def serialize(cfg):
    """Canonical text of a resolved configuration.  With ``grid = auto`` the
    resolved L and N are echoed; re-parsing recomputes the same values."""
    lines = [
        f"command = {cfg.command}",
        f"out = {cfg.out}",
        f"seed = {cfg.seed}",
        f"backend = {cfg.backend}",
        f"order = {cfg.order}",
        f"grid = {cfg.grid_mode}",
        "",
        "[model]",
        f"name = {cfg.model}",
    ]
    lines += [f"{k} = {_fmt_float(v)}" for k, v in sorted(cfg.params.items())]
    lines += ["", "[grid]", f"L = {_fmt_float(cfg.L)}", f"N = {cfg.N}", f"h = {_fmt_float(cfg.h)}"]
    lines += ["", "[diffusion]", f"D = {_fmt_matrix(cfg.D)}", f"Dbar = {_fmt_matrix(cfg.Dbar)}"]
    if cfg.command == "sweep":
        lines += ["", "[sweep]", f"parameter = {cfg.sweep_parameter}", f"values = {_fmt_list(cfg.sweep_values)}"]
    lines += [
        "",
        "[simulation]",
        f"eps_list = {_fmt_list(cfg.eps_list)}",
        f"T = {_fmt_float(cfg.T)}",
        f"samples = {cfg.samples}",
        "",
        "[tolerances]",
        f"newton_tol = {_fmt_float(cfg.newton_tol)}",
        f"newton_accept = {_fmt_float(cfg.newton_accept)}",
        f"newton_max_iter = {cfg.newton_max_iter}",
        f"gap_tol = {_fmt_float(cfg.gap_tol)}",
    ]
    return "\n".join(lines) + "\n"
