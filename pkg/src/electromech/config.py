"""JSON run configuration.

A configuration is a single JSON object::

    {
      "params": {"P": 1e-6, "T_a": 0.05},          # Hz / K / W; unset keys use BASE
      "branch": "lowest",
      "bistability": {"I_b": {"min": 1e3, "max": 1e16, "n": 10000, "spacing": "log"}},
      "squeezing": {"omega": {"min": -3, "max": 3, "n": 4001},   # units of omega_m
                    "power": {"min": 1e-13, "max": 1e-10, "n": 31, "spacing": "log"}},
      "entanglement": {"variable": "T_c", "grid": {"min": 0.01, "max": 0.3, "n": 30}},
      "verify": {"random_draws": 20, "seed": 0, "inject_fault": null},
      "output": {"directory": "out", "format": "csv"}
    }

Every block is optional.  Unknown keys are rejected with the line on which
they appear.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import SystemParams
from .presets import BASE

__all__ = ["GridSpec", "RunConfig", "load_config", "parse_config"]

_BLOCK_KEYS = {
    "params": set(BASE),
    "bistability": {"I_b"},
    "squeezing": {"omega", "power"},
    "entanglement": {"variable", "grid"},
    "verify": {"random_draws", "seed", "inject_fault"},
    "output": {"directory", "format"},
}
_TOP_KEYS = set(_BLOCK_KEYS) | {"branch"}
_GRID_KEYS = {"min", "max", "n", "spacing"}
_FAULTS = (None, "diffusion")


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    n: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (np.isfinite(self.min) and np.isfinite(self.max)) or not self.min < self.max:
            raise ConfigError(f"grid needs finite min < max, got {self.min!r}, {self.max!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"grid needs integer n >= 2, got {self.n!r}")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"grid spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise ConfigError("log-spaced grid needs min > 0")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, int(self.n))
        return np.linspace(self.min, self.max, int(self.n))

    def to_dict(self):
        return {"min": self.min, "max": self.max, "n": int(self.n), "spacing": self.spacing}


@dataclass(frozen=True)
class RunConfig:
    params: dict = field(default_factory=dict)
    branch: object = "lowest"
    I_b: GridSpec | None = None
    omega: GridSpec | None = None
    power: GridSpec | None = None
    variable: str | None = None
    sweep: GridSpec | None = None
    random_draws: int = 20
    seed: int = 0
    inject_fault: str | None = None
    directory: str | None = None
    format: str = "csv"

    def system_params(self, **overrides):
        cfg = dict(BASE)
        cfg.update(self.params)
        cfg.update(overrides)
        try:
            return SystemParams.from_config(cfg)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid params: {exc}") from exc

    def to_dict(self):
        out = {"params": dict(self.params), "branch": self.branch}
        if self.I_b is not None:
            out["bistability"] = {"I_b": self.I_b.to_dict()}
        sq = {}
        if self.omega is not None:
            sq["omega"] = self.omega.to_dict()
        if self.power is not None:
            sq["power"] = self.power.to_dict()
        if sq:
            out["squeezing"] = sq
        if self.variable is not None:
            out["entanglement"] = {"variable": self.variable,
                                   "grid": None if self.sweep is None else self.sweep.to_dict()}
        out["verify"] = {"random_draws": self.random_draws, "seed": self.seed,
                         "inject_fault": self.inject_fault}
        out["output"] = {"directory": self.directory, "format": self.format}
        return out

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_keys(obj, allowed, where, text):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    for key in obj:
        if key not in allowed:
            line = _line_of(text, key)
            loc = f" (line {line})" if line else ""
            raise ConfigError(f"unknown key {key!r} in {where}{loc}; allowed: {sorted(allowed)}")


def _grid(obj, where, text):
    if obj is None:
        return None
    _check_keys(obj, _GRID_KEYS, where, text)
    missing = {"min", "max", "n"} - set(obj)
    if missing:
        raise ConfigError(f"{where} is missing {sorted(missing)}")
    return GridSpec(float(obj["min"]), float(obj["max"]), obj["n"], obj.get("spacing", "linear"))


def parse_config(text):
    """Parse a JSON document into a :class:`RunConfig`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _check_keys(raw, _TOP_KEYS, "config", text)
    for block, allowed in _BLOCK_KEYS.items():
        if block in raw:
            _check_keys(raw[block], allowed, block, text)

    params = dict(raw.get("params", {}))
    bis = raw.get("bistability", {})
    sq = raw.get("squeezing", {})
    ent = raw.get("entanglement", {})
    ver = raw.get("verify", {})
    out = raw.get("output", {})
    fault = ver.get("inject_fault")
    if fault not in _FAULTS:
        raise ConfigError(f"verify.inject_fault must be one of {_FAULTS}, got {fault!r}")
    branch = raw.get("branch", "lowest")
    if not (branch in ("lowest", "highest") or (isinstance(branch, int) and not isinstance(branch, bool))):
        raise ConfigError(f"branch must be 'lowest', 'highest' or an integer, got {branch!r}")
    cfg = RunConfig(
        params=params,
        branch=branch,
        I_b=_grid(bis.get("I_b"), "bistability.I_b", text),
        omega=_grid(sq.get("omega"), "squeezing.omega", text),
        power=_grid(sq.get("power"), "squeezing.power", text),
        variable=ent.get("variable"),
        sweep=_grid(ent.get("grid"), "entanglement.grid", text),
        random_draws=int(ver.get("random_draws", 20)),
        seed=int(ver.get("seed", 0)),
        inject_fault=fault,
        directory=out.get("directory"),
        format=out.get("format", "csv"),
    )
    if cfg.format != "csv":
        raise ConfigError(f"output.format must be 'csv', got {cfg.format!r}")
    cfg.system_params()  # validate eagerly
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
