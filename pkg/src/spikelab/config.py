"""Experiment configuration: a sectioned key/value text file, with JSON
accepted interchangeably.  Every field has a default; parsing either
succeeds totally or fails with a field-level diagnostic.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import SpikelabError
from .geometry import DomainSpec
from .nonlinearity import NonlinearitySpec, pure_power

__all__ = ["ConfigError", "ExperimentConfig", "load_config"]


class ConfigError(SpikelabError):
    pass


_DEFAULT_SCHEDULE = (0.5, 0.35, 0.25, 0.18, 0.12)


@dataclass
class ExperimentConfig:
    # nonlinearity
    m: float = 2.0
    N: int = 3
    p: float = 3.0
    kind: str = "pure_power"
    # domain
    shape: str = "ball"
    domain_params: tuple = (1.0,)
    # radial
    h_r: float = 1e-3
    r_max: float = 30.0
    bisect_tol: float = 1e-12
    plateau_tol: float = 0.02
    crosscheck_tol: float = 0.02
    mc_samples: int = 1_000_000
    # solver
    eps: float = 0.3
    grad_tol: float = 1e-7
    max_iters: int = 4000
    mesh_h: float = 0.0          # 0 -> eps/3
    panel_size: int = 4
    seed: int = 0
    # schedule
    schedule: tuple = _DEFAULT_SCHEDULE
    # output
    out_dir: str = "out"

    def __post_init__(self):
        if self.kind != "pure_power":
            raise ConfigError(
                f"nonlinearity.kind: only 'pure_power' is configurable "
                f"from file, got {self.kind!r}")
        if not self.schedule:
            raise ConfigError("schedule: must not be empty")
        for e in self.schedule:
            if not 0.0 < e <= 1.0:
                raise ConfigError(
                    f"schedule: every epsilon must lie in (0, 1], got {e}")
        if not 0.0 < self.eps <= 1.0:
            raise ConfigError(f"solver.eps: must lie in (0, 1], got {self.eps}")
        if self.grad_tol <= 0:
            raise ConfigError("solver.grad_tol: must be positive")
        if self.h_r <= 0 or self.r_max <= 0:
            raise ConfigError("radial.h_r and radial.r_max must be positive")

    def nonlinearity(self) -> NonlinearitySpec:
        return pure_power(self.m, self.N, self.p)

    def domain(self) -> DomainSpec:
        try:
            return DomainSpec(shape=self.shape, N=self.N,
                              params=tuple(self.domain_params))
        except ValueError as exc:
            raise ConfigError(f"domain: {exc}") from exc

    def effective(self) -> dict:
        d = asdict(self)
        d["schedule"] = list(self.schedule)
        d["domain_params"] = list(self.domain_params)
        return d


_SECTIONS = {
    "nonlinearity": {"m": float, "n": int, "p": float, "kind": str},
    "domain": {"shape": str, "params": "floats"},
    "radial": {"h_r": float, "r_max": float, "bisect_tol": float,
               "plateau_tol": float, "crosscheck_tol": float,
               "mc_samples": int},
    "solver": {"eps": float, "grad_tol": float, "max_iters": int,
               "mesh_h": float, "panel_size": int, "seed": int},
    "schedule": {"eps_list": "floats"},
    "output": {"dir": str},
}

_FIELD_MAP = {
    ("nonlinearity", "m"): "m", ("nonlinearity", "n"): "N",
    ("nonlinearity", "p"): "p", ("nonlinearity", "kind"): "kind",
    ("domain", "shape"): "shape", ("domain", "params"): "domain_params",
    ("radial", "h_r"): "h_r", ("radial", "r_max"): "r_max",
    ("radial", "bisect_tol"): "bisect_tol",
    ("radial", "plateau_tol"): "plateau_tol",
    ("radial", "crosscheck_tol"): "crosscheck_tol",
    ("radial", "mc_samples"): "mc_samples",
    ("solver", "eps"): "eps", ("solver", "grad_tol"): "grad_tol",
    ("solver", "max_iters"): "max_iters", ("solver", "mesh_h"): "mesh_h",
    ("solver", "panel_size"): "panel_size", ("solver", "seed"): "seed",
    ("schedule", "eps_list"): "schedule",
    ("output", "dir"): "out_dir",
}


def _convert(section: str, key: str, raw, conv):
    try:
        if conv == "floats":
            if isinstance(raw, (list, tuple)):
                return tuple(float(x) for x in raw)
            return tuple(float(x) for x in str(raw).replace(",", " ").split())
        if isinstance(raw, str):
            return conv(raw)
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as "
            f"{getattr(conv, '__name__', conv)}") from exc


def _from_nested(data: dict) -> ExperimentConfig:
    kwargs = {}
    for section, entries in data.items():
        sec = section.lower()
        if sec == "default":
            continue
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]; valid: "
                              f"{sorted(_SECTIONS)}")
        if not isinstance(entries, dict):
            raise ConfigError(f"[{section}]: expected a table of keys")
        for key, raw in entries.items():
            k = key.lower()
            if k not in _SECTIONS[sec]:
                raise ConfigError(
                    f"[{section}] unknown key {key!r}; valid: "
                    f"{sorted(_SECTIONS[sec])}")
            kwargs[_FIELD_MAP[(sec, k)]] = _convert(
                sec, k, raw, _SECTIONS[sec][k])
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    """Parse a config file (INI-style sections or a JSON object)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"
            ) from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return _from_nested(data)
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    data = {s: dict(parser.items(s)) for s in parser.sections()}
    return _from_nested(data)
