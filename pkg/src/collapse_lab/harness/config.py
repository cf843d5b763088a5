"""Flat ``key = value`` run configuration.

One file configures every mode.  Keys belong to one of the parameter groups
below; an unknown key is an error so that typos do not silently fall back on
defaults.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..wavesolver.config import ConfigError, SimConfig

MODES = ("simulate", "modulation", "phi1", "integrals", "perturbation", "sweep", "compare")


class PlanIOError(OSError):
    """Unreadable config or unwritable output directory."""


@dataclass
class ModulationParams:
    dt: float = 1e-3
    eta: float = 1e-2
    t_end: float = float("inf")
    extended_coeff: float | None = None


@dataclass
class Phi1Params:
    lambda_dot: float = 0.1
    z_max: float = 200.0
    z_min: float = 1e-6
    phi1_tol: float = 1e-8
    per_decade: int = 400
    z_fit: float = 20.0


@dataclass
class PerturbationParams:
    grid_h: float = 0.1
    y_max: float = 100.0
    gamma_probe: float = 0.6


@dataclass
class SweepParams:
    sweep_lambda0: tuple = (0.5, 1.0, 2.0)
    sweep_lambda_dot0: tuple = (-0.25, -0.5, -1.0)
    perturbation_amplitude: float = 1e-2
    perturbed_per_point: int = 1

    def validate(self):
        if not self.sweep_lambda0 or not self.sweep_lambda_dot0:
            raise ConfigError("sweep ranges must be non-empty")
        if any(l <= 0 for l in self.sweep_lambda0):
            raise ConfigError("sweep_lambda0 values must be positive")
        if not 0 <= self.perturbation_amplitude <= 0.5:
            raise ConfigError("perturbation_amplitude must lie in [0, 0.5]")
        if self.perturbed_per_point < 0:
            raise ConfigError("perturbed_per_point must be >= 0")


_GROUPS = {"sim": SimConfig, "modulation": ModulationParams, "phi1": Phi1Params,
           "perturbation": PerturbationParams, "sweep": SweepParams}


def _owner():
    out = {}
    for group, cls in _GROUPS.items():
        for f in dataclasses.fields(cls):
            out[f.name] = (group, f)
    return out


def _number(text):
    # accepts "1/32" as well as ordinary float syntax
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        return float(text)


def _convert(f, text):
    text = text.strip()
    kind = str(f.type).split("|")[0].strip()
    if text.lower() in ("none", ""):
        return None
    if kind == "tuple":
        return tuple(_number(t) for t in text.replace(",", " ").split())
    if kind == "int":
        return int(text)
    if kind == "str":
        return text
    return _number(text)


@dataclass
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    modulation: ModulationParams = field(default_factory=ModulationParams)
    phi1: Phi1Params = field(default_factory=Phi1Params)
    perturbation: PerturbationParams = field(default_factory=PerturbationParams)
    sweep: SweepParams = field(default_factory=SweepParams)
    text: str = ""

    def to_dict(self):
        return {g: dataclasses.asdict(getattr(self, g)) for g in _GROUPS}


def parse_config_text(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    owner = _owner()
    values = {g: {} for g in _GROUPS}
    for key, raw in parser["run"].items():
        if key not in owner:
            raise ConfigError(f"unknown config key {key!r}")
        group, f = owner[key]
        try:
            values[group][key] = _convert(f, raw)
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
    cfg = RunConfig(**{g: cls(**values[g]) for g, cls in _GROUPS.items()}, text=text)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise PlanIOError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config_text(text)


@dataclass
class ExperimentPlan:
    mode: str
    config_path: Path | None
    out_dir: Path
    workers: int = 1
    seed: int = 0
    config: RunConfig = field(default_factory=RunConfig)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.mode == "sweep":
            self.config.sweep.validate()
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            probe = self.out_dir / ".write_probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise PlanIOError(f"output directory {self.out_dir} is not writable: "
                              f"{exc.strerror or exc}") from None
        return self


def make_plan(mode, config_path, out_dir, workers=1, seed=0):
    cfg = load_config(config_path) if config_path is not None else RunConfig()
    plan = ExperimentPlan(mode, None if config_path is None else Path(config_path),
                          Path(out_dir), int(workers), int(seed), cfg)
    return plan.validate()
