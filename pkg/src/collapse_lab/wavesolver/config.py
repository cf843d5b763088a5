from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    """Parameters of one radial collapse simulation (all dimensionless)."""

    lambda0: float = 1.0
    lambda_dot0: float = -0.5
    R: float = 20.0
    h: float = 1.0 / 32
    cfl: float = 0.4
    # a finer level is added when lambda < trigger * h_finest
    trigger: float = 32.0
    level_cells: int = 512
    max_levels: int = 100
    lambda_min: float = 1e-3
    t_max: float = 10.0
    # curvature, orthogonality or both
    extractor: str = "both"
    sample_every: int = 20
    y_cut: float = 1.0
    # multiplicative bump 1 + a exp(-(r-r0)^2/s^2) on the initial u
    bump_amplitude: float = 0.0
    bump_center: float | None = None
    bump_width: float | None = None
    # what to do if t_max allows outgoing waves to come back: warn or error
    boundary_policy: str = "warn"

    def validate(self):
        if not self.lambda0 > 0:
            raise ConfigError("lambda0 must be positive")
        if not 0 < self.cfl <= 0.9:
            raise ConfigError("cfl must lie in (0, 0.9]")
        if self.trigger < 16:
            raise ConfigError("refinement trigger must be at least 16 points per lambda")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if self.R < 20 * self.lambda0 * (1 - 1e-12):
            raise ConfigError(f"R = {self.R} is below 20 lambda0 = {20 * self.lambda0}")
        n0 = self.R / self.h
        if abs(n0 - round(n0)) > 1e-9 * n0:
            raise ConfigError("R must be an integer multiple of h")
        if self.level_cells % 4 or self.level_cells < 16:
            raise ConfigError("level_cells must be a multiple of 4 and at least 16")
        if self.extractor not in ("curvature", "orthogonality", "both"):
            raise ConfigError(f"unknown extractor {self.extractor!r}")
        if self.boundary_policy not in ("warn", "error"):
            raise ConfigError("boundary_policy must be 'warn' or 'error'")
        if abs(self.bump_amplitude) > 0.5:
            raise ConfigError("bump amplitude must be small")
        if self.t_max > 2 * (self.R - self.lambda0):
            msg = (f"t_max = {self.t_max} lets waves reflected at R = {self.R} "
                   f"return to the core")
            if self.boundary_policy == "error":
                raise ConfigError(msg)
            warnings.warn(msg, stacklevel=2)
        return self

    def to_dict(self):
        return asdict(self)
