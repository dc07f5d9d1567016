# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Scenario configuration: the JSON document describing one decay experiment."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from coefficients import (
    AdmissibilityMode,
    CoefficientField,
    InitialData,
    PowerLawEnvelope,
    ProfileKind,
    SourceField,
    make_power_law,
    named_initial_data,
    named_source,
)
from solver import Cadence, Grid, GridKind
from support import SupportSpec, build_q, grid_radius

# Environment variable naming the default output root
OUTPUT_DIR_ENV = "WAVEDECAY_OUTPUT_DIR"

DEFAULT_OUTPUT_DIR = "results"

# Largest cascade order any audit needs
MAX_CASCADE_ORDER = 4


class Scenario(BaseModel):
    """One decay experiment. Unknown keys are rejected.

    Attributes:
        name: Output subdirectory name
        alpha, beta, gamma: Envelope exponents of a, b and c
        a0, a1, b0, b1, c0, c1: Envelope constants
        profile_kind: pure_power or smoothed_power coefficient profiles
        admissibility: Exponent family checked before any run
        geometry: radial (dimension n) or cartesian1d
        data: Named initial data with its amplitude and support radius
        source: Named source, its amplitude and available time-derivative order
        t_end: Final time
        k_max: Highest cascade order (number of time derivatives evolved)
        cfl: Courant number
        grid: Number of radial nodes
        r_max: Domain radius; None sizes the grid from the predicted cone
        delta: Slack exponent of the predicted rates
        omega: Weight exponent, or "auto" for the middle of the admissible window
        margin: Tolerance of the at_least_as_fast verdicts
        gain_margin: Tolerance of the two-sided gain verdicts
        fit_window: Fit window; None for [max(20, 2 T0), 0.9 t_end]
        seed: Seed of the randomized audits
        snapshots_per_decade: Geometric snapshot cadence
        plots: Emit SVG plots after a run

    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(default="scenario", min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    a0: float = 1.0
    a1: float = 1.0
    b0: float = 1.0
    b1: float = 1.0
    c0: float = 1.0
    c1: float = 1.0
    profile_kind: Literal["pure_power", "smoothed_power"] = "pure_power"
    admissibility: Literal["general", "homogeneous_c1"] = "general"
    geometry: Literal["radial", "cartesian1d"] = "radial"
    n: int = Field(default=3, ge=1)
    data: Literal["gaussian_bump", "hat", "ring"] = "gaussian_bump"
    amplitude: float = 1.0
    data_radius: float = Field(default=4.0, gt=0)
    source: Literal["zero", "decaying_pulse"] = "zero"
    source_amplitude: float = 0.0
    source_order: int | None = Field(default=None, ge=0)
    t_end: float = Field(default=400.0, gt=0)
    k_max: int = Field(default=MAX_CASCADE_ORDER, ge=0)
    cfl: float = Field(default=0.5, gt=0, le=1)
    grid: int = Field(default=4096, ge=16)
    r_max: float | None = Field(default=None, gt=0)
    delta: float = Field(default=0.1, gt=0)
    omega: Literal["auto"] | float = "auto"
    nu: float | None = None
    w0: float = Field(default=1.0, gt=0)
    C0: float = 1.0
    margin: float = Field(default=0.3, ge=0)
    gain_margin: float = Field(default=0.5, ge=0)
    fit_window: tuple[float, float] | None = None
    seed: int = 0
    snapshots_per_decade: int = Field(default=64, ge=1)
    plots: bool = True

    @model_validator(mode="after")
    def _check_consistency(self) -> Scenario:
        errors = self.envelope().validate()
        if self.geometry == "cartesian1d" and self.n != 1:
            errors.append(f"cartesian1d geometry needs n = 1 (got n={self.n}).")
        if self.fit_window is not None and not 0 < self.fit_window[0] < self.fit_window[1]:
            errors.append(f"fit_window must satisfy 0 < lo < hi (got {list(self.fit_window)}).")
        if errors:
            raise ValueError(" ".join(errors))
        return self

    def envelope(self) -> PowerLawEnvelope:
        return PowerLawEnvelope(
            alpha=self.alpha,
            beta=self.beta,
            gamma=self.gamma,
            a0=self.a0,
            a1=self.a1,
            b0=self.b0,
            b1=self.b1,
            c0=self.c0,
            c1=self.c1,
        )

    @property
    def admissibility_mode(self) -> AdmissibilityMode:
        return AdmissibilityMode(self.admissibility)

    def coefficient_field(self) -> CoefficientField:
        """Build the coefficient field; raises EnvelopeError on a violating profile."""
        return make_power_law(self.envelope(), ProfileKind(self.profile_kind))

    def initial_data(self) -> InitialData:
        return named_initial_data(self.data, self.amplitude, self.data_radius)

    def source_field(self) -> SourceField:
        return named_source(self.source, self.source_amplitude, self.data_radius, self.source_order)

    def support(self) -> SupportSpec:
        return build_q(self.envelope(), R=self.data_radius)

    def build_grid(self) -> Grid:
        """Grid reaching past the predicted cone at t_end unless r_max is fixed."""
        r_max = self.r_max if self.r_max is not None else grid_radius(self.support(), self.t_end)
        return Grid(kind=GridKind(self.geometry), n=self.n, r_max=r_max, m=self.grid)

    def cadence(self) -> Cadence:
        return Cadence.geometric(self.snapshots_per_decade)

    def with_overrides(self, **updates: object) -> Scenario:
        """Apply CLI overrides (None values are ignored) and re-validate."""
        changes = {key: value for key, value in updates.items() if value is not None}
        if not changes:
            return self
        return Scenario.model_validate({**self.model_dump(), **changes})


def load_scenario(path: Path | str) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        OSError: If the file cannot be read.
        pydantic.ValidationError: On unknown keys or invalid values.

    """
    return Scenario.model_validate_json(Path(path).read_text(encoding="utf-8"))


def get_output_root() -> Path:
    """Output root from WAVEDECAY_OUTPUT_DIR, defaulting to ./results."""
    return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
