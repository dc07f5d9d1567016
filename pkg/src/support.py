# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Finite speed of propagation: the function q, the predicted cone and its verification."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

if TYPE_CHECKING:
    from coefficients import CoefficientField, PowerLawEnvelope, SourceField
    from solver import Grid, Snapshot, Trajectory

logger = logging.getLogger(__name__)

# Relative amplitude below which a node counts as outside the support
DEFAULT_EPSILON = 1e-8

# Relative energy allowed outside the predicted cone
DEFAULT_CONE_TOLERANCE = 1e-6

# Grid sizing margin over the predicted radius at the final time
GRID_MARGIN = 1.1

# Fraction of r_max at which the solver warns about the cone reaching the boundary
OVERFLOW_FRACTION = 0.95


class SupportError(ValueError):
    """Raised when no propagation function exists (beta + gamma >= 2)."""


@dataclass(frozen=True)
class SupportSpec:
    """Explicit propagation function q(r) = K(1+r)^p with p = 1 - (beta+gamma)/2.

    Attributes:
        q0: Cone constant, the largest q0 with q(r) >= q0 r^p for all r > 0
        beta: Stiffness exponent
        gamma: Mass exponent
        R: Data support radius
        scale: The constant K = sqrt(c0/b1) / p

    """

    q0: float
    beta: float
    gamma: float
    R: float
    scale: float

    @property
    def exponent(self) -> float:
        return 1.0 - 0.5 * (self.beta + self.gamma)

    def q(self, r: np.ndarray | float) -> np.ndarray:
        return self.scale * (1.0 + np.asarray(r, dtype=float)) ** self.exponent

    def dq(self, r: np.ndarray | float) -> np.ndarray:
        p = self.exponent
        return self.scale * p * (1.0 + np.asarray(r, dtype=float)) ** (p - 1.0)

    @property
    def q_R(self) -> float:
        return float(self.q(self.R))

    def outside_cone(self, r: np.ndarray, t: float) -> np.ndarray:
        """Mask of radii with q(r) > t + q(R), where the solution must vanish."""
        return self.q(r) > t + self.q_R


def build_q(envelope: PowerLawEnvelope, R: float = 0.0) -> SupportSpec:
    """Build the propagation function from the envelope constants c0 and b1.

    Args:
        envelope: Coefficient envelope
        R: Support radius of the initial data and source

    Returns:
        SupportSpec with q(r) = sqrt(c0/b1) * 2/(2-beta-gamma) * (1+r)^(1-(beta+gamma)/2)

    Raises:
        SupportError: If beta + gamma >= 2.

    """
    if not envelope.beta + envelope.gamma < 2.0:
        msg = f"no propagation cone for β+γ={envelope.beta + envelope.gamma:g}; need β+γ<2."
        raise SupportError(msg)
    p = envelope.cone_exponent
    scale = math.sqrt(envelope.c0 / envelope.b1) / p
    # ((1+r)/r)^p decreases to 1, so the infimum of q(r)/r^p is the scale itself
    return SupportSpec(q0=scale, beta=envelope.beta, gamma=envelope.gamma, R=R, scale=scale)


def check_propagation_speed(spec: SupportSpec, field: CoefficientField, r_samples: np.ndarray) -> list[float]:
    """Radii at which q'(r) exceeds the local slowness sqrt(c/b)."""
    r = np.asarray(r_samples, dtype=float)
    slowness = np.sqrt(field.c(r) / field.b(r))
    bad = spec.dq(r) > slowness * (1.0 + 1e-12)
    return [float(x) for x in r[bad]]


def predicted_radius(spec: SupportSpec, t: float) -> float:
    """Radius beyond which the solution vanishes at time t: ((t + q(R))/q0)^(1/p)."""
    if t < 0:
        msg = f"t must be non-negative (got {t})."
        raise SupportError(msg)
    return float(((t + spec.q_R) / spec.q0) ** (1.0 / spec.exponent))


def grid_radius(spec: SupportSpec, t_end: float) -> float:
    """Domain radius that keeps the cone away from the outer boundary through t_end."""
    return GRID_MARGIN * predicted_radius(spec, t_end)


def support_radius(snapshot: Snapshot, grid: Grid, epsilon: float = DEFAULT_EPSILON) -> float:
    """Largest radius with |u| >= epsilon * max|u|, and 0 for the zero snapshot."""
    if not 0.0 < epsilon <= 1.0:
        msg = f"epsilon must lie in (0, 1] (got {epsilon})."
        raise SupportError(msg)
    magnitude = np.abs(snapshot.u)
    peak = float(magnitude.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    return float(grid.radii[magnitude >= epsilon * peak].max())


@dataclass(frozen=True)
class ConeEntry:
    snapshot_t: float
    predicted_radius: float
    measured_radius: float
    outside_fraction: float | None
    passed: bool
    inconclusive: bool = False

    def as_dict(self) -> dict[str, object]:
        return {
            "snapshot_t": self.snapshot_t,
            "predicted_radius": self.predicted_radius,
            "measured_radius": self.measured_radius,
            "outside_fraction": self.outside_fraction,
            "pass": self.passed,
            "inconclusive": self.inconclusive,
        }


@dataclass(frozen=True)
class ConeReport:
    """Per-snapshot finite-propagation check of one trajectory."""

    tolerance: float
    entries: tuple[ConeEntry, ...] = ()

    @property
    def verdict(self) -> Literal["pass", "fail", "inconclusive"]:
        if any(not e.passed and not e.inconclusive for e in self.entries):
            return "fail"
        if any(e.inconclusive for e in self.entries):
            return "inconclusive"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def worst_fraction(self) -> float:
        return max((e.outside_fraction for e in self.entries if e.outside_fraction is not None), default=0.0)

    def as_dict(self) -> dict[str, object]:
        return {
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "worst_outside_fraction": self.worst_fraction,
            "snapshots": [e.as_dict() for e in self.entries],
        }


def verify_cone(
    trajectory: Trajectory,
    spec: SupportSpec,
    field: CoefficientField,
    tolerance: float = DEFAULT_CONE_TOLERANCE,
) -> ConeReport:
    """Measure the energy fraction outside the predicted radius at every snapshot.

    Energy is split into kinetic parts at nodes and potential parts at cell
    faces; a part counts as outside when its radius exceeds the prediction.
    Snapshots whose predicted radius exceeds the grid are inconclusive.
    """
    grid = trajectory.grid
    entries = []
    for snap in trajectory.snapshots:
        radius = predicted_radius(spec, snap.t)
        measured = support_radius(snap, grid)
        if radius >= grid.r_max:
            entries.append(ConeEntry(snap.t, radius, measured, None, passed=False, inconclusive=True))
            continue
        kinetic, potential = grid.energy_density(field, snap.u, snap.u_t)
        total = float(kinetic.sum() + potential.sum())
        outside = float(kinetic[grid.radii > radius].sum() + potential[grid.face_radii > radius].sum())
        fraction = outside / total if total > 0.0 else 0.0
        entries.append(ConeEntry(snap.t, radius, measured, fraction, passed=fraction <= tolerance))

    report = ConeReport(tolerance=tolerance, entries=tuple(entries))
    if report.verdict == "inconclusive":
        logger.warning("Cone verification inconclusive: predicted radius exceeds r_max=%g", grid.r_max)
    return report


@dataclass(frozen=True)
class SourceSupportViolation:
    r: float
    t: float
    value: float


def source_support_violations(
    source: SourceField,
    spec: SupportSpec,
    rng: np.random.Generator,
    count: int = 1000,
    t_max: float = 100.0,
) -> list[SourceSupportViolation]:
    """Evaluate h at random points outside the cone and list every nonzero value."""
    t = rng.uniform(0.0, t_max, size=count)
    inner = np.array([predicted_radius(spec, ti) for ti in t])
    # start just past the cone boundary q(r) = t + q(R)
    cone = ((t + spec.q_R) / spec.scale) ** (1.0 / spec.exponent) - 1.0
    r = np.maximum(cone, 0.0) * (1.0 + 1e-9) + rng.uniform(0.0, 1.0, size=count) * inner
    violations = []
    for ri, ti in zip(r, t, strict=True):
        if not spec.outside_cone(np.array([ri]), ti)[0]:
            continue
        value = float(source.evaluate(np.array([ri]), float(ti))[0])
        if value != 0.0:
            violations.append(SourceSupportViolation(float(ri), float(ti), value))
    return violations
