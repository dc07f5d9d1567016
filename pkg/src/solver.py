# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Leapfrog evolution of c u_tt - div(b grad u) + a u_t = h on radial and 1-D grids.

The spatial operator is a conservative finite-volume divergence, so
sum(V * v * L(u)) = -sum(A_f * b_f * dx * grad(u) * grad(v)) holds exactly and
the discrete energy identity carries no spatial error.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property, lru_cache
from typing import Literal, NamedTuple

import numpy as np

from coefficients import CoefficientField, Evaluator, InitialData, SourceField
from support import OVERFLOW_FRACTION, support_radius
from validation import collect_validation_errors, validate_positive

logger = logging.getLogger(__name__)

MIN_NODES = 16

DEFAULT_CFL = 0.5

# Snapshots per decade of (1 + t) for the geometric cadence
DEFAULT_PER_DECADE = 64


class GridError(ValueError):
    """Raised for a malformed grid."""


class InstabilityError(RuntimeError):
    """Raised when an update produces a non-finite value."""


class CascadeError(ValueError):
    """Raised when a cascade order needs source derivatives that are not available."""


class GridKind(StrEnum):
    RADIAL = "radial"
    CARTESIAN1D = "cartesian1d"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, r_max] (radial) or [-r_max, r_max] (cartesian1d).

    Radial grids carry the dimension n through the face areas w_n r^(n-1) and
    the shell volumes; the origin node has no inner face. Outer nodes are
    homogeneous Dirichlet.
    """

    kind: GridKind = GridKind.RADIAL
    n: int = 3
    r_max: float = 1.0
    m: int = 256

    def __post_init__(self) -> None:
        errors = collect_validation_errors(
            validate_positive(self.r_max, "r_max"),
            None if self.m >= MIN_NODES else f"m must be at least {MIN_NODES} (got {self.m}).",
            None if self.n >= 1 else f"n must be at least 1 (got {self.n}).",
        )
        if errors:
            raise GridError(" ".join(errors))

    @property
    def dx(self) -> float:
        return self.r_max / (self.m - 1)

    @property
    def dimension(self) -> int:
        """Dimension entering the radial divergence (1 for the Cartesian line)."""
        return self.n if self.kind is GridKind.RADIAL else 1

    @cached_property
    def sphere_area(self) -> float:
        """Surface area of the unit sphere in dimension n."""
        if self.kind is GridKind.CARTESIAN1D:
            return 1.0
        return 2.0 * math.pi ** (self.n / 2) / math.gamma(self.n / 2)

    @cached_property
    def nodes(self) -> np.ndarray:
        if self.kind is GridKind.RADIAL:
            return np.arange(self.m) * self.dx
        return np.arange(2 * self.m - 1) * self.dx - self.r_max

    @property
    def size(self) -> int:
        return self.nodes.size

    @cached_property
    def radii(self) -> np.ndarray:
        return np.abs(self.nodes)

    @cached_property
    def face_radii(self) -> np.ndarray:
        return np.abs(0.5 * (self.nodes[:-1] + self.nodes[1:]))

    @cached_property
    def face_areas(self) -> np.ndarray:
        if self.kind is GridKind.CARTESIAN1D:
            return np.ones(self.size - 1)
        return self.sphere_area * self.face_radii ** (self.n - 1)

    @cached_property
    def volumes(self) -> np.ndarray:
        """Control volume of each node (the quadrature weight of every integral)."""
        half = 0.5 * self.dx
        if self.kind is GridKind.CARTESIAN1D:
            vol = np.full(self.size, self.dx)
            vol[[0, -1]] = half
            return vol
        left = np.maximum(self.nodes - half, 0.0)
        right = np.minimum(self.nodes + half, self.r_max)
        return self.sphere_area * (right**self.n - left**self.n) / self.n

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.ones(self.size, dtype=bool)
        mask[-1] = False
        if self.kind is GridKind.CARTESIAN1D:
            mask[0] = False
        return mask

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Face-centred derivative (u[i+1] - u[i]) / dx."""
        return np.diff(u) / self.dx

    def divergence(self, u: np.ndarray, b_face: np.ndarray) -> np.ndarray:
        """Conservative div(b grad u) at nodes; zero on Dirichlet nodes."""
        flux = self.face_areas * b_face * self.gradient(u)
        out = np.zeros_like(u, dtype=float)
        out[:-1] += flux
        out[1:] -= flux
        out /= self.volumes
        out[~self.interior] = 0.0
        return out

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of a nodal field over the domain."""
        return float(np.dot(self.volumes, values))

    def energy_density(
        self, field: CoefficientField, u: np.ndarray, u_t: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Kinetic energy per node and potential energy per face."""
        disc = discretize(self, field)
        kinetic = 0.5 * disc.c * self.volumes * u_t * u_t
        kinetic[~self.interior] = 0.0
        grad = self.gradient(u)
        potential = 0.5 * self.face_areas * disc.b_face * self.dx * grad * grad
        return kinetic, potential


class Discretization(NamedTuple):
    """Coefficient values sampled on a grid."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    b_face: np.ndarray


@lru_cache(maxsize=64)
def discretize(grid: Grid, field: CoefficientField) -> Discretization:
    """Sample a, b, c at the nodes and b at the faces (cached per grid and field)."""
    arrays = Discretization(
        a=field.a(grid.radii),
        b=field.b(grid.radii),
        c=field.c(grid.radii),
        b_face=field.b(grid.face_radii),
    )
    for arr in arrays:
        arr.flags.writeable = False
    return arrays


class State(NamedTuple):
    """Two-level leapfrog state."""

    t: float
    u: np.ndarray
    u_prev: np.ndarray


class Snapshot(NamedTuple):
    """Stored solution at one step with its centred first and second time differences."""

    t: float
    step: int
    u: np.ndarray
    u_t: np.ndarray
    u_tt: np.ndarray


@dataclass(frozen=True)
class Cadence:
    """Which steps of a run are stored as snapshots.

    uniform stores every `value` time units, stride every `value` steps and
    geometric `value` snapshots per decade of (1 + t). The first and last
    steps are always stored.
    """

    kind: Literal["uniform", "geometric", "stride"] = "geometric"
    value: float = DEFAULT_PER_DECADE

    @classmethod
    def uniform(cls, every: float) -> Cadence:
        return cls("uniform", every)

    @classmethod
    def geometric(cls, per_decade: int = DEFAULT_PER_DECADE) -> Cadence:
        return cls("geometric", per_decade)

    @classmethod
    def stride(cls, steps: int) -> Cadence:
        return cls("stride", steps)

    def steps(self, n_steps: int, dt: float) -> np.ndarray:
        if not self.value > 0:
            msg = f"cadence value must be positive (got {self.value})."
            raise ValueError(msg)
        if n_steps == 0:
            return np.zeros(1, dtype=int)
        t_end = n_steps * dt
        if self.kind == "stride":
            raw = np.arange(0, n_steps + 1, max(1, round(self.value)))
        elif self.kind == "uniform":
            raw = np.rint(np.arange(0.0, t_end + 0.5 * self.value, self.value) / dt)
        else:
            decades = math.log10(1.0 + t_end)
            count = math.ceil(decades * self.value) + 1
            times = 10.0 ** np.linspace(0.0, (count - 1) / self.value, count) - 1.0
            raw = np.rint(times / dt)
        chosen = np.clip(raw.astype(int), 0, n_steps)
        return np.unique(np.concatenate(([0, n_steps], chosen)))


@dataclass
class Trajectory:
    """Snapshots of one evolution (the k-th cascade when cascade_order = k)."""

    grid: Grid
    snapshots: list[Snapshot]
    cascade_order: int = 0
    dt: float = 0.0
    cfl: float = DEFAULT_CFL
    coefficient_hash: str = ""
    metadata: dict[str, object] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def snapshot_at(self, step: int) -> Snapshot:
        for snap in self.snapshots:
            if snap.step == step:
                return snap
        msg = f"no snapshot at step {step}"
        raise KeyError(msg)


def stable_dt(grid: Grid, field: CoefficientField, cfl: float = DEFAULT_CFL) -> float:
    """Time step cfl * dx * min sqrt(c/b), reduced at a radial origin.

    On radial grids with n >= 2 the step is cfl * dx * min sqrt(c/b) * 2/sqrt(2n+2),
    not the plain CFL step. The origin row of the radial operator has diagonal
    2n/dx^2, which lifts the largest eigenvalue above 4/dx^2; the factor keeps the
    leapfrog scheme stable up to cfl = 1.

    Raises:
        ValueError: If cfl is outside (0, 1].

    """
    if not 0.0 < cfl <= 1.0:
        msg = f"cfl must lie in (0, 1] (got {cfl})."
        raise ValueError(msg)
    disc = discretize(grid, field)
    dt = cfl * grid.dx * float(np.min(np.sqrt(disc.c / disc.b)))
    if grid.kind is GridKind.RADIAL and grid.n >= 2:
        dt *= 2.0 / math.sqrt(2.0 * grid.n + 2.0)
    return dt


def _acceleration(
    grid: Grid, disc: Discretization, u: np.ndarray, u_t: np.ndarray, forcing: np.ndarray
) -> np.ndarray:
    # u_tt = c^-1 (L u - a u_t + h), zero on Dirichlet nodes
    out = (grid.divergence(u, disc.b_face) - disc.a * u_t + forcing) / disc.c
    out[~grid.interior] = 0.0
    return out


def _check_finite(grid: Grid, u: np.ndarray, t: float) -> None:
    bad = ~np.isfinite(u)
    if bad.any():
        node = int(np.argmax(bad))
        msg = f"non-finite value at node {node} (r={grid.nodes[node]:g}) at t={t:g}"
        raise InstabilityError(msg)


def step(state: State, field: CoefficientField, source: SourceField, grid: Grid, dt: float) -> State:
    """Advance one leapfrog step with time-centred damping.

    Solves c(u+ - 2u + u-)/dt^2 + a(u+ - u-)/(2dt) = L u + h(t) nodewise for u+.

    Raises:
        InstabilityError: If the update is not finite.

    """
    disc = discretize(grid, field)
    forcing = source.evaluate(grid.radii, state.t)
    half = 0.5 * dt * disc.a
    rhs = dt * dt * (grid.divergence(state.u, disc.b_face) + forcing)
    u_next = (rhs + 2.0 * disc.c * state.u - (disc.c - half) * state.u_prev) / (disc.c + half)
    u_next[~grid.interior] = 0.0
    _check_finite(grid, u_next, state.t + dt)
    return State(state.t + dt, u_next, state.u)


def evolve(
    v0: np.ndarray,
    v1: np.ndarray,
    field: CoefficientField,
    source: SourceField,
    grid: Grid,
    t_end: float,
    cadence: Cadence,
    dt: float,
    cascade_order: int = 0,
) -> Trajectory:
    """Evolve nodal data (v0, v1) to t_end, storing snapshots on the cadence.

    The step is shrunk so that t_end is reached exactly. The first step uses
    the Taylor start u(-dt) = v0 - dt v1 + dt^2/2 u_tt(0), so the stored
    initial snapshot carries v1 and u_tt(0) exactly.
    """
    disc = discretize(grid, field)
    n_steps = math.ceil(t_end / dt - 1e-9) if t_end > 0 else 0
    if n_steps:
        dt = t_end / n_steps
    record = {int(s) for s in cadence.steps(n_steps, dt)}

    u = np.where(grid.interior, v0, 0.0)
    u_t0 = np.where(grid.interior, v1, 0.0)
    accel = _acceleration(grid, disc, u, u_t0, source.evaluate(grid.radii, 0.0))
    state = State(0.0, u, u - dt * u_t0 + 0.5 * dt * dt * accel)

    snapshots: list[Snapshot] = []
    overflow_warned = False
    for n in range(n_steps + 1):
        nxt = step(state, field, source, grid, dt)
        if n in record:
            t = t_end if n == n_steps else n * dt
            if n == 0:
                snap = Snapshot(0.0, 0, state.u, u_t0, accel)
            else:
                u_t = (nxt.u - state.u_prev) / (2.0 * dt)
                u_tt = (nxt.u - 2.0 * state.u + state.u_prev) / (dt * dt)
                snap = Snapshot(t, n, state.u, u_t, u_tt)
            snapshots.append(snap)
            if not overflow_warned and support_radius(snap, grid) >= OVERFLOW_FRACTION * grid.r_max:
                logger.warning(
                    "Cone overflow: support reaches %.3g of r_max=%g at t=%g (cascade %d)",
                    OVERFLOW_FRACTION,
                    grid.r_max,
                    t,
                    cascade_order,
                )
                overflow_warned = True
        state = nxt

    return Trajectory(
        grid=grid,
        snapshots=snapshots,
        cascade_order=cascade_order,
        dt=dt,
        coefficient_hash=field.fingerprint(),
        metadata={"n_steps": n_steps},
    )


def run(
    data: InitialData,
    field: CoefficientField,
    source: SourceField,
    grid: Grid,
    t_end: float,
    cadence: Cadence | None = None,
    cfl: float = DEFAULT_CFL,
) -> Trajectory:
    """Evolve initial data to t_end and return the trajectory.

    Raises:
        InstabilityError: Propagated from any step.

    """
    dt = stable_dt(grid, field, cfl)
    trajectory = evolve(
        data.u0(grid.radii),
        data.u1(grid.radii),
        field,
        source,
        grid,
        t_end,
        cadence or Cadence.geometric(),
        dt,
    )
    trajectory.cfl = cfl
    return trajectory


def cascade_initial_data(
    data: InitialData, field: CoefficientField, source: SourceField, grid: Grid, k: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Initial data (w_j, w_{j+1}) of v = d^j u / dt^j for j = 0..k.

    w_0 = u0, w_1 = u1 and w_{j+2} = c^-1 (L w_j - a w_{j+1} + d^j h/dt^j (., 0)).

    Raises:
        CascadeError: If k is negative or exceeds the source's derivative order.

    """
    if k < 0:
        msg = f"cascade order must be non-negative (got {k})."
        raise CascadeError(msg)
    if not source.supports(k):
        msg = f"cascade order {k} needs d^{k}h/dt^{k}; source provides order {source.time_derivative_order}."
        raise CascadeError(msg)
    disc = discretize(grid, field)
    w = [np.where(grid.interior, data.u0(grid.radii), 0.0), np.where(grid.interior, data.u1(grid.radii), 0.0)]
    for j in range(k):
        forcing = source.evaluate(grid.radii, 0.0, j)
        w.append(_acceleration(grid, disc, w[j], w[j + 1], forcing))
    return [(w[j], w[j + 1]) for j in range(k + 1)]


def run_cascade(
    data: InitialData,
    field: CoefficientField,
    source: SourceField,
    grid: Grid,
    k: int,
    t_end: float,
    cadence: Cadence | None = None,
    cfl: float = DEFAULT_CFL,
    max_workers: int | None = None,
) -> list[Trajectory]:
    """Evolve u and its first k time derivatives on a shared grid, step and cadence.

    The k+1 evolutions are independent and run on a thread pool; the result
    is ordered by cascade order.
    """
    pairs = cascade_initial_data(data, field, source, grid, k)
    dt = stable_dt(grid, field, cfl)
    cadence = cadence or Cadence.geometric()
    logger.info("Evolving cascade orders 0..%d on %d nodes, dt=%.4g", k, grid.size, dt)

    def evolve_order(j: int) -> Trajectory:
        v0, v1 = pairs[j]
        trajectory = evolve(v0, v1, field, source.derivative(j), grid, t_end, cadence, dt, cascade_order=j)
        trajectory.cfl = cfl
        return trajectory

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(evolve_order, range(k + 1)))


TimeFactor = Callable[[float, int], float]


@dataclass(frozen=True)
class ManufacturedSolution:
    """Separable closed-form solution u*(r, t) = phi(r) tau(t).

    Attributes:
        phi: Radial profile with its first and second derivatives dphi, d2phi
        tau: (t, j) -> j-th derivative of the time factor

    """

    phi: Evaluator
    dphi: Evaluator
    d2phi: Evaluator
    tau: TimeFactor
    radius: float = 1.0

    def __call__(self, r: np.ndarray, t: float) -> np.ndarray:
        return self.phi(r) * self.tau(t, 0)

    def initial_data(self) -> InitialData:
        tau0, tau1 = self.tau(0.0, 0), self.tau(0.0, 1)
        return InitialData(
            u0=lambda r: tau0 * self.phi(r),
            u1=lambda r: tau1 * self.phi(r),
            R=self.radius,
            name="manufactured",
        )


def cosine_bump(radius: float = 1.5) -> ManufacturedSolution:
    """u* = (1 - (r/radius)^2)^4 cos t, zero for r >= radius."""
    rho2 = radius * radius

    def phi(r: np.ndarray) -> np.ndarray:
        s = np.clip(1.0 - np.asarray(r, dtype=float) ** 2 / rho2, 0.0, None)
        return s**4

    def dphi(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = np.clip(1.0 - r * r / rho2, 0.0, None)
        return -8.0 * r / rho2 * s**3

    def d2phi(r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        s = np.clip(1.0 - r * r / rho2, 0.0, None)
        return -8.0 / rho2 * s**3 + 48.0 * r * r / (rho2 * rho2) * s**2

    return ManufacturedSolution(phi, dphi, d2phi, lambda t, j: math.cos(t + 0.5 * j * math.pi), radius)


def manufactured_source(u_star: ManufacturedSolution, field: CoefficientField, grid: Grid) -> SourceField:
    """Source h = c u*_tt - div(b grad u*) + a u*_t with every time derivative.

    d^j h/dt^j = (c tau^(j+2) + a tau^(j+1)) phi - tau^(j) div(b grad phi), where
    div(b grad phi) = b phi'' + (b' + (n-1) b / r) phi' and phi'/r -> phi'' at r = 0.
    """
    n = grid.dimension

    def h_eval(r: np.ndarray, t: float, j: int) -> np.ndarray:
        a, b, c = field.a(r), field.b(r), field.c(r)
        d1, d2 = u_star.dphi(r), u_star.d2phi(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope_over_r = np.where(r > 0, d1 / np.where(r > 0, r, 1.0), d2)
        div = b * d2 + field.derivative("b", r) * d1 + (n - 1) * b * slope_over_r
        tau = u_star.tau
        return (c * tau(t, j + 2) + a * tau(t, j + 1)) * u_star.phi(r) - tau(t, j) * div

    return SourceField(h_eval=h_eval, time_derivative_order=None)


def mms_error(trajectory: Trajectory, u_star: ManufacturedSolution) -> float:
    """Largest L2 error over the snapshots against the manufactured solution."""
    grid = trajectory.grid
    errors = [
        math.sqrt(grid.integrate((snap.u - u_star(grid.radii, snap.t)) ** 2)) for snap in trajectory.snapshots
    ]
    return max(errors, default=0.0)
