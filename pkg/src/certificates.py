# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Sampled certificates for the structural hypotheses behind the decay estimates.

Each check returns a report carrying pass/fail and worst margins instead of
raising; only malformed inputs raise `CertificateError`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from solver import Grid, GridKind
from support import SupportSpec, predicted_radius
from validation import collect_validation_errors, validate_minimum_count, validate_open_interval, validate_positive

if TYPE_CHECKING:
    from coefficients import AdmissibilityReport, CoefficientField, Evaluator, PowerLawEnvelope

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.1

# Radial nodes per time sample for the M-condition suprema
SUP_NODES = 2048

# Relative slack allowed in div(b grad A) >= a at grid nodes
SUBSOLUTION_RTOL = 1e-3

# Slack on the growth exponent of A over the outer quarter
GROWTH_SLACK = 0.05

# Largest log-log slope still read as "bounded"
BOUNDED_SLOPE = 0.1

# Required relative margin of W <= a/c at T0 after calibration
AMPLITUDE_MARGIN = 0.1


class CertificateError(ValueError):
    """Raised for rejected weight parameters, a pole in the mu formula or bad sampling input."""


def omega_window(envelope: PowerLawEnvelope) -> tuple[float, float] | None:
    """Open interval of admissible weight exponents, None when empty.

    Raises:
        CertificateError: If beta + gamma >= 2.

    Examples:
        >>> omega_window(PowerLawEnvelope(alpha=0.5))
        (0.5, 1.0)
        >>> omega_window(PowerLawEnvelope(alpha=1.2)) is None
        True

    """
    spread = 2.0 - envelope.beta - envelope.gamma
    if not spread > 0:
        msg = f"no ω window: β+γ={envelope.beta + envelope.gamma:g} violates the cone condition β+γ<2."
        raise CertificateError(msg)
    lower = max(0.0, 2.0 * (envelope.alpha - envelope.gamma) / spread)
    if lower >= 1.0:
        return None
    return (lower, 1.0)


@dataclass(frozen=True)
class WeightSpec:
    """Weight W(t) = w0 (1+t)^(-omega) with power nu and quadratic-form constant C0.

    T0 stays None until `verify_weight` finds a start time.
    """

    omega: float
    w0: float
    nu: float
    C0: float
    T0: float | None = None

    @property
    def theta(self) -> float:
        return self.nu - self.omega

    def W(self, t: np.ndarray | float) -> np.ndarray:
        return self.w0 * (1.0 + np.asarray(t, dtype=float)) ** (-self.omega)

    def W_t(self, t: np.ndarray | float) -> np.ndarray:
        return -self.omega * self.w0 * (1.0 + np.asarray(t, dtype=float)) ** (-self.omega - 1.0)

    def W_tt(self, t: np.ndarray | float) -> np.ndarray:
        return self.omega * (self.omega + 1.0) * self.w0 * (1.0 + np.asarray(t, dtype=float)) ** (-self.omega - 2.0)


def build_weight(
    envelope: PowerLawEnvelope, omega: float, w0: float = 1.0, nu: float | None = None, C0: float = 1.0
) -> WeightSpec:
    """Validate weight parameters against the omega window.

    Args:
        envelope: Coefficient envelope defining the window
        omega: Weight exponent
        w0: Weight amplitude
        nu: Weight power; defaults to omega + 1/2
        C0: Quadratic-form constant

    Returns:
        WeightSpec with T0 unset.

    Raises:
        CertificateError: Naming the violated window bound, 4C0-2 <= 0 or nu < omega.

    """
    window = omega_window(envelope)
    if window is None:
        msg = "ω window is empty for this envelope."
        raise CertificateError(msg)
    nu = omega + 0.5 if nu is None else nu
    errors = collect_validation_errors(
        validate_open_interval(omega, *window, "ω"),
        validate_positive(w0, "w0"),
        None if 4.0 * C0 - 2.0 > 0 else f"4C0−2 ≤ 0 (got C0={C0:g}).",
        None if nu >= omega else f"ν below ω (got ν={nu:g}, ω={omega:g}).",
    )
    if errors:
        raise CertificateError(" ".join(errors))
    return WeightSpec(omega=omega, w0=w0, nu=nu, C0=C0)


@dataclass(frozen=True)
class WeightSampling:
    """Sampling plan of `verify_weight`: t geometric in (1+t), r uniform in the support ball."""

    t_count: int = 200
    r_count: int = 256

    def times(self, t_max: float) -> np.ndarray:
        return np.expm1(np.linspace(0.0, math.log1p(t_max), self.t_count))


@dataclass(frozen=True)
class MarginEntry:
    """Worst normalized margin of one inequality and where it occurs."""

    name: str
    worst_margin: float
    t: float
    r: float

    @property
    def passed(self) -> bool:
        return self.worst_margin >= 0.0

    def as_dict(self) -> dict[str, object]:
        return {"name": self.name, "worst_margin": self.worst_margin, "t": self.t, "r": self.r, "pass": self.passed}


@dataclass(frozen=True)
class WeightReport:
    """Result of `verify_weight`; `binding` names the failing inequality on failure."""

    passed: bool
    T0: float | None
    margins: tuple[MarginEntry, ...]
    samples: int
    binding: MarginEntry | None = None

    def as_dict(self) -> dict[str, object]:
        return {
            "pass": self.passed,
            "T0": self.T0,
            "samples": self.samples,
            "margins": [m.as_dict() for m in self.margins],
            "binding": None if self.binding is None else self.binding.as_dict(),
        }


def _weight_inequalities(
    spec: WeightSpec, envelope: PowerLawEnvelope, field: CoefficientField, t: float, r: np.ndarray
) -> dict[str, np.ndarray]:
    # every entry is value / sum of |terms|, so the sign decides and |margin| <= 1
    a, c = field.a(r), field.c(r)
    W, W_t, W_tt = float(spec.W(t)), float(spec.W_t(t)), float(spec.W_tt(t))
    w0, om = spec.w0, spec.omega
    ratio = a / c
    env = (1.0 + r) ** (envelope.gamma - envelope.alpha)
    decay = (1.0 + t) ** (-om)

    def normalized(*terms: np.ndarray | float) -> np.ndarray:
        total = sum(np.asarray(x) for x in terms)
        scale = sum(np.abs(x) for x in terms)
        return np.asarray(total / np.where(scale > 0, scale, 1.0)) * np.ones_like(r)

    return {
        "weight_below_ratio": (ratio - W) / ratio,
        "weight_convexity": normalized(W_tt * c, -W_t * a),
        "left_form": normalized(2.0 * W * a, -2.0 * W_t * c, -W * W * c),
        "left_form_envelope": normalized(
            2.0 * w0 * envelope.a0 * env,
            2.0 * w0 * om * envelope.c0 / (1.0 + t),
            -w0 * w0 * envelope.c1 * decay,
        ),
        "right_form": normalized((4.0 * spec.C0 - 2.0) * W * a, 2.0 * W_t * c, -W * W * c),
        "power_growth": normalized(w0 * (1.0 + t) ** (1.0 - om), -2.0 * spec.nu),
    }


def verify_weight(
    spec: WeightSpec,
    field: CoefficientField,
    support: SupportSpec,
    t_max: float,
    samples: WeightSampling | None = None,
) -> tuple[WeightSpec, WeightReport]:
    """Find the first sampled T0 from which every weight inequality holds through t_max.

    Checks W <= a/c, W_tt c - W_t a >= 0, the field form of the left quadratic
    bound 2Wa - 2W_t c - W^2 c >= 0, its envelope reduction
    2 w0 a0 (1+r)^(gamma-alpha) + 2 w0 omega c0 (1+t)^-1 - w0^2 c1 (1+t)^-omega >= 0,
    the right bound (4C0-2)Wa + 2W_t c - W^2 c >= 0 and w0 (1+t)^(1-omega) > 2 nu,
    at every sampled radius of the time-t support ball.

    Returns:
        The weight with T0 set (unchanged on failure) and the report.

    """
    samples = samples or WeightSampling()
    times = samples.times(t_max)
    per_time: list[dict[str, tuple[float, float]]] = []
    for t in times:
        r = np.linspace(0.0, predicted_radius(support, float(t)), samples.r_count)
        values = _weight_inequalities(spec, field.envelope, field, float(t), r)
        per_time.append({name: (float(v.min()), float(r[int(np.argmin(v))])) for name, v in values.items()})

    ok = np.array([all(m >= 0.0 for m, _ in row.values()) for row in per_time])
    # T0 is the first sample after the last failing one
    failing = np.flatnonzero(~ok)
    start = 0 if failing.size == 0 else int(failing[-1]) + 1
    names = list(per_time[0])

    def worst(name: str, rows: range) -> MarginEntry:
        i = min(rows, key=lambda j: per_time[j][name][0])
        margin, r_at = per_time[i][name]
        return MarginEntry(name, margin, float(times[i]), r_at)

    if start >= len(times):
        margins = tuple(worst(name, range(len(times))) for name in names)
        last = len(times) - 1
        binding_name = min(names, key=lambda name: per_time[last][name][0])
        binding = worst(binding_name, range(last, last + 1))
        logger.warning(
            "Weight verification failed: %s binds at t=%g, r=%g (margin %.3g)",
            binding.name,
            binding.t,
            binding.r,
            binding.worst_margin,
        )
        report = WeightReport(False, None, margins, len(times) * samples.r_count, binding)
        return spec, report

    T0 = float(times[start])
    margins = tuple(worst(name, range(start, len(times))) for name in names)
    return replace(spec, T0=T0), WeightReport(True, T0, margins, len(times) * samples.r_count)


def calibrate_amplitude(
    spec: WeightSpec,
    field: CoefficientField,
    support: SupportSpec,
    t_max: float,
    samples: WeightSampling | None = None,
) -> tuple[WeightSpec, WeightReport]:
    """Shrink w0 until W <= a/c holds at T0 with at least a 10% margin, then re-verify."""
    verified, report = verify_weight(spec, field, support, t_max, samples)
    if verified.T0 is None:
        return verified, report
    r = np.linspace(0.0, predicted_radius(support, verified.T0), (samples or WeightSampling()).r_count)
    ceiling = (1.0 - AMPLITUDE_MARGIN) * float(np.min(field.a(r) / field.c(r)))
    if float(verified.W(verified.T0)) <= ceiling:
        return verified, report
    w0 = ceiling * (1.0 + verified.T0) ** verified.omega
    logger.info("Calibrating weight amplitude w0: %.4g -> %.4g", spec.w0, w0)
    return verify_weight(replace(spec, w0=w0, T0=None), field, support, t_max, samples)


@dataclass(frozen=True)
class SubsolutionSpec:
    """Radial subsolution A with div(b grad A) >= a and its decay exponents.

    Attributes:
        A_eval: A(r)
        dA_eval: A'(r), None to difference A_eval
        mu_numeric: min of a A / (b A'^2) over the outer quarter of the range
        mu_formula: (2 - alpha) / (2 - alpha - beta)
        delta: Slack exponent
        n: Dimension
        r_max: End of the construction range
        mu_radius: Radius attaining mu_numeric

    """

    A_eval: Evaluator
    dA_eval: Evaluator | None
    mu_numeric: float
    mu_formula: float
    delta: float = DEFAULT_DELTA
    n: int = 3
    r_max: float = 100.0
    mu_radius: float = math.nan

    def dA(self, r: np.ndarray) -> np.ndarray:
        if self.dA_eval is not None:
            return self.dA_eval(r)
        step = 1e-5 * (1.0 + r)
        return (self.A_eval(r + step) - self.A_eval(np.abs(r - step))) / (2.0 * step)


def mu_formula(envelope: PowerLawEnvelope) -> float:
    """Decay exponent (2 - alpha) / (2 - alpha - beta); raises at the pole."""
    denom = 2.0 - envelope.alpha - envelope.beta
    if not denom > 0:
        msg = f"μ formula has a pole: 2−α−β={denom:g} ≤ 0."
        raise CertificateError(msg)
    return (2.0 - envelope.alpha) / denom


def _mu_ratio(a: np.ndarray, b: np.ndarray, A: np.ndarray, dA: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dA != 0, a * A / (b * dA * dA), np.inf)


def construct_radial_subsolution(
    field: CoefficientField,
    n: int,
    r_max: float = 100.0,
    m: int = 4097,
    delta: float = DEFAULT_DELTA,
) -> SubsolutionSpec:
    """Integrate (r^(n-1) b A')' = r^(n-1) a with A(0) = A'(0) = 0.

    Both quadratures are cumulative Simpson rules, exact for a = b = 1 where
    A = r^2 / (2n).

    Raises:
        CertificateError: If the mu formula has a pole or the integrals are not finite.

    """
    formula = mu_formula(field.envelope)
    r = np.linspace(0.0, r_max, m)
    weight = r ** (n - 1)
    flux = cumulative_simpson(weight * field.a(r), x=r, initial=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(r > 0, flux / (weight * field.b(r)), 0.0)
    A = cumulative_simpson(slope, x=r, initial=0.0)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(slope))):
        msg = "subsolution quadrature produced non-finite samples."
        raise CertificateError(msg)

    spline = CubicSpline(r, A)
    outer = r >= 0.75 * r_max
    ratio = _mu_ratio(field.a(r[outer]), field.b(r[outer]), A[outer], slope[outer])
    i = int(np.argmin(ratio))
    return SubsolutionSpec(
        A_eval=spline,
        dA_eval=spline.derivative(),
        mu_numeric=float(ratio[i]),
        mu_formula=formula,
        delta=delta,
        n=n,
        r_max=r_max,
        mu_radius=float(r[outer][i]),
    )


@dataclass(frozen=True)
class HypothesisReport:
    """Pass/fail of A >= 0, the growth bound and div(b grad A) >= a."""

    nonnegative: bool
    growth: bool
    divergence: bool
    divergence_residual: float
    divergence_worst_radius: float
    growth_slope: float
    growth_bound: float
    mu_numeric: float
    mu_radius: float
    mu_formula: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.growth and self.divergence

    def as_dict(self) -> dict[str, object]:
        return {
            "pass": self.passed,
            "nonnegative": self.nonnegative,
            "growth": self.growth,
            "divergence": self.divergence,
            "divergence_residual": self.divergence_residual,
            "divergence_worst_radius": self.divergence_worst_radius,
            "growth_slope": self.growth_slope,
            "growth_bound": self.growth_bound,
            "mu_numeric": self.mu_numeric,
            "mu_radius": self.mu_radius,
            "mu_formula": self.mu_formula,
            "samples": self.samples,
        }


def _log_slope(x: np.ndarray, values: np.ndarray) -> float:
    # slope of log(values) against an already log-transformed abscissa
    positive = values > 0
    if positive.sum() < 2:
        return 0.0
    return float(np.polyfit(x[positive], np.log(values[positive]), 1)[0])


def check_hypothesis_A(spec: SubsolutionSpec, field: CoefficientField, grid: Grid) -> HypothesisReport:
    """Check A >= 0, A = O(r^(2-alpha-beta)) and div(b grad A) >= a on a radial grid.

    The divergence is the solver's conservative operator applied to samples of
    A, so the residual is exact for quadratic A and O(dx^2) otherwise.
    """
    if grid.kind is not GridKind.RADIAL:
        msg = "the subsolution is checked on radial grids."
        raise CertificateError(msg)
    r = grid.radii
    A = spec.A_eval(r)
    a = field.a(r)
    nonnegative = bool(np.all(A >= -1e-12 * np.max(np.abs(A), initial=1.0)))

    outer = r >= 0.75 * grid.r_max
    bound = 2.0 - field.envelope.alpha - field.envelope.beta
    slope = _log_slope(np.log(r[outer]), A[outer])
    growth = bool(np.all(A[outer] > 0) and slope <= bound + GROWTH_SLACK)

    residual = grid.divergence(A, field.b(grid.face_radii)) - a
    inner = grid.interior
    scaled = residual[inner] / a[inner]
    worst = int(np.argmin(scaled))
    divergence = bool(scaled[worst] >= -SUBSOLUTION_RTOL)

    dA = spec.dA(r[outer])
    ratio = _mu_ratio(a[outer], field.b(r[outer]), A[outer], dA)
    i = int(np.argmin(ratio))
    return HypothesisReport(
        nonnegative=nonnegative,
        growth=growth,
        divergence=divergence,
        divergence_residual=float(np.max(np.abs(residual[inner]))),
        divergence_worst_radius=float(r[inner][worst]),
        growth_slope=slope,
        growth_bound=bound,
        mu_numeric=float(ratio[i]),
        mu_radius=float(r[outer][i]),
        mu_formula=spec.mu_formula,
        samples=int(r.size),
    )


@dataclass(frozen=True)
class MConditions:
    """Growth exponents of the two M-condition suprema over the support ball."""

    lambda1: float
    lambda2: float
    K1: float
    K2: float
    fitted_from: str
    times: tuple[float, ...] = ()
    sup1: tuple[float, ...] = ()
    sup2: tuple[float, ...] = ()
    clamped: tuple[str, ...] = ()
    exceeded: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        """False when a fitted growth slope lies above 1; negative slopes clamp to 0 and pass."""
        return not self.exceeded

    def as_dict(self) -> dict[str, object]:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "K1": self.K1,
            "K2": self.K2,
            "fitted_from": self.fitted_from,
            "t": list(self.times),
            "sup_condition1": list(self.sup1),
            "sup_condition2": list(self.sup2),
            "clamped": list(self.clamped),
            "exceeded": list(self.exceeded),
        }


def radial_divergence(
    field: CoefficientField, n: int, r: np.ndarray, g: Callable[[int], np.ndarray]
) -> np.ndarray:
    """div(b grad g) = b g'' + (b' + (n-1) b / r) g' for a radial g, with g'/r -> g'' at 0."""
    b = field.b(r)
    d1, d2 = g(1), g(2)
    with np.errstate(divide="ignore", invalid="ignore"):
        over_r = np.where(r > 0, d1 / np.where(r > 0, r, 1.0), d2)
    return b * d2 + field.derivative("b", r) * d1 + (n - 1) * b * over_r


def _ratio_derivatives(field: CoefficientField, r: np.ndarray, order: int) -> np.ndarray:
    # derivatives of g = c/a by the quotient rule
    a, c = field.a(r), field.c(r)
    da, dc = field.derivative("a", r), field.derivative("c", r)
    if order == 0:
        return c / a
    if order == 1:
        return (dc * a - c * da) / (a * a)
    d2a, d2c = field.derivative("a", r, 2), field.derivative("c", r, 2)
    return d2c / a - 2.0 * dc * da / (a * a) - c * d2a / (a * a) + 2.0 * c * da * da / (a * a * a)


def _fit_exponent(
    times: np.ndarray, sups: np.ndarray, label: str, clamped: list[str], exceeded: list[str]
) -> tuple[float, float]:
    if np.all(sups == 0):
        return 0.0, 0.0
    x = np.log1p(times)
    slope = float(np.polyfit(x, np.log(sups), 1)[0])
    lam = min(max(slope, 0.0), 1.0)
    if abs(lam - slope) > 1e-9:
        logger.warning("%s exponent %.4g clamped into [0, 1]", label, slope)
        clamped.append(label)
        if slope > 1.0:
            exceeded.append(label)
    K = float(np.max(sups / (1.0 + times) ** lam))
    return lam, K


def lambda_exponents(
    field: CoefficientField, support: SupportSpec, n: int = 3, t_samples: np.ndarray | None = None
) -> MConditions:
    """Fit sup S1 <= K1 (1+t)^lambda1 and sup S2 <= K2 (1+t)^lambda2.

    S1 is c/a + (b/a)|grad(c/a)|^2 and S2 is [a^-1 div(b grad(c/a))]^2, each
    maximized over SUP_NODES radii of the time-t support ball. Fields with a
    kink at the origin (pure power profiles with nonzero exponents) are
    sampled from r = 1 outward.

    Raises:
        CertificateError: With fewer than two time samples or a vanishing a.

    """
    times = np.asarray(2.0 ** np.arange(11) if t_samples is None else t_samples, dtype=float)
    error = validate_minimum_count(list(times), 2, "sample")
    if error:
        raise CertificateError(error)

    sup1, sup2 = [], []
    for t in times:
        r = np.linspace(0.0, predicted_radius(support, float(t)), SUP_NODES)
        if not field.smooth:
            r = r[r >= 1.0] if np.any(r >= 1.0) else r[-1:]
        a = field.a(r)
        if np.any(a == 0):
            msg = "a vanishes on the support; the M-conditions are undefined."
            raise CertificateError(msg)
        g1 = _ratio_derivatives(field, r, 1)
        s1 = _ratio_derivatives(field, r, 0) + field.b(r) / a * g1 * g1
        s2 = (radial_divergence(field, n, r, lambda order: _ratio_derivatives(field, r, order)) / a) ** 2
        sup1.append(float(np.max(s1)))
        sup2.append(float(np.max(s2)))

    clamped: list[str] = []
    exceeded: list[str] = []
    lam1, K1 = _fit_exponent(times, np.array(sup1), "λ1", clamped, exceeded)
    lam2, K2 = _fit_exponent(times, np.array(sup2), "λ2", clamped, exceeded)
    return MConditions(
        lambda1=lam1,
        lambda2=lam2,
        K1=K1,
        K2=K2,
        fitted_from=f"max over {SUP_NODES} radial nodes of the support ball at {times.size} times",
        times=tuple(float(t) for t in times),
        sup1=tuple(sup1),
        sup2=tuple(sup2),
        clamped=tuple(clamped),
        exceeded=tuple(exceeded),
    )


@dataclass(frozen=True)
class BMatrixReport:
    """Coefficient conditions: a bounded, b bounded below, gradient decay, b-matrix sign."""

    min_eigenvalue: float
    min_eigenvalue_radius: float
    definite: bool
    bounded: bool
    decay: bool
    a_slope: float
    b_slope: float
    decay_slope: float

    @property
    def passed(self) -> bool:
        return self.definite and self.bounded and self.decay

    def as_dict(self) -> dict[str, object]:
        return {
            "pass": self.passed,
            "min_eigenvalue": self.min_eigenvalue,
            "min_eigenvalue_radius": self.min_eigenvalue_radius,
            "non_negative_definite": self.definite,
            "bounded": self.bounded,
            "decay": self.decay,
            "a_slope": self.a_slope,
            "b_slope": self.b_slope,
            "decay_slope": self.decay_slope,
        }


def check_b_matrix_condition(field: CoefficientField, n: int, r_samples: np.ndarray) -> BMatrixReport:
    """Check the coefficient conditions of the L-infinity estimate.

    For radial b the matrix (delta_ij/2) Lap(b) - Hess(b) has the radial
    eigenvalue Lap(b)/2 - b'' and, for n >= 2, the tangential eigenvalue
    Lap(b)/2 - b'/r. Boundedness reads the log-log slopes of a and b over the
    outer quarter; decay requires (|grad(a^(1/2)/b)| + |grad ln b|)(1+r) not to grow.
    """
    r = np.sort(np.asarray(r_samples, dtype=float))
    b, db, d2b = field.b(r), field.derivative("b", r), field.derivative("b", r, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        db_over_r = np.where(r > 0, db / np.where(r > 0, r, 1.0), d2b)
    laplacian = d2b + (n - 1) * db_over_r
    eigen = 0.5 * laplacian - d2b
    if n >= 2:
        eigen = np.minimum(eigen, 0.5 * laplacian - db_over_r)
    i = int(np.argmin(eigen))
    scale = max(float(np.max(np.abs(laplacian))), 1.0)

    outer = r >= 0.75 * r.max()
    a = field.a(r)
    a_slope = _log_slope(np.log1p(r[outer]), a[outer])
    b_slope = _log_slope(np.log1p(r[outer]), b[outer])

    da = field.derivative("a", r)
    with np.errstate(divide="ignore", invalid="ignore"):
        grad_ratio = (0.5 * da / np.sqrt(a) * b - np.sqrt(a) * db) / (b * b)
        decay_term = (np.abs(grad_ratio) + np.abs(db / b)) * (1.0 + r)
    decay_slope = _log_slope(np.log1p(r[outer]), decay_term[outer])

    return BMatrixReport(
        min_eigenvalue=float(eigen[i]),
        min_eigenvalue_radius=float(r[i]),
        definite=bool(eigen[i] >= -1e-9 * scale),
        bounded=a_slope <= GROWTH_SLACK and b_slope >= -GROWTH_SLACK,
        decay=decay_slope <= BOUNDED_SLOPE,
        a_slope=a_slope,
        b_slope=b_slope,
        decay_slope=decay_slope,
    )


@dataclass(frozen=True)
class PredictedExponents:
    """Positive decay exponents: each quantity is expected to be <~ t^(-exponent)."""

    k: int
    L2_u: float
    energy_k: float
    damping: float
    linf_sq: float

    @property
    def weighted_l2(self) -> float:
        return self.L2_u


def predicted_exponents(mu: float, delta: float = DEFAULT_DELTA, k: int = 0) -> PredictedExponents:
    """Decay exponents of the weighted L2 norm, E_k, the damping and the squared L-infinity norm.

    They are mu - delta, mu + 1 + 2k - delta, mu + 2 - delta and mu + 3/2 - delta;
    the last pairs the M-norm and energy rates, |u|^2 <~ (int a (Mu)^2)^(1/2) E^(1/2).

    Examples:
        >>> predicted_exponents(1.0, 0.1, 1).energy_k
        3.9

    """
    errors = collect_validation_errors(
        validate_positive(mu, "μ"),
        validate_positive(delta, "δ"),
        None if k >= 0 else f"k must be non-negative (got {k}).",
    )
    if errors:
        raise CertificateError(" ".join(errors))
    return PredictedExponents(
        k=k,
        L2_u=mu - delta,
        energy_k=mu + 1.0 + 2.0 * k - delta,
        damping=mu + 2.0 - delta,
        linf_sq=mu + 1.5 - delta,
    )


@dataclass
class CertificateBundle:
    """Everything `certificates_document` serializes."""

    admissibility: AdmissibilityReport
    window: tuple[float, float] | None
    weight: WeightSpec
    weight_report: WeightReport
    subsolution: SubsolutionSpec
    hypothesis: HypothesisReport
    mconditions: MConditions
    bmatrix: BMatrixReport
    support: SupportSpec
    propagation_violations: list[float] = field(default_factory=list)


def certificates_document(bundle: CertificateBundle) -> dict[str, object]:
    """One JSON-ready entry per hypothesis."""
    weight, report = bundle.weight, bundle.weight_report
    return {
        "admissibility": {"hypothesis": "exponent inequalities", **bundle.admissibility.as_dict()},
        "omega_window": {
            "hypothesis": "weight exponent window",
            "window": None if bundle.window is None else list(bundle.window),
            "omega": weight.omega,
            "pass": bundle.window is not None and bundle.window[0] < weight.omega < bundle.window[1],
        },
        "weight": {
            "hypothesis": "weight inequalities",
            "omega": weight.omega,
            "w0": weight.w0,
            "nu": weight.nu,
            "theta": weight.theta,
            "C0": weight.C0,
            "worst_margin": min((m.worst_margin for m in report.margins), default=None),
            **report.as_dict(),
        },
        "subsolution": {
            "hypothesis": "subsolution A",
            "delta": bundle.subsolution.delta,
            **bundle.hypothesis.as_dict(),
        },
        "m_conditions": {
            "hypothesis": "M-operator growth",
            "pass": bundle.mconditions.passed,
            **bundle.mconditions.as_dict(),
        },
        "b_matrix": {"hypothesis": "L-infinity coefficient conditions", **bundle.bmatrix.as_dict()},
        "support": {
            "hypothesis": "propagation function",
            "q0": bundle.support.q0,
            "q_R": bundle.support.q_R,
            "R": bundle.support.R,
            "exponent": bundle.support.exponent,
            "pass": not bundle.propagation_violations,
            "violations": bundle.propagation_violations,
        },
    }
