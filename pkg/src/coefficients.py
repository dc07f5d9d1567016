# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Coefficient fields, sources and initial data for the damped wave equation.

The equation is c(x)u_tt - div(b(x) grad u) + a(x)u_t = h(x, t) with radial
coefficients a, b, c bounded by power-law envelopes in (1 + |x|).
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

import numpy as np

from validation import collect_validation_errors, validate_ordered_pair, validate_positive

Evaluator = Callable[[np.ndarray], np.ndarray]
SourceEvaluator = Callable[[np.ndarray, float, int], np.ndarray]

COEFFICIENT_NAMES = ("a", "b", "c")

# Radii used to validate evaluators against their envelope
VALIDATION_RADII = np.concatenate(([0.0], np.geomspace(1e-3, 1e4, 240)))

# Relative slack when comparing an evaluator with its envelope
ENVELOPE_RTOL = 1e-12

# Numerical derivative step, relative to (1 + r)
DERIVATIVE_STEP = 1e-4


class EnvelopeError(ValueError):
    """Raised when an envelope is malformed or an evaluator leaves it."""


class ProfileKind(StrEnum):
    """How coefficient evaluators are built from an envelope."""

    PURE_POWER = "pure_power"
    SMOOTHED_POWER = "smoothed_power"
    CUSTOM = "custom"


class AdmissibilityMode(StrEnum):
    """Which family of exponent inequalities to check."""

    GENERAL = "general"
    HOMOGENEOUS_C1 = "homogeneous_c1"


@dataclass(frozen=True)
class PowerLawEnvelope:
    """Power-law bounds k0(1+r)^e <= k(r) <= k1(1+r)^e for each coefficient.

    The signed exponent e is -alpha for a, +beta for b and -gamma for c.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    a0: float = 1.0
    a1: float = 1.0
    b0: float = 1.0
    b1: float = 1.0
    c0: float = 1.0
    c1: float = 1.0

    def validate(self) -> list[str]:
        """Return every violated structural invariant of the envelope."""
        return collect_validation_errors(
            *(
                validate_positive(getattr(self, f"{name}{i}"), f"{name}{i}")
                for name in COEFFICIENT_NAMES
                for i in (0, 1)
            ),
            *(
                validate_ordered_pair(getattr(self, f"{name}0"), getattr(self, f"{name}1"), name)
                for name in COEFFICIENT_NAMES
            ),
            *(
                None if math.isfinite(getattr(self, e)) else f"{e} must be finite."
                for e in ("alpha", "beta", "gamma")
            ),
        )

    def exponent(self, name: str) -> float:
        """Signed exponent of (1 + r) for coefficient `name`."""
        return {"a": -self.alpha, "b": self.beta, "c": -self.gamma}[name]

    def constants(self, name: str) -> tuple[float, float]:
        """Lower and upper envelope constants for coefficient `name`."""
        return getattr(self, f"{name}0"), getattr(self, f"{name}1")

    def bounds(self, name: str, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate the lower and upper envelope of coefficient `name` at radii `r`."""
        lo, hi = self.constants(name)
        shape = (1.0 + np.asarray(r, dtype=float)) ** self.exponent(name)
        return lo * shape, hi * shape

    @property
    def cone_exponent(self) -> float:
        """The exponent 1 - (beta + gamma)/2 of the propagation function q."""
        return 1.0 - 0.5 * (self.beta + self.gamma)


@dataclass(frozen=True)
class BuiltinProfile:
    """A named closed-form radial profile with analytic derivatives.

    Attributes:
        kind: constant, power (scale*(1+r)^exponent) or
            smoothed_power (scale*(1+r^2)^(exponent/2), C-infinity at r=0)
        scale: Positive multiplier
        exponent: Signed exponent

    """

    kind: Literal["constant", "power", "smoothed_power"]
    scale: float = 1.0
    exponent: float = 0.0

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full_like(r, self.scale)
        if self.kind == "power":
            return self.scale * (1.0 + r) ** self.exponent
        return self.scale * (1.0 + r * r) ** (0.5 * self.exponent)

    def derivative(self, r: np.ndarray, order: int = 1) -> np.ndarray:
        """Analytic first or second radial derivative."""
        r = np.asarray(r, dtype=float)
        e, s = self.exponent, self.scale
        if self.kind == "constant" or e == 0:
            return np.zeros_like(r)
        if self.kind == "power":
            if order == 1:
                return s * e * (1.0 + r) ** (e - 1.0)
            return s * e * (e - 1.0) * (1.0 + r) ** (e - 2.0)
        q = 1.0 + r * r
        if order == 1:
            return s * e * r * q ** (0.5 * e - 1.0)
        return s * e * (q ** (0.5 * e - 1.0) + (e - 2.0) * r * r * q ** (0.5 * e - 2.0))


def _numerical_derivative(func: Evaluator, r: np.ndarray, order: int) -> np.ndarray:
    # radial profiles are even in r, so the left stencil point is reflected
    r = np.asarray(r, dtype=float)
    step = DERIVATIVE_STEP * (1.0 + r)
    right = func(r + step)
    left = func(np.abs(r - step))
    if order == 1:
        return (right - left) / (2.0 * step)
    return (right - 2.0 * func(r) + left) / (step * step)


@dataclass(frozen=True)
class CoefficientField:
    """Evaluable radial coefficients a, b, c with their envelope metadata.

    Attributes:
        envelope: The power-law envelope the evaluators were validated against
        a_eval: Damping density a(r)
        b_eval: Stiffness weight b(r)
        c_eval: Mass density c(r)
        kind: How the evaluators were built
        smooth: Declared continuous-second-derivative flag

    """

    envelope: PowerLawEnvelope
    a_eval: Evaluator
    b_eval: Evaluator
    c_eval: Evaluator
    kind: ProfileKind = ProfileKind.PURE_POWER
    smooth: bool = True

    def evaluate(self, name: str, r: np.ndarray) -> np.ndarray:
        """Evaluate coefficient `name` ("a", "b" or "c") at radii `r`."""
        func: Evaluator = getattr(self, f"{name}_eval")
        return np.asarray(func(np.asarray(r, dtype=float)), dtype=float)

    def a(self, r: np.ndarray) -> np.ndarray:
        return self.evaluate("a", r)

    def b(self, r: np.ndarray) -> np.ndarray:
        return self.evaluate("b", r)

    def c(self, r: np.ndarray) -> np.ndarray:
        return self.evaluate("c", r)

    def derivative(self, name: str, r: np.ndarray, order: int = 1) -> np.ndarray:
        """Radial derivative of a coefficient, analytic for built-in profiles."""
        func: Evaluator = getattr(self, f"{name}_eval")
        if isinstance(func, BuiltinProfile):
            return func.derivative(r, order)
        return _numerical_derivative(func, r, order)

    def fingerprint(self) -> str:
        """Stable hash of the sampled coefficient values (trajectory metadata)."""
        digest = hashlib.sha256()
        for name in COEFFICIENT_NAMES:
            digest.update(np.ascontiguousarray(self.evaluate(name, VALIDATION_RADII)).tobytes())
        return digest.hexdigest()[:16]


@dataclass(frozen=True)
class SourceField:
    """Source h(r, t) with analytically supplied time derivatives.

    Attributes:
        h_eval: Callable (r, t, j) -> d^j h / dt^j evaluated at radii r and time t
        time_derivative_order: Largest available j, None when unlimited
        is_zero: True when h vanishes identically (lets the solver skip it)

    """

    h_eval: SourceEvaluator
    time_derivative_order: int | None = None
    is_zero: bool = False

    def evaluate(self, r: np.ndarray, t: float, order: int = 0) -> np.ndarray:
        """Evaluate d^order h / dt^order at radii `r` and time `t`."""
        r = np.asarray(r, dtype=float)
        if self.is_zero:
            return np.zeros_like(r)
        if not self.supports(order):
            msg = f"source provides time derivatives up to order {self.time_derivative_order}, not {order}"
            raise ValueError(msg)
        return np.asarray(self.h_eval(r, t, order), dtype=float)

    def supports(self, order: int) -> bool:
        """Whether d^order h / dt^order is available."""
        return self.time_derivative_order is None or order <= self.time_derivative_order

    def derivative(self, order: int) -> SourceField:
        """The source of the order-th cascade, d^order h / dt^order."""
        if order == 0 or self.is_zero:
            return self
        remaining = None if self.time_derivative_order is None else self.time_derivative_order - order
        base = self.h_eval
        return SourceField(
            h_eval=lambda r, t, j: base(r, t, j + order),
            time_derivative_order=remaining,
        )


@dataclass(frozen=True)
class InitialData:
    """Compactly supported radial initial data (u0, u1) vanishing for r > R."""

    u0: Evaluator
    u1: Evaluator
    R: float
    name: str = field(default="custom", compare=False)


def zero_source() -> SourceField:
    """The identically vanishing source, with derivatives of every order."""
    return SourceField(h_eval=lambda r, _t, _j: np.zeros_like(r), time_derivative_order=None, is_zero=True)


def bump_profile(r: np.ndarray, radius: float) -> np.ndarray:
    """Gaussian bump exp(-(3r/R)^2)(1-(r/R)^2)^6 on r < R, zero outside."""
    s = np.asarray(r, dtype=float) / radius
    inside = s < 1.0
    return np.where(inside, np.exp(-9.0 * s * s) * np.clip(1.0 - s * s, 0.0, None) ** 6, 0.0)


def named_initial_data(kind: str, amplitude: float = 1.0, radius: float = 4.0) -> InitialData:
    """Build one of the named initial data sets, all with u1 = 0.

    Args:
        kind: gaussian_bump, hat or ring
        amplitude: Peak value of u0
        radius: Support radius R

    Returns:
        InitialData supported in r <= radius.

    Raises:
        EnvelopeError: If the kind is unknown or the radius is not positive.

    """
    error = validate_positive(radius, "data radius")
    if error:
        raise EnvelopeError(error)

    def zero(r: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(r, dtype=float))

    if kind == "gaussian_bump":

        def u0(r: np.ndarray) -> np.ndarray:
            return amplitude * bump_profile(r, radius)

    elif kind == "hat":

        def u0(r: np.ndarray) -> np.ndarray:
            return amplitude * np.clip(1.0 - np.asarray(r, dtype=float) / radius, 0.0, None)

    elif kind == "ring":
        half = 0.5 * radius

        def u0(r: np.ndarray) -> np.ndarray:
            s = (np.asarray(r, dtype=float) - half) / half
            return amplitude * np.clip(1.0 - s * s, 0.0, None) ** 4

    else:
        msg = f"Unknown initial data `{kind}`; expected gaussian_bump, hat or ring."
        raise EnvelopeError(msg)
    return InitialData(u0=u0, u1=zero, R=radius, name=kind)


def named_source(kind: str, amplitude: float = 0.0, radius: float = 4.0, order: int | None = None) -> SourceField:
    """Build one of the named sources.

    Args:
        kind: zero, or decaying_pulse (h = A*bump(r)*exp(-t), supported in r <= radius)
        amplitude: Pulse amplitude A
        radius: Spatial support radius of the pulse
        order: Largest time derivative the pulse provides (None for unlimited)

    Returns:
        SourceField honouring h = 0 outside the data support.

    Raises:
        EnvelopeError: If the kind is unknown.

    """
    if kind == "zero":
        return zero_source()
    if kind == "decaying_pulse":

        def h_eval(r: np.ndarray, t: float, j: int) -> np.ndarray:
            return (-1.0) ** j * amplitude * math.exp(-t) * bump_profile(r, radius)

        return SourceField(h_eval=h_eval, time_derivative_order=order)
    msg = f"Unknown source `{kind}`; expected zero or decaying_pulse."
    raise EnvelopeError(msg)


@dataclass(frozen=True)
class EnvelopeViolation:
    """A radius at which an evaluator leaves its envelope."""

    r: float
    bound: str


def sample_envelope_violation(coefficients: CoefficientField, r_samples: np.ndarray) -> list[EnvelopeViolation]:
    """List every (r, bound) pair where an evaluator exits its envelope.

    Args:
        coefficients: The coefficient field to validate
        r_samples: Non-empty list of finite, non-negative radii

    Returns:
        Violations such as ("a upper" at r=10); empty when validated. A
        non-finite evaluator output is reported with bound "<name> non-finite".

    Raises:
        EnvelopeError: If the samples are empty or not finite.

    """
    r = np.atleast_1d(np.asarray(r_samples, dtype=float))
    if r.size == 0 or not np.all(np.isfinite(r)):
        msg = "r_samples must be a non-empty list of finite radii."
        raise EnvelopeError(msg)

    violations: list[EnvelopeViolation] = []
    for name in COEFFICIENT_NAMES:
        with np.errstate(all="ignore"):
            values = np.broadcast_to(coefficients.evaluate(name, r), r.shape)
        lo, hi = coefficients.envelope.bounds(name, r)
        for ri, vi, lo_i, hi_i in zip(r, values, lo, hi, strict=True):
            if not math.isfinite(vi):
                violations.append(EnvelopeViolation(float(ri), f"{name} non-finite"))
            elif vi < lo_i * (1.0 - ENVELOPE_RTOL):
                violations.append(EnvelopeViolation(float(ri), f"{name} lower"))
            elif vi > hi_i * (1.0 + ENVELOPE_RTOL):
                violations.append(EnvelopeViolation(float(ri), f"{name} upper"))
    return violations


def _smoothed(envelope: PowerLawEnvelope, name: str) -> BuiltinProfile:
    # (1+r^2)^(1/2)/(1+r) lies in [2^(-1/2), 1]; pick the constant that keeps
    # the whole profile inside the envelope
    lo, hi = envelope.constants(name)
    e = envelope.exponent(name)
    scale = hi if e >= 0 else lo
    return BuiltinProfile("smoothed_power", scale=scale, exponent=e)


def make_power_law(
    envelope: PowerLawEnvelope,
    profile_kind: ProfileKind | str = ProfileKind.PURE_POWER,
    custom: Mapping[str, Evaluator] | None = None,
) -> CoefficientField:
    """Build a coefficient field from an envelope.

    Args:
        envelope: Exponents and envelope constants
        profile_kind: pure_power (k(r) = k0(1+r)^e), smoothed_power (C-infinity at
            the origin, inside the envelope) or custom (evaluators from `custom`)
        custom: Evaluators keyed by "a", "b", "c" for the custom kind; missing
            names fall back to the pure power profile

    Returns:
        A validated CoefficientField.

    Raises:
        EnvelopeError: On non-positive or unordered constants, or when an evaluator
            violates the envelope at any validation sample.

    """
    errors = envelope.validate()
    if errors:
        raise EnvelopeError("; ".join(errors))

    kind = ProfileKind(profile_kind)
    evaluators: dict[str, Evaluator] = {}
    for name in COEFFICIENT_NAMES:
        lo, _ = envelope.constants(name)
        pure = BuiltinProfile("power", scale=lo, exponent=envelope.exponent(name))
        if kind is ProfileKind.PURE_POWER:
            evaluators[name] = pure
        elif kind is ProfileKind.SMOOTHED_POWER:
            evaluators[name] = _smoothed(envelope, name)
        else:
            evaluators[name] = (custom or {}).get(name, pure)

    field_ = CoefficientField(
        envelope=envelope,
        a_eval=evaluators["a"],
        b_eval=evaluators["b"],
        c_eval=evaluators["c"],
        kind=kind,
        # the pure power field is C^2 at the origin only with all exponents zero
        smooth=kind is not ProfileKind.PURE_POWER or not any((envelope.alpha, envelope.beta, envelope.gamma)),
    )
    violations = sample_envelope_violation(field_, VALIDATION_RADII)
    if violations:
        first = violations[0]
        msg = (
            f"{kind.value} profile violates the envelope: {first.bound} bound at r={first.r:g} "
            f"({len(violations)} violation(s))"
        )
        raise EnvelopeError(msg)
    return field_


@dataclass(frozen=True)
class InequalityCheck:
    """One admissibility inequality with its evaluated left side."""

    name: str
    value: float
    passed: bool
    enforced: bool = True
    note: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    """Pass/fail of every exponent inequality for one envelope."""

    mode: AdmissibilityMode
    checks: tuple[InequalityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if check.enforced)

    @property
    def failures(self) -> list[str]:
        return [check.name for check in self.checks if check.enforced and not check.passed]

    def as_dict(self) -> dict[str, object]:
        return {
            "mode": self.mode.value,
            "pass": self.passed,
            "checks": [
                {"name": c.name, "value": c.value, "pass": c.passed, "enforced": c.enforced, "note": c.note}
                for c in self.checks
            ],
        }


def check_admissibility(
    envelope: PowerLawEnvelope, mode: AdmissibilityMode | str = AdmissibilityMode.GENERAL
) -> AdmissibilityReport:
    """Check the exponent inequalities of the chosen family.

    The general family records the inequality 2-beta-gamma < 2 without
    enforcing it and enforces 0 <= beta+gamma < 2 instead, which the support
    bound needs. Both families include the cone condition beta+gamma < 2.

    Returns:
        The report; it never raises for a failed inequality.

    """
    mode = AdmissibilityMode(mode)
    alpha, beta, gamma = envelope.alpha, envelope.beta, envelope.gamma
    cone = InequalityCheck("β+γ<2", beta + gamma, beta + gamma < 2.0)
    if mode is AdmissibilityMode.GENERAL:
        checks = (
            InequalityCheck(
                "2−β−γ<2",
                2.0 - beta - gamma,
                2.0 - beta - gamma < 2.0,
                enforced=False,
                note="this form conflicts with the support bound; 0≤β+γ<2 is enforced instead",
            ),
            InequalityCheck("0≤β+γ", beta + gamma, beta + gamma >= 0.0),
            InequalityCheck("2α+β−γ<2", 2.0 * alpha + beta - gamma, 2.0 * alpha + beta - gamma < 2.0),
            cone,
        )
    else:
        checks = (
            InequalityCheck("α<1", alpha, alpha < 1.0),
            InequalityCheck("0≤β<2", beta, 0.0 <= beta < 2.0),
            InequalityCheck("2α+β≤2", 2.0 * alpha + beta, 2.0 * alpha + beta <= 2.0),
            cone,
        )
    return AdmissibilityReport(mode=mode, checks=checks)
