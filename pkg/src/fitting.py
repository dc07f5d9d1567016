# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Power-law decay fits and their comparison with predicted exponents."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from validation import MIN_FIT_POINTS, validate_all_finite, validate_minimum_count

# Earliest default fit time; constants dominate before it
MIN_FIT_START = 20.0

# Fraction of t_end closing the default fit window
FIT_END_FRACTION = 0.9

# Predicted gain in decay exponent per extra time derivative
GAIN_PER_DERIVATIVE = 2.0


class FitError(ValueError):
    """Raised for too few points or nonpositive values in a fit window."""


class Direction(StrEnum):
    AT_LEAST_AS_FAST = "at_least_as_fast"
    TWO_SIDED = "two_sided"


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line log(value) = intercept + slope * log(t) over a window."""

    slope: float
    intercept: float
    window: tuple[float, float]
    rms: float
    n_points: int

    @property
    def rate(self) -> float:
        """Decay exponent, positive for decay."""
        return -self.slope

    def as_dict(self) -> dict[str, object]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "window": list(self.window),
            "rms": self.rms,
            "n_points": self.n_points,
        }


def default_window(T0: float, t_end: float) -> tuple[float, float]:
    """[max(20, 2 T0), 0.9 t_end]."""
    return (max(MIN_FIT_START, 2.0 * T0), FIT_END_FRACTION * t_end)


def fit_decay_rate(
    t: Sequence[float] | np.ndarray, values: Sequence[float] | np.ndarray, window: tuple[float, float]
) -> DecayFit:
    """Fit a power law to the samples inside the window.

    Args:
        t: Sample times
        values: Sampled quantity, positive inside the window
        window: Closed interval [t_lo, t_hi] of times to fit

    Returns:
        DecayFit with slope, intercept and rms residual in log space.

    Raises:
        FitError: With fewer than 8 samples in the window, non-finite samples, or
            nonpositive values (the message lists the offending times).

    Examples:
        >>> t = np.geomspace(1.0, 100.0, 20)
        >>> round(fit_decay_rate(t, t**-2, (1.0, 100.0)).slope, 6)
        -2.0

    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    inside = (t >= window[0]) & (t <= window[1])
    t_in, v_in = t[inside], values[inside]
    error = validate_minimum_count(list(t_in), MIN_FIT_POINTS, "point")
    if error:
        msg = f"{error} Window [{window[0]:g}, {window[1]:g}]."
        raise FitError(msg)
    error = validate_all_finite(v_in.tolist(), "fit window")
    if error:
        raise FitError(error)
    bad = v_in <= 0
    if bad.any():
        listed = ", ".join(f"{x:g}" for x in t_in[bad][:10])
        msg = f"nonpositive values at t = {listed}" + (" ..." if bad.sum() > 10 else "")
        raise FitError(msg)

    x, y = np.log(t_in), np.log(v_in)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (intercept + slope * x)
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        window=(float(window[0]), float(window[1])),
        rms=float(math.sqrt(np.mean(residual * residual))),
        n_points=int(t_in.size),
    )


@dataclass(frozen=True)
class ComparisonVerdict:
    quantity: str
    fitted: float
    predicted: float
    direction: Direction
    margin: float
    passed: bool
    fit: DecayFit | None = None

    def as_dict(self) -> dict[str, object]:
        return {
            "quantity": self.quantity,
            "fitted": self.fitted,
            "predicted": self.predicted,
            "direction": self.direction.value,
            "margin": self.margin,
            "pass": self.passed,
            "fit": None if self.fit is None else self.fit.as_dict(),
        }


def judge(fitted: float, predicted: float, direction: Direction | str, margin: float) -> bool:
    """at_least_as_fast: fitted >= predicted - margin; two_sided: |fitted - predicted| <= margin."""
    if Direction(direction) is Direction.AT_LEAST_AS_FAST:
        return fitted >= predicted - margin
    return abs(fitted - predicted) <= margin


def compare_to_theory(
    fit: DecayFit,
    predicted: float,
    direction: Direction | str = Direction.AT_LEAST_AS_FAST,
    margin: float = 0.3,
    quantity: str = "",
) -> ComparisonVerdict:
    """Compare a fitted decay exponent with its predicted value.

    Examples:
        >>> fit = DecayFit(-2.4, 0.0, (20.0, 360.0), 0.0, 8)
        >>> compare_to_theory(fit, 1.9, margin=0.3).passed
        True

    """
    direction = Direction(direction)
    return ComparisonVerdict(
        quantity=quantity,
        fitted=fit.rate,
        predicted=predicted,
        direction=direction,
        margin=margin,
        passed=judge(fit.rate, predicted, direction, margin),
        fit=fit,
    )


def gain_verdict(lower: DecayFit, upper: DecayFit, k: int, margin: float = 0.5) -> ComparisonVerdict:
    """Two-sided check that E_{k+1} decays GAIN_PER_DERIVATIVE faster than E_k."""
    gain = upper.rate - lower.rate
    return ComparisonVerdict(
        quantity=f"gain_E{k + 1}_over_E{k}",
        fitted=gain,
        predicted=GAIN_PER_DERIVATIVE,
        direction=Direction.TWO_SIDED,
        margin=margin,
        passed=judge(gain, GAIN_PER_DERIVATIVE, Direction.TWO_SIDED, margin),
    )
