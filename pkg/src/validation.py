# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Validation utilities for coefficient envelopes, weights and scenarios.

Every validator returns an error message when the value is invalid and None
otherwise, so callers can gather all problems at once with
`collect_validation_errors` before raising a single domain error.
"""

import math
from collections.abc import Sequence

# Minimum number of samples for any log-log regression
MIN_FIT_POINTS = 8


def validate_positive(value: float, field_name: str) -> str | None:
    """Validate that a value is a finite, strictly positive number.

    Args:
        value: The number to validate
        field_name: Human-readable name of the quantity for error messages

    Returns:
        Error message if the value is invalid, None if valid

    Examples:
        >>> validate_positive(1.0, "a0")
        None
        >>> validate_positive(0.0, "a0")
        'a0 must be positive (got 0.0).'
        >>> validate_positive(float("nan"), "a0")
        'a0 must be finite (got nan).'

    """
    if not math.isfinite(value):
        return f"{field_name} must be finite (got {value})."
    if value <= 0:
        return f"{field_name} must be positive (got {value})."
    return None


def validate_ordered_pair(lower: float, upper: float, field_name: str) -> str | None:
    """Validate that an envelope pair satisfies lower <= upper.

    Args:
        lower: The lower envelope constant
        upper: The upper envelope constant
        field_name: Name of the coefficient the pair bounds (e.g. "a")

    Returns:
        Error message if the pair is out of order, None if valid

    Examples:
        >>> validate_ordered_pair(1.0, 2.0, "a")
        None
        >>> validate_ordered_pair(2.0, 1.0, "a")
        'a0 must not exceed a1 (got 2.0 > 1.0).'

    """
    if lower > upper:
        return f"{field_name}0 must not exceed {field_name}1 (got {lower} > {upper})."
    return None


def validate_open_interval(value: float, lower: float, upper: float, field_name: str) -> str | None:
    """Validate that a value lies strictly inside (lower, upper).

    The message names the violated bound, so a caller can report which side of a
    window was crossed.

    Args:
        value: The number to validate
        lower: Exclusive lower bound
        upper: Exclusive upper bound
        field_name: Human-readable name of the quantity

    Returns:
        Error message naming the violated bound, None if valid

    Examples:
        >>> validate_open_interval(0.75, 0.5, 1.0, "omega")
        None
        >>> validate_open_interval(0.3, 0.5, 1.0, "omega")
        'omega below 0.5 (got 0.3).'

    """
    if not value > lower:
        return f"{field_name} below {lower:g} (got {value:g})."
    if not value < upper:
        return f"{field_name} above {upper:g} (got {value:g})."
    return None


def validate_minimum_count(items: Sequence[object], min_count: int, field_name: str) -> str | None:
    """Validate that a sequence has at least the minimum number of items.

    Args:
        items: Sequence to validate
        min_count: Minimum required number of items
        field_name: Human-readable name of the items for error messages

    Returns:
        Error message if minimum count not met, None if valid

    Examples:
        >>> validate_minimum_count([1, 2], 2, "sample")
        None
        >>> validate_minimum_count([1], 2, "sample")
        'need ≥ 2 samples to fit (got 1).'

    """
    if len(items) < min_count:
        plural_field = field_name if min_count == 1 else f"{field_name}s"
        return f"need ≥ {min_count} {plural_field} to fit (got {len(items)})."
    return None


def validate_all_finite(values: Sequence[float], field_name: str) -> str | None:
    """Validate that every value in a sequence is finite.

    Returns:
        Error message listing how many values are non-finite, None if valid

    """
    bad = [v for v in values if not math.isfinite(v)]
    if bad:
        return f"{field_name} contains {len(bad)} non-finite value(s)."
    return None


def collect_validation_errors(*validators: str | None) -> list[str]:
    """Collect all non-None, non-empty validation error messages.

    Args:
        *validators: Variable number of validation error messages (or None)

    Returns:
        List of valid error messages, with empty strings and None values filtered out

    Examples:
        >>> collect_validation_errors("Error 1", None, "Error 2", "")
        ['Error 1', 'Error 2']
        >>> collect_validation_errors(None, None)
        []

    """
    return [error.strip() for error in validators if error is not None and error.strip()]
