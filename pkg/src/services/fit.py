# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Fit workflow: decay fits of the energy table and their verdicts."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np
import polars as pl

from certificates import mu_formula, predicted_exponents
from fitting import (
    ComparisonVerdict,
    DecayFit,
    FitError,
    compare_to_theory,
    default_window,
    fit_decay_rate,
    gain_verdict,
)
from reporting import (
    CERTIFICATES_FILE,
    ENERGY_FILE,
    VERDICTS_FILE,
    energy_orders,
    read_energy_csv,
    read_json,
    write_json,
)
from scenario import Scenario

logger = logging.getLogger(__name__)


class VerdictSet(NamedTuple):
    """Verdicts of one scenario with the fit window they used."""

    window: tuple[float, float]
    mu: float
    verdicts: list[ComparisonVerdict]
    skipped: list[dict[str, str]]

    @property
    def passed(self) -> bool:
        return not self.skipped and all(v.passed for v in self.verdicts)

    def as_dict(self) -> dict[str, object]:
        return {
            "window": list(self.window),
            "mu": self.mu,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "skipped": self.skipped,
            "pass": self.passed,
        }


def predictions(scenario: Scenario, k_max: int) -> dict[str, float]:
    """Predicted decay exponents keyed by energy-table quantity."""
    mu = mu_formula(scenario.envelope())
    base = predicted_exponents(mu, scenario.delta, 0)
    out = {f"E{k}": predicted_exponents(mu, scenario.delta, k).energy_k for k in range(k_max + 1)}
    out["damping"] = base.damping
    out["linf_sq"] = base.linf_sq
    out["weighted_l2"] = base.weighted_l2
    return out


def quantity_series(frame: pl.DataFrame, quantity: str) -> np.ndarray:
    if quantity == "linf_sq":
        return frame["linf"].to_numpy() ** 2
    return frame[quantity].to_numpy()


def build_verdicts(frame: pl.DataFrame, scenario: Scenario, T0: float) -> VerdictSet:
    """Fit every tabulated quantity and compare it with its prediction.

    Quantities that cannot be fitted in the window are skipped with a warning
    and make the set fail.
    """
    window = scenario.fit_window or default_window(T0, scenario.t_end)
    orders = energy_orders(frame)
    predicted = predictions(scenario, max(orders, default=0))
    t = frame["t"].to_numpy()
    verdicts: list[ComparisonVerdict] = []
    skipped: list[dict[str, str]] = []
    fits: dict[str, DecayFit] = {}
    for quantity, exponent in predicted.items():
        try:
            fit = fit_decay_rate(t, quantity_series(frame, quantity), window)
        except FitError as e:
            logger.warning("Verdict for %s skipped: %s", quantity, e)
            skipped.append({"quantity": quantity, "reason": str(e)})
            continue
        fits[quantity] = fit
        verdicts.append(compare_to_theory(fit, exponent, margin=scenario.margin, quantity=quantity))

    for k in orders[:-1]:
        lower, upper = fits.get(f"E{k}"), fits.get(f"E{k + 1}")
        if lower is not None and upper is not None:
            verdicts.append(gain_verdict(lower, upper, k, margin=scenario.gain_margin))
    return VerdictSet(window, mu_formula(scenario.envelope()), verdicts, skipped)


def recorded_T0(directory: Path) -> float | None:
    """T0 from an existing certificates.json, None when absent."""
    path = directory / CERTIFICATES_FILE
    if not path.exists():
        return None
    weight = read_json(path).get("weight")
    T0 = weight.get("T0") if isinstance(weight, dict) else None
    return None if T0 is None else float(T0)


def refit(scenario: Scenario, directory: Path) -> int:
    """Re-read energy.csv, re-emit verdicts.json and return the exit code.

    The cone report of a previous verdicts.json is carried over unchanged.

    Raises:
        ReportError: If energy.csv is missing or malformed.

    """
    frame = read_energy_csv(directory / ENERGY_FILE)
    T0 = recorded_T0(directory)
    if T0 is None:
        logger.warning("No weight T0 recorded in %s; fitting from t=0", directory)
        T0 = 0.0
    verdict_set = build_verdicts(frame, scenario, T0)
    document = verdict_set.as_dict()
    previous = directory / VERDICTS_FILE
    if previous.exists():
        document["cone"] = read_json(previous).get("cone")
    write_json(previous, document)
    return 0 if verdict_set.passed else 1
