# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Report emission: certificate, audit and verdict JSON, the energy CSV and log-log SVG plots.

Outputs are byte-deterministic for a fixed scenario: JSON keys are sorted,
floats are written with 17 significant digits and SVGs carry no date and a
fixed hash salt.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib as mpl
import numpy as np
import polars as pl
from fast_depends import Depends, inject
from matplotlib.figure import Figure

from scenario import get_output_root

if TYPE_CHECKING:
    from energetics import EnergyRecord

mpl.use("Agg")
mpl.rcParams["svg.hashsalt"] = "wavedecay"

logger = logging.getLogger(__name__)

CERTIFICATES_FILE = "certificates.json"
ENERGY_FILE = "energy.csv"
AUDIT_FILE = "audit.json"
VERDICTS_FILE = "verdicts.json"

# Digits after the point in scientific notation, i.e. 17 significant digits
CSV_FLOAT_PRECISION = 16

REQUIRED_COLUMNS = ("t", "E0", "damping", "linf", "weighted_l2")


class ReportError(ValueError):
    """Raised when an emitted report cannot be read back."""


@inject(cast=False)  # type: ignore[call-overload]
def scenario_directory(name: str, root: Path = Depends(get_output_root)) -> Path:
    """Create and return <root>/<name>.

    Args:
        name: Scenario name
        root: Output root; defaults to WAVEDECAY_OUTPUT_DIR

    """
    directory = Path(root) / name
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def to_jsonable(value: object) -> object:
    """Convert numpy scalars and arrays, tuples and non-finite floats for strict JSON."""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def write_json(path: Path, document: Mapping[str, object]) -> Path:
    """Write UTF-8 JSON with sorted keys."""
    text = json.dumps(to_jsonable(document), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def read_json(path: Path) -> dict[str, object]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        msg = f"cannot read {path}: {e}"
        raise ReportError(msg) from e


def energy_frame(records: Sequence[EnergyRecord]) -> pl.DataFrame:
    """One row per snapshot: t, E0..Ek, damping, linf, M_norm, M2_norm, support_radius, weighted_l2."""
    return pl.from_dicts([record.as_row() for record in records])


def write_energy_csv(path: Path, records: Sequence[EnergyRecord]) -> Path:
    energy_frame(records).write_csv(path, float_scientific=True, float_precision=CSV_FLOAT_PRECISION)
    logger.debug("Wrote %s (%d rows)", path, len(records))
    return path


def read_energy_csv(path: Path) -> pl.DataFrame:
    """Read an energy table back.

    Raises:
        ReportError: If the file is missing, unparsable or lacks a required column.

    """
    try:
        frame = pl.read_csv(path)
    except (OSError, pl.exceptions.PolarsError) as e:
        msg = f"cannot read energy table {path}: {e}"
        raise ReportError(msg) from e
    missing = [name for name in REQUIRED_COLUMNS if name not in frame.columns]
    if missing:
        msg = f"energy table {path} lacks column(s): {', '.join(missing)}"
        raise ReportError(msg)
    return frame


def energy_orders(frame: pl.DataFrame) -> list[int]:
    """Cascade orders k with an E<k> column."""
    return sorted(int(name[1:]) for name in frame.columns if name.startswith("E") and name[1:].isdigit())


def _guide(t: np.ndarray, values: np.ndarray, exponent: float, anchor: float) -> np.ndarray:
    # reference line t^-exponent through the series at the anchor time
    i = int(np.argmin(np.abs(t - anchor)))
    return values[i] * (t / t[i]) ** (-exponent)


def emit_plots(
    frame: pl.DataFrame,
    directory: Path,
    predicted: Mapping[str, float] | None = None,
    anchor: float = 20.0,
) -> list[Path]:
    """Write one log-log SVG per energy order with its predicted-slope guide line.

    Series with fewer than two positive samples are skipped with a warning.
    """
    predicted = predicted or {}
    t_all = frame["t"].to_numpy()
    written = []
    for k in energy_orders(frame):
        column = f"E{k}"
        values = frame[column].to_numpy()
        keep = (t_all > 0) & (values > 0) & np.isfinite(values)
        if keep.sum() < 2:
            logger.warning("Skipping plot of %s: fewer than two positive samples", column)
            continue
        t, v = t_all[keep], values[keep]
        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.add_subplot()
        ax.loglog(t, v, label=f"E{k}, order {k} cascade")
        if column in predicted:
            ax.loglog(t, _guide(t, v, predicted[column], anchor), "--", label=f"t^-{predicted[column]:.3g}")
        ax.set_xlabel("t")
        ax.set_ylabel(column)
        ax.legend()
        fig.tight_layout()
        path = directory / f"energy_E{k}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        written.append(path)
    if not written:
        logger.warning("No plots written to %s", directory)
    return written
