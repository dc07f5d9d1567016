# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Plot workflow: log-log SVGs of an existing energy table."""

from __future__ import annotations

import logging
from pathlib import Path

from fitting import default_window
from reporting import ENERGY_FILE, emit_plots, energy_orders, read_energy_csv
from scenario import Scenario
from services.fit import predictions, recorded_T0

logger = logging.getLogger(__name__)


def replot(scenario: Scenario, directory: Path) -> int:
    """Re-read energy.csv and emit one SVG per energy order.

    Guide lines are anchored at the start of the scenario's fit window.

    Raises:
        ReportError: If energy.csv is missing or malformed.

    """
    frame = read_energy_csv(directory / ENERGY_FILE)
    window = scenario.fit_window or default_window(recorded_T0(directory) or 0.0, scenario.t_end)
    predicted = predictions(scenario, max(energy_orders(frame), default=0))
    written = emit_plots(frame, directory, predicted, anchor=window[0])
    logger.info("Wrote %d plot(s) to %s", len(written), directory)
    return 0
