# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Full decay experiment: admissibility, certificates, cascades, energetics, support, fits and plots."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from energetics import AuditReport, audit_inequalities, energy_identity_residual, energy_records
from reporting import (
    AUDIT_FILE,
    CERTIFICATES_FILE,
    ENERGY_FILE,
    VERDICTS_FILE,
    emit_plots,
    energy_frame,
    write_energy_csv,
    write_json,
)
from scenario import Scenario
from services.certify import build_certificates, check_envelope
from services.fit import VerdictSet, build_verdicts, predictions
from solver import run_cascade
from support import ConeReport, verify_cone

logger = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A pipeline stage failed; outputs of earlier stages are kept."""

    def __init__(self, stage: str, detail: str) -> None:
        """Record the failing stage and what went wrong."""
        self.stage = stage
        self.detail = detail
        super().__init__(f"stage {stage} failed: {detail}")


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Announce a stage and convert domain errors raised inside it into StageError."""
    logger.info("Stage %s", name)
    try:
        yield
    except StageError:
        raise
    except (ValueError, RuntimeError, ArithmeticError, OSError) as e:
        raise StageError(name, str(e)) from e


@dataclass
class RunResult:
    """Outcome of one scenario run."""

    scenario: str
    directory: Path
    verdicts: VerdictSet
    audit: AuditReport
    cone: ConeReport
    plots: list[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdicts.passed and self.audit.passed and self.cone.verdict != "fail"

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def run_scenario(scenario: Scenario, directory: Path) -> RunResult:
    """Run the whole pipeline and write its reports into `directory`.

    Raises:
        StageError: Naming the first failing stage.

    """
    with stage("admissibility"):
        admissibility = check_envelope(scenario)
        if not admissibility.passed:
            raise StageError("admissibility", f"violated: {', '.join(admissibility.failures)}")

    with stage("coefficients"):
        field_ = scenario.coefficient_field()

    with stage("certificates"):
        outcome = build_certificates(scenario, field_, admissibility)
        write_json(directory / CERTIFICATES_FILE, outcome.document)
        T0 = outcome.weight.T0
        if T0 is None:
            raise StageError("certificates", "weight inequalities never hold on the sampled times")

    source = scenario.source_field()
    with stage("cascade"):
        grid = scenario.build_grid()
        logger.info("Stage cascade: evolving k=0..%d on r_max=%.4g", scenario.k_max, grid.r_max)
        trajectories = run_cascade(
            scenario.initial_data(),
            field_,
            source,
            grid,
            scenario.k_max,
            scenario.t_end,
            scenario.cadence(),
            scenario.cfl,
        )

    with stage("energetics"):
        records = energy_records(trajectories, field_)
        write_energy_csv(directory / ENERGY_FILE, records)
        audit = audit_inequalities(
            trajectories,
            field_,
            source,
            outcome.weight,
            outcome.subsolution,
            outcome.mconditions,
            window=(T0, scenario.t_end),
            n=scenario.n,
        )
        _, residual = energy_identity_residual(trajectories[0], field_, source)
        audit.diagnostics["energy_identity_max_residual"] = float(np.max(np.abs(residual), initial=0.0))
        write_json(directory / AUDIT_FILE, audit.as_dict())

    with stage("support"):
        cone = verify_cone(trajectories[0], outcome.support, field_)

    with stage("fit"):
        verdict_set = build_verdicts(energy_frame(records), scenario, T0)
        document = verdict_set.as_dict()
        document["cone"] = cone.as_dict()
        document["audit_pass"] = audit.passed
        write_json(directory / VERDICTS_FILE, document)

    plots: list[Path] = []
    if scenario.plots:
        with stage("plots"):
            frame = energy_frame(records)
            predicted = predictions(scenario, scenario.k_max)
            plots = emit_plots(frame, directory, predicted, anchor=verdict_set.window[0])

    result = RunResult(scenario.name, directory, verdict_set, audit, cone, plots)
    logger.info("Scenario %s: %s", scenario.name, "pass" if result.passed else "fail")
    return result
