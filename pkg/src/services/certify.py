# Copyright (c) 2024 WAVEDECAY Laboratory
# All rights reserved.

"""Certificate workflow: admissibility, weight, subsolution, M-conditions and support."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np

from certificates import (
    CertificateBundle,
    CertificateError,
    MConditions,
    SubsolutionSpec,
    WeightSpec,
    build_weight,
    calibrate_amplitude,
    certificates_document,
    check_b_matrix_condition,
    check_hypothesis_A,
    construct_radial_subsolution,
    lambda_exponents,
    omega_window,
)
from coefficients import AdmissibilityReport, CoefficientField, check_admissibility
from reporting import CERTIFICATES_FILE, write_json
from scenario import Scenario
from solver import Grid, GridKind
from support import SupportSpec, check_propagation_speed, grid_radius, source_support_violations

logger = logging.getLogger(__name__)

# Nodes of the grid on which div(b grad A) >= a is checked
SUBSOLUTION_CHECK_NODES = 513

# Smallest construction range of the radial subsolution
SUBSOLUTION_MIN_RADIUS = 100.0

# Radii sampled for the b-matrix and propagation-speed checks
RADIAL_SAMPLES = 1024


class CertificateOutcome(NamedTuple):
    """Everything later stages need from the certificates.

    Attributes:
        field: The validated coefficient field
        support: Propagation function q
        weight: Weight with T0 set when verification succeeded
        subsolution: Radial subsolution A
        mconditions: Fitted growth exponents of the M-operator conditions
        document: JSON-ready certificate document

    """

    field: CoefficientField
    support: SupportSpec
    weight: WeightSpec
    subsolution: SubsolutionSpec
    mconditions: MConditions
    document: dict[str, object]


def resolve_omega(scenario: Scenario, window: tuple[float, float] | None) -> float:
    """Explicit omega, or the middle of the admissible window for "auto".

    Raises:
        CertificateError: If omega is "auto" and the window is empty.

    """
    if scenario.omega != "auto":
        return float(scenario.omega)
    if window is None:
        msg = "ω window is empty; set omega explicitly or change the envelope."
        raise CertificateError(msg)
    return 0.5 * (window[0] + window[1])


def check_envelope(scenario: Scenario) -> AdmissibilityReport:
    logger.info("Stage admissibility: checking %s exponent inequalities", scenario.admissibility)
    report = check_admissibility(scenario.envelope(), scenario.admissibility_mode)
    if not report.passed:
        logger.warning("Inadmissible envelope: %s", ", ".join(report.failures))
    return report


def build_certificates(
    scenario: Scenario, field: CoefficientField, admissibility: AdmissibilityReport
) -> CertificateOutcome:
    """Run every certificate of the scenario's hypotheses.

    Raises:
        CertificateError: On an empty omega window, rejected weight parameters or a pole in the mu formula.
        SupportError: If beta + gamma >= 2.

    """
    envelope = scenario.envelope()
    window = omega_window(envelope)
    omega = resolve_omega(scenario, window)
    logger.info("Stage certificates: weight ω=%.4g, window %s", omega, window)
    weight = build_weight(envelope, omega, w0=scenario.w0, nu=scenario.nu, C0=scenario.C0)
    support = scenario.support()
    weight, weight_report = calibrate_amplitude(weight, field, support, t_max=scenario.t_end)

    reach = scenario.r_max if scenario.r_max is not None else grid_radius(support, scenario.t_end)
    # the subsolution is evaluated on the whole evolution grid
    subsolution = construct_radial_subsolution(
        field, scenario.n, r_max=max(SUBSOLUTION_MIN_RADIUS, reach), delta=scenario.delta
    )
    check_grid = Grid(GridKind.RADIAL, n=scenario.n, r_max=subsolution.r_max, m=SUBSOLUTION_CHECK_NODES)
    hypothesis = check_hypothesis_A(subsolution, field, check_grid)

    mconditions = lambda_exponents(field, support, n=scenario.n)
    radii = np.linspace(0.0, reach, RADIAL_SAMPLES)
    bmatrix = check_b_matrix_condition(field, scenario.n, radii)
    propagation = check_propagation_speed(support, field, radii)

    bundle = CertificateBundle(
        admissibility=admissibility,
        window=window,
        weight=weight,
        weight_report=weight_report,
        subsolution=subsolution,
        hypothesis=hypothesis,
        mconditions=mconditions,
        bmatrix=bmatrix,
        support=support,
        propagation_violations=propagation,
    )
    document = certificates_document(bundle)
    violations = source_support_violations(scenario.source_field(), support, np.random.default_rng(scenario.seed))
    document["source_support"] = {
        "hypothesis": "source vanishes outside the cone",
        "pass": not violations,
        "violations": [{"r": v.r, "t": v.t, "value": v.value} for v in violations[:20]],
    }
    return CertificateOutcome(field, support, weight, subsolution, mconditions, document)


def certificates_passed(document: dict[str, object]) -> bool:
    """True when every hypothesis entry of the document passes."""
    return all(bool(entry.get("pass", True)) for entry in document.values() if isinstance(entry, dict))


def certify(scenario: Scenario, directory: Path) -> int:
    """Write certificates.json; exit code 0 when every certificate passes, 1 otherwise."""
    admissibility = check_envelope(scenario)
    if not admissibility.passed:
        write_json(directory / CERTIFICATES_FILE, {"admissibility": admissibility.as_dict()})
        return 1
    outcome = build_certificates(scenario, scenario.coefficient_field(), admissibility)
    write_json(directory / CERTIFICATES_FILE, outcome.document)
    passed = certificates_passed(outcome.document)
    logger.info("Certificates for %s: %s", scenario.name, "pass" if passed else "fail")
    return 0 if passed else 1
