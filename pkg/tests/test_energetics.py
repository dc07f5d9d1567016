"""Unit tests for energies, the M operator and the inequality audit."""

import math

import numpy as np
import pytest

from certificates import build_weight, construct_radial_subsolution, lambda_exponents
from coefficients import PowerLawEnvelope, named_source, zero_source
from energetics import (
    DAMPING_CONSTANT_SLACK,
    AuditError,
    M_norm,
    apply_M,
    apply_M2,
    audit_inequalities,
    diffusion_defect,
    energy,
    energy_identity_residual,
    energy_records,
    hardy_bound,
    hardy_ratio,
    linf_norm,
    m2_discrepancy,
    m2_product_rule,
    nodal_m_bound,
    weighted_exponential_diagnostic,
)
from solver import Cadence, Grid, GridKind, run, run_cascade
from support import build_q


@pytest.fixture(scope="module")
def audit_inputs(constant_field):
    """Weight, subsolution and M-conditions of the constant field."""
    envelope = PowerLawEnvelope()
    return (
        build_weight(envelope, 0.5),
        construct_radial_subsolution(constant_field, 3),
        lambda_exponents(constant_field, build_q(envelope, R=4.0)),
    )


class TestEnergy:
    """Test the energy functionals."""

    def test_bump_at_rest(self, bump_snapshot, constant_field, small_grid):
        """Test that a snapshot at rest has energy and no diffusion defect."""
        assert energy(bump_snapshot, constant_field, small_grid) > 0.0
        assert diffusion_defect(bump_snapshot, constant_field, small_grid) == 0.0
        assert linf_norm(bump_snapshot) == pytest.approx(1.0)

    def test_foreign_grid(self, bump_snapshot, constant_field):
        """Test that a snapshot from another grid is rejected."""
        with pytest.raises(AuditError, match="nodes but the grid has"):
            energy(bump_snapshot, constant_field, Grid(GridKind.RADIAL, n=3, r_max=30.0, m=64))

    def test_records(self, cascade, constant_field):
        """Test one row per snapshot with every energy order."""
        records = energy_records(cascade, constant_field)
        assert len(records) == len(cascade[0].snapshots)
        row = records[-1].as_row()
        assert list(row) == [
            "t",
            "E0",
            "E1",
            "E2",
            "E3",
            "E4",
            "damping",
            "linf",
            "M_norm",
            "M2_norm",
            "support_radius",
            "weighted_l2",
        ]
        assert row["t"] == pytest.approx(20.0)
        assert records[-1].E[0] < records[0].E[0]


class TestEnergyIdentity:
    """Test the residual of dE/dt + int a u_t^2 = int h u_t."""

    @staticmethod
    def _residual(constant_field, bump_data, m):
        grid = Grid(GridKind.RADIAL, n=3, r_max=20.0, m=m)
        trajectory = run(bump_data, constant_field, zero_source(), grid, 10.0, Cadence.stride(10))
        _, residual = energy_identity_residual(trajectory, constant_field, zero_source())
        return np.max(np.abs(residual[1:]))

    def test_second_order(self, constant_field, bump_data):
        """Test that the residual shrinks with the square of the step."""
        coarse = self._residual(constant_field, bump_data, 512)
        fine = self._residual(constant_field, bump_data, 1024)
        assert coarse / fine >= 3.0

    def test_interval_midpoints(self, cascade, constant_field):
        """Test one finite residual per snapshot interval."""
        trajectory = cascade[0]
        midpoints, residual = energy_identity_residual(trajectory, constant_field, zero_source())
        assert midpoints.size == len(trajectory.snapshots) - 1
        assert midpoints[0] == pytest.approx(0.5 * trajectory.times[1])
        assert np.all(np.isfinite(residual))


class TestOperatorM:
    """Test apply_M and apply_M2."""

    def test_polynomial(self, constant_field):
        """Test M^2 r^4 = 120 for a = b = 1 in three dimensions."""
        grid = Grid(GridKind.RADIAL, n=3, r_max=10.0, m=1001)
        fields = apply_M2(grid.radii**4, constant_field, grid)
        inside = (grid.radii >= 1.0) & (grid.radii <= 9.0)
        np.testing.assert_allclose(fields.Mu[inside], 20.0 * grid.radii[inside] ** 2, rtol=1e-3)
        np.testing.assert_allclose(fields.M2u[inside], 120.0, rtol=1e-2)
        assert fields.M2u[-1] == 0.0

    def test_first_power_only(self, bump_snapshot, constant_field, small_grid):
        """Test that apply_M leaves M^2 u unset."""
        assert apply_M(bump_snapshot, constant_field, small_grid).M2u is None


class TestHardyRatio:
    """Test hardy_ratio and hardy_bound."""

    def test_bound(self):
        """Test the sharp constants (2/(n-2))^2."""
        assert hardy_bound(3) == 4.0
        assert hardy_bound(4) == 1.0

    def test_random_profiles(self):
        """Test that random compactly supported profiles stay under 4.05."""
        grid = Grid(GridKind.RADIAL, n=3, r_max=10.0, m=2048)
        rng = np.random.default_rng(11)
        s = np.clip(grid.radii / 8.0, 0.0, 1.0)
        envelope = (1.0 - s * s) ** 3
        for _ in range(100):
            coefficients = rng.normal(size=4)
            profile = envelope * np.polynomial.polynomial.polyval(s, coefficients)
            assert hardy_ratio(profile, grid) <= 4.0 * 1.0125

    def test_truncated_gaussian(self):
        """Test a callable profile."""
        grid = Grid(GridKind.RADIAL, n=3, r_max=10.0, m=2048)
        assert 0.0 < hardy_ratio(lambda r: np.exp(-r * r) * (r < 9.0), grid) <= 4.05

    def test_zero_profile(self):
        """Test that the zero profile has ratio 0."""
        grid = Grid(GridKind.RADIAL, n=3, r_max=10.0, m=64)
        assert hardy_ratio(np.zeros(grid.size), grid) == 0.0

    def test_low_dimension(self):
        """Test that n < 3 is rejected."""
        with pytest.raises(AuditError):
            hardy_ratio(np.zeros(64), Grid(GridKind.RADIAL, n=2, r_max=10.0, m=64), n=2)

    def test_cartesian_grid(self):
        """Test that a Cartesian grid is rejected."""
        with pytest.raises(AuditError):
            hardy_ratio(np.zeros(127), Grid(GridKind.CARTESIAN1D, n=1, r_max=10.0, m=64))


class TestNodalBound:
    """Test nodal_m_bound."""

    def test_holds_along_trajectory(self, cascade, constant_field, small_grid):
        """Test a(Mu)^2 <= 3[(c^2/a) u_tt^2 + a u_t^2 + h^2/a] at every stored step."""
        for snap in cascade[0].snapshots:
            bound = nodal_m_bound(snap, constant_field, small_grid, zero_source())
            assert bound.holds
            assert bound.max_ratio <= 1.0

    def test_fails_for_inconsistent_snapshot(self, bump_snapshot, constant_field, small_grid):
        """Test that a bump with zero u_t and u_tt violates the bound."""
        assert not nodal_m_bound(bump_snapshot, constant_field, small_grid, zero_source()).holds


class TestLinfInterpolation:
    """Test the scale invariance of the interpolation ratio."""

    def test_scale_invariant(self, bump_snapshot, constant_field, small_grid):
        """Test that |u|_inf^2 / (|Mu|_a |grad u|_b) is unchanged under u -> 3u."""

        def ratio(snap):
            gradient = math.sqrt(2.0 * energy(snap, constant_field, small_grid))
            return linf_norm(snap) ** 2 / (math.sqrt(M_norm(snap, constant_field, small_grid)) * gradient)

        scaled = bump_snapshot._replace(u=3.0 * bump_snapshot.u)
        assert ratio(scaled) == pytest.approx(ratio(bump_snapshot))


class TestProductRule:
    """Test the product-rule cross-check of M^2 u."""

    def test_matches_composition(self, cascade, constant_field, small_grid):
        """Test that both forms of M^2 u agree at the last snapshot."""
        last = [trajectory.snapshots[-1] for trajectory in cascade]
        assert m2_discrepancy(last, constant_field, small_grid, zero_source()) < 0.05

    def test_needs_four_derivatives(self, cascade, constant_field, small_grid):
        """Test that fewer than five cascade orders are rejected."""
        last = [trajectory.snapshots[-1] for trajectory in cascade[:3]]
        with pytest.raises(AuditError, match="orders 0..4"):
            m2_product_rule(last, constant_field, small_grid, zero_source())


class TestWeightedExponential:
    """Test weighted_exponential_diagnostic."""

    def test_scaled_entries(self, cascade, constant_field, small_grid, audit_inputs):
        """Test that the scaled entries multiply the weighted integrals by powers of t."""
        subsolution = audit_inputs[1]
        last = cascade[0].snapshots[-1]
        out = weighted_exponential_diagnostic(last, constant_field, small_grid, subsolution, 1.0, 0.1)
        assert out["weighted_l2"] > 0.0
        assert out["scaled_l2"] == pytest.approx(out["weighted_l2"] * last.t**0.9)

    def test_grid_past_the_subsolution_range(self, cascade, constant_field, audit_inputs):
        """Test that a grid reaching past the subsolution's range is rejected."""
        subsolution = audit_inputs[1]
        grid = Grid(GridKind.RADIAL, n=3, r_max=2.0 * subsolution.r_max, m=512)
        with pytest.raises(AuditError, match="exceeds the subsolution range"):
            weighted_exponential_diagnostic(cascade[0].snapshots[-1], constant_field, grid, subsolution, 1.0, 0.1)


class TestAudit:
    """Test audit_inequalities."""

    def test_unweighted_damping_constant(self, cascade, constant_field, audit_inputs):
        """Test that the cumulative damping stays below E(T0)."""
        report = audit_inequalities(cascade, constant_field, zero_source(), *audit_inputs, window=(3.0, 20.0))
        entry = report.entry("weighted_damping[p=0]")
        assert entry.lhs > 0.0
        assert entry.max_ratio <= 1.0 + DAMPING_CONSTANT_SLACK
        assert report.entry("nodal_M_bound").status == "pass"
        assert "m2_product_rule_discrepancy" in report.diagnostics

    def test_damping_constant_with_a_source(self, constant_field, bump_data, small_grid, audit_inputs):
        """Test that a source pulse keeps the cumulative damping below 2 E(T0) + int H."""
        source = named_source("decaying_pulse", amplitude=0.5, radius=4.0)
        trajectories = run_cascade(bump_data, constant_field, source, small_grid, 4, 20.0, Cadence.stride(20))
        report = audit_inequalities(trajectories, constant_field, source, *audit_inputs, window=(3.0, 20.0))
        entry = report.entry("weighted_damping[p=0]")
        assert entry.lhs > 0.0
        assert entry.max_ratio <= 2.0 * (1.0 + DAMPING_CONSTANT_SLACK)
        assert entry.status == "pass"

    def test_every_order_is_audited(self, cascade, constant_field, audit_inputs):
        """Test that all cascade orders produce weighted and pointwise entries."""
        report = audit_inequalities(cascade, constant_field, zero_source(), *audit_inputs, window=(3.0, 20.0))
        names = {e.name for e in report.entries}
        assert {f"pointwise_energy[k={k}]" for k in range(5)} <= names
        assert {f"weighted_energy[k={k}]" for k in range(1, 5)} <= names
        assert {"damping_energy_product", "weighted_M", "weighted_M2", "linf_interpolation"} <= names
        assert report.as_dict()["window"] == [3.0, 20.0]

    def test_empty_window(self, cascade, constant_field, audit_inputs):
        """Test that a window without snapshots is skipped."""
        report = audit_inequalities(cascade, constant_field, zero_source(), *audit_inputs, window=(1000.0, 2000.0))
        assert [e.status for e in report.entries] == ["skipped"]
        assert report.entry("audit").reason

    def test_missing_orders_are_skipped(self, cascade, constant_field, audit_inputs):
        """Test that the M^2 bound needs the fourth cascade order."""
        report = audit_inequalities(cascade[:3], constant_field, zero_source(), *audit_inputs, window=(3.0, 20.0))
        assert report.entry("weighted_M2").status == "skipped"
        assert "needs cascade order 4" in report.entry("weighted_M2").reason
        assert report.entry("damping_energy_product").status != "skipped"

    def test_interpolation_skipped_on_the_line(self, constant_field, bump_data, audit_inputs):
        """Test that the L-infinity interpolation entry is radial-only."""
        grid = Grid(GridKind.CARTESIAN1D, n=1, r_max=30.0, m=256)
        trajectories = run_cascade(bump_data, constant_field, zero_source(), grid, 1, 10.0, Cadence.stride(20))
        report = audit_inequalities(
            trajectories, constant_field, zero_source(), *audit_inputs, window=(3.0, 10.0), n=1
        )
        assert report.entry("linf_interpolation").status == "skipped"

    def test_unknown_entry(self, cascade, constant_field, audit_inputs):
        """Test that looking up a missing entry raises."""
        report = audit_inequalities(cascade, constant_field, zero_source(), *audit_inputs, window=(1000.0, 2000.0))
        with pytest.raises(KeyError):
            report.entry("weighted_M")

