"""Pytest configuration and fixtures for wavedecay tests."""

import json

import numpy as np
import pytest

from coefficients import PowerLawEnvelope, make_power_law, named_initial_data, zero_source
from solver import Cadence, Grid, GridKind, Snapshot, run_cascade


@pytest.fixture(scope="session")
def constant_field():
    """a = b = c = 1."""
    return make_power_law(PowerLawEnvelope())


@pytest.fixture(scope="session")
def bump_data():
    """Gaussian bump of radius 4 at rest."""
    return named_initial_data("gaussian_bump", amplitude=1.0, radius=4.0)


@pytest.fixture(scope="session")
def small_grid():
    """Coarse radial n=3 grid that keeps the cone inside through t=20."""
    return Grid(GridKind.RADIAL, n=3, r_max=30.0, m=512)


@pytest.fixture(scope="session")
def cascade(constant_field, bump_data, small_grid):
    """Orders 0..4 of the constant-coefficient bump, shared by the audit tests."""
    return run_cascade(
        bump_data, constant_field, zero_source(), small_grid, k=4, t_end=20.0, cadence=Cadence.stride(20)
    )


@pytest.fixture
def bump_snapshot(small_grid, bump_data):
    """Snapshot at rest holding the bump on the coarse grid."""
    u = bump_data.u0(small_grid.radii)
    return Snapshot(t=0.0, step=0, u=u, u_t=np.zeros_like(u), u_tt=np.zeros_like(u))


@pytest.fixture
def tiny_scenario_data():
    """Scenario keys for a fast end-to-end run."""
    return {"name": "tiny", "t_end": 40.0, "grid": 256, "plots": False}


@pytest.fixture
def scenario_file(tmp_path, tiny_scenario_data):
    """The tiny scenario written to disk."""
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_scenario_data), encoding="utf-8")
    return path
