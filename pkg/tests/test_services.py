"""Integration tests for the certify, run, fit and plot workflows."""

import shutil

import pytest

import services.certify
from certificates import lambda_exponents
from coefficients import PowerLawEnvelope, make_power_law
from reporting import AUDIT_FILE, CERTIFICATES_FILE, ENERGY_FILE, VERDICTS_FILE, ReportError, read_json
from scenario import Scenario
from services.certify import build_certificates, certificates_passed, certify, check_envelope, resolve_omega
from services.fit import refit
from services.plot import replot
from services.run import StageError, run_scenario
from support import build_q

TINY = {"name": "tiny", "t_end": 40.0, "grid": 256, "plots": False}


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    """One end-to-end run of the tiny scenario."""
    directory = tmp_path_factory.mktemp("tiny")
    return run_scenario(Scenario(**TINY), directory)


class TestCertify:
    """Test the certify workflow."""

    def test_constant_field_passes(self, tmp_path):
        """Test that the default coefficients satisfy every certificate."""
        assert certify(Scenario(**TINY), tmp_path) == 0
        document = read_json(tmp_path / CERTIFICATES_FILE)
        assert certificates_passed(document)
        assert document["omega_window"]["omega"] == 0.5
        assert document["source_support"]["pass"] is True

    def test_inadmissible_envelope(self, tmp_path):
        """Test that beta + gamma >= 2 fails with only the admissibility entry written."""
        assert certify(Scenario(**TINY, beta=2.5), tmp_path) == 1
        document = read_json(tmp_path / CERTIFICATES_FILE)
        assert list(document) == ["admissibility"]
        assert document["admissibility"]["pass"] is False

    def test_fast_growing_m_conditions_fail(self, tmp_path, monkeypatch):
        """Test that an M-condition slope above 1 makes certify return 1."""
        steep = lambda_exponents(make_power_law(PowerLawEnvelope(alpha=2.0)), build_q(PowerLawEnvelope(), R=4.0))
        monkeypatch.setattr(services.certify, "lambda_exponents", lambda *args, **kwargs: steep)
        assert certify(Scenario(**TINY), tmp_path) == 1
        document = read_json(tmp_path / CERTIFICATES_FILE)
        assert document["m_conditions"]["pass"] is False
        assert document["m_conditions"]["exceeded"]
        assert document["admissibility"]["pass"] is True

    def test_subsolution_covers_the_grid(self):
        """Test that the subsolution is built out to the evolution grid radius."""
        scenario = Scenario(**TINY, r_max=250.0)
        outcome = build_certificates(scenario, scenario.coefficient_field(), check_envelope(scenario))
        assert outcome.subsolution.r_max >= scenario.build_grid().r_max

    def test_explicit_omega(self):
        """Test that an explicit omega ignores the window."""
        assert resolve_omega(Scenario(omega=0.3), (0.0, 1.0)) == 0.3
        assert resolve_omega(Scenario(), (0.2, 0.6)) == pytest.approx(0.4)


class TestRunScenario:
    """Test run_scenario."""

    def test_writes_every_report(self, tiny_run):
        """Test that all four reports exist and the exit code is 0 or 1."""
        for name in (CERTIFICATES_FILE, ENERGY_FILE, AUDIT_FILE, VERDICTS_FILE):
            assert (tiny_run.directory / name).is_file()
        assert tiny_run.exit_code in {0, 1}
        assert tiny_run.plots == []

    def test_verdict_document(self, tiny_run):
        """Test that verdicts.json carries the cone and audit results."""
        document = read_json(tiny_run.directory / VERDICTS_FILE)
        assert document["cone"]["verdict"] == tiny_run.cone.verdict
        assert document["audit_pass"] is tiny_run.audit.passed
        assert document["window"][0] >= 20.0

    def test_deterministic(self, tiny_run, tmp_path):
        """Test that a second run writes byte-identical reports."""
        run_scenario(Scenario(**TINY), tmp_path)
        for name in (CERTIFICATES_FILE, ENERGY_FILE, AUDIT_FILE, VERDICTS_FILE):
            assert (tmp_path / name).read_bytes() == (tiny_run.directory / name).read_bytes()

    @pytest.mark.parametrize(
        ("overrides", "stage"),
        [
            ({"beta": 2.5}, "admissibility"),
            ({"source": "decaying_pulse", "source_amplitude": 0.5, "source_order": 2}, "cascade"),
            ({"alpha": 0.5, "omega": 0.51, "t_end": 10.0}, "certificates"),
        ],
    )
    def test_stage_errors(self, tmp_path, overrides, stage):
        """Test that the first failing stage is named."""
        with pytest.raises(StageError) as excinfo:
            run_scenario(Scenario(**{**TINY, **overrides}), tmp_path)
        assert excinfo.value.stage == stage

    def test_certificates_kept_after_failure(self, tmp_path):
        """Test that certificates.json survives a failed cascade."""
        scenario = Scenario(**TINY, source="decaying_pulse", source_amplitude=0.5, source_order=2)
        with pytest.raises(StageError):
            run_scenario(scenario, tmp_path)
        assert (tmp_path / CERTIFICATES_FILE).is_file()
        assert not (tmp_path / ENERGY_FILE).exists()


class TestRefitAndReplot:
    """Test the fit and plot workflows on an existing run."""

    @pytest.fixture
    def copied_run(self, tiny_run, tmp_path):
        """A private copy of the tiny run directory."""
        return shutil.copytree(tiny_run.directory, tmp_path / "tiny")

    def test_refit_keeps_cone(self, copied_run):
        """Test that refitting rewrites the verdicts and carries the cone over."""
        before = read_json(copied_run / VERDICTS_FILE)
        code = refit(Scenario(**TINY), copied_run)
        after = read_json(copied_run / VERDICTS_FILE)
        assert code in {0, 1}
        assert after["cone"] == before["cone"]
        assert after["window"] == before["window"]

    def test_refit_with_margin(self, copied_run):
        """Test that a wider margin never turns a passing verdict into a failure."""
        refit(Scenario(**TINY, margin=100.0), copied_run)
        verdicts = read_json(copied_run / VERDICTS_FILE)["verdicts"]
        assert all(v["pass"] for v in verdicts if v["direction"] == "at_least_as_fast")

    def test_refit_without_energy_table(self, tmp_path):
        """Test that refitting an empty directory raises ReportError."""
        with pytest.raises(ReportError):
            refit(Scenario(**TINY), tmp_path)

    def test_replot(self, copied_run):
        """Test that plots are emitted from the energy table."""
        assert replot(Scenario(**TINY), copied_run) == 0
        assert (copied_run / "energy_E0.svg").is_file()
