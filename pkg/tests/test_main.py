"""Tests for the wavedecay command line."""

import json

import pytest

import main
from reporting import CERTIFICATES_FILE, VERDICTS_FILE


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    """Keep main() from replacing the pytest log handlers."""
    monkeypatch.setattr(main, "configure_logging", lambda verbose: None)


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestMain:
    """Test main()."""

    def test_certify(self, scenario_file, tmp_path):
        """Test that certify writes into <out>/<name> and passes."""
        out = tmp_path / "out"
        assert main.main(["certify", "--scenario", str(scenario_file), "--out", str(out)]) == 0
        assert (out / "tiny" / CERTIFICATES_FILE).is_file()

    def test_run(self, scenario_file, tmp_path):
        """Test that run returns a verdict exit code."""
        out = tmp_path / "out"
        assert main.main(["run", "--scenario", str(scenario_file), "--out", str(out)]) in {0, 1}
        assert (out / "tiny" / VERDICTS_FILE).is_file()

    def test_inadmissible_certify(self, tmp_path, tiny_scenario_data):
        """Test that a failed certificate exits with 1."""
        path = _write(tmp_path / "steep.json", {**tiny_scenario_data, "beta": 2.5})
        assert main.main(["certify", "--scenario", str(path), "--out", str(tmp_path)]) == 1

    def test_stage_error(self, tmp_path, tiny_scenario_data):
        """Test that a failed stage exits with 2."""
        path = _write(tmp_path / "steep.json", {**tiny_scenario_data, "beta": 2.5})
        assert main.main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == 2

    def test_unknown_key(self, tmp_path, tiny_scenario_data):
        """Test that an invalid scenario exits with 2."""
        path = _write(tmp_path / "typo.json", {**tiny_scenario_data, "t_ned": 1.0})
        assert main.main(["certify", "--scenario", str(path), "--out", str(tmp_path)]) == 2

    def test_missing_file(self, tmp_path):
        """Test that an unreadable scenario exits with 2."""
        assert main.main(["certify", "--scenario", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2

    def test_scenario_is_required(self):
        """Test that argparse rejects a command without --scenario."""
        with pytest.raises(SystemExit):
            main.main(["run"])

    def test_concurrent_scenarios(self, scenario_file, tmp_path, tiny_scenario_data):
        """Test that several scenarios run concurrently and the worst code wins."""
        other = _write(tmp_path / "other.json", {**tiny_scenario_data, "name": "other"})
        broken = _write(tmp_path / "broken.json", {**tiny_scenario_data, "name": "broken", "cfl": 3.0})
        out = tmp_path / "out"
        args = ["certify", "--scenario", str(scenario_file), "--scenario", str(other), "--out", str(out)]
        assert main.main(args) == 0
        assert (out / "tiny" / CERTIFICATES_FILE).is_file()
        assert (out / "other" / CERTIFICATES_FILE).is_file()
        code = main.main(["certify", "--scenario", str(other), "--scenario", str(broken), "--out", str(out)])
        assert code == 2


class TestPrepare:
    """Test the command-line overrides."""

    def test_flags_override_the_file(self, scenario_file):
        """Test that --grid and --t-end replace scenario keys."""
        args = main.build_parser().parse_args(
            ["run", "--scenario", str(scenario_file), "--grid", "128", "--t-end", "20"]
        )
        scenario = main.prepare(scenario_file, args)
        assert scenario.grid == 128
        assert scenario.t_end == 20.0
        assert scenario.name == "tiny"

    def test_unset_flags_keep_the_file(self, scenario_file):
        """Test that omitted flags leave the scenario untouched."""
        args = main.build_parser().parse_args(["fit", "--scenario", str(scenario_file)])
        assert main.prepare(scenario_file, args).grid == 256
