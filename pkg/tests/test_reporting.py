"""Unit tests for report emission."""

import json
import logging

import numpy as np
import polars as pl
import pytest

from energetics import EnergyRecord
from reporting import (
    ReportError,
    emit_plots,
    energy_frame,
    energy_orders,
    read_energy_csv,
    read_json,
    scenario_directory,
    write_energy_csv,
    write_json,
)
from scenario import OUTPUT_DIR_ENV


def _records(count=12):
    t = np.geomspace(1.0, 400.0, count)
    return [
        EnergyRecord(
            t=float(ti),
            E=(float(ti) ** -2.0, float(ti) ** -4.0),
            damping=float(ti) ** -3.0,
            linf=float(ti) ** -1.5,
            M_norm=0.0,
            M2_norm=0.0,
            support_radius=ti + 4.0,
            weighted_l2=float(ti) ** -1.0,
        )
        for ti in t
    ]


class TestScenarioDirectory:
    """Test scenario_directory."""

    def test_explicit_root(self, tmp_path):
        """Test that the directory is created under the given root."""
        directory = scenario_directory("baseline", root=tmp_path)
        assert directory == tmp_path / "baseline"
        assert directory.is_dir()

    def test_environment_root(self, monkeypatch, tmp_path):
        """Test that the root defaults to the environment variable."""
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "out"))
        assert scenario_directory("tiny") == tmp_path / "out" / "tiny"
        assert (tmp_path / "out" / "tiny").is_dir()


class TestJson:
    """Test write_json and read_json."""

    def test_sorted_strict_json(self, tmp_path):
        """Test sorted keys, numpy conversion, null for NaN and a trailing newline."""
        path = write_json(
            tmp_path / "doc.json",
            {"b": np.float64(1.5), "a": np.int64(2), "c": np.array([1.0, np.nan]), "d": np.bool_(True), "e": (1, 2)},
        )
        text = path.read_text(encoding="utf-8")
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"') < text.index('"c"')
        assert json.loads(text) == {"a": 2, "b": 1.5, "c": [1.0, None], "d": True, "e": [1, 2]}

    def test_read_back(self, tmp_path):
        """Test that a written document reads back unchanged."""
        path = write_json(tmp_path / "doc.json", {"pass": False, "T0": 3.1})
        assert read_json(path) == {"pass": False, "T0": 3.1}

    def test_malformed(self, tmp_path):
        """Test that malformed JSON raises ReportError."""
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ReportError, match="cannot read"):
            read_json(path)

    def test_missing(self, tmp_path):
        """Test that a missing file raises ReportError."""
        with pytest.raises(ReportError):
            read_json(tmp_path / "absent.json")


class TestEnergyCsv:
    """Test the energy table."""

    def test_columns(self):
        """Test one column per energy order and functional."""
        frame = energy_frame(_records())
        assert frame.columns[:3] == ["t", "E0", "E1"]
        assert frame.height == 12
        assert energy_orders(frame) == [0, 1]

    def test_full_precision(self, tmp_path):
        """Test that floats survive the CSV without rounding."""
        records = [
            EnergyRecord(
                t=1.0 / 3.0,
                E=(2.0 / 3.0,),
                damping=0.1,
                linf=1e-300,
                M_norm=0.0,
                M2_norm=0.0,
                support_radius=4.0,
                weighted_l2=np.pi,
            )
        ]
        frame = read_energy_csv(write_energy_csv(tmp_path / "energy.csv", records))
        assert frame["t"][0] == 1.0 / 3.0
        assert frame["E0"][0] == 2.0 / 3.0
        assert frame["linf"][0] == 1e-300
        assert frame["weighted_l2"][0] == np.pi

    def test_missing_column(self, tmp_path):
        """Test that a table without linf is rejected."""
        path = tmp_path / "energy.csv"
        pl.DataFrame({"t": [1.0], "E0": [1.0], "damping": [0.0], "weighted_l2": [0.0]}).write_csv(path)
        with pytest.raises(ReportError, match="lacks column"):
            read_energy_csv(path)

    def test_missing_file(self, tmp_path):
        """Test that a missing table raises ReportError."""
        with pytest.raises(ReportError, match="cannot read energy table"):
            read_energy_csv(tmp_path / "energy.csv")

    def test_energy_orders_ignore_other_columns(self):
        """Test that only E<k> columns count as orders."""
        frame = pl.DataFrame({"t": [1.0], "E0": [1.0], "E2": [1.0], "Extra": [0.0]})
        assert energy_orders(frame) == [0, 2]


class TestPlots:
    """Test emit_plots."""

    def test_deterministic_svg(self, tmp_path):
        """Test that two emissions are byte-identical."""
        frame = energy_frame(_records())
        first = emit_plots(frame, scenario_directory("one", root=tmp_path), {"E0": 1.9})
        second = emit_plots(frame, scenario_directory("two", root=tmp_path), {"E0": 1.9})
        assert [p.name for p in first] == ["energy_E0.svg", "energy_E1.svg"]
        for a, b in zip(first, second, strict=True):
            assert a.read_bytes() == b.read_bytes()

    def test_skips_short_series(self, tmp_path, caplog):
        """Test that a series with one positive sample is skipped."""
        frame = energy_frame(_records()).with_columns(
            pl.when(pl.col("t") == 1.0).then(1.0).otherwise(0.0).alias("E1")
        )
        with caplog.at_level(logging.WARNING, logger="reporting"):
            written = emit_plots(frame, tmp_path)
        assert [p.name for p in written] == ["energy_E0.svg"]
        assert "Skipping plot of E1" in caplog.text
