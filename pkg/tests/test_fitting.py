"""Unit tests for decay fits and verdicts."""

import numpy as np
import pytest

from fitting import (
    DecayFit,
    Direction,
    FitError,
    compare_to_theory,
    default_window,
    fit_decay_rate,
    gain_verdict,
    judge,
)


class TestDefaultWindow:
    """Test default_window."""

    def test_early_start(self):
        """Test that the window never opens before t = 20."""
        assert default_window(3.0, 400.0) == (20.0, 360.0)

    def test_late_start(self):
        """Test that a late T0 opens the window at 2 T0."""
        assert default_window(38.5, 1000.0) == (77.0, 900.0)


class TestFitDecayRate:
    """Test fit_decay_rate."""

    def test_exact_power_law(self):
        """Test that t^-2.5 is fitted exactly."""
        t = np.geomspace(1.0, 1000.0, 50)
        fit = fit_decay_rate(t, 3.0 * t**-2.5, (10.0, 900.0))
        assert fit.slope == pytest.approx(-2.5)
        assert fit.rate == pytest.approx(2.5)
        assert fit.intercept == pytest.approx(np.log(3.0))
        assert fit.rms == pytest.approx(0.0, abs=1e-10)
        assert fit.n_points == int(np.sum((t >= 10.0) & (t <= 900.0)))

    def test_window_is_closed(self):
        """Test that samples on the window edges are used."""
        t = np.arange(1.0, 11.0)
        assert fit_decay_rate(t, 1.0 / t, (3.0, 10.0)).n_points == 8

    def test_too_few_points(self):
        """Test that the error names the window."""
        t = np.arange(1.0, 11.0)
        with pytest.raises(FitError, match=r"need ≥ 8 points to fit \(got 3\)\. Window \[1, 3\]"):
            fit_decay_rate(t, 1.0 / t, (1.0, 3.0))

    def test_nonpositive_values(self):
        """Test that the error lists the offending times."""
        t = np.arange(1.0, 11.0)
        values = 1.0 / t
        values[[2, 5]] = 0.0
        with pytest.raises(FitError, match="t = 3, 6"):
            fit_decay_rate(t, values, (1.0, 10.0))

    def test_non_finite_values(self):
        """Test that NaN samples are rejected."""
        t = np.arange(1.0, 11.0)
        values = 1.0 / t
        values[0] = np.nan
        with pytest.raises(FitError, match="non-finite"):
            fit_decay_rate(t, values, (1.0, 10.0))

    def test_as_dict(self):
        """Test the serialized fit."""
        t = np.geomspace(1.0, 100.0, 20)
        document = fit_decay_rate(t, t**-1.0, (1.0, 100.0)).as_dict()
        assert document["window"] == [1.0, 100.0]
        assert document["n_points"] == 20


class TestJudge:
    """Test judge."""

    @pytest.mark.parametrize(
        ("fitted", "predicted", "direction", "margin", "expected"),
        [
            (2.5, 1.9, Direction.AT_LEAST_AS_FAST, 0.3, True),
            (1.7, 1.9, Direction.AT_LEAST_AS_FAST, 0.3, True),
            (1.5, 1.9, Direction.AT_LEAST_AS_FAST, 0.3, False),
            (2.3, 2.0, "two_sided", 0.5, True),
            (2.6, 2.0, "two_sided", 0.5, False),
            (1.4, 2.0, "two_sided", 0.5, False),
        ],
    )
    def test_directions(self, fitted, predicted, direction, margin, expected):
        """Test one-sided and two-sided comparisons."""
        assert judge(fitted, predicted, direction, margin) is expected

    def test_unknown_direction(self):
        """Test that an unknown direction is rejected."""
        with pytest.raises(ValueError, match="sideways"):
            judge(1.0, 1.0, "sideways", 0.1)


class TestVerdicts:
    """Test compare_to_theory and gain_verdict."""

    def test_compare_to_theory(self):
        """Test that the verdict carries the rate and the fit."""
        fit = DecayFit(-2.4, 0.0, (20.0, 360.0), 0.0, 8)
        verdict = compare_to_theory(fit, 1.9, quantity="E0")
        assert verdict.passed
        assert verdict.fitted == 2.4
        document = verdict.as_dict()
        assert document["quantity"] == "E0"
        assert document["direction"] == "at_least_as_fast"
        assert document["fit"]["slope"] == -2.4

    def test_slow_decay_fails(self):
        """Test that decay slower than predicted fails."""
        fit = DecayFit(-1.0, 0.0, (20.0, 360.0), 0.0, 8)
        assert not compare_to_theory(fit, 1.9, margin=0.3).passed

    def test_gain(self):
        """Test the two-sided gain of one time derivative."""
        lower = DecayFit(-2.5, 0.0, (20.0, 360.0), 0.0, 8)
        upper = DecayFit(-4.4, 0.0, (20.0, 360.0), 0.0, 8)
        verdict = gain_verdict(lower, upper, 0)
        assert verdict.quantity == "gain_E1_over_E0"
        assert verdict.fitted == pytest.approx(1.9)
        assert verdict.passed
        assert verdict.fit is None

    def test_gain_too_large(self):
        """Test that an excessive gain fails."""
        lower = DecayFit(-2.5, 0.0, (20.0, 360.0), 0.0, 8)
        upper = DecayFit(-5.5, 0.0, (20.0, 360.0), 0.0, 8)
        assert not gain_verdict(lower, upper, 2).passed
