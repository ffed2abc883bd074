import numpy as np
import pytest
from statsmodels.nonparametric.smoothers_lowess import lowess as sm_lowess

from costsched.errors import TooFewPoints
from costsched.smoothing import DEFAULT_SPAN, MIN_POINTS, smooth_schedule


class TestBasics:
    def test_default_span(self):
        assert DEFAULT_SPAN == pytest.approx(2 / 3)

    def test_too_few_points(self):
        pts = [(i, i) for i in range(MIN_POINTS - 1)]
        with pytest.raises(TooFewPoints):
            smooth_schedule(pts)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            smooth_schedule(np.zeros((10, 3)))

    def test_grid_covers_observed_range(self):
        pts = np.c_[np.linspace(0, 10, 30), np.random.default_rng(0).random(30)]
        gx, gy = smooth_schedule(pts, n_grid=50)
        assert len(gx) == len(gy) == 50
        assert gx[0] == 0.0 and gx[-1] == 10.0

    def test_custom_eval_points(self):
        pts = np.c_[np.linspace(0, 1, 20), np.linspace(0, 1, 20)]
        gx, gy = smooth_schedule(pts, eval_x=[0.25, 0.75])
        np.testing.assert_array_equal(gx, [0.25, 0.75])
        assert len(gy) == 2


class TestExactCases:
    def test_reproduces_a_line(self):
        x = np.linspace(0, 5, 40)
        pts = np.c_[x, 3.0 * x - 1.0]
        gx, gy = smooth_schedule(pts, n_grid=25)
        np.testing.assert_allclose(gy, 3.0 * gx - 1.0, atol=1e-6)

    def test_constant_data(self):
        pts = np.c_[np.linspace(0, 1, 10), np.full(10, 0.7)]
        _, gy = smooth_schedule(pts)
        np.testing.assert_allclose(gy, 0.7, atol=1e-12)

    def test_duplicate_x_handled(self):
        # all points at the same x: local bandwidth collapses to zero
        pts = np.c_[np.ones(8), np.arange(8, dtype=float)]
        gx, gy = smooth_schedule(pts, eval_x=[1.0])
        assert gy[0] == pytest.approx(np.arange(8).mean())


class TestAgainstReference:
    def test_matches_statsmodels_lowess(self):
        """statsmodels lowess with frac=span and zero robustness iterations
        is the independent reference implementation."""
        rng = np.random.default_rng(17)
        x = np.sort(rng.random(150)) * 10
        y = np.sin(x) + 0.1 * rng.normal(size=150)
        ref = sm_lowess(y, x, frac=2 / 3, it=0, xvals=x)
        _, got = smooth_schedule(np.c_[x, y], span=2 / 3, eval_x=x)
        np.testing.assert_allclose(got, ref, atol=1e-3)

    def test_matches_statsmodels_at_small_span(self):
        rng = np.random.default_rng(23)
        x = np.sort(rng.random(120))
        y = x ** 2 + 0.05 * rng.normal(size=120)
        ref = sm_lowess(y, x, frac=0.4, it=0, xvals=x)
        _, got = smooth_schedule(np.c_[x, y], span=0.4, eval_x=x)
        np.testing.assert_allclose(got, ref, atol=1e-3)
