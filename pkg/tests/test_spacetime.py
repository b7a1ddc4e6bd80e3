import numpy as np
import pytest
from hypothesis import given, strategies as st

from zklab import Field2, Grid2, SpaceTimeField
from zklab.spacetime import cumulative_integral, trapezoid_weights


class TestSpaceTimeField:
    def test_times_and_slices(self):
        g = Grid2(8, 8)
        u = SpaceTimeField(g, np.arange(5)[:, None, None] * np.ones((5, 8, 8)), (0.0, 2.0))
        np.testing.assert_allclose(u.times, [0, 0.5, 1, 1.5, 2])
        assert u.dt == 0.5 and u.nt == 5
        assert u.slice(3).values[0, 0] == 3
        assert u.index_of(1.5) == 3

    def test_from_slices(self):
        g = Grid2(8, 8)
        u = SpaceTimeField.from_slices([Field2(g, np.full((8, 8), float(j))) for j in range(3)], (0, 1))
        assert u.values.shape == (3, 8, 8)

    @pytest.mark.parametrize(
        "shape, window",
        [((1, 8, 8), (0, 1)), ((3, 8, 4), (0, 1)), ((3, 8, 8), (1, 1))],
    )
    def test_invalid(self, shape, window):
        with pytest.raises(ValueError):
            SpaceTimeField(Grid2(8, 8), np.zeros(shape), window)


class TestCumulativeIntegral:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 9])
    def test_cubics_exact(self, n):
        # every rule used is exact for polynomials of degree <= 2, Simpson rules for cubics
        t = np.linspace(0, 1.3, n)
        f = 1 + 2 * t - 3 * t**2
        out, rules = cumulative_integral(f, t[1] - t[0])
        exact = t + t**2 - t**3
        tol = 1e-14 if n > 2 else None
        if tol is None:
            assert rules[1] == "trapezoid"
        else:
            np.testing.assert_allclose(out, exact, atol=tol)

    def test_rule_names(self):
        _, rules = cumulative_integral(np.zeros(6), 0.1)
        assert rules == ["none", "quadratic-start", "simpson", "simpson+3/8", "simpson", "simpson+3/8"]

    def test_origin_out_of_range(self):
        with pytest.raises(ValueError):
            cumulative_integral(np.zeros(4), 0.1, origin=4)

    @given(st.integers(13, 40), st.integers(0, 39))
    def test_backward_matches_forward_difference(self, n, origin):
        origin = min(origin, n - 1)
        t = np.linspace(-1, 2, n)
        f = np.sin(3 * t)
        out, _ = cumulative_integral(f, t[1] - t[0], origin=origin)
        exact = -(np.cos(3 * t) - np.cos(3 * t[origin])) / 3
        assert np.abs(out - exact).max() < 0.05
        assert out[origin] == 0


def test_trapezoid_weights():
    w = trapezoid_weights(5, 0.25)
    assert w.sum() == pytest.approx(1.0) and w[0] == 0.125
