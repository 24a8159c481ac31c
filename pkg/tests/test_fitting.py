import numpy as np
import pytest
from hypothesis import given, strategies as st

from fractaldims.fitting import linear_fit, loglog_fit


def test_exact_power_law():
    x = 2.0 ** -np.arange(6)
    fit = loglog_fit(x, 3 * x**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3), abs=1e-12)
    assert fit.r2 == 1.0
    assert fit.window == (x.min(), x.max())
    assert fit.n_points == 6


def test_constant_response_has_zero_slope_and_unit_r2():
    slope, _, r2 = linear_fit([0, 1, 2], [5, 5, 5])
    assert slope == 0.0
    assert r2 == 1.0


@pytest.mark.parametrize("x,y", [([1, 1], [1, 2]), ([1, 2], [1, -1]), ([0, 1], [1, 1])])
def test_rejects_bad_input(x, y):
    with pytest.raises(ValueError):
        loglog_fit(x, y)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30), st.floats(-5, 5), st.floats(-5, 5))
def test_r2_in_unit_interval(noise, a, b):
    u = np.arange(len(noise), dtype=float)
    _, _, r2 = linear_fit(u, a * u + b + np.asarray(noise))
    assert 0.0 <= r2 <= 1.0
