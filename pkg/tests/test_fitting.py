import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbsampler.errors import DomainError
from dbsampler.fitting import decay_fit


def test_exact_power_law():
    n = np.arange(1, 101)
    fit = decay_fit(n, 3.0 * n**-2.0)
    assert fit.slope == pytest.approx(-2.0, abs=1e-6)
    assert np.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.n_points == 100


@given(st.floats(-4, 2), st.floats(0.1, 10))
def test_slope_recovered(p, c):
    n = np.arange(5, 60, dtype=float)
    assert decay_fit(n, c * n**p).slope == pytest.approx(p, abs=1e-9)


def test_window_and_rejections():
    n = np.arange(1, 50)
    fit = decay_fit(n, n**-1.0, window=(20, 40))
    assert fit.n_points == 21
    with pytest.raises(DomainError):
        decay_fit(n, n - 5.0)
    with pytest.raises(DomainError):
        decay_fit(n[:9], n[:9] ** 2.0)
    with pytest.raises(DomainError):
        decay_fit(n, n[:-1])
