import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from dbsampler.errors import BracketError, DomainError
from dbsampler.specfun import (
    SERIES_LIMIT,
    bessel_j,
    bessel_j_series,
    bessel_y,
    bessel_zeros,
    mixed_condition,
    zero_prediction,
)


@given(st.floats(0.0, 6.0), st.floats(1e-3, SERIES_LIMIT))
def test_series_matches_library(nu, x):
    ref = bessel_j(nu, x)
    assert abs(bessel_j_series(nu, x) - ref) <= 1e-11 * max(1.0, abs(ref))


def test_half_order_closed_form():
    x = np.linspace(0.1, 30, 50)
    assert np.allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=0, atol=1e-14)
    assert np.allclose(bessel_y(0.5, x), -np.sqrt(2 / (np.pi * x)) * np.cos(x), rtol=0, atol=1e-14)


def test_domain_checks():
    with pytest.raises(DomainError):
        bessel_j(-1.0, 1.0)
    with pytest.raises(DomainError):
        bessel_y(0.5, 0.0)


@pytest.mark.parametrize("nu", [0.5, 0.75, 1.0, 1.5, 3.0])
def test_plain_zeros_are_zeros_and_ordered(nu):
    tab = bessel_zeros(nu, 60)
    assert tab.zeros.size == 60
    assert np.all(np.diff(tab.zeros) > 0)
    assert np.max(np.abs(special.jv(nu, tab.zeros))) < 1e-13
    # interlacing with the next order
    nxt = bessel_zeros(nu + 1, 60).zeros
    assert np.all(tab.zeros < nxt)
    assert np.all(nxt[:-1] < tab.zeros[1:])


def test_half_order_zeros_are_multiples_of_pi():
    z = bessel_zeros(0.5, 40).zeros
    assert np.max(np.abs(z - np.pi * np.arange(1, 41))) < 1e-12


def test_integer_order_zero_against_library():
    assert np.allclose(bessel_zeros(1.0, 30).zeros, special.jn_zeros(1, 30), rtol=1e-14)


@pytest.mark.parametrize("nu,cot", [(0.5, 0.0), (0.75, 2.0), (1.5, -3.0)])
def test_mixed_zeros(nu, cot):
    tab = bessel_zeros(nu, 40, "mixed", cot_gamma=cot, s=1.0)
    c = tab.mixed_constant
    res = mixed_condition(nu, c, tab.zeros)
    scale = tab.zeros * np.abs(special.jv(nu + 1, tab.zeros)) + abs(c) * np.abs(special.jv(nu, tab.zeros))
    assert np.max(np.abs(res) / scale) < 1e-12
    dev = tab.zeros - zero_prediction(nu, np.arange(1, 41), "mixed")
    assert abs(dev[-1]) < 0.1


def test_mixed_half_order_neumann_like():
    # nu = 1/2, gamma = pi/2: w J_{3/2} - J_{1/2} = 0  <=>  tan w = ... with c = 1
    tab = bessel_zeros(0.5, 10, "mixed", cot_gamma=0.0)
    # sqrt(2/(pi w)) (sin w / w - cos w) w - sqrt(2/(pi w)) sin w = -sqrt(2w/pi) cos w
    assert np.allclose(tab.zeros, (np.arange(1, 11) + 0.5) * np.pi, atol=1e-12)


def test_bad_kind_and_count():
    with pytest.raises(DomainError):
        bessel_zeros(0.5, 0)
    with pytest.raises(DomainError):
        bessel_zeros(0.5, 3, kind="cross")


def test_bracket_error_carries_index():
    err = BracketError("x", index=4)
    assert err.index == 4
