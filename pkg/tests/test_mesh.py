import numpy as np
import pytest
from hypothesis import given, strategies as st

from dbsampler.errors import DomainError
from dbsampler.mesh import build_mesh


def test_integrates_polynomials_and_oscillations():
    m = build_mesh(2.0, 20.0)
    assert m.integrate(m.points**3) == pytest.approx(4.0, rel=1e-13)
    assert m.integrate(np.sin(20 * m.points)) == pytest.approx((np.cos(20 * m.x0) - np.cos(40)) / 20, abs=1e-13)


def test_breakpoints_are_edges_and_partial_integrals():
    m = build_mesh(1.0, 5.0, breakpoints=(0.37,))
    assert np.min(np.abs(m.edges - 0.37)) == 0.0
    assert m.integrate(np.ones_like(m.points), upto=0.37) == pytest.approx(0.37 - m.x0, rel=1e-13)


def test_cumulative():
    m = build_mesh(1.0, 3.0)
    c = m.cumulative(np.cos(3 * m.points))
    assert np.max(np.abs(c - (np.sin(3 * m.points) - np.sin(3 * m.x0)) / 3)) < 1e-13


@given(st.floats(0.0, 1.0))
def test_interpolation(x):
    m = build_mesh(1.0, 4.0, breakpoints=(0.5,))
    v = np.exp(m.points) * np.sin(4 * m.points)
    got = m.interpolate(v, np.array([x]))[0]
    assert got == pytest.approx(np.exp(x) * np.sin(4 * x), abs=1e-6 * max(x, 1e-3) + 1e-12)


def test_mesh_resolves_frequency():
    m = build_mesh(1.0, 100.0)
    assert np.max(np.diff(m.edges)) <= 1.5 / 100 + 1e-15


def test_bad_input():
    with pytest.raises(DomainError):
        build_mesh(0.0)
    with pytest.raises(DomainError):
        build_mesh(1.0, np.inf)
