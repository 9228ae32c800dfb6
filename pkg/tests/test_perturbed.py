import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dbsampler.errors import DomainError, StepSizeError
from dbsampler.mesh import build_mesh
from dbsampler.model import ProblemSetup
from dbsampler.perturbed import (
    decomposition_residual,
    estimate_error,
    mesh_for,
    ode_residual,
    picard_correction,
    picard_trace,
    solve_endpoint,
    solve_regular,
)
from dbsampler.potentials import Potential
from dbsampler.unperturbed import xi_free, xi_free_prime


def _ivp_oracle(setup, z, x_start, y0, yp0, x_end):
    """DOP853 reference for -y'' + (V - z) y = 0 (real z)."""

    def rhs(x, u):
        V = (setup.nu**2 - 0.25) / x**2 + setup.q(np.array([x]))[0]
        return [u[1], (V - z) * u[0]]

    sol = solve_ivp(rhs, (x_start, x_end), [y0, yp0], method="DOP853", rtol=1e-13, atol=1e-16)
    return sol.y[0, -1], sol.y[1, -1]


@pytest.mark.parametrize("nu", [0.5, 0.75, 1.5])
def test_free_traces_match_closed_form(nu):
    setup = ProblemSetup(nu, 1.0)
    z = np.array([-30.0, 0.0, 5.0, 400.0, 12 + 8j])
    tr = solve_regular(setup, z)
    x = tr.grid[:, None]
    ref = xi_free(nu, z[None, :], x)
    refp = xi_free_prime(nu, z[None, :], x)
    scale = np.max(np.abs(ref), axis=0)
    assert np.max(np.abs(tr.xi - ref) / scale) < 1e-9
    assert np.max(np.abs(tr.xi_prime - refp) / np.max(np.abs(refp), axis=0)) < 1e-9


@pytest.mark.parametrize("nu", [0.5, 0.75, 1.5])
def test_near_zero_slope(nu):
    tr = solve_regular(ProblemSetup(nu, 1.0, Potential.power(1.0, 0.5, 4)), np.array([3.0]))
    assert tr.near_zero_slope()[0] == pytest.approx(nu + 0.5, abs=0.02)


@pytest.mark.parametrize(
    "q",
    [Potential.power(2.0, 0.5, 4), Potential.bump(5.0, 0.5, 0.2), Potential.constant(-3.0)],
)
def test_perturbed_against_ivp(q):
    setup = ProblemSetup(0.75, 1.0, q)
    z = 7.0
    x_start = 0.05
    mesh = mesh_for(setup, 3.0, (x_start,))
    tr = solve_regular(setup, np.array([z]), mesh)
    k = int(np.argmin(np.abs(mesh.points - x_start)))
    y, yp = _ivp_oracle(setup, z, mesh.points[k], tr.xi[k, 0].real, tr.xi_prime[k, 0].real, 1.0)
    assert tr.xi[-1, 0].real == pytest.approx(y, rel=1e-9)
    assert tr.xi_prime[-1, 0].real == pytest.approx(yp, rel=1e-9)


@pytest.mark.parametrize("c", [-1.0, 1.0, 5.0])
def test_constant_shift(c):
    setup = ProblemSetup(0.75, 1.0, Potential.constant(c))
    z = np.array([2.0, 40.0, 3 - 2j])
    y, yp = solve_endpoint(setup, z)
    y0 = xi_free(0.75, z - c, 1.0)
    yp0 = xi_free_prime(0.75, z - c, 1.0)
    assert np.max(np.abs(y - y0) / np.abs(y0)) < 1e-10
    assert np.max(np.abs(yp - yp0) / np.abs(yp0)) < 1e-10


def test_endpoint_real_path_and_scalar():
    setup = ProblemSetup(0.75, 1.0, Potential.bump(2.0, 0.5, 0.3))
    y, yp = solve_endpoint(setup, 10.0)
    assert np.isscalar(y) or np.ndim(y) == 0
    yc, ypc = solve_endpoint(setup, np.array([10.0 + 0j]))
    assert y == pytest.approx(yc[0].real, rel=1e-12)


def test_residual_and_error_estimates():
    setup = ProblemSetup(0.75, 1.0, Potential.power(1.0, 0.5, 4))
    tr = solve_regular(setup, np.array([20.0, 5 + 5j]))
    res = ode_residual(tr, setup).max(axis=1)
    # near 0 the residual is limited by interpolating x^(nu+1/2) on graded panels
    assert np.max(res) < 1e-3
    assert np.max(res[-res.size // 5 :]) < 1e-9
    assert res[-1] < 1e-6 * res[0]
    assert np.max(estimate_error(setup, np.array([20.0, 5 + 5j]))) < 1e-9


def test_step_check_flags_underresolved_mesh():
    setup = ProblemSetup(0.5, 1.0)
    coarse = build_mesh(1.0, 1.0, m=2, rho=2.0, osc=50.0, max_frac=0.5)
    with pytest.raises(StepSizeError) as info:
        solve_regular(setup, np.array([3000.0]), coarse, check=True)
    assert info.value.x is not None


def test_mesh_must_match_setup():
    with pytest.raises(DomainError):
        solve_regular(ProblemSetup(0.5, 1.0), 1.0, build_mesh(2.0))


def test_picard_identity_and_remainder_decay():
    setup = ProblemSetup(0.75, 1.0, Potential.power(1.0, 0.5, 4))
    pt = picard_trace(setup, np.array([25.0]))
    assert np.all(np.isfinite(pt.xi1))
    # xi_{nu,1}(x) vanishes with q
    zero = picard_trace(ProblemSetup(0.75, 1.0), np.array([25.0]))
    assert np.max(np.abs(zero.xi1)) == 0.0
    v = picard_correction(setup, 25.0, 0.6)
    assert np.isfinite(v)
    norms = [decomposition_residual(setup, np.array([25.0 * 4**k])).l2_norm()[0] for k in range(4)]
    assert all(b < a for a, b in zip(norms, norms[1:]))
