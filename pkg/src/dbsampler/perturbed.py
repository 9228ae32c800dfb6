"""Regular solution xi(z, x) of -y'' + ((nu^2 - 1/4)/x^2 + q) y = z y.

The solution is seeded at x0 = 1e-6 s from the free series (with the
local value of q absorbed into z) and carried across the mesh by a
sixth-order Magnus integrator.  Close to the singular endpoint, where
|z| x^2 < 1, steps are taken in Liouville form

    v = x^{-1/2} y,  u = log x,  v_uu = (nu^2 + x^2 (q - z)) v,

which removes the 1/x^2 stiffness; elsewhere the equation is integrated
as it stands.  Both forms are linear two-point systems Y' = [[0, 1],
[l, 0]] Y with l affine in z, so the Magnus exponent has a closed form
and every step propagator is computed for all steps and all z at once.

The second route is the decomposition xi = xi_nu + xi_{nu,1} + Xi with
the first Picard correction

    xi_{nu,1}(z, x) = xi_nu(z, x) Q1(x) - theta_nu(z, x) Q2(x),
    Q1 = int_0^x q theta_nu xi_nu,  Q2 = int_0^x q xi_nu^2.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError, StepSizeError
from .mesh import Mesh, build_mesh
from .model import ProblemSetup
from .unperturbed import theta_free, xi_free, xi_free_prime

_S15 = np.sqrt(15.0)
GAUSS3 = 0.5 + np.array([-1.0, 0.0, 1.0]) * _S15 / 10
#: Liouville form is used on a step when |z| x_right^2 < LOG_SWITCH.
LOG_SWITCH = 1.0
#: Upper bound on (steps x spectral points) handled per block.
BLOCK = 200_000


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("DBSAMPLER_THREADS", "1")))
    except ValueError:
        return 1


# -- Magnus-6 kernel ----------------------------------------------------


def _omega(l1, l2, l3, h):
    """Sixth-order Magnus exponent [[D, U], [L, -D]] for Y' = [[0,1],[l,0]] Y
    from l at the three Gauss nodes of a step of length h."""
    h2 = h * h
    d13 = l1 - l3
    D = -_S15 * h2 * d13 * (h2 * (l1 + 10 * l2 + l3) - 180) / 6480
    U = h * (h2 * h2 * d13 * d13 - 40 * h2 * (l1 - 2 * l2 + l3) + 2160) / 2160
    L = (
        h
        * (
            3 * h2 * h2 * l2 * d13 * d13
            + h2 * (-70 * (l1 * l1 + l3 * l3) + 40 * l1 * l2 + 220 * l1 * l3 - 160 * l2 * l2 + 40 * l2 * l3)
            + 1800 * (l1 + l3)
            + 2880 * l2
        )
        / 6480
    )
    return D, U, L


def _expm_real(D, U, L):
    """Real-arithmetic variant of ``_expm`` (cos/sin when mu^2 < 0)."""
    mu2 = D * D + U * L
    r = np.sqrt(np.abs(mu2))
    ch = np.empty_like(mu2)
    sh = np.empty_like(mu2)
    pos = mu2 >= 1e-6
    neg = mu2 <= -1e-6
    small = ~(pos | neg)
    with np.errstate(over="ignore"):
        rp = r[pos]
        ch[pos] = np.cosh(rp)
        sh[pos] = np.sinh(rp) / rp
    rn = r[neg]
    ch[neg] = np.cos(rn)
    sh[neg] = np.sin(rn) / rn
    m = mu2[small]
    ch[small] = 1 + m / 2 + m * m / 24 + m**3 / 720
    sh[small] = 1 + m / 6 + m * m / 120 + m**3 / 5040
    return ch + sh * D, sh * U, sh * L, ch - sh * D


def _expm(D, U, L):
    """exp of a traceless 2x2 matrix: cosh(mu) I + sinh(mu)/mu Omega."""
    if not np.iscomplexobj(D):
        return _expm_real(D, U, L)
    mu2 = D * D + U * L
    mu = np.sqrt(mu2)
    small = np.abs(mu2) < 1e-6
    with np.errstate(invalid="ignore", divide="ignore"):
        ch = np.where(small, 1 + mu2 / 2 + mu2 * mu2 / 24 + mu2**3 / 720, np.cosh(mu))
        sh = np.where(small, 1 + mu2 / 6 + mu2 * mu2 / 120 + mu2**3 / 5040, np.sinh(mu) / np.where(small, 1, mu))
    return ch + sh * D, sh * U, sh * L, ch - sh * D


@dataclass(frozen=True, eq=False)
class StepTable:
    """z-independent data of every step: l = alpha - beta z at Gauss nodes."""

    xl: np.ndarray
    xr: np.ndarray
    h: np.ndarray
    ax: np.ndarray  # (n, 3) x-form alpha (beta = 1)
    al: np.ndarray  # (n, 3) Liouville alpha
    bl: np.ndarray  # (n, 3) Liouville beta
    hu: np.ndarray


def step_table(setup: ProblemSetup, mesh: Mesh, refine: int = 1) -> StepTable:
    key = ("steps", setup, refine)
    if key in mesh.cache:
        return mesh.cache[key]
    p = mesh.points
    if refine > 1:
        frac = np.arange(refine) / refine
        p = np.concatenate([(p[:-1, None] + (p[1:] - p[:-1])[:, None] * frac[None, :]).ravel(), p[-1:]])
    xl, xr = p[:-1], p[1:]
    h = xr - xl
    xs = xl[:, None] + h[:, None] * GAUSS3[None, :]
    nu2 = setup.nu**2
    qx = setup.q(xs)
    ax = (nu2 - 0.25) / xs**2 + qx
    ul, ur = np.log(xl), np.log(xr)
    hu = ur - ul
    us = ul[:, None] + hu[:, None] * GAUSS3[None, :]
    xu = np.exp(us)
    al = nu2 + xu**2 * setup.q(xu)
    bl = xu**2
    tab = StepTable(xl, xr, h, ax, al, bl, hu)
    mesh.cache[key] = tab
    return tab


def _propagators(tab: StepTable, sl: slice, z):
    """Step propagators (p11, p12, p21, p22), each of shape (steps, nz)."""
    z = z[None, :]
    h = tab.h[sl, None]
    ax = tab.ax[sl]
    P = _expm(*_omega(ax[:, 0:1] - z, ax[:, 1:2] - z, ax[:, 2:3] - z, h))
    xr = tab.xr[sl]
    use_log = (np.abs(z) * xr[:, None] ** 2) < LOG_SWITCH
    rows = np.nonzero(use_log.any(axis=1))[0]
    if rows.size:
        al, bl = tab.al[sl][rows], tab.bl[sl][rows]
        hu = tab.hu[sl][rows, None]
        a, b, c, d = _expm(*_omega(al[:, 0:1] - bl[:, 0:1] * z, al[:, 1:2] - bl[:, 1:2] * z, al[:, 2:3] - bl[:, 2:3] * z, hu))
        s0 = np.sqrt(tab.xl[sl][rows])[:, None]
        s1 = np.sqrt(xr[rows])[:, None]
        # y-basis: C1 P_v C0^{-1}, v = y / sqrt(x), v_u = sqrt(x) y' - v / 2
        b0 = b / (2 * s0)
        q11 = s1 * (a / s0 - b0)
        q12 = s1 * b * s0
        t1 = a / s0 - b0
        t2 = c / s0 - d / (2 * s0)
        q21 = t1 / (2 * s1) + t2 / s1
        q22 = (b * s0) / (2 * s1) + d * s0 / s1
        m = use_log[rows]
        P = tuple(np.array(Pk) for Pk in P)
        for Pk, Qk in zip(P, (q11, q12, q21, q22)):
            Pk[rows] = np.where(m, Qk, Pk[rows])
    return P


def _blocks(n_steps, nz):
    step = max(1, BLOCK // max(nz, 1))
    return [slice(i, min(i + step, n_steps)) for i in range(0, n_steps, step)]


def _seed(setup: ProblemSetup, mesh: Mesh, z):
    x0 = mesh.x0
    zeff = z - float(setup.q(np.array([x0]))[0])
    y = xi_free(setup.nu, zeff, x0, "series")
    yp = xi_free_prime(setup.nu, zeff, x0, "series")
    if not np.iscomplexobj(z):
        return y.real.copy(), yp.real.copy()
    return y, yp


def _as_z(z, keep_real=False):
    z = np.asarray(z)
    real = keep_real and not np.iscomplexobj(z)
    z = z.astype(float if real else complex)
    scalar = z.ndim == 0
    return np.atleast_1d(z).ravel(), scalar


def _check_setup(setup):
    if not isinstance(setup, ProblemSetup):
        raise DomainError("setup must be a ProblemSetup")


def mesh_for(setup: ProblemSetup, t_max: float, breakpoints=()) -> Mesh:
    """Mesh resolving sqrt|z| up to ``t_max`` and the potential's own features."""
    bps = tuple(breakpoints) + tuple(setup.q.breakpoints(setup.s))
    return build_mesh(setup.s, t_max=max(float(t_max), 1.0), breakpoints=bps, max_len=setup.q.length_scale())


def _default_mesh(setup, z, breakpoints=()):
    return mesh_for(setup, float(np.max(np.abs(np.sqrt(z)), initial=1.0)), breakpoints)


def _map_chunks(fn, z):
    """Apply ``fn`` to chunks of z (threaded if DBSAMPLER_THREADS > 1) and
    concatenate along the last axis in order."""
    k = n_threads()
    if k == 1 or z.size < 2 * k:
        return fn(z)
    parts = np.array_split(z, k)
    with ThreadPoolExecutor(max_workers=k) as ex:
        res = list(ex.map(fn, parts))
    if isinstance(res[0], tuple):
        return tuple(np.concatenate([r[i] for r in res], axis=-1) for i in range(len(res[0])))
    return np.concatenate(res, axis=-1)


# -- public solver ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolutionTrace:
    """xi(z, .) and xi'(z, .) on ``mesh.points`` for a batch of z
    (arrays of shape (points, nz))."""

    z: np.ndarray
    mesh: Mesh
    xi: np.ndarray
    xi_prime: np.ndarray

    @property
    def grid(self):
        return self.mesh.points

    def end(self):
        return self.xi[-1], self.xi_prime[-1]

    def column(self, k=0):
        return self.xi[:, k], self.xi_prime[:, k]

    def near_zero_slope(self, decades=1.0):
        """Least-squares slope of log|xi| vs log x over the first decade(s)."""
        x = self.mesh.points
        m = x <= x[0] * 10**decades
        lx = np.log(x[m])
        out = []
        for k in range(self.xi.shape[1]):
            ly = np.log(np.abs(self.xi[m, k]))
            out.append(np.polyfit(lx, ly, 1)[0])
        return np.array(out)


def solve_regular(setup: ProblemSetup, z, mesh: Mesh | None = None, *, check=False, tol=1e-8, refine=1) -> SolutionTrace:
    """Regular solution on every mesh point for one or many z.

    With ``check=True`` the trace is recomputed with every step halved and
    ``StepSizeError`` is raised at the first point where the two differ by
    more than ``tol`` relative to the trace's sup norm.
    """
    _check_setup(setup)
    zz, _ = _as_z(z)
    if mesh is None:
        mesh = _default_mesh(setup, zz)
    if abs(mesh.s - setup.s) > 1e-12 * setup.s:
        raise DomainError("mesh does not cover (0, s]")

    def run(zc):
        return _trace(setup, mesh, zc, refine)

    xi, xp = _map_chunks(run, zz)
    tr = SolutionTrace(zz, mesh, xi, xp)
    if check:
        xi2, _ = _map_chunks(lambda zc: _trace(setup, mesh, zc, 2 * refine), zz)
        scale = np.max(np.abs(xi2), axis=0, keepdims=True)
        err = np.abs(xi - xi2) / np.where(scale == 0, 1, scale)
        bad = np.nonzero((err > tol).any(axis=1))[0]
        if bad.size:
            x = float(mesh.points[bad[0]])
            raise StepSizeError(f"step-doubling error {err[bad[0]].max():.2e} above {tol:g} at x={x:.6g}", x=x)
    return tr


def _trace(setup, mesh, z, refine):
    tab = step_table(setup, mesh, refine)
    y, yp = _seed(setup, mesh, z)
    y = np.array(y, dtype=complex)
    yp = np.array(yp, dtype=complex)
    npts = mesh.points.size
    xi = np.empty((npts, z.size), dtype=complex)
    xp = np.empty_like(xi)
    xi[0], xp[0] = y, yp
    n = tab.h.size
    for sl in _blocks(n, z.size):
        p11, p12, p21, p22 = _propagators(tab, sl, z)
        for j in range(p11.shape[0]):
            y, yp = p11[j] * y + p12[j] * yp, p21[j] * y + p22[j] * yp
            i = sl.start + j + 1
            if i % refine == 0:
                xi[i // refine], xp[i // refine] = y, yp
    return xi, xp


def _tree(p11, p12, p21, p22):
    """Ordered product P_{n-1} ... P_1 P_0 along the first axis."""
    while p11.shape[0] > 1:
        if p11.shape[0] % 2:
            eye1 = np.ones((1,) + p11.shape[1:], dtype=p11.dtype)
            eye0 = np.zeros_like(eye1)
            p11 = np.concatenate([p11, eye1])
            p12 = np.concatenate([p12, eye0])
            p21 = np.concatenate([p21, eye0])
            p22 = np.concatenate([p22, eye1])
        a11, a12, a21, a22 = p11[0::2], p12[0::2], p21[0::2], p22[0::2]
        b11, b12, b21, b22 = p11[1::2], p12[1::2], p21[1::2], p22[1::2]
        p11, p12, p21, p22 = (
            b11 * a11 + b12 * a21,
            b11 * a12 + b12 * a22,
            b21 * a11 + b22 * a21,
            b21 * a12 + b22 * a22,
        )
    return p11[0], p12[0], p21[0], p22[0]


def solve_endpoint(setup: ProblemSetup, z, mesh: Mesh | None = None, refine=1):
    """(xi(z, s), xi'(z, s)) without storing the trace.

    Real input z is propagated in real arithmetic and gives real output."""
    _check_setup(setup)
    zz, scalar = _as_z(z, keep_real=True)
    if mesh is None:
        mesh = _default_mesh(setup, zz)

    def run(zc):
        tab = step_table(setup, mesh, refine)
        y, yp = _seed(setup, mesh, zc)
        for sl in _blocks(tab.h.size, zc.size):
            a, b, c, d = _tree(*_propagators(tab, sl, zc))
            y, yp = a * y + b * yp, c * y + d * yp
        return y, yp

    y, yp = _map_chunks(run, zz)
    if scalar:
        return y[0], yp[0]
    return y, yp


def estimate_error(setup: ProblemSetup, z, mesh: Mesh | None = None):
    """Step-doubling estimate of the relative endpoint error."""
    zz, _ = _as_z(z)
    if mesh is None:
        mesh = _default_mesh(setup, zz)
    y1, p1 = solve_endpoint(setup, zz, mesh)
    y2, p2 = solve_endpoint(setup, zz, mesh, refine=2)
    scale = np.abs(y2) + np.abs(p2) / np.maximum(1.0, np.abs(np.sqrt(zz)))
    return (np.abs(y1 - y2) + np.abs(p1 - p2) / np.maximum(1.0, np.abs(np.sqrt(zz)))) / scale


def ode_residual(trace: SolutionTrace, setup: ProblemSetup):
    """Residual of -xi'' + (V - z) xi at interior panel nodes, relative to
    the local scale |xi| + |xi'|.

    xi'' is obtained by differentiating the degree-(m-1) interpolant of
    xi' through the panel nodes, so the residual measures integrator error
    plus interpolation error."""
    mesh = trace.mesh
    m = mesh.m
    gx, _ = np.polynomial.legendre.leggauss(m)
    V = np.polynomial.legendre.legvander(gx, m - 1)
    # differentiation matrix on the reference panel
    dcoef = np.zeros((m, m))
    for k in range(m):
        c = np.zeros(m)
        c[k] = 1.0
        dc = np.polynomial.legendre.legder(c)
        dcoef[:, k] = np.polynomial.legendre.legval(gx, dc) if dc.size else 0.0
    Dm = dcoef @ np.linalg.inv(V)
    res = []
    for p in range(mesh.n_panels):
        i0 = p * (m + 1) + 1
        x = mesh.points[i0 : i0 + m]
        half = (mesh.edges[p + 1] - mesh.edges[p]) / 2
        xpp = Dm @ trace.xi_prime[i0 : i0 + m] / half
        Vx = (setup.nu**2 - 0.25) / x**2 + setup.q(x)
        r = -xpp + (Vx[:, None] - trace.z[None, :]) * trace.xi[i0 : i0 + m]
        scale = np.abs(trace.xi[i0 : i0 + m]) + np.abs(trace.xi_prime[i0 : i0 + m])
        res.append(np.abs(r) / np.where(scale == 0, 1, scale))
    return np.concatenate(res)


# -- decomposition route --------------------------------------------------


def _head(f, x):
    """int_0^{x[0]} f assuming a local power law through the first two points."""
    f0, f1 = f[0], f[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.log(np.abs(f1 / f0)) / np.log(x[1] / x[0])
        val = f0 * x[0] / (p + 1)
    return np.where(np.isfinite(val) & (np.real(p) > -1), val, 0.0)


@dataclass(frozen=True, eq=False)
class PicardTrace:
    z: np.ndarray
    mesh: Mesh
    xi_nu: np.ndarray
    theta_nu: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray

    @property
    def xi1(self):
        return self.xi_nu * self.Q1 - self.theta_nu * self.Q2


def picard_trace(setup: ProblemSetup, z, mesh: Mesh | None = None) -> PicardTrace:
    """Free solutions and the running integrals Q1, Q2 on the mesh."""
    _check_setup(setup)
    zz, _ = _as_z(z)
    if mesh is None:
        mesh = _default_mesh(setup, zz)
    x = mesh.points[:, None]
    xn = xi_free(setup.nu, zz[None, :], x)
    th = theta_free(setup.nu, zz[None, :], x)
    qx = setup.q(mesh.points)[:, None]
    f1 = qx * th * xn
    f2 = qx * xn * xn
    Q1 = mesh.cumulative(f1) + _head(f1, mesh.points)
    Q2 = mesh.cumulative(f2) + _head(f2, mesh.points)
    if not (np.all(np.isfinite(Q1)) and np.all(np.isfinite(Q2))):
        raise QuadratureError("Picard integrals did not converge (non-finite values)")
    return PicardTrace(zz, mesh, xn, th, Q1, Q2)


def picard_correction(setup: ProblemSetup, z, x):
    """xi_{nu,1}(z, x) at the given point(s) x in (0, s]."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0) or np.any(x > setup.s * (1 + 1e-14)):
        raise DomainError("x must lie in (0, s]")
    zz, scalar = _as_z(z)
    mesh = _default_mesh(setup, zz, breakpoints=tuple(x))
    pt = picard_trace(setup, zz, mesh)
    idx = np.searchsorted(mesh.points, x * (1 - 1e-13))
    out = pt.xi1[idx]
    if scalar:
        out = out[:, 0]
    return out[0] if out.shape[0] == 1 and scalar else out


@dataclass(frozen=True, eq=False)
class Decomposition:
    z: np.ndarray
    mesh: Mesh
    remainder: np.ndarray  # Xi on mesh points, (points, nz)

    def l2_norm(self):
        return np.sqrt(self.mesh.integrate(np.abs(self.remainder) ** 2))


def decomposition_residual(setup: ProblemSetup, z, mesh: Mesh | None = None) -> Decomposition:
    """Xi = xi - xi_nu - xi_{nu,1} on the mesh."""
    zz, _ = _as_z(z)
    if mesh is None:
        mesh = _default_mesh(setup, zz)
    tr = solve_regular(setup, zz, mesh)
    pt = picard_trace(setup, zz, mesh)
    return Decomposition(zz, mesh, tr.xi - pt.xi_nu - pt.xi1)
