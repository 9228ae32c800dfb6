"""Eigenvalues and norming constants of H_{s,gamma}.

Eigenvalues are the zeros of the boundary functional

    B(lambda) = xi(lambda, s) cos(gamma) + xi'(lambda, s) sin(gamma).

Root isolation does not rely on the asymptotic windows alone.  Along
with B we track the Prufer angle theta(s; lambda) of xi(lambda, .): it is
increasing in lambda, and the number of eigenvalues below lambda is
floor((theta(s; lambda) + gamma) / pi).  Every scan interval therefore
has a known eigenvalue count; intervals holding more than one eigenvalue
are split until each holds exactly one, and in such an interval B has a
single sign change, which is refined by a vectorized Illinois iteration.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import MissedEigenvalueError, NumericalError
from .mesh import Mesh
from .model import ProblemSetup, Spectrum
from .perturbed import _blocks, _propagators, _seed, mesh_for, solve_endpoint, solve_regular, step_table

N_NEGATIVE_SCAN = 64


def predicted_t(setup: ProblemSetup, n):
    """(n + (2 nu -+ 1)/4) pi / s, minus sign for gamma = 0."""
    sign = -1 if setup.gamma == 0.0 else 1
    return (np.asarray(n, dtype=float) + (2 * setup.nu + sign) / 4) * np.pi / setup.s


def asymptotic_prediction(setup: ProblemSetup, n):
    """Leading eigenvalue asymptotics t_n and the size of the remainder.

    Returns ``(t_pred, residual_scale)`` with residual_scale n^{-1+1/r} for
    finite r and log(n)/n for r = inf."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("n must be >= 1")
    r = setup.q.r_exponent
    if np.isinf(r):
        scale = np.log(np.maximum(n, 2.0)) / n
    else:
        scale = n ** (-1 + 1 / r)
    return predicted_t(setup, n), scale


def boundary_functional(setup: ProblemSetup, lam, mesh: Mesh | None = None):
    """B(lambda) for real lambda (scalar or array)."""
    lam_arr = np.asarray(lam, dtype=float)
    if mesh is None:
        mesh = mesh_for(setup, np.sqrt(np.max(np.abs(lam_arr), initial=1.0)))
    y, yp = solve_endpoint(setup, lam_arr.ravel(), mesh)
    g = setup.gamma
    f = y * np.cos(g) + yp * np.sin(g)
    if np.iscomplexobj(f):
        scale = np.abs(y) + np.abs(yp)
        if np.any(np.abs(f.imag) > 1e-9 * np.maximum(scale, 1e-300)):
            warnings.warn("boundary functional has a non-negligible imaginary part", RuntimeWarning, stacklevel=2)
        f = f.real
    return f.reshape(lam_arr.shape) if lam_arr.ndim else float(f[0])


def _scan(setup: ProblemSetup, mesh: Mesh, lam):
    """Boundary functional and eigenvalue count N(lambda) for real lambda."""
    lam = np.asarray(lam, dtype=float)
    z = lam
    tab = step_table(setup, mesh)
    y, yp = _seed(setup, mesh, z)
    zeros = np.zeros(lam.shape, dtype=np.int64)
    prev = y
    for sl in _blocks(tab.h.size, z.size):
        p11, p12, p21, p22 = _propagators(tab, sl, z)
        for j in range(p11.shape[0]):
            y, yp = p11[j] * y + p12[j] * yp, p21[j] * y + p22[j] * yp
            cur = y
            zeros += (prev * cur < 0) | ((cur == 0) & (prev != 0))
            prev = cur
    # interior zeros only: a zero exactly at s is not interior
    zeros -= (y == 0).astype(np.int64)
    sgn = np.where(zeros % 2 == 0, 1.0, -1.0)
    frac = np.arctan2(sgn * y, sgn * yp)
    frac = np.where(frac <= 0, frac + np.pi, frac)  # in (0, pi]
    theta = zeros * np.pi + frac
    count = np.floor((theta + setup.gamma) / np.pi + 1e-12).astype(np.int64)
    g = setup.gamma
    f = y * np.cos(g) + yp * np.sin(g)
    return f, count, theta


def eigenvalue_count(setup: ProblemSetup, lam, mesh: Mesh | None = None):
    """Number of eigenvalues strictly below lambda (oscillation count)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if mesh is None:
        mesh = mesh_for(setup, np.sqrt(np.max(np.abs(lam), initial=1.0)))
    return _scan(setup, mesh, lam)[1]


def _illinois(setup, mesh, a, b, fa, fb, rtol=1e-14, max_iter=200):
    """Vectorized Illinois refinement of sign-change brackets [a, b]."""
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    side = np.zeros(a.shape, dtype=np.int8)
    last = np.full(a.shape, np.inf)
    for it in range(max_iter):
        width = b - a
        tol = rtol * np.maximum(np.abs(a) + np.abs(b), 1.0)
        done = (width <= tol) | (fa == 0) | (fb == 0) | (last <= tol)
        if np.all(done):
            break
        act = ~done
        c = np.where(act, b - fb * (b - a) / (fb - fa), a)
        # fall back to bisection when regula falsi stalls at an end
        bad = ~np.isfinite(c) | (c <= a) | (c >= b) | (it % 12 == 11)
        c = np.where(bad, 0.5 * (a + b), c)
        idx = np.nonzero(act)[0]
        fc = np.zeros_like(a)
        fc[idx] = boundary_functional(setup, c[idx], mesh)
        prev_best = np.where(np.abs(fa) < np.abs(fb), a, b)
        last = np.where(act & ~bad, np.abs(c - prev_best), np.inf)
        left = act & (np.sign(fc) == np.sign(fa))
        right = act & ~left
        # c replaces a
        a = np.where(left, c, a)
        fa = np.where(left, fc, fa)
        fb = np.where(left & (side == 1), fb / 2, fb)
        # c replaces b
        b = np.where(right, c, b)
        fb = np.where(right, fc, fb)
        fa = np.where(right & (side == -1), fa / 2, fa)
        side = np.where(left, 1, np.where(right, -1, side)).astype(np.int8)
    root = np.where(fa == 0, a, np.where(fb == 0, b, np.where(np.abs(fa) < np.abs(fb), a, b)))
    # final secant polish inside the bracket
    with np.errstate(invalid="ignore", divide="ignore"):
        sec = b - fb * (b - a) / (fb - fa)
    ok = np.isfinite(sec) & (sec >= a) & (sec <= b)
    return np.where(ok, sec, root)


def _isolate(setup, mesh, grid, f, cnt, need):
    """Split scan intervals until each of the first ``need`` eigenvalues
    sits alone in an interval; returns the (lo, hi, f_lo, f_hi) brackets."""
    grid, f, cnt = list(grid), list(f), list(cnt)
    for _ in range(80):
        g = np.array(grid)
        c = np.array(cnt)
        d = np.diff(c)
        if np.any(d < 0):
            raise MissedEigenvalueError("oscillation count decreased along the scan; integrator failure")
        multi = np.nonzero((d > 1) & (c[:-1] < need))[0]
        if multi.size == 0:
            break
        mids = 0.5 * (g[multi] + g[multi + 1])
        fm, cm, _ = _scan(setup, mesh, mids)
        order = np.argsort(np.concatenate([g, mids]), kind="stable")
        grid = list(np.concatenate([g, mids])[order])
        f = list(np.concatenate([np.array(f), fm])[order])
        cnt = list(np.concatenate([c, cm])[order])
    else:
        raise MissedEigenvalueError("could not separate clustered eigenvalues")
    g, f, c = np.array(grid), np.array(f), np.array(cnt)
    one = np.nonzero((np.diff(c) == 1) & (c[:-1] < need))[0]
    if one.size < need:
        raise MissedEigenvalueError(f"found {one.size} isolated eigenvalues, expected {need}")
    one = one[:need]
    lo, hi, flo, fhi = g[one], g[one + 1], f[one], f[one + 1]
    if np.any(flo * fhi > 0):
        k = int(np.nonzero(flo * fhi > 0)[0][0])
        raise MissedEigenvalueError(f"boundary functional has no sign change around eigenvalue #{k}")
    return lo, hi, flo, fhi


def compute_spectrum(setup: ProblemSetup, n_max: int, mesh: Mesh | None = None, with_norming=True) -> Spectrum:
    """Eigenvalues with index up to ``n_max`` and their norming constants."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    first = setup.first_index
    need = n_max - first + 1
    s = setup.s
    Lam = 2 * setup.q.sup_abs(s) + abs(setup.nu**2 - 0.25) / s**2 + 1.0 / s**2
    shift = setup.q.sup_abs(s)
    t_hi = predicted_t(setup, n_max + 1.5) + np.sqrt(shift)
    if mesh is None:
        mesh = mesh_for(setup, 1.05 * max(t_hi, np.sqrt(Lam)) + 2 * np.pi / s)

    # lower end: no eigenvalue below -Lam
    for _ in range(30):
        _, c0, _ = _scan(setup, mesh, np.array([-Lam]))
        if c0[0] == 0:
            break
        Lam *= 4
    else:
        raise MissedEigenvalueError("could not find a lower bound for the spectrum")
    if np.sqrt(Lam) > mesh.t_max:
        mesh = mesh_for(setup, 1.05 * max(t_hi, np.sqrt(Lam)))

    neg = np.linspace(-Lam, 0.0, N_NEGATIVE_SCAN)
    n_pos = np.arange(0, n_max + 3)
    tm = predicted_t(setup, n_pos + 0.5)
    pos = tm[tm > 0] ** 2
    grid = np.unique(np.concatenate([neg, pos]))
    f, cnt, _ = _scan(setup, mesh, grid)
    # upper end must hold every requested eigenvalue
    for _ in range(30):
        if cnt[-1] >= need:
            break
        top = grid[-1]
        ext = (np.sqrt(top) + np.arange(1, 9) * np.pi / (2 * s)) ** 2
        if np.sqrt(ext[-1]) > mesh.t_max:
            mesh = mesh_for(setup, 1.5 * np.sqrt(ext[-1]))
            f, cnt, _ = _scan(setup, mesh, grid)
        fe, ce, _ = _scan(setup, mesh, ext)
        grid = np.concatenate([grid, ext])
        f = np.concatenate([f, fe])
        cnt = np.concatenate([cnt, ce])
    else:
        raise MissedEigenvalueError("eigenvalue count did not reach the requested index")

    lo, hi, flo, fhi = _isolate(setup, mesh, grid, f, cnt, need)
    lam = _illinois(setup, mesh, lo, hi, flo, fhi)
    if np.any(np.diff(lam) <= 0):
        raise NumericalError("refined eigenvalues are not strictly increasing")
    idx = np.arange(first, first + need)
    if with_norming:
        norming = norming_constants(setup, lam, mesh)
    else:
        norming = np.full(lam.shape, np.nan)
    return Spectrum(setup, idx, lam, norming)


def norming_constants(setup: ProblemSetup, lam, mesh: Mesh | None = None, batch=64):
    """||xi(lambda, .)||^2 on (0, s) for real lambda."""
    lam = np.asarray(lam, dtype=float)
    if mesh is None:
        mesh = mesh_for(setup, np.sqrt(np.max(np.abs(lam), initial=1.0)))
    out = np.empty(lam.shape)
    for i in range(0, lam.size, batch):
        tr = solve_regular(setup, lam[i : i + batch], mesh)
        out[i : i + batch] = mesh.integrate(np.abs(tr.xi) ** 2)
    return out
