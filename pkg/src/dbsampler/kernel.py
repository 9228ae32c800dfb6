"""Reproducing kernels of B_s.

Two independent routes are provided:

* ``kernel_inner``: K_s(z, w) = <xi(conj z, .), xi(conj w, .)>_{L^2(0,s)}
  by quadrature on the solver mesh (the kernel used everywhere else);
* ``kernel_hb``: the Hermite-Biehler formula
  (E#(z) E(conj w) - E(z) E#(conj w)) / (2 pi i (z - conj w)) with
  E(z) = xi(z, s) + i xi'(z, s), whose diagonal is obtained from
  z-derivatives computed by a Cauchy integral.

By the Lagrange identity the two differ by the constant factor pi.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mesh import Mesh
from .model import ProblemSetup
from .perturbed import mesh_for, solve_endpoint, solve_regular

#: Cauchy-integral derivative parameters for the diagonal branch.
CAUCHY_RADIUS = 1e-2
CAUCHY_NODES = 32
#: Below this |z - conj w| the diagonal branch with a first-order
#: correction replaces the difference quotient.
NEAR_DIAGONAL = 1e-3


@dataclass(frozen=True)
class TentWeight:
    """R_ab: 1 on (0, a], linear from 1 to 0 on (a, b], 0 beyond."""

    a: float
    b: float

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise DomainError(f"tent weight needs 0 < a < b, got a={self.a}, b={self.b}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)


def _key(z):
    z = complex(z)
    return (z.real, z.imag)


class KernelEvaluator:
    """Caches solution traces on a fixed mesh and evaluates kernels.

    The mesh resolves |sqrt z| up to ``t_max``; asking for a point beyond
    that rebuilds the mesh (and drops the cache) with a larger ``t_max``.
    """

    def __init__(self, setup: ProblemSetup, t_max: float = 1.0, breakpoints=(), mesh: Mesh | None = None):
        self.setup = setup
        self.breakpoints = tuple(sorted(set(float(b) for b in breakpoints)))
        self._lock = threading.Lock()
        self._cache: dict = {}
        self.mesh = mesh if mesh is not None else mesh_for(setup, t_max, self.breakpoints)

    # -- traces ---------------------------------------------------------
    def _ensure(self, zs):
        t = float(np.max(np.abs(np.sqrt(zs)), initial=0.0))
        if t > self.mesh.t_max * 1.0000001:
            with self._lock:
                self.mesh = mesh_for(self.setup, 1.25 * t, self.breakpoints)
                self._cache.clear()

    def traces(self, zs):
        """xi(z, .) on the mesh for each z, as columns of a (points, nz) array."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
        self._ensure(zs)
        missing = []
        seen = set()
        for z in zs:
            k = _key(z)
            if k not in self._cache and k not in seen:
                missing.append(z)
                seen.add(k)
        if missing:
            tr = solve_regular(self.setup, np.array(missing), self.mesh)
            with self._lock:
                for j, z in enumerate(missing):
                    self._cache[_key(z)] = (tr.xi[:, j].copy(), tr.xi[-1, j], tr.xi_prime[-1, j])
        return np.stack([self._cache[_key(z)][0] for z in zs], axis=1)

    def endpoint(self, zs):
        """(xi(z, s), xi'(z, s)) for each z (uses the trace cache when possible)."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
        self._ensure(zs)
        have = np.array([_key(z) in self._cache for z in zs], dtype=bool)
        A = np.empty(zs.shape, dtype=complex)
        B = np.empty(zs.shape, dtype=complex)
        for i in np.nonzero(have)[0]:
            _, A[i], B[i] = self._cache[_key(zs[i])]
        if (~have).any():
            a, b = solve_endpoint(self.setup, zs[~have], self.mesh)
            A[~have], B[~have] = a, b
        return A, B

    # -- kernels --------------------------------------------------------
    def weighted_gram(self, zs, ws, weight=None):
        """Matrix of int conj(xi(conj z)) w(x) xi(conj w) over z in zs, w in ws."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
        ws = np.atleast_1d(np.asarray(ws, dtype=complex)).ravel()
        Xz = np.conj(self.traces(np.conj(zs)))
        Xw = self.traces(np.conj(ws))
        wq = self.mesh.weights
        if weight is not None:
            wq = wq * weight(self.mesh.points)
        return (Xz * wq[:, None]).T @ Xw

    def kernel_inner(self, z, w):
        out = self.weighted_gram(z, w)
        return out[0, 0] if np.ndim(z) == 0 and np.ndim(w) == 0 else out

    def oversampling_kernel(self, a, z, w):
        """J_ab(z, w) with b = setup.s."""
        R = TentWeight(a, self.setup.s)
        if not any(abs(a - bp) <= 1e-12 * self.setup.s for bp in self.mesh.breakpoints):
            raise DomainError("evaluator mesh lacks a breakpoint at the tent knot a")
        out = self.weighted_gram(z, w, R)
        return out[0, 0] if np.ndim(z) == 0 and np.ndim(w) == 0 else out

    def transform(self, profile, zs):
        """F(z) = int xi(z, x) phi(x) dx.

        ``profile`` is a callable evaluated on the mesh points (after any
        mesh rebuild triggered by zs) or an array of values on them."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
        X = np.conj(self.traces(np.conj(zs)))
        values = profile(self.mesh.points) if callable(profile) else np.asarray(profile)
        return np.sum((self.mesh.weights * values)[:, None] * X, axis=0)

    def _derivs(self, z):
        """A, B = xi(., s), xi'(., s) and their first two z-derivatives at z."""
        th = 2 * np.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
        e = np.exp(1j * th)
        pts = z + CAUCHY_RADIUS * e
        A, B = solve_endpoint(self.setup, pts, self.mesh)
        out = []
        for F in (A, B):
            f0 = np.mean(F)
            f1 = np.mean(F * np.conj(e)) / CAUCHY_RADIUS
            f2 = 2 * np.mean(F * np.conj(e) ** 2) / CAUCHY_RADIUS**2
            out.append((f0, f1, f2))
        return out

    def kernel_hb(self, z, w):
        """Hermite-Biehler kernel (scalar z, w)."""
        z = complex(z)
        u = np.conj(complex(w))
        d = z - u
        if abs(d) >= NEAR_DIAGONAL:
            (Az, Au), (Bz, Bu) = (self.endpoint(np.array([z, u])))
            # E#(z)E(u) - E(z)E#(u) = 2i (A(z)B(u) - B(z)A(u))
            return (Az * Bu - Bz * Au) / (np.pi * d)
        (A0, A1, A2), (B0, B1, B2) = self._derivs(z)
        # N(u) = A(z)B(u) - B(z)A(u) vanishes at u = z; K = N(u) / (pi (z - u))
        n1 = A0 * B1 - B0 * A1
        n2 = A0 * B2 - B0 * A2
        return -(n1 + n2 * (u - z) / 2) / np.pi


def kernel_inner(setup: ProblemSetup, z, w, evaluator: KernelEvaluator | None = None):
    if evaluator is None:
        evaluator = KernelEvaluator(setup, t_max=_tmax(z, w))
    return evaluator.kernel_inner(z, w)


def kernel_hb(setup: ProblemSetup, z, w, evaluator: KernelEvaluator | None = None):
    if evaluator is None:
        evaluator = KernelEvaluator(setup, t_max=_tmax(z, w))
    return evaluator.kernel_hb(z, w)


def oversampling_kernel(setup_b: ProblemSetup, a, z, w, evaluator: KernelEvaluator | None = None):
    if not (0 < a < setup_b.s):
        raise DomainError("oversampling kernel needs 0 < a < b = s")
    if evaluator is None:
        evaluator = KernelEvaluator(setup_b, t_max=_tmax(z, w), breakpoints=(a,))
    return evaluator.oversampling_kernel(a, z, w)


def norming_constant(setup: ProblemSetup, lambda_n, evaluator: KernelEvaluator | None = None) -> float:
    """K_s(lambda, lambda) = ||xi(lambda, .)||^2."""
    lam = float(lambda_n)
    return float(np.real(kernel_inner(setup, lam, lam, evaluator)))


def _tmax(*zs):
    vals = np.concatenate([np.atleast_1d(np.asarray(z, dtype=complex)).ravel() for z in zs])
    return float(np.max(np.abs(np.sqrt(vals)), initial=1.0))
