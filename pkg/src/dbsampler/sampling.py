"""Generalized Fourier transform and the three reconstruction formulas.

A profile phi on (0, s] defines F(z) = int_0^s xi(z, x) phi(x) dx, an
element of B_s with ||F|| = ||phi||.  From samples F(lambda_n) on a
spectrum we form

* exact sampling   sum K_s(z, l_n) / K_s(l_n, l_n) F(l_n),
* oversampling     sum J_ab(z, l_n) / K_b(l_n, l_n) (F(l_n) + eps_n),
  with l_n from the (0, b) problem and F in B_a,
* aliasing         sum K_a(z, l_n) / K_a(l_n, l_n) F(l_n),
  with l_n from the (0, a) problem and F in B_b.

All sums run over ascending index with numpy's pairwise summation, so
results do not depend on the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, SupportError
from .kernel import KernelEvaluator, TentWeight
from .mesh import Mesh
from .model import ProblemSetup, Spectrum

NOISE_CONVENTIONS = ("definition", "normalized")


# ---------------------------------------------------------------------------
# profiles and space functions


@dataclass(frozen=True)
class Profile:
    """A function on (0, s] that vanishes outside ``support``.

    ``breakpoints`` lists points where phi is not smooth; quadrature meshes
    snap to them."""

    func: Callable
    support: tuple
    name: str = "profile"
    breakpoints: tuple = ()

    def __post_init__(self):
        lo, hi = self.support
        if not (0 <= lo < hi):
            raise DomainError(f"profile support must satisfy 0 <= lo < hi, got {self.support}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros(x.shape, dtype=complex if self.is_complex else float)
        if inside.any():
            out[inside] = self.func(x[inside])
        return out

    @property
    def is_complex(self) -> bool:
        lo, hi = self.support
        return np.iscomplexobj(self.func(np.array([0.5 * (lo + hi)])))

    @property
    def support_end(self) -> float:
        return float(self.support[1])

    def scaled(self, c) -> "Profile":
        f = self.func
        return Profile(lambda x: c * f(x), self.support, f"{c}*{self.name}", self.breakpoints)

    def __add__(self, other: "Profile") -> "Profile":
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        bps = tuple(sorted(set(self.breakpoints) | set(other.breakpoints) | set(self.support) | set(other.support)))
        return Profile(lambda x: self(x) + other(x), (lo, hi), f"{self.name}+{other.name}", bps)

    # -- constructors -----------------------------------------------------
    @classmethod
    def bump(cls, lo, hi, amplitude=1.0):
        """C-infinity bump exp(1 - 1/(1 - u^2)) on (lo, hi), peak ``amplitude``."""
        c, w = 0.5 * (lo + hi), 0.5 * (hi - lo)

        def f(x):
            u = (x - c) / w
            out = np.zeros_like(x)
            m = np.abs(u) < 1
            out[m] = amplitude * np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
            return out

        return cls(f, (lo, hi), f"bump({lo},{hi})", (lo, hi))

    @classmethod
    def indicator(cls, lo, hi, amplitude=1.0):
        return cls(lambda x: np.full_like(x, amplitude), (lo, hi), f"indicator({lo},{hi})", (lo, hi))

    @classmethod
    def ramp(cls, lo, hi, amplitude=1.0):
        """amplitude * (x - lo)/(hi - lo) on (lo, hi]."""
        return cls(lambda x: amplitude * (x - lo) / (hi - lo), (lo, hi), f"ramp({lo},{hi})", (lo, hi))

    @classmethod
    def polynomial(cls, lo, hi, power=1, amplitude=1.0):
        """amplitude * ((x - lo)(hi - x))^power, vanishing at both ends."""
        return cls(
            lambda x: amplitude * ((x - lo) * (hi - x)) ** power,
            (lo, hi),
            f"poly{power}({lo},{hi})",
            (lo, hi),
        )

    @classmethod
    def from_callable(cls, func, support, name="callable", breakpoints=()):
        return cls(lambda x: np.asarray(func(x)), tuple(support), name, tuple(breakpoints) + tuple(support))

    @classmethod
    def from_file(cls, path):
        """Two whitespace-separated columns (x, phi(x)), linear interpolation."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns, got {data.shape[1]}")
        x, v = data[:, 0], data[:, 1]
        if np.any(np.diff(x) <= 0):
            raise DomainError(f"{path}: abscissae must be strictly increasing")
        return cls(lambda t: np.interp(t, x, v), (float(x[0]), float(x[-1])), Path(path).name, tuple(x))

    @classmethod
    def on_mesh(cls, mesh: Mesh, values, name="mesh"):
        """Profile interpolating values given on a solver mesh (e.g. a trace)."""
        values = np.asarray(values)
        return cls(
            lambda x: mesh.interpolate(values, x),
            (0.0, mesh.s),
            name,
            tuple(mesh.breakpoints),
        )


@dataclass
class SpaceFunction:
    """F(z) = <xi(conj z, .), phi> in B_s for a profile phi on (0, s]."""

    setup: ProblemSetup
    profile: Profile
    support_end: float
    evaluator: KernelEvaluator = field(repr=False)

    def __call__(self, zs):
        return self.evaluator.transform(self.profile, zs)

    def norm(self) -> float:
        """||F||_{B_s} = ||phi||_{L^2(0, s)}."""
        mesh = self.evaluator.mesh
        return float(np.sqrt(mesh.integrate(np.abs(self.profile(mesh.points)) ** 2)))


def transform(setup: ProblemSetup, profile: Profile, evaluator: KernelEvaluator | None = None) -> SpaceFunction:
    """Generalized Fourier transform of ``profile`` with respect to ``setup``."""
    lo, hi = profile.support
    if hi > setup.s * (1 + 1e-12):
        # the profile may extend past s only if it vanishes there
        x = np.linspace(setup.s, hi, 64)[1:]
        if np.any(profile(x) != 0):
            raise SupportError(f"profile support {profile.support} exceeds (0, s] with s={setup.s}")
    end = min(hi, setup.s)
    if evaluator is None:
        bps = [b for b in (*profile.breakpoints, lo, hi) if 0 < b < setup.s]
        evaluator = KernelEvaluator(setup, breakpoints=bps)
    return SpaceFunction(setup, profile, end, evaluator)


# ---------------------------------------------------------------------------
# grids and noise


@dataclass(frozen=True)
class CompactGrid:
    """Rectangle [x_lo, x_hi] x [-h, h] in the z-plane on an m x k lattice."""

    x_lo: float
    x_hi: float
    h: float = 0.0
    m: int = 41
    k: int = 5

    def __post_init__(self):
        if not (np.isfinite(self.x_lo) and np.isfinite(self.x_hi) and self.x_lo <= self.x_hi):
            raise DomainError("compact grid needs finite x_lo <= x_hi")
        if self.h < 0 or self.m < 1 or self.k < 1:
            raise DomainError("compact grid needs h >= 0 and positive lattice sizes")

    def points(self):
        re = np.linspace(self.x_lo, self.x_hi, self.m)
        im = np.linspace(-self.h, self.h, self.k) if self.h > 0 else np.zeros(1)
        return (re[:, None] + 1j * im[None, :]).ravel()

    @property
    def t_max(self) -> float:
        return float(np.max(np.abs(np.sqrt(self.points().astype(complex)))))


def default_grid(N: int, s: float) -> CompactGrid:
    return CompactGrid(0.0, (N * np.pi / (2 * s)) ** 2, 1.0, 41, 5)


def _noise_weight(n, nu, convention):
    n = np.asarray(n, dtype=float)
    w = np.ones_like(n)
    m = n > 0
    p = -nu - 0.5 if convention == "definition" else nu + 0.5
    w[m] = n[m] ** p
    return w


@dataclass(frozen=True)
class NoiseSequence:
    """Perturbations eps_n of the samples, indexed like the spectrum.

    ``convention='definition'`` measures size by sup |eps_n| n^{-nu-1/2};
    ``'normalized'`` by sup |eps_n| n^{nu+1/2}.  Index 0 has weight 1."""

    nu: float
    delta: float
    seed: int
    indices: np.ndarray
    entries: np.ndarray
    convention: str = "definition"

    def weights(self):
        return _noise_weight(self.indices, self.nu, self.convention)

    def norm(self) -> float:
        if self.entries.size == 0:
            return 0.0
        return float(np.max(np.abs(self.entries) * self.weights()))

    def at(self, indices):
        """Entries for the given spectrum indices (0 where not defined)."""
        indices = np.asarray(indices)
        pos = {int(n): i for i, n in enumerate(self.indices)}
        return np.array([self.entries[pos[int(n)]] if int(n) in pos else 0.0 for n in indices])


def noise_sequence(nu, delta, N, seed=0, first_index=1, convention="definition") -> NoiseSequence:
    """eps_n = delta * sigma_n / w_n for first_index <= n <= N.

    Signs sigma_n = +-1 come from ``numpy.random.default_rng(seed)``; the
    sign of index n does not depend on N or first_index."""
    if delta < 0 or not np.isfinite(delta):
        raise DomainError("noise level must be finite and non-negative")
    if convention not in NOISE_CONVENTIONS:
        raise DomainError(f"unknown noise convention {convention!r}")
    if first_index not in (0, 1):
        raise DomainError("first_index must be 0 or 1")
    idx = np.arange(first_index, int(N) + 1)
    u = np.random.default_rng(seed).random(int(N) + 1)
    sigma = np.where(u[idx] < 0.5, -1.0, 1.0)
    eps = delta * sigma / _noise_weight(idx, nu, convention)
    return NoiseSequence(float(nu), float(delta), int(seed), idx, eps, convention)


# ---------------------------------------------------------------------------
# reports and error measures


@dataclass
class ReconstructionReport:
    N: int
    delta: float
    sup_error: float
    tail_estimate: float
    constant: float = float("nan")  # C (oversampling) or D (aliasing)
    tail_norm: float = float("nan")
    extra: dict = field(default_factory=dict)


def sup_error(values_true, values_approx, grid=None) -> float:
    """max |true - approx| over the grid points."""
    a = np.asarray(values_true)
    b = np.asarray(values_approx)
    if a.shape != b.shape:
        raise DomainError(f"shape mismatch {a.shape} vs {b.shape}")
    if grid is not None and a.size != np.size(grid.points() if isinstance(grid, CompactGrid) else grid):
        raise DomainError("values are not aligned with the grid")
    return float(np.max(np.abs(a - b), initial=0.0))


def tail_norm(F: SpaceFunction, a: float) -> float:
    """||phi||_{L^2(a, b)} with b = F.setup.s."""
    b = F.setup.s
    if a >= b:
        return 0.0
    pts = sorted(p for p in (*F.profile.breakpoints, *F.profile.support) if a < p < b)

    def f(x):
        return float(np.abs(F.profile(np.array([x]))[0]) ** 2)

    val, _ = integrate.quad(f, a, b, points=pts or None, limit=400, epsabs=1e-15, epsrel=1e-12)
    return float(np.sqrt(val))


def _points(grid):
    if isinstance(grid, CompactGrid):
        return grid.points()
    return np.atleast_1d(np.asarray(grid, dtype=complex)).ravel()


def _same_operator(F: SpaceFunction, setup: ProblemSetup):
    if F.setup.nu != setup.nu or F.setup.q != setup.q:
        raise DomainError("space function and spectrum belong to different operators (nu or q differ)")


def _partial(terms):
    """Full and half-length partial sums along the last axis."""
    n = terms.shape[-1]
    full = np.sum(terms, axis=-1)
    half = np.sum(terms[..., : max(n // 2, 1)], axis=-1)
    return full, half


def _evaluator(setup, t, bps):
    bps = [b for b in bps if 0 < b < setup.s]
    return KernelEvaluator(setup, t_max=max(t, 1.0), breakpoints=bps)


def _samples(F: SpaceFunction, lam, noise):
    vals = F(lam)
    if noise is not None:
        vals = vals + noise
    return vals


# ---------------------------------------------------------------------------
# reconstructions


def reconstruct_exact(F: SpaceFunction, spectrum: Spectrum, N: int, grid, noise: NoiseSequence | None = None,
                      evaluator: KernelEvaluator | None = None):
    """Partial sum of the sampling series over indices <= N.

    Returns ``(values, truth, report)``; ``noise`` (optional) is added to the
    samples."""
    setup = spectrum.setup
    _same_operator(F, setup)
    if F.support_end > setup.s * (1 + 1e-12):
        raise SupportError("F is not in the space of the spectrum (profile extends past s)")
    sub = spectrum.upto(N)
    zs = _points(grid)
    lam = sub.eigenvalues
    eps = noise.at(sub.indices) if noise is not None else None
    samples = _samples(F, lam, eps)
    if evaluator is None:
        t = max(np.sqrt(np.max(np.abs(lam))), np.max(np.abs(np.sqrt(zs))))
        evaluator = _evaluator(setup, t, F.profile.breakpoints)
    Kz = evaluator.kernel_inner(zs, lam.astype(complex)).reshape(zs.size, lam.size)
    terms = Kz * (samples / sub.norming)[None, :]
    values, half = _partial(terms)
    truth = F(zs)
    rep = ReconstructionReport(
        N=int(N),
        delta=noise.delta if noise is not None else 0.0,
        sup_error=sup_error(truth, values),
        tail_estimate=float(np.max(np.abs(values - half), initial=0.0)),
    )
    return values, truth, rep


def oversample_reconstruct(F: SpaceFunction, spectrum_b: Spectrum, noise: NoiseSequence | None, N: int, grid,
                           evaluator: KernelEvaluator | None = None):
    """F_eps(z) = sum J_ab(z, l_n) / K_b(l_n, l_n) (F(l_n) + eps_n), a = F.support_end."""
    setup = spectrum_b.setup
    _same_operator(F, setup)
    a, b = F.support_end, setup.s
    if not a < b:
        raise SupportError(f"oversampling needs the profile support end a={a} below b={b}")
    x = np.linspace(a, b, 257)[1:]
    if np.any(F.profile(x) != 0):
        raise SupportError("profile does not vanish on (a, b]")
    sub = spectrum_b.upto(N)
    zs = _points(grid)
    lam = sub.eigenvalues
    eps = noise.at(sub.indices) if noise is not None else None
    samples = _samples(F, lam, eps)
    if evaluator is None:
        t = max(np.sqrt(np.max(np.abs(lam))), np.max(np.abs(np.sqrt(zs))))
        evaluator = _evaluator(setup, t, (a, *F.profile.breakpoints))
    J = evaluator.oversampling_kernel(a, zs, lam.astype(complex)).reshape(zs.size, lam.size)
    terms = J * (samples / sub.norming)[None, :]
    values, half = _partial(terms)
    truth = F(zs)
    err = sup_error(truth, values)
    delta = noise.delta if noise is not None else 0.0
    rep = ReconstructionReport(
        N=int(N),
        delta=delta,
        sup_error=err,
        tail_estimate=float(np.max(np.abs(values - half), initial=0.0)),
        constant=err / delta if delta > 0 else float("nan"),
    )
    if noise is not None:
        # worst case over all noise of unit size: sup_z sum |J| / K / w_n
        gain = np.sum(np.abs(J) / (sub.norming * _noise_weight(sub.indices, setup.nu, noise.convention))[None, :], axis=1)
        rep.extra["noise_gain"] = float(np.max(gain))
    return values, truth, rep


def alias_reconstruct(F: SpaceFunction, spectrum_a: Spectrum, N: int, grid,
                      evaluator: KernelEvaluator | None = None):
    """F~(z) = sum K_a(z, l_n) / K_a(l_n, l_n) F(l_n) for F in B_b, b > a."""
    setup = spectrum_a.setup
    if setup.gamma == 0.0:
        raise DomainError("aliasing reconstruction requires gamma in (0, pi); gamma = 0 is excluded by the theorem")
    _same_operator(F, setup)
    a = setup.s
    sub = spectrum_a.upto(N)
    zs = _points(grid)
    lam = sub.eigenvalues
    samples = F(lam)
    if evaluator is None:
        t = max(np.sqrt(np.max(np.abs(lam))), np.max(np.abs(np.sqrt(zs))))
        evaluator = _evaluator(setup, t, F.profile.breakpoints)
    Kz = evaluator.kernel_inner(zs, lam.astype(complex)).reshape(zs.size, lam.size)
    terms = Kz * (samples / sub.norming)[None, :]
    values, half = _partial(terms)
    truth = F(zs)
    err = sup_error(truth, values)
    tn = tail_norm(F, a)
    rep = ReconstructionReport(
        N=int(N),
        delta=0.0,
        sup_error=err,
        tail_estimate=float(np.max(np.abs(values - half), initial=0.0)),
        constant=err / tn if tn > 0 else float("nan"),
        tail_norm=tn,
    )
    return values, truth, rep


def parseval_defect(F: SpaceFunction, spectrum: Spectrum, N: int) -> float:
    """(||phi||^2 - sum_{n<=N} |F(l_n)|^2 / K(l_n, l_n)) / ||phi||^2."""
    _same_operator(F, spectrum.setup)
    sub = spectrum.upto(N)
    vals = F(sub.eigenvalues)
    total = F.norm() ** 2
    return float((total - np.sum(np.abs(vals) ** 2 / sub.norming)) / total)


# ---------------------------------------------------------------------------
# extended solution


@dataclass
class ExtendedSolution:
    """xi^ext_a(z, x) partial sums and xi(z, x) on a mesh of [0, b]."""

    z: np.ndarray
    a: float
    b: float
    x: np.ndarray
    xi_ext: np.ndarray  # (points, nz)
    xi: np.ndarray

    def interior_error(self):
        """sup_{x in [0, a]} |xi^ext - xi| for each z."""
        m = self.x <= self.a * (1 + 1e-14)
        return np.max(np.abs(self.xi_ext[m] - self.xi[m]), axis=0)

    def h_ab(self):
        """sup_{x in [a, b]} |xi^ext - xi| for each z."""
        m = self.x >= self.a * (1 - 1e-14)
        return np.max(np.abs(self.xi_ext[m] - self.xi[m]), axis=0)


def extended_solution(spectrum_a: Spectrum, b: float, zs, N: int) -> ExtendedSolution:
    """sum_{n <= N} K_a(z, l_n) / K_a(l_n, l_n) xi(l_n, x) for x in [0, b]."""
    setup_a = spectrum_a.setup
    a = setup_a.s
    if not b > a:
        raise DomainError("extended solution needs b > a")
    sub = spectrum_a.upto(N)
    zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
    lam = sub.eigenvalues
    t = max(np.sqrt(np.max(np.abs(lam))), np.max(np.abs(np.sqrt(zs))), 1.0)
    ev = KernelEvaluator(setup_a.with_s(b), t_max=t, breakpoints=(a,))
    Xl = ev.traces(lam.astype(complex))  # real-valued columns
    Xz = ev.traces(zs)
    Xzc = ev.traces(np.conj(zs))
    w = ev.mesh.weights * (ev.mesh.points <= a)
    # K_a(z, l) = int_0^a conj(xi(conj z)) xi(l)
    Kz = (np.conj(Xzc) * w[:, None]).T @ Xl
    coef = Kz / sub.norming[None, :]
    ext = np.stack([np.sum(Xl * coef[j][None, :], axis=1) for j in range(zs.size)], axis=1)
    return ExtendedSolution(zs, a, b, ev.mesh.points.copy(), ext, Xz)


def tent_weight(a, b) -> TentWeight:
    return TentWeight(a, b)
