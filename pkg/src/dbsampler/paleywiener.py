"""Paley-Wiener baseline: the classical counterpart of the Bessel pipeline.

Functions are F(z) = int_{-c}^{c} phi(x) e^{ixz} dx with phi a finite
cosine/sine packet, so F has a closed form.  Three series are provided:

* exact (WSK)   sum_n F(n pi / a) sinc(a (z - n pi / a)),       F in PW_a
* oversampling  sum_n F(n pi / b) G_ab(z, n pi / b) / (2 b),    F in PW_a, b > a
* aliasing      the WSK series at rate pi / a applied to F in PW_b.

G_ab is the modified kernel (2/(b-a)) (cos(ua) - cos(ub)) / u^2 taken
verbatim (diagonal value a + b); the 1/(2b) factor is the sampling density
that turns it into a reproducing series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SupportError
from .sampling import ReconstructionReport, sup_error

#: below this |argument| sinc uses its Taylor series
SINC_SWITCH = 1e-4


def _sinc(x):
    """sin(x)/x for complex x, series near 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SINC_SWITCH
    xs = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1 - x2 / 6 + x2 * x2 / 120, np.sin(xs) / xs)


@dataclass(frozen=True)
class PWSetup:
    a: float
    b: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("band edge a must be positive")
        if self.b is not None and not self.b > self.a:
            raise DomainError("oversampling needs b > a")


def pw_kernel(a, z, w):
    """sin(a (z - conj w)) / (a (z - conj w)), equal to 1 on the diagonal."""
    u = np.asarray(z, dtype=complex) - np.conj(np.asarray(w, dtype=complex))
    return _sinc(a * u)


def pw_oversampling_kernel(a, b, z, w):
    """(2/(b - a)) (cos(u a) - cos(u b)) / u^2 with u = z - conj w.

    Written as (a + b) sinc(u (a + b)/2) sinc(u (b - a)/2), which avoids the
    cancellation in the cosine difference."""
    if not 0 < a < b:
        raise DomainError("oversampling kernel needs 0 < a < b")
    u = np.asarray(z, dtype=complex) - np.conj(np.asarray(w, dtype=complex))
    return (a + b) * _sinc(0.5 * u * (a + b)) * _sinc(0.5 * u * (b - a))


def pw_hb_kernel(a, z, w):
    """de Branges kernel of E(z) = exp(-i a z), from E directly:
    (E(z) conj E(w) - E#(z) conj E#(w)) / (2 pi i (conj w - z))."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    E = lambda v: np.exp(-1j * a * v)
    Es = lambda v: np.exp(1j * a * v)
    num = E(z) * np.conj(E(w)) - Es(z) * np.conj(Es(w))
    return num / (2j * np.pi * (np.conj(w) - z))


@dataclass(frozen=True)
class Packet:
    """phi(x) = sum_j alpha_j cos(omega_j x) + beta_j sin(omega_j x) on [-c, c]."""

    c: float
    omega: tuple
    alpha: tuple
    beta: tuple

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("packet support must be positive")
        if not (len(self.omega) == len(self.alpha) == len(self.beta)):
            raise DomainError("packet coefficient lengths differ")

    @classmethod
    def indicator(cls, c):
        return cls(float(c), (0.0,), (1.0,), (0.0,))

    @classmethod
    def random(cls, c, rng, terms=3, max_freq=6.0):
        om = rng.uniform(0, max_freq, terms)
        return cls(float(c), tuple(om), tuple(rng.normal(size=terms)), tuple(rng.normal(size=terms)))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, al, be in zip(self.omega, self.alpha, self.beta):
            out = out + al * np.cos(w * x) + be * np.sin(w * x)
        return np.where(np.abs(x) <= self.c, out, 0.0)

    def __call__(self, z):
        """Closed-form F(z) = int_{-c}^{c} phi(x) e^{ixz} dx."""
        z = np.asarray(z, dtype=complex)
        c = self.c
        out = np.zeros(z.shape, dtype=complex)
        for w, al, be in zip(self.omega, self.alpha, self.beta):
            sm = c * _sinc((z - w) * c)
            sp = c * _sinc((z + w) * c)
            out = out + al * (sm + sp) + 1j * be * (sm - sp)
        return out


def pw_noise(delta, N, seed=0):
    """Bounded noise delta * sigma_n for n = -N..N (signs from default_rng(seed))."""
    if delta < 0:
        raise DomainError("noise level must be non-negative")
    u = np.random.default_rng(seed).random(2 * int(N) + 1)
    return delta * np.where(u < 0.5, -1.0, 1.0)


def pw_reconstruct(mode, F: Packet, a, N, grid, b=None, noise=None):
    """Partial sums over |n| <= N of the exact, oversampling or aliasing series.

    ``noise`` (length 2N+1, indexed n = -N..N) is added to the samples.
    Returns ``(values, truth, report)``."""
    setup = PWSetup(a, b)
    z = np.atleast_1d(np.asarray(grid, dtype=complex)).ravel()
    n = np.arange(-int(N), int(N) + 1)
    if mode == "exact":
        if F.c > a * (1 + 1e-12):
            raise SupportError(f"exact WSK sampling needs support within [-a, a], got c={F.c}")
        nodes = n * np.pi / a
        G = pw_kernel(a, z[:, None], nodes[None, :])
    elif mode == "oversample":
        if b is None:
            raise DomainError("oversampling needs b")
        if F.c > a * (1 + 1e-12):
            raise SupportError(f"oversampling needs support within [-a, a], got c={F.c}")
        nodes = n * np.pi / b
        G = pw_oversampling_kernel(setup.a, setup.b, z[:, None], nodes[None, :]) / (2 * b)
    elif mode == "alias":
        if b is None:
            raise DomainError("aliasing needs b (the band of F)")
        if F.c > b * (1 + 1e-12):
            raise SupportError(f"aliasing needs support within [-b, b], got c={F.c}")
        nodes = n * np.pi / a
        G = pw_kernel(a, z[:, None], nodes[None, :])
    else:
        raise DomainError(f"unknown Paley-Wiener mode {mode!r}")
    samples = F(nodes)
    delta = 0.0
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != samples.shape:
            raise DomainError("noise must have length 2N+1")
        samples = samples + noise
        delta = float(np.max(np.abs(noise), initial=0.0))
    terms = G * samples[None, :]
    values = np.sum(terms, axis=1)
    # half-length partial sum for the tail estimate
    half = np.abs(n) <= N // 2
    tail = float(np.max(np.abs(values - np.sum(terms[:, half], axis=1)), initial=0.0))
    truth = F(z)
    err = sup_error(truth, values)
    rep = ReconstructionReport(
        N=int(N), delta=delta, sup_error=err, tail_estimate=tail,
        constant=err / delta if delta > 0 else float("nan"),
    )
    return values, truth, rep
