"""Free Bessel problem: the solutions xi_nu, theta_nu, the Hermite-Biehler
function E_{nu,s} and the unperturbed spectra.

    xi_nu(z, x)    = z^{-nu/2} sqrt(pi x / 2) J_nu(sqrt(z) x)
    theta_nu(z, x) = z^{nu/2} sqrt(pi x / 2) J_{-nu}(sqrt(z) x) / sin(nu pi)

Both are entire in z.  For complex z they are summed from the ascending
series in z x^2 (method ``"series"``) or composed from complex-argument
Bessel functions (``"bessel"``).  ``"auto"`` uses the series while
|z| x^2 <= AUTO_RADIUS, where cancellation is still negligible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError, SeriesRangeError
from .model import ProblemSetup, Spectrum
from .potentials import Potential
from .specfun import bessel_zeros, mixed_condition

#: Hard guard on |z| x^2 for the ascending series.
SERIES_RADIUS = 400.0
#: Switch point used by ``method="auto"``.
AUTO_RADIUS = 25.0

_SQ = np.sqrt(np.pi / 2)


def _is_int(nu) -> bool:
    return float(nu) == round(float(nu))


def _prep(nu, z, x):
    if nu < 0:
        raise DomainError("order must be non-negative")
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("x must be positive")
    z, x = np.broadcast_arrays(z, x)
    return z, x


def _series(order, z, x, sign=1, deriv=False):
    """sqrt(pi/2) x^{1/2} (x/2)^{sign*order} sum_k (-z x^2/4)^k / (k! Gamma(k + sign*order + 1)).

    With ``deriv`` the x-derivative is summed term by term instead.
    """
    y = -z * x * x / 4.0
    ymax = float(np.max(np.abs(y), initial=0.0))
    if 4 * ymax > SERIES_RADIUS * (1 + 1e-12):
        raise SeriesRangeError(f"|z| x^2 = {4 * ymax:.3g} exceeds series radius {SERIES_RADIUS}")
    kmax = int(3 * np.sqrt(ymax) + 25)
    mu = sign * order
    p = mu + 0.5  # power of x in the k = 0 term
    t = np.full(y.shape, special.rgamma(mu + 1), dtype=complex)
    acc = t * (p if deriv else 1.0)
    for k in range(1, kmax):
        t = t * y / (k * (k + mu))
        acc = acc + t * ((p + 2 * k) if deriv else 1.0)
    pref = _SQ * np.sqrt(x) * (x / 2.0) ** mu
    return pref * acc / x if deriv else pref * acc


#: below this |z| x^2 the z = 0 limits are exact to rounding (and avoid 0 * inf)
TINY = 1e-24


def _choose(method, z, x):
    if method not in ("auto", "series", "bessel"):
        raise DomainError(f"unknown method {method!r}")
    if method == "auto":
        return "series" if np.max(np.abs(z) * x * x, initial=0.0) <= AUTO_RADIUS else "bessel"
    return method


def _xi_bessel(nu, z, x):
    w = np.sqrt(z)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = z ** (-nu / 2) * np.sqrt(np.pi * x / 2) * special.jv(nu, w * x)
    zero = np.abs(z) * x * x < TINY
    if np.any(zero):
        out = np.where(zero, _SQ * np.sqrt(x) * (x / 2) ** nu / special.gamma(nu + 1), out)
    return out


def _theta_bessel(nu, z, x):
    w = np.sqrt(z)
    with np.errstate(invalid="ignore", divide="ignore"):
        if _is_int(nu):
            n = int(round(nu))
            out = z ** (nu / 2) * np.sqrt(np.pi * x / 2) * (
                np.log(z) / np.pi * special.jv(n, w * x) - special.yv(n, w * x)
            )
        else:
            out = z ** (nu / 2) * np.sqrt(np.pi * x / 2) * special.jv(-nu, w * x) / np.sin(nu * np.pi)
    zero = np.abs(z) * x * x < TINY
    if np.any(zero):
        if _is_int(nu):
            if nu == 0:
                raise DomainError("theta_0 at z = 0 is not needed and not implemented")
            lim = np.sqrt(np.pi * x / 2) * special.gamma(nu) / np.pi * (2 / x) ** nu
        else:
            lim = _SQ * np.sqrt(x) * (x / 2) ** (-nu) * special.rgamma(1 - nu) / np.sin(nu * np.pi)
        out = np.where(zero, lim, out)
    return out


# -- public evaluators ---------------------------------------------------


def xi_free(nu, z, x, method="auto"):
    """xi_nu(z, x)."""
    z, x = _prep(nu, z, x)
    if _choose(method, z, x) == "series":
        return _series(nu, z, x)
    return _xi_bessel(nu, z, x)


def xi_free_prime(nu, z, x, method="auto"):
    """x-derivative of xi_nu."""
    z, x = _prep(nu, z, x)
    if _choose(method, z, x) == "series":
        return _series(nu, z, x, deriv=True)
    return -z * _xi_bessel(nu + 1, z, x) + (nu + 0.5) * _xi_bessel(nu, z, x) / x


def theta_free(nu, z, x, method="auto"):
    """theta_nu(z, x); integer nu uses the logarithmic branch (bessel path only)."""
    z, x = _prep(nu, z, x)
    if _is_int(nu):
        if method == "series":
            raise DomainError("series path for theta is limited to non-integer order")
        return _theta_bessel(nu, z, x)
    if _choose(method, z, x) == "series":
        return _series(nu, z, x, sign=-1) / np.sin(nu * np.pi)
    return _theta_bessel(nu, z, x)


def theta_free_prime(nu, z, x, method="auto"):
    """x-derivative of theta_nu, via theta_nu' = -theta_{nu+1} + (nu + 1/2) theta_nu / x."""
    z, x = _prep(nu, z, x)
    if not _is_int(nu) and _choose(method, z, x) == "series":
        return _series(nu, z, x, sign=-1, deriv=True) / np.sin(nu * np.pi)
    return -theta_free(nu + 1, z, x, method) + (nu + 0.5) * theta_free(nu, z, x, method) / x


def xi_free_dz(nu, z, x, method="auto"):
    """z-derivatives (d xi_nu/dz, d xi_nu'/dz) from d xi_nu/dz = -(x/2) xi_{nu+1}."""
    z, x = _prep(nu, z, x)
    x1 = xi_free(nu + 1, z, x, method)
    x2 = xi_free(nu + 2, z, x, method)
    d = -(x / 2) * x1
    dp = -x1 + z * (x / 2) * x2 - (nu + 0.5) / 2 * x1
    return d, dp


@dataclass(frozen=True)
class FreeSolutionPair:
    xi: complex
    xi_prime: complex
    theta: complex
    theta_prime: complex

    @property
    def wronskian(self):
        return self.theta * self.xi_prime - self.theta_prime * self.xi


def free_pair(nu, z, x, method="auto") -> FreeSolutionPair:
    return FreeSolutionPair(
        xi_free(nu, z, x, method),
        xi_free_prime(nu, z, x, method),
        theta_free(nu, z, x, method),
        theta_free_prime(nu, z, x, method),
    )


def hb_function(nu, s, z, method="auto"):
    """E_{nu,s}(z) = xi_nu(z, s) + i xi_nu'(z, s)."""
    if s <= 0:
        raise DomainError("s must be positive")
    return xi_free(nu, z, s, method) + 1j * xi_free_prime(nu, z, s, method)


# -- spectra ----------------------------------------------------------


def free_norm_sq(nu, s, lam):
    """||xi_nu(lambda, .)||^2 on (0, s) for real lambda (Lommel integrals)."""
    lam = float(lam)
    if lam > 0:
        t = np.sqrt(lam)
        w = t * s
        return (np.pi / 2) * t ** (-2 * nu) * (s * s / 2) * (
            special.jv(nu, w) ** 2 - special.jv(nu - 1, w) * special.jv(nu + 1, w)
        )
    if lam == 0:
        return (np.pi / 2) * 2 ** (-2 * nu) * s ** (2 * nu + 2) / ((2 * nu + 2) * special.gamma(nu + 1) ** 2)
    k = np.sqrt(-lam)
    w = k * s
    # integral of x I_nu(kx)^2 = (x^2/2)(I_nu^2 - I_{nu-1} I_{nu+1})
    return (np.pi / 2) * k ** (-2 * nu) * (s * s / 2) * (
        special.iv(nu, w) ** 2 - special.iv(nu - 1, w) * special.iv(nu + 1, w)
    )


def lowest_robin_eigenvalue(nu, s, gamma):
    """Lowest eigenvalue for gamma != 0; its sign is that of nu + 1/2 + s cot(gamma)."""
    c = nu + 0.5 + s / np.tan(gamma)
    if abs(c) < 1e-14:
        return 0.0
    if c > 0:
        j0 = bessel_zeros(nu, 1).zeros[0]
        g = lambda w: w * special.jv(nu + 1, w) / special.jv(nu, w) - c  # noqa: E731
        hi = j0 * (1 - 1e-12)
        while g(hi) <= 0:  # pragma: no cover - g blows up before j0
            hi = 0.5 * (hi + j0)
        w = optimize.brentq(g, 1e-8, hi, xtol=1e-15, rtol=8.9e-16)
        return (w / s) ** 2
    g = lambda k: k * special.ive(nu + 1, k) / special.ive(nu, k) + c  # noqa: E731
    k = optimize.brentq(g, 1e-12, abs(c) + 2 * nu + 2, xtol=1e-15, rtol=8.9e-16)
    return -((k / s) ** 2)


def free_spectrum(nu, s, gamma, n_max) -> Spectrum:
    """Eigenvalues and norming constants of the free problem on (0, s)."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    setup = ProblemSetup(nu, s, Potential.zero(), gamma)
    if gamma == 0.0:
        z = bessel_zeros(nu, n_max).zeros
        lam = (z / s) ** 2
        idx = np.arange(1, n_max + 1)
    else:
        z = bessel_zeros(nu, n_max, "mixed", cot_gamma=1 / np.tan(gamma), s=s).zeros
        lam = np.concatenate([[lowest_robin_eigenvalue(nu, s, gamma)], (z / s) ** 2])
        idx = np.arange(0, n_max + 1)
    norming = np.array([free_norm_sq(nu, s, v) for v in lam])
    return Spectrum(setup, idx, lam, norming)


def mixed_residual(nu, s, gamma, lam):
    """w J_{nu+1}(w) - c J_nu(w) at w = sqrt(lam) s (diagnostic)."""
    c = nu + 0.5 + s / np.tan(gamma)
    return mixed_condition(nu, c, np.sqrt(lam) * s)
