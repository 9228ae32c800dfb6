"""Real-order Bessel functions on the positive axis and their zeros.

``bessel_j`` / ``bessel_y`` are thin, domain-checked wrappers over
``scipy.special``.  An independent ascending-series evaluator
(``bessel_j_series``) is kept alongside as a cross-check for small and
moderate arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import BracketError, DomainError

#: Argument above which the ascending series is not trusted.
SERIES_LIMIT = 10.0


def _check(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(nu < 0):
        raise DomainError(f"order must be non-negative, got {nu}")
    if np.any(x <= 0):
        raise DomainError("argument must be positive")
    return nu, x


def bessel_j(nu, x):
    """J_nu(x) for nu >= 0, x > 0."""
    nu, x = _check(nu, x)
    return special.jv(nu, x)


def bessel_y(nu, x):
    """Y_nu(x) for nu >= 0, x > 0 (integer orders included)."""
    nu, x = _check(nu, x)
    return special.yv(nu, x)


def bessel_j_series(nu, x, terms=None):
    """Ascending power series for J_nu(x).

    Cancellation limits the absolute accuracy to about 1e-16 * exp(x), so only meaningful for
    x up to ``SERIES_LIMIT``.  Used as an independent oracle.
    """
    nu = float(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if nu < 0:
        raise DomainError("order must be non-negative")
    if terms is None:
        terms = int(20 + 2 * np.max(x, initial=0.0))
    k = np.arange(terms)[:, None]
    y = -(x[None, :] / 2.0) ** 2
    # log-scaled coefficients avoid overflow in k! Gamma(k+nu+1)
    logc = -special.gammaln(k + 1) - special.gammaln(k + nu + 1)
    with np.errstate(divide="ignore"):
        mag = k * np.log(np.abs(y)) + logc
    t = np.sign(y) ** k * np.exp(mag)
    return ((x / 2.0) ** nu) * np.sum(t, axis=0)


@dataclass(frozen=True)
class ZeroTable:
    """Ordered positive zeros of J_nu (``kind='plain'``) or of the mixed
    boundary function w J_{nu+1}(w) - c J_nu(w) (``kind='mixed'``), with
    c = nu + 1/2 + s cot(gamma)."""

    nu: float
    kind: str
    zeros: np.ndarray
    cot_gamma: float = 0.0
    s: float = 1.0

    @property
    def mixed_constant(self) -> float:
        return self.nu + 0.5 + self.s * self.cot_gamma


def mixed_condition(nu, c, w):
    """w J_{nu+1}(w) - c J_nu(w)."""
    w = np.asarray(w, dtype=float)
    return w * special.jv(nu + 1, w) - c * special.jv(nu, w)


def _sign_change_roots(f, w_max, step):
    w = np.arange(step, w_max + step, step)
    fw = f(w)
    roots = []
    exact = np.nonzero(fw == 0.0)[0]
    roots.extend(w[exact].tolist())
    idx = np.nonzero(fw[:-1] * fw[1:] < 0)[0]
    for i in idx:
        roots.append(optimize.brentq(f, w[i], w[i + 1], xtol=1e-15, rtol=8.9e-16, maxiter=200))
    return np.sort(np.array(roots))


def bessel_zeros(nu: float, n_max: int, kind: str = "plain", cot_gamma: float = 0.0, s: float = 1.0) -> ZeroTable:
    """First ``n_max`` zeros, each bracketed by a sign change and refined.

    For the mixed kind the zeros returned are the ones asymptotic to
    (n + (2 nu + 1)/4) pi; when the mixed constant is positive the smallest
    positive zero belongs to the lowest eigenvalue of the Robin problem and
    is excluded here (see ``unperturbed.free_spectrum``).
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if nu < 0:
        raise DomainError("order must be non-negative")
    if kind == "plain":
        f = lambda w: special.jv(nu, w)  # noqa: E731
        shift = (2 * nu - 1) / 4
        skip = 0
        lower = 0.0
    elif kind == "mixed":
        c = nu + 0.5 + s * cot_gamma
        f = lambda w: mixed_condition(nu, c, w)  # noqa: E731
        shift = (2 * nu + 1) / 4
        skip = 0
        lower = 0.0
        if c > 0:
            # the zero in (0, j_{nu+1,1}) is the lowest Robin eigenvalue
            skip = 1
            lower = _sign_change_roots(lambda w: special.jv(nu + 1, w), nu + 2 * np.pi + 2, 0.05)[0]
    else:
        raise DomainError(f"unknown zero table kind {kind!r}")

    w_max = (n_max + skip + shift + 2) * np.pi + nu
    roots = _sign_change_roots(f, w_max, 0.05)
    roots = roots[roots > lower]
    if roots.size < n_max:
        raise BracketError(f"could not bracket zero #{roots.size + 1} of {kind} table (nu={nu})", index=roots.size + 1)
    return ZeroTable(nu=float(nu), kind=kind, zeros=roots[:n_max], cot_gamma=float(cot_gamma), s=float(s))


def zero_prediction(nu: float, n, kind: str = "plain"):
    """Leading McMahon-type prediction (n + (2 nu -+ 1)/4) pi."""
    n = np.asarray(n, dtype=float)
    shift = (2 * nu - 1) / 4 if kind == "plain" else (2 * nu + 1) / 4
    return (n + shift) * np.pi
