"""Log-log power-law fits for decay and growth rates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

MIN_POINTS = 10


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float  # rms of the log residuals
    n_points: int


def decay_fit(ns, values, window=None) -> DecayFit:
    """Least-squares fit log|value| = intercept + slope * log n.

    ``window=(n_lo, n_hi)`` restricts the fit to n_lo <= n <= n_hi."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values)
    if ns.shape != values.shape:
        raise DomainError("ns and values must have the same shape")
    if window is not None:
        lo, hi = window
        m = (ns >= lo) & (ns <= hi)
        ns, values = ns[m], values[m]
    if ns.size < MIN_POINTS:
        raise DomainError(f"decay fit needs at least {MIN_POINTS} points, got {ns.size}")
    if np.iscomplexobj(values) or np.any(values <= 0) or np.any(ns <= 0):
        raise DomainError("decay fit needs positive n and positive real values")
    x, y = np.log(ns), np.log(values)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ np.array([slope, icpt])
    return DecayFit(float(slope), float(icpt), float(np.sqrt(np.mean(res**2))), int(ns.size))
