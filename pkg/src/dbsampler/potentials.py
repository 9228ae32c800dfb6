"""Real potentials q on (0, s].

Five families are supported.  ``power`` means q(x) = c * x**(-beta), so
that x q(x) = c x**(1 - beta) lies in L^r(0, s) exactly when
beta < 1 + 1/r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError

KINDS = ("zero", "constant", "power", "bump", "tabulated")


@dataclass(frozen=True)
class Potential:
    kind: str = "zero"
    c: float = 0.0
    beta: float = 0.0
    center: float = 0.0
    width: float = 1.0
    grid: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)
    r_exponent: float = np.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        for name in ("c", "beta", "center", "width", "r_exponent"):
            v = getattr(self, name)
            if isinstance(v, complex) or not np.isreal(v):
                raise DomainError(f"potential parameter {name} must be real")
        if not self.r_exponent > 2:
            raise DomainError("r_exponent must lie in (2, inf]")
        if self.kind == "power" and not self.beta < 1 + 1 / self.r_exponent:
            raise DomainError(
                f"power exponent beta={self.beta} makes x*q leave L^r for r={self.r_exponent}"
            )
        if self.kind == "bump" and self.width <= 0:
            raise DomainError("bump width must be positive")
        if self.kind == "tabulated":
            g = np.asarray(self.grid, dtype=float)
            v = np.asarray(self.values)
            if np.iscomplexobj(v):
                raise DomainError("tabulated potential must be real")
            if g.ndim != 1 or g.size < 2 or g.shape != v.shape:
                raise DomainError("tabulated potential needs matching 1-d grid and values")
            if np.any(np.diff(g) <= 0):
                raise DomainError("tabulated grid must be strictly increasing")
            if not np.all(np.isfinite(v)):
                raise DomainError("tabulated values must be finite")

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, c):
        return cls("constant", c=float(c))

    @classmethod
    def power(cls, c, beta, r_exponent=np.inf):
        return cls("power", c=float(c), beta=float(beta), r_exponent=float(r_exponent))

    @classmethod
    def bump(cls, c, center, width):
        return cls("bump", c=float(c), center=float(center), width=float(width))

    @classmethod
    def tabulated(cls, grid, values, r_exponent=np.inf):
        return cls(
            "tabulated",
            grid=tuple(np.asarray(grid, dtype=float)),
            values=tuple(np.asarray(values, dtype=float)),
            r_exponent=float(r_exponent),
        )

    @classmethod
    def from_file(cls, path, r_exponent=np.inf):
        """Two whitespace-separated columns (x, q(x)); ``#`` starts a comment."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1], r_exponent)

    # -- evaluation ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind in ("constant", "power", "bump") and self.c == 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "constant":
            return np.full_like(x, self.c)
        if self.kind == "power":
            return self.c * x ** (-self.beta)
        if self.kind == "bump":
            u = (x - self.center) / self.width
            out = np.zeros_like(x)
            m = np.abs(u) < 1
            out[m] = self.c * np.exp(1.0 - 1.0 / (1.0 - u[m] ** 2))
            return out
        # values outside the table are held constant
        return np.interp(x, np.asarray(self.grid), np.asarray(self.values))

    def breakpoints(self, s):
        """Points in (0, s) where q is not smooth (mesh panels snap to them)."""
        if self.kind == "bump":
            pts = [self.center - self.width, self.center + self.width]
        elif self.kind == "tabulated":
            pts = list(self.grid)
        else:
            pts = []
        return sorted(p for p in pts if 0 < p < s)

    def length_scale(self):
        """Largest panel length that resolves q itself."""
        if self.kind == "bump":
            return self.width / 10
        return np.inf

    def sup_abs(self, s, x_min=None):
        """sup |q| over [x_min, s] (x_min defaults to s/100 for singular kinds)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.c)
        if self.kind == "bump":
            return abs(self.c)
        if self.kind == "power":
            lo = s / 100 if x_min is None else x_min
            return float(max(abs(self.c) * lo ** (-self.beta), abs(self.c) * s ** (-self.beta)))
        g = np.asarray(self.grid)
        v = np.asarray(self.values)
        m = g <= s
        return float(np.max(np.abs(v[m]))) if m.any() else float(abs(v[0]))

    def describe(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "constant":
            return f"constant(c={self.c!r})"
        if self.kind == "power":
            return f"power(c={self.c!r},beta={self.beta!r},r={self.r_exponent!r})"
        if self.kind == "bump":
            return f"bump(c={self.c!r},center={self.center!r},width={self.width!r})"
        return f"tabulated(n={len(self.grid)})"
