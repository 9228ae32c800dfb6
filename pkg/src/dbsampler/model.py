"""Core value types shared by the solver, spectrum and sampling layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .potentials import Potential


@dataclass(frozen=True)
class ProblemSetup:
    """One self-adjoint operator H_{s,gamma}: order nu, endpoint s,
    potential q and boundary parameter gamma in [0, pi)."""

    nu: float
    s: float
    q: Potential = field(default_factory=Potential.zero)
    gamma: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu <= 0:
            raise DomainError(f"order nu must be positive, got {self.nu}")
        if not np.isfinite(self.s) or self.s <= 0:
            raise DomainError(f"endpoint s must be positive, got {self.s}")
        if not (0.0 <= self.gamma < np.pi):
            raise DomainError(f"gamma must lie in [0, pi), got {self.gamma}")
        if not isinstance(self.q, Potential):
            raise DomainError("q must be a Potential")

    @property
    def first_index(self) -> int:
        return 0 if self.gamma != 0.0 else 1

    def with_s(self, s: float) -> "ProblemSetup":
        return ProblemSetup(self.nu, s, self.q, self.gamma)

    def with_q(self, q: Potential) -> "ProblemSetup":
        return ProblemSetup(self.nu, self.s, q, self.gamma)

    def with_gamma(self, gamma: float) -> "ProblemSetup":
        return ProblemSetup(self.nu, self.s, self.q, gamma)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues lambda_n of H_{s,gamma} with norming constants
    K_s(lambda_n, lambda_n).  Indices start at 1 for gamma = 0 and at 0
    otherwise."""

    setup: ProblemSetup
    indices: np.ndarray
    eigenvalues: np.ndarray
    norming: np.ndarray

    def __post_init__(self):
        if not (len(self.indices) == len(self.eigenvalues) == len(self.norming)):
            raise DomainError("spectrum arrays differ in length")
        if np.any(np.diff(self.eigenvalues) <= 0):
            raise DomainError("eigenvalues must be strictly increasing")

    def __len__(self):
        return len(self.eigenvalues)

    def truncate(self, n_terms: int) -> "Spectrum":
        """First ``n_terms`` entries."""
        k = int(n_terms)
        return Spectrum(self.setup, self.indices[:k], self.eigenvalues[:k], self.norming[:k])

    def upto(self, N: int) -> "Spectrum":
        """Entries with index <= N."""
        m = self.indices <= N
        return Spectrum(self.setup, self.indices[m], self.eigenvalues[m], self.norming[m])

    @property
    def weights(self):
        """l_inf(nu) weights n^{-nu-1/2}; the index-0 entry gets weight 1."""
        n = self.indices.astype(float)
        w = np.ones_like(n)
        m = n > 0
        w[m] = n[m] ** (-self.setup.nu - 0.5)
        return w
