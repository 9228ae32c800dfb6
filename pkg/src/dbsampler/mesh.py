"""Graded Gauss-Legendre panel mesh on [x0, s].

Panels grow geometrically away from 0 (length <= rho * x), are capped by
an oscillation limit (length <= osc / t_max, with t_max the largest
|sqrt(z)| the mesh must resolve) and snap to breakpoints such as the
edges of a bump potential or the tent-weight knot.  Each panel carries
``m`` Gauss-Legendre nodes; the ODE integrator steps between consecutive
points (edges and nodes), quadrature uses the node weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

X0_REL = 1e-6


def _cumulative_matrix(m):
    """S[i, j] = int_{-1}^{x_i} l_j(u) du for the Gauss-Legendre Lagrange basis."""
    x, _ = np.polynomial.legendre.leggauss(m)
    V = np.polynomial.legendre.legvander(x, m - 1)
    # integrate each Legendre polynomial from -1
    ints = np.zeros((m, m))
    for k in range(m):
        c = np.zeros(m)
        c[k] = 1.0
        ci = np.polynomial.legendre.legint(c, lbnd=-1)
        ints[:, k] = np.polynomial.legendre.legval(x, ci)
    return ints @ np.linalg.inv(V)


@dataclass(frozen=True, eq=False)
class Mesh:
    s: float
    t_max: float
    points: np.ndarray  # x0, then per panel: m nodes and the right edge
    weights: np.ndarray  # quadrature weights on points (0 at edges)
    edges: np.ndarray  # panel edges, edges[0] = x0, edges[-1] = s
    m: int
    breakpoints: tuple
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def x0(self) -> float:
        return float(self.points[0])

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1

    def node_index(self):
        """Indices of the quadrature nodes within ``points``."""
        k = np.arange(self.n_panels)[:, None] * (self.m + 1) + 1 + np.arange(self.m)[None, :]
        return k.ravel()

    def edge_index(self):
        return np.arange(self.n_panels + 1) * (self.m + 1)

    def integrate(self, f, upto=None, axis=0):
        """Quadrature of values on ``points`` over [x0, s] (or [x0, upto]
        when ``upto`` is a breakpoint/edge)."""
        w = self.weights if upto is None else self.weights * (self.points <= upto)
        f = np.asarray(f)
        return np.tensordot(w, f, axes=([0], [axis]))

    def cumulative(self, f):
        """Indefinite integral int_{x0}^{x} f on all points (f given on points,
        first axis)."""
        f = np.asarray(f)
        m = self.m
        S = _cumulative_matrix(m)
        out = np.zeros(f.shape, dtype=np.result_type(f, float))
        running = np.zeros(f.shape[1:], dtype=out.dtype)
        for p in range(self.n_panels):
            a, b = self.edges[p], self.edges[p + 1]
            i0 = p * (m + 1) + 1
            fn = f[i0 : i0 + m]
            half = (b - a) / 2
            out[i0 : i0 + m] = running + half * np.tensordot(S, fn, axes=([1], [0]))
            running = running + half * np.tensordot(self._gw, fn, axes=([0], [0]))
            out[i0 + m] = running
        return out

    def interpolate(self, values, x):
        """Panelwise Lagrange interpolation of values on ``points`` at x.

        Uses the m Gauss nodes of the panel containing x (barycentric form);
        below x0 the first value is continued linearly to 0."""
        values = np.asarray(values)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        m = self.m
        gx = np.polynomial.legendre.leggauss(m)[0]
        bw = 1.0 / np.prod(gx[:, None] - gx[None, :] + np.eye(m), axis=1)
        p = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.n_panels - 1)
        a, b = self.edges[p], self.edges[p + 1]
        u = (2 * x - a - b) / (b - a)
        d = u[:, None] - gx[None, :]
        hit = d == 0
        d = np.where(hit, 1.0, d)
        c = bw[None, :] / d
        c = np.where(hit.any(axis=1, keepdims=True), hit.astype(float), c)
        c = c / c.sum(axis=1, keepdims=True)
        idx = p[:, None] * (m + 1) + 1 + np.arange(m)[None, :]
        fv = values[idx]
        out = np.einsum("ij,ij...->i...", c, fv)
        low = x < self.x0
        if low.any():
            out[low] = values[0] * (x[low] / self.x0).reshape((-1,) + (1,) * (values.ndim - 1))
        return out

    @property
    def _gw(self):
        return np.polynomial.legendre.leggauss(self.m)[1]


def build_mesh(
    s, t_max=1.0, breakpoints=(), m=10, rho=0.4, osc=1.5, x0_rel=X0_REL, max_frac=1 / 16, max_len=np.inf
) -> Mesh:
    """Panel mesh resolving frequencies up to ``t_max`` on (0, s]."""
    if s <= 0:
        raise DomainError("s must be positive")
    if t_max < 0 or not np.isfinite(t_max):
        raise DomainError("t_max must be finite and non-negative")
    x0 = x0_rel * s
    cap = min(osc / max(t_max, 1e-300), max_frac * s, max_len)
    bps = sorted(float(b) for b in breakpoints if x0 < b < s)
    targets = bps + [float(s)]
    edges = [x0]
    x = x0
    for tgt in targets:
        while x < tgt * (1 - 1e-14):
            L = min(rho * x, cap)
            nxt = x + L
            if nxt >= tgt - 0.25 * L:  # avoid slivers in front of a breakpoint
                nxt = tgt
            elif tgt - nxt < L:  # split the remainder evenly
                nxt = x + (tgt - x) / 2
            edges.append(nxt)
            x = nxt
    edges = np.array(edges)
    gx, gw = np.polynomial.legendre.leggauss(m)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (a + b) / 2 + (b - a) / 2 * gx[None, :]
    nw = (b - a) / 2 * gw[None, :]
    pts = np.concatenate([nodes, b], axis=1).ravel()
    wts = np.concatenate([nw, np.zeros_like(b)], axis=1).ravel()
    points = np.concatenate([[x0], pts])
    weights = np.concatenate([[0.0], wts])
    return Mesh(float(s), float(t_max), points, weights, edges, m, tuple(bps))
