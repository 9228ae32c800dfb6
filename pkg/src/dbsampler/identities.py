"""Integration-by-parts identities behind the (sc1)/(sc2) estimates.

For t > 0 let xi_nu = xi_nu(t^2, .) be the free solution, xi_1 its
first Picard correction xi_nu Q1 - theta_nu Q2, and R the tent weight.
With xi = xi(z, .) the regular solution of the perturbed equation and all
products bilinear (no conjugation):

A1  int_0^b R xi xi_nu
      = -(xi(b) xi_nu(b) - xi(a) xi_nu(a)) / (t^2 (b-a))
        - (1/t^2) int_0^b R (q - z) xi xi_nu
        + 2 / (t^2 (b-a)) int_a^b xi' xi_nu

A2  int_0^a xi xi_1
      = xi(a) Q1(a) xi_{nu+1}(a) - xi(a) Q2(a) theta_{nu+1}(a) / t^2
        - ((nu+1/2) xi(a)/a - xi'(a)) xi_1(a) / t^2
        - (1/t^2) int_0^a (q - z) xi xi_1 + (1/t^2) int_0^a q xi xi_nu

A3  int_0^b R xi xi_1
      = -(xi(b) xi_1(b) - xi(a) xi_1(a)) / (t^2 (b-a))
        - (1/t^2) int_0^b R (q - z) xi xi_1 + (1/t^2) int_0^b R q xi xi_nu
        + 2 / (t^2 (b-a)) int_a^b xi' xi_1

The q xi xi_nu terms enter with a plus sign because
Q1'' xi_nu - Q2'' theta_nu = -q xi_nu.  ``printed_signs=True`` evaluates
the variant with the opposite signs on the last terms of A1 and A2 and on
the q xi xi_nu term of A3, for comparison.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .kernel import TentWeight
from .model import ProblemSetup
from .perturbed import mesh_for, picard_trace, solve_regular
from .unperturbed import theta_free, xi_free

IDENTITIES = ("A1", "A2", "A3")


def identity_sides(which, setup: ProblemSetup, a, b, t, z, printed_signs=False):
    """(lhs, rhs) of identity ``which`` for the given a < b, t > 0, z."""
    if which not in IDENTITIES:
        raise DomainError(f"unknown identity {which!r}; expected one of {IDENTITIES}")
    if not (0 < a < b):
        raise DomainError("identities need 0 < a < b")
    if not t > 0:
        raise DomainError("t must be positive")
    nu = setup.nu
    st = setup.with_s(b)
    z = complex(z)
    t2 = float(t) ** 2
    mesh = mesh_for(st, max(t, abs(np.sqrt(z)), 1.0), (a,))
    x = mesh.points
    tr = solve_regular(st, np.array([z]), mesh)
    xi, xip = tr.xi[:, 0], tr.xi_prime[:, 0]
    xn = xi_free(nu, t2, x)
    qx = st.q(x)
    R = TentWeight(a, b)(x)
    w = mesh.weights
    ia = int(np.argmin(np.abs(x - a)))
    ib = x.size - 1
    inner = w * (x <= a)
    outer = w * (x >= a) / (b - a)
    sg = -1.0 if printed_signs else 1.0

    if which == "A1":
        lhs = np.sum(w * R * xi * xn)
        rhs = (
            -(xi[ib] * xn[ib] - xi[ia] * xn[ia]) / (t2 * (b - a))
            - np.sum(w * R * (qx - z) * xi * xn) / t2
            + sg * 2 * np.sum(outer * xip * xn) / t2
        )
        return complex(lhs), complex(rhs)

    pt = picard_trace(st, np.array([t2]), mesh)
    x1 = pt.xi1[:, 0]
    if which == "A2":
        Q1, Q2 = pt.Q1[ia, 0], pt.Q2[ia, 0]
        lhs = np.sum(inner * xi * x1)
        rhs = (
            xi[ia] * Q1 * xi_free(nu + 1, t2, a)
            - xi[ia] * Q2 * theta_free(nu + 1, t2, a) / t2
            - ((nu + 0.5) * xi[ia] / a - xip[ia]) * x1[ia] / t2
            - np.sum(inner * (qx - z) * xi * x1) / t2
            + sg * np.sum(inner * qx * xi * xn) / t2
        )
        return complex(lhs), complex(rhs)

    lhs = np.sum(w * R * xi * x1)
    rhs = (
        -(xi[ib] * x1[ib] - xi[ia] * x1[ia]) / (t2 * (b - a))
        - np.sum(w * R * (qx - z) * xi * x1) / t2
        + sg * np.sum(w * R * qx * xi * xn) / t2
        + 2 * np.sum(outer * xip * x1) / t2
    )
    return complex(lhs), complex(rhs)


def ibp_identity_residual(which, setup: ProblemSetup, a, b, t, z, printed_signs=False, eps=1e-300) -> float:
    """|lhs - rhs| / (|lhs| + |rhs| + eps)."""
    lhs, rhs = identity_sides(which, setup, a, b, t, z, printed_signs)
    return float(abs(lhs - rhs) / (abs(lhs) + abs(rhs) + eps))
