"""Assumption taxonomy and the sector quadratic it induces.

The averaged objective g is assumed sector-bounded with parameters (m, L):
its gradient satisfies the two-sided bound tested by sector_quadratic with
(c1, c2) = (L, -m), meaning admissible slopes lie in [m, L]. Each component
f_i carries one of three assumptions that map to the scalar gamma used by
the individual-component multiplier:

    strongly convex (m, L)  -> gamma = -m   (slopes in [m, L])
    convex and smooth (L)   -> gamma = 0    (slopes in [0, L])
    smooth only (L)         -> gamma = L    (slopes in [-L, L])
"""

from dataclasses import dataclass

import numpy as np

STRONGLY_CONVEX = "strongly-convex"
CONVEX_SMOOTH = "convex-smooth"
SMOOTH_ONLY = "smooth-only"
ASSUMPTION_TAGS = (STRONGLY_CONVEX, CONVEX_SMOOTH, SMOOTH_ONLY)


@dataclass(frozen=True)
class IndividualAssumption:
    """One of the three per-component assumption cases."""

    tag: str
    L: float
    m: float = 0.0

    def __post_init__(self):
        if self.tag not in ASSUMPTION_TAGS:
            raise ValueError("unknown assumption tag %r" % (self.tag,))
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.tag == STRONGLY_CONVEX and self.m <= 0:
            raise ValueError("strongly convex components need m > 0")


def strongly_convex(m, L):
    return IndividualAssumption(STRONGLY_CONVEX, float(L), float(m))


def convex_smooth(L):
    return IndividualAssumption(CONVEX_SMOOTH, float(L))


def smooth_only(L):
    return IndividualAssumption(SMOOTH_ONLY, float(L))


def gamma_of(a, m):
    """Sector parameter gamma for an individual-component assumption."""
    if a.tag == STRONGLY_CONVEX:
        if m <= 0:
            raise ValueError("strongly convex case needs m > 0")
        return -float(m)
    if a.tag == CONVEX_SMOOTH:
        return 0.0
    return float(a.L)


@dataclass(frozen=True)
class AssumptionProfile:
    """Scalar parameters (m, L, nu, gamma) binding g and the f_i."""

    m: float
    L: float
    nu: float
    gamma: float

    def __post_init__(self):
        if not (self.m > 0 and self.L > 0):
            raise ValueError("m and L must be positive")
        if self.L < self.m:
            raise ValueError("need L >= m")
        if self.nu not in (-self.m, 0.0):
            raise ValueError("nu must be -m or 0")
        if self.gamma not in (-self.m, 0.0, self.L):
            raise ValueError("gamma must be one of -m, 0, L")
        if self.nu == 0.0 and self.gamma == -self.m:
            raise ValueError("a strongly convex component case needs nu = -m")


def sector_quadratic(x_minus_xstar, grad_diff, c1, c2):
    """Quadratic form testing sector membership of a gradient pair.

    Evaluates 2*c1*c2*||dx||^2 + 2*(c1 - c2)*<dx, dg> - 2*||dg||^2, which is
    nonnegative whenever dg = H dx for a symmetric H with eigenvalues in
    [-c2, c1]. The averaged-function bound uses (c1, c2) = (L, -m); the
    individual-component bounds use (L, gamma).
    """
    dx = np.asarray(x_minus_xstar, dtype=float).ravel()
    dg = np.asarray(grad_diff, dtype=float).ravel()
    if dx.shape != dg.shape:
        raise ValueError("vector dimensions differ: %d vs %d" % (dx.size, dg.size))
    return float(2.0 * c1 * c2 * dx @ dx + 2.0 * (c1 - c2) * dx @ dg - 2.0 * dg @ dg)
