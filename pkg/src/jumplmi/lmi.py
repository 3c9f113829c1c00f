"""LMI assembly.

Two independent routes build the full feasibility matrix: ``full_lmi``
sums the per-component products (1/n) sum_i A_i' P A_i (etc.) directly
from a realization, while ``full_lmi_closed_form`` writes the same blocks
out of closed-form identity/rank-one combinations for each method's
structured Lyapunov matrix. Tests require both routes to agree entrywise.

The reduced bundles (``reduced_lmi_saga`` and friends) are the coupled
small matrices whose joint negative semidefiniteness is equivalent to the
full LMI under the structured parameterization; ``block_reduce`` and its
``block_expand`` oracle carry the generic identity-plus-rank-one block
diagonalization behind that equivalence. ``finito_relaxed`` evaluates the
four conservative scalar conditions that imply the Finito bundle at the
slice p2 = alpha^2, p3 = -alpha/n, p5 = 1/n^2.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import SymMatrix
from .models import FINITO, SAG, SAGA, SDCA, normalize_method


class PivotSignViolation(ValueError):
    """A pivot quantity that must be negative is not."""


@dataclass(frozen=True)
class MultiplierPair:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("multipliers must be nonnegative")


_P_LENGTHS = {SAGA: 2, SAG: 2, SDCA: 2, FINITO: 5}


@dataclass(frozen=True)
class StructuredP:
    """Method-tagged Lyapunov parameters.

    Storage is permissive (the search walks through infeasible points);
    positivity side conditions are exposed as pd_constraint_blocks and
    enforced only where a contract demands them.
    """

    method: str
    params: tuple

    def __post_init__(self):
        method = normalize_method(self.method)
        object.__setattr__(self, "method", method)
        params = tuple(float(v) for v in self.params)
        if len(params) != _P_LENGTHS[method]:
            raise ValueError("%s expects %d Lyapunov parameters, got %d"
                             % (method, _P_LENGTHS[method], len(params)))
        object.__setattr__(self, "params", params)

    def expand(self, n):
        """The full structured Lyapunov matrix for n components."""
        eye = np.eye(n)
        ee = np.ones((n, n))
        if self.method in (SAGA, SAG):
            p1, p2 = self.params
            out = np.zeros((n + 1, n + 1))
            out[:n, :n] = p1 * eye
            out[n, n] = p2
            return out
        if self.method == FINITO:
            p1, p2, p3, p4, p5 = self.params
            return np.block([[p1 * eye + p2 * ee, p3 * ee],
                             [p3 * ee, p4 * eye + p5 * ee]])
        p1, p2 = self.params
        return p1 * eye + p2 * ee

    def pd_constraint_blocks(self, n, corner_uses_p4=False):
        """Small matrices that must be positive definite."""
        if self.method in (SAGA, SAG):
            p1, p2 = self.params
            return [np.array([[p1]]), np.array([[p2]])]
        if self.method == SDCA:
            p1, p2 = self.params
            return [np.array([[p1]]), np.array([[p1 + n * p2]])]
        p1, p2, p3, p4, p5 = self.params
        corner = p4 + n * (p4 if corner_uses_p4 else p5)
        return [np.array([[p1]]), np.array([[p4]]),
                np.array([[p1 + n * p2, n * p3], [n * p3, corner]])]

    def scaled(self, c):
        return StructuredP(self.method, tuple(c * v for v in self.params))

    def validate(self, n, corner_uses_p4=False):
        """Raise ValueError unless the method's positivity side holds."""
        for blk in self.pd_constraint_blocks(n, corner_uses_p4=corner_uses_p4):
            if not linalg.is_pd(SymMatrix(blk)):
                raise ValueError("Lyapunov positivity violated for %s: %r"
                                 % (self.method, blk.tolist()))


@dataclass
class LmiBundle:
    label: str
    nsd_blocks: list
    pd_blocks: list
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nsd_blocks = [b if isinstance(b, SymMatrix) else SymMatrix(b)
                           for b in self.nsd_blocks]
        self.pd_blocks = [b if isinstance(b, SymMatrix) else SymMatrix(b)
                          for b in self.pd_blocks]
        for b in self.nsd_blocks + self.pd_blocks:
            if not np.all(np.isfinite(b.entries)):
                raise linalg.InvalidMatrix("bundle %r has a non-finite block" % self.label)


def bundle_margins(bundle):
    """Scaled extreme eigenvalues per block; the feasibility diagnostics."""
    return {
        "nsd_max_scaled_eig": [linalg.scaled_max_eig(b) for b in bundle.nsd_blocks],
        "pd_min_scaled_eig": [linalg.scaled_min_eig(b) for b in bundle.pd_blocks],
    }


def bundle_feasible(bundle, tol=linalg.NSD_TOL, pd_tol=None):
    """All NSD blocks within tol and all PD blocks above pd_tol (scaled)."""
    if pd_tol is None:
        pd_tol = tol
    margins = bundle_margins(bundle)
    nsd_ok = all(v <= tol for v in margins["nsd_max_scaled_eig"])
    pd_ok = all(v >= pd_tol for v in margins["pd_min_scaled_eig"])
    return bool(nsd_ok and pd_ok)


def bundle_to_json(bundle):
    return {
        "label": bundle.label,
        "nsd_blocks": [b.entries.tolist() for b in bundle.nsd_blocks],
        "pd_blocks": [b.entries.tolist() for b in bundle.pd_blocks],
        "params": dict(bundle.params),
    }


def full_lmi(r, a, rho2, Pt, mult):
    """Full feasibility matrix, assembled by summation over components.

    Dimension state_dim + n. The first block row/column carries the
    expected-update quadratic (1/n) sum_i [A_i' P A_i - rho2 P, A_i' P B_i;
    ., B_i' P B_i]; the sector multipliers enter through 2(n+1) paired rows
    combining the output map with component selectors.
    """
    if not 0.0 <= rho2 <= 1.0:
        raise ValueError("rho2 must lie in [0, 1]")
    P = Pt.entries if isinstance(Pt, SymMatrix) else np.asarray(Pt, dtype=float)
    d, n = r.state_dim, r.n
    if P.shape != (d, d):
        raise ValueError("Lyapunov matrix has shape %r, expected (%d, %d)"
                         % (P.shape, d, d))
    s_aa = np.zeros((d, d))
    s_ab = np.zeros((d, n))
    s_bb = np.zeros((n, n))
    for i in range(1, n + 1):
        ai, bi = r.A(i), r.B(i)
        pa, pb = P @ ai, P @ bi
        s_aa += ai.T @ pa
        s_ab += ai.T @ pb
        s_bb += bi.T @ pb
    m = np.zeros((d + n, d + n))
    m[:d, :d] = s_aa / n - rho2 * P
    m[:d, d:] = s_ab / n
    m[d:, :d] = s_ab.T / n
    m[d:, d:] = s_bb / n

    c = r.C
    e = np.ones(n)
    rows_state = [a.L * c, a.nu * c]
    rows_w = [-e / n, e / n]
    weights = [mult.lambda1]
    for j in range(n):
        ej = np.zeros(n)
        ej[j] = 1.0
        rows_state += [a.L * c, a.gamma * c]
        rows_w += [-ej, ej]
        weights.append(mult.lambda2 / n)
    for k, w in enumerate(weights):
        ra = np.concatenate([rows_state[2 * k], rows_w[2 * k]])
        rb = np.concatenate([rows_state[2 * k + 1], rows_w[2 * k + 1]])
        m += w * (np.outer(ra, rb) + np.outer(rb, ra))
    return SymMatrix(m)


def full_lmi_closed_form(method, a, n, alpha, rho2, sp, mult, m=None):
    """Full feasibility matrix from per-method closed-form blocks.

    Independent of full_lmi: every block is written as an explicit
    identity/all-ones combination instead of a sum over components.
    Only the three structured parameterizations are covered.
    """
    method = normalize_method(method)
    if sp.method != method:
        raise ValueError("Lyapunov parameters tagged %r, expected %r" % (sp.method, method))
    if not 0.0 <= rho2 <= 1.0:
        raise ValueError("rho2 must lie in [0, 1]")
    l1, l2 = mult.lambda1, mult.lambda2
    L, nu, gamma = a.L, a.nu, a.gamma
    eye = np.eye(n)
    ee = np.ones((n, n))
    e = np.ones(n)

    if method in (SAGA, SAG):
        if method == SAG:
            raise ValueError("no closed-form blocks for sag")
        p1, p2 = sp.params
        big = np.zeros((2 * n + 1, 2 * n + 1))
        y, x, w = slice(0, n), slice(n, n + 1), slice(n + 1, 2 * n + 1)
        big[y, y] = ((n - 1) * p1 / n + alpha**2 * p2 / n - rho2 * p1) * eye \
            - (alpha**2 * p2 / n**2) * ee
        big[x, x] = (1 - rho2) * p2 + 2 * L * nu * l1 + 2 * L * gamma * l2
        big[y, w] = -(alpha**2 * p2 / n) * eye + (alpha**2 * p2 / n**2) * ee
        big[w, y] = big[y, w].T
        xw = (-alpha * p2 / n + (L - nu) * l1 / n + (L - gamma) * l2 / n) * e
        big[x, w] = xw[None, :]
        big[w, x] = xw[:, None]
        big[w, w] = ((p1 + alpha**2 * p2) / n - 2 * l2 / n) * eye - (2 * l1 / n**2) * ee
        return SymMatrix(big)

    if method == FINITO:
        p1, p2, p3, p4, p5 = sp.params
        big = np.zeros((3 * n, 3 * n))
        y, x, w = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
        sector = 2 * L * nu * l1 + 2 * L * gamma * l2
        cross = (L - nu) * l1 + (L - gamma) * l2
        w11 = (p2 / n + (n - 1) * p1 / n) * eye \
            + ((1 - 2.0 / n) * p2 - 2 * (1 - 1.0 / n) * p3 * alpha
               + (p4 + p5) * alpha**2) * ee
        w12 = (p3 / n) * eye + ((n - 1 - 1.0 / n) * p3 - p4 * alpha - n * p5 * alpha) / n * ee
        w22 = (p5 / n + (1 - 1.0 / n) * p4) * eye \
            + (p4 / n**2 + (1 - 1.0 / n**2) * p5) * ee
        big[y, y] = w11 - rho2 * (p1 * eye + p2 * ee) + sector * alpha**2 * ee
        big[y, x] = w12 - rho2 * p3 * ee - sector * (alpha / n) * ee
        big[x, y] = big[y, x].T
        big[x, x] = w22 - rho2 * (p4 * eye + p5 * ee) + sector / n**2 * ee
        big[y, w] = -(p2 / n) * eye + ((p2 - p3 * alpha) / n) * ee - cross * (alpha / n) * ee
        big[w, y] = big[y, w].T
        big[x, w] = -(p3 / n) * eye + ((n + 1) * p3 / n**2) * ee + cross / n**2 * ee
        big[w, x] = big[x, w].T
        big[w, w] = ((p1 + p2) / n - 2 * l2 / n) * eye - (2 * l1 / n**2) * ee
        return SymMatrix(big)

    if m is None or m <= 0:
        raise ValueError("sdca closed form needs the regularizer weight m > 0")
    p1, p2 = sp.params
    at = alpha * m * n
    big = np.zeros((2 * n, 2 * n))
    y, w = slice(0, n), slice(n, 2 * n)
    big[y, y] = (p1 * (at**2 - 2 * at + n) / n + p2 * at**2 / n - rho2 * p1) * eye \
        + (p2 * (n - 2 * at) / n - rho2 * p2
           + (2 * L * nu * l1 + 2 * L * gamma * l2) / (m**2 * n**2)) * ee
    big[y, w] = (p1 * (at**2 - at) / n + p2 * at**2 / n) * eye \
        + (-at * p2 / n + ((L - nu) * l1 + (L - gamma) * l2) / (m * n**2)) * ee
    big[w, y] = big[y, w].T
    big[w, w] = ((p1 + p2) * at**2 / n - 2 * l2 / n) * eye - (2 * l1 / n**2) * ee
    return SymMatrix(big)


def reduced_lmi_saga(a, n, alpha, p1, p2, mult, rho2):
    """Coupled pair of 2x2 conditions for the block-diagonal Lyapunov form."""
    if p1 <= 0 or p2 <= 0:
        raise ValueError("need p1 > 0 and p2 > 0")
    l1, l2 = mult.lambda1, mult.lambda2
    m, L, gamma = a.m, a.L, a.gamma
    bulk = np.array([
        [p2 * alpha**2 + ((n - 1.0) / n - rho2) * n * p1, -alpha**2 * p2],
        [-alpha**2 * p2, p1 + alpha**2 * p2 - 2 * l2],
    ])
    mean = np.array([
        [(1 - rho2) * p2 - 2 * l1 * m * L + 2 * l2 * L * gamma,
         -alpha * p2 + (m + L) * l1 + (L - gamma) * l2],
        [-alpha * p2 + (m + L) * l1 + (L - gamma) * l2,
         p1 + alpha**2 * p2 - 2 * l2 - 2 * l1],
    ])
    return LmiBundle(
        label="saga-reduced",
        nsd_blocks=[bulk, mean],
        pd_blocks=[np.array([[p1]]), np.array([[p2]])],
        params={"p1": p1, "p2": p2, "lambda1": l1, "lambda2": l2,
                "rho2": rho2, "alpha": alpha, "n": n},
    )


def reduced_lmi_finito(a, n, alpha, p1, p2, p3, p4, p5, mult, rho2,
                       corner_uses_p4=False):
    """Coupled pair of 3x3 conditions plus the structured positivity side."""
    if p1 <= 0 or p4 <= 0:
        raise ValueError("need p1 > 0 and p4 > 0")
    l1, l2 = mult.lambda1, mult.lambda2
    m, L, gamma = a.m, a.L, a.gamma
    bulk = np.array([
        [p2 - p1 + n * (1 - rho2) * p1, p3, -p2],
        [p3, p5 - p4 + n * (1 - rho2) * p4, -p3],
        [-p2, -p3, p1 + p2 - 2 * l2],
    ])
    x11 = (1 - 1.0 / n - rho2) * p1 + p2 / n - n * rho2 * p2 + (n - 2) * p2 \
        - 2 * (1 - 1.0 / n) * p3 * alpha * n \
        + (p4 + p5 - 2 * L * m * l1 + 2 * L * gamma * l2) * alpha**2 * n
    x12 = (1 - rho2) * p3 * n - p3 - (p4 + n * p5 - 2 * L * m * l1 + 2 * L * gamma * l2) * alpha
    x13 = (1 - 1.0 / n) * p2 - (p3 + l1 * (L + m) + l2 * (L - gamma)) * alpha
    mean = np.array([
        [x11, x12, x13],
        [x12, (p4 + n * p5) * (1 - rho2) - (2 * L * m * l1 - 2 * L * gamma * l2) / n,
         p3 + ((L + m) * l1 + (L - gamma) * l2) / n],
        [x13, p3 + ((L + m) * l1 + (L - gamma) * l2) / n,
         (p1 + p2 - 2 * l1 - 2 * l2) / n],
    ])
    sp = StructuredP(FINITO, (p1, p2, p3, p4, p5))
    return LmiBundle(
        label="finito-reduced",
        nsd_blocks=[bulk, mean],
        pd_blocks=sp.pd_constraint_blocks(n, corner_uses_p4=corner_uses_p4),
        params={"p1": p1, "p2": p2, "p3": p3, "p4": p4, "p5": p5,
                "lambda1": l1, "lambda2": l2, "rho2": rho2, "alpha": alpha,
                "n": n, "corner_uses_p4": bool(corner_uses_p4)},
    )


def reduced_lmi_sdca(a, n, alpha, m, p1, p2, mult, rho2):
    """Coupled pair of 2x2 conditions in the scaled stepsize at = alpha*m*n."""
    if p1 <= 0 or p1 + n * p2 <= 0:
        raise ValueError("need p1 > 0 and p1 + n*p2 > 0")
    l1, l2 = mult.lambda1, mult.lambda2
    L, gamma = a.L, a.gamma
    at = alpha * m * n
    bulk = np.array([
        [p1 * (at**2 - 2 * at + n * (1 - rho2)) + p2 * at**2,
         p1 * (at**2 - at) + at**2 * p2],
        [p1 * (at**2 - at) + at**2 * p2,
         (p1 + p2) * at**2 - 2 * l2],
    ])
    x11 = p1 * (at**2 - 2 * at + n * (1 - rho2)) + p2 * (at - n)**2 \
        - n**2 * rho2 * p2 + 2 * gamma * L * l2 / m**2
    x12 = p1 * (at**2 - at) + at * (at - n) * p2 + (l1 * L + (L - gamma) * l2) / m
    mean = np.array([
        [x11, x12],
        [x12, (p1 + p2) * at**2 - 2 * (l1 + l2)],
    ])
    return LmiBundle(
        label="sdca-reduced",
        nsd_blocks=[bulk, mean],
        pd_blocks=[np.array([[p1]]), np.array([[p1 + n * p2]])],
        params={"p1": p1, "p2": p2, "lambda1": l1, "lambda2": l2,
                "rho2": rho2, "alpha": alpha, "alpha_tilde": at, "n": n, "m": m},
    )


def reduced_bundle(method, a, n, alpha, sp, mult, rho2, m=None,
                   corner_uses_p4=False):
    """Dispatch to the method's reduced bundle from structured parameters."""
    method = normalize_method(method)
    if sp.method != method:
        raise ValueError("Lyapunov parameters tagged %r, expected %r" % (sp.method, method))
    if method == SAGA:
        p1, p2 = sp.params
        return reduced_lmi_saga(a, n, alpha, p1, p2, mult, rho2)
    if method == FINITO:
        p1, p2, p3, p4, p5 = sp.params
        return reduced_lmi_finito(a, n, alpha, p1, p2, p3, p4, p5, mult, rho2,
                                  corner_uses_p4=corner_uses_p4)
    if method == SDCA:
        if m is None or m <= 0:
            raise ValueError("sdca reduced bundle needs the regularizer weight m > 0")
        p1, p2 = sp.params
        return reduced_lmi_sdca(a, n, alpha, m, p1, p2, mult, rho2)
    raise ValueError("no reduced bundle for sag")


_SHAPES = ("1x1", "2x2", "3x3-saga", "3x3-full")


def _unpack_blockform(mu, q, shape):
    mu = tuple(float(v) for v in mu)
    q = tuple(float(v) for v in q)
    want = {"1x1": 1, "2x2": 3, "3x3-saga": 6, "3x3-full": 6}[shape]
    if len(mu) != want or len(q) != want:
        raise ValueError("shape %s expects %d mu and q slots" % (shape, want))
    if shape == "3x3-saga":
        if mu[3] != 0.0 or mu[4] != 0.0 or q[1] != 0.0:
            raise ValueError("3x3-saga has no mu4/mu5/q2 slots; set them to 0")
    return mu, q


def block_expand(mu, q, n, shape):
    """Brute-force expansion of the structured block matrix (test oracle).

    Slot convention follows the subscripts: diagonal blocks 1..3, then
    4 = (1,2) coupling, 5 = (2,3) coupling, 6 = (1,3) coupling. The
    "3x3-saga" shape has a scalar middle block, so its couplings to the
    middle are rank-one (q4, q5 only).
    """
    if shape not in _SHAPES:
        raise ValueError("unknown shape %r" % (shape,))
    mu, q = _unpack_blockform(mu, q, shape)
    if n < 1:
        raise ValueError("n must be positive")
    eye = np.eye(n)
    ee = np.ones((n, n))
    e = np.ones((n, 1))
    if shape == "1x1":
        return mu[0] * eye + q[0] * ee
    if shape == "2x2":
        m1, m2, m3 = mu
        q1, q2, q3 = q
        return np.block([[m1 * eye + q1 * ee, m3 * eye + q3 * ee],
                         [m3 * eye + q3 * ee, m2 * eye + q2 * ee]])
    if shape == "3x3-saga":
        m1, m2, m3, _, _, m6 = mu
        q1, _, q3, q4, q5, q6 = q
        return np.block([
            [m1 * eye + q1 * ee, q4 * e, m6 * eye + q6 * ee],
            [q4 * e.T, np.array([[m2]]), q5 * e.T],
            [m6 * eye + q6 * ee, q5 * e, m3 * eye + q3 * ee],
        ])
    m1, m2, m3, m4, m5, m6 = mu
    q1, q2, q3, q4, q5, q6 = q
    return np.block([
        [m1 * eye + q1 * ee, m4 * eye + q4 * ee, m6 * eye + q6 * ee],
        [m4 * eye + q4 * ee, m2 * eye + q2 * ee, m5 * eye + q5 * ee],
        [m6 * eye + q6 * ee, m5 * eye + q5 * ee, m3 * eye + q3 * ee],
    ])


def block_reduce(mu, q, n, shape):
    """Small coupled matrices equivalent to the expanded block matrix.

    The "1x1" shape is a positivity test (two scalars); the others produce
    a bulk matrix (eigenvalue multiplicity n-1) and a mean matrix. At n=1
    only the mean direction exists, so both returned blocks collapse to the
    expanded matrix itself.
    """
    if shape not in _SHAPES:
        raise ValueError("unknown shape %r" % (shape,))
    mu, q = _unpack_blockform(mu, q, shape)
    if n < 1:
        raise ValueError("n must be positive")
    params = {"mu": list(mu), "q": list(q), "n": n, "shape": shape}
    if shape == "1x1":
        if n == 1:
            collapsed = np.array([[mu[0] + q[0]]])
            return LmiBundle("block-pd", [], [collapsed, collapsed], params)
        return LmiBundle("block-pd", [],
                         [np.array([[mu[0]]]), np.array([[mu[0] + n * q[0]]])],
                         params)
    if n == 1:
        collapsed = block_expand(mu, q, 1, shape)
        return LmiBundle("block-nsd", [collapsed, collapsed], [], params)
    if shape == "2x2":
        m1, m2, m3 = mu
        q1, q2, q3 = q
        bulk = np.array([[m1, m3], [m3, m2]])
        mean = bulk + n * np.array([[q1, q3], [q3, q2]])
        return LmiBundle("block-nsd", [bulk, mean], [], params)
    if shape == "3x3-saga":
        m1, m2, m3, _, _, m6 = mu
        q1, _, q3, q4, q5, q6 = q
        rn = np.sqrt(n)
        bulk = np.array([[m1, 0.0, m6], [0.0, m2, 0.0], [m6, 0.0, m3]])
        mean = np.array([
            [m1 + n * q1, rn * q4, m6 + n * q6],
            [rn * q4, m2, rn * q5],
            [m6 + n * q6, rn * q5, m3 + n * q3],
        ])
        return LmiBundle("block-nsd", [bulk, mean], [], params)
    m1, m2, m3, m4, m5, m6 = mu
    q1, q2, q3, q4, q5, q6 = q
    bulk = np.array([[m1, m4, m6], [m4, m2, m5], [m6, m5, m3]])
    mean = bulk + n * np.array([[q1, q4, q6], [q4, q2, q5], [q6, q5, q3]])
    return LmiBundle("block-nsd", [bulk, mean], [], params)


def finito_slice(alpha, n):
    """The (p2, p3, p5) values induced by the relaxed Finito conditions."""
    return alpha**2, -alpha / n, 1.0 / n**2


def finito_relaxed(a, n, alpha, p1, p4, mult, rho2):
    """Four scalar sufficient conditions for the Finito bundle.

    Feasibility of all four (plus the strict pivot sign) implies the full
    reduced bundle is feasible at the induced (p2, p3, p5) slice.
    """
    if not (1 - 1.0 / n) <= rho2 <= 1.0:
        raise ValueError("rho2 must lie in [1 - 1/n, 1]")
    l1, l2 = mult.lambda1, mult.lambda2
    m, L, gamma = a.m, a.L, a.gamma
    pivot = alpha**2 - 2 * l2 + p1
    if pivot >= 0:
        raise PivotSignViolation("need alpha^2 - 2*lambda2 + p1 < 0, got %.3e" % pivot)
    pivot2 = alpha**2 - 2 * l1 - 2 * l2 + p1
    lhs48 = n * (1 - rho2) * p1 - p1 + 2 * alpha**2 - 2 * alpha**4 / pivot
    lhs49 = n * (1 - rho2) * p4 - p4 + 2.0 / n**2 - 2 * alpha**2 / (n**2 * pivot)
    qterm = (L + m) * l1 + (L - gamma) * l2 - alpha
    lhs50 = p4 - rho2 + 2 * L * gamma * l2 - 2 * L * m * l1 + 1 - qterm**2 / pivot2
    return LmiBundle(
        label="finito-relaxed",
        nsd_blocks=[np.array([[pivot]]), np.array([[lhs48]]),
                    np.array([[lhs49]]), np.array([[lhs50]])],
        pd_blocks=[np.array([[p1]]), np.array([[p4]])],
        params={"p1": p1, "p4": p4, "lambda1": l1, "lambda2": l2,
                "rho2": rho2, "alpha": alpha, "n": n},
    )
