"""Jump-system realizations of SAGA, SAG, Finito, and SDCA.

Each method is written as a linear system whose dynamics matrices switch
with the sampled component index: state(k+1) = A_i state(k) + B_i w(k),
v(k) = C state(k), where w stacks the component gradients evaluated at v.
Matrices are stored in reduced (pre-Kronecker) form; states are handled as
(state_dim, p) arrays so the ambient lift by I_p never has to be formed.
Component indices are 1-based throughout.
"""

from dataclasses import dataclass

import numpy as np

from .functions import AssumptionProfile, gamma_of

SAGA, SAG, FINITO, SDCA = "saga", "sag", "finito", "sdca"
METHODS = (SAGA, SAG, FINITO, SDCA)


class MissingRegularizer(ValueError):
    """SDCA needs the l2 regularizer weight m."""


class NoUniqueMinimizer(ValueError):
    """The averaged Hessian is not positive definite."""


def normalize_method(method):
    name = str(method).strip().lower()
    if name not in METHODS:
        raise ValueError("unknown method %r (expected one of %s)" % (method, ", ".join(METHODS)))
    return name


def make_profile(method, assumption, m, L):
    """Assumption profile with the method-appropriate averaged-sector nu."""
    method = normalize_method(method)
    m, L = float(m), float(L)
    gamma = gamma_of(assumption, m)
    nu = 0.0 if method == SDCA else -m
    return AssumptionProfile(m=m, L=L, nu=nu, gamma=gamma)


@dataclass(frozen=True)
class JumpRealization:
    method: str
    n: int
    alpha: float
    m: float = None  # SDCA regularizer weight

    def __post_init__(self):
        object.__setattr__(self, "method", normalize_method(self.method))
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.alpha <= 0:
            raise ValueError("stepsize must be positive")
        if self.method == SDCA:
            if self.m is None or self.m <= 0:
                raise MissingRegularizer("SDCA requires the regularizer weight m > 0")

    @property
    def state_dim(self):
        if self.method in (SAGA, SAG):
            return self.n + 1
        if self.method == FINITO:
            return 2 * self.n
        return self.n

    @property
    def alpha_tilde(self):
        if self.method != SDCA:
            raise ValueError("alpha_tilde is defined for SDCA only")
        return self.alpha * self.m * self.n

    def A(self, i):
        """Dynamics matrix for component index i (1-based)."""
        n, alpha = self.n, self.alpha
        if not 1 <= i <= n:
            raise ValueError("component index out of range")
        k = i - 1
        eye = np.eye(n)
        ei = eye[:, k]
        ones = np.ones(n)
        if self.method in (SAGA, SAG):
            a = np.zeros((n + 1, n + 1))
            a[:n, :n] = eye - np.outer(ei, ei)
            scale = n if self.method == SAGA else 1
            a[n, :n] = -(alpha / n) * (ones - scale * ei)
            a[n, n] = 1.0
            return a
        if self.method == FINITO:
            a = np.zeros((2 * n, 2 * n))
            a[:n, :n] = eye - np.outer(ei, ei)
            a[n:, :n] = -alpha * np.outer(ei, ones)
            a[n:, n:] = eye - np.outer(ei, ei) + np.outer(ei, ones) / n
            return a
        return eye - self.alpha_tilde * np.outer(ei, ei)

    def B(self, i):
        """Input matrix for component index i (1-based)."""
        n, alpha = self.n, self.alpha
        if not 1 <= i <= n:
            raise ValueError("component index out of range")
        k = i - 1
        ei = np.eye(n)[:, k]
        if self.method in (SAGA, SAG):
            b = np.zeros((n + 1, n))
            b[:n, :] = np.outer(ei, ei)
            b[n, :] = (-alpha if self.method == SAGA else -alpha / n) * ei
            return b
        if self.method == FINITO:
            b = np.zeros((2 * n, n))
            b[:n, :] = np.outer(ei, ei)
            return b
        return -self.alpha_tilde * np.outer(ei, ei)

    @property
    def C(self):
        """Output row mapping the state to the gradient evaluation point."""
        n, alpha = self.n, self.alpha
        if self.method in (SAGA, SAG):
            c = np.zeros(n + 1)
            c[n] = 1.0
            return c
        if self.method == FINITO:
            return np.concatenate([-alpha * np.ones(n), np.ones(n) / n])
        return np.ones(n) / (self.m * n)


def build_realization(method, n, alpha, m=None):
    return JumpRealization(method=method, n=int(n), alpha=float(alpha),
                           m=None if m is None else float(m))


@dataclass(frozen=True)
class EquilibriumData:
    xstar: np.ndarray   # (p,)
    wstar: np.ndarray   # (n, p) stacked component gradients at xstar
    xistar: np.ndarray  # (state_dim, p)


def equilibrium(method, problem):
    """Minimizer, stacked gradients, and the method's equilibrium state.

    ``problem`` provides diagonal-quadratic data: D and b are (n, p) arrays
    with f_i(x) = 0.5 x' diag(D_i) x + b_i' x, and ell2 is the l2 weight
    (positive for SDCA problems, zero otherwise).
    """
    method = normalize_method(method)
    D = np.asarray(problem.D, dtype=float)
    b = np.asarray(problem.b, dtype=float)
    n = D.shape[0]
    dbar = D.mean(axis=0)
    bbar = b.mean(axis=0)
    ell2 = float(getattr(problem, "ell2", 0.0) or 0.0)
    if method == SDCA:
        if ell2 <= 0:
            raise MissingRegularizer("SDCA equilibrium needs problem.ell2 > 0")
        curvature = dbar + ell2
    else:
        curvature = dbar
    if np.min(curvature) <= 0:
        raise NoUniqueMinimizer("averaged Hessian is not positive definite")
    xstar = -bbar / curvature
    wstar = D * xstar[None, :] + b
    if method in (SAGA, SAG):
        xistar = np.vstack([wstar, xstar[None, :]])
    elif method == FINITO:
        xistar = np.vstack([wstar, np.tile(xstar, (n, 1))])
    else:
        xistar = -wstar
    return EquilibriumData(xstar=xstar, wstar=wstar, xistar=xistar)


def verify_fixed_point(r, eq, p):
    """Max residual of the equilibrium equations across all components."""
    xs = np.atleast_1d(np.asarray(eq.xstar, dtype=float))
    if xs.shape != (p,):
        raise ValueError("xstar has dimension %r, expected (%d,)" % (xs.shape, p))
    X = eq.xistar.reshape(r.state_dim, p)
    W = eq.wstar.reshape(r.n, p)
    resid = 0.0
    for i in range(1, r.n + 1):
        resid = max(resid, float(np.max(np.abs(r.A(i) @ X + r.B(i) @ W - X))))
    resid = max(resid, float(np.max(np.abs(r.C @ X - xs))))
    return resid


def step_exact(r, state, problem, i):
    """One matrix-form step: full gradient stack, no sparsity shortcuts.

    Validation path only; the simulation module has the O(p)-per-iteration
    method updates.
    """
    X = np.asarray(state, dtype=float)
    v = r.C @ X
    D = np.asarray(problem.D, dtype=float)
    b = np.asarray(problem.b, dtype=float)
    W = D * v[None, :] + b
    return r.A(i) @ X + r.B(i) @ W
