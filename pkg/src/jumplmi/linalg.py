"""Dense symmetric linear algebra used by every other module.

Eigenvalues come from the in-house cyclic Jacobi kernel (see _kernels);
no library eigensolver is called anywhere in the package. Definiteness
checks are relative: a matrix counts as negative semidefinite when its
largest eigenvalue is below tol * max(1, frobenius norm), which keeps
exact-zero blocks from analytical certificates inside tolerance.
"""

import numpy as np

from . import _kernels

JACOBI_SWEEP_LIMIT = 100
OFFDIAG_REL_TOL = 1e-14
NSD_TOL = 1e-9


class InvalidMatrix(ValueError):
    """Matrix input is unusable: non-finite entries or a bad shape."""


class SingularBlock(ValueError):
    """Schur pivot block is not safely negative definite."""


class SymMatrix:
    """A real symmetric matrix, symmetrized on construction.

    The entry array is frozen; treat instances as immutable values.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidMatrix("expected a square matrix, got shape %r" % (arr.shape,))
        if arr.shape[0] < 1:
            raise InvalidMatrix("dimension must be at least 1")
        arr = 0.5 * (arr + arr.T)
        arr.flags.writeable = False
        self.entries = arr

    @property
    def dim(self):
        return self.entries.shape[0]

    def __repr__(self):
        return "SymMatrix(dim=%d)" % self.dim


def ones_vector(n):
    """The all-ones column vector of length n."""
    if n < 1:
        raise InvalidMatrix("length must be at least 1")
    return np.ones(n)


def basis_vector(n, i):
    """The i-th canonical basis vector of length n (0-indexed)."""
    if n < 1:
        raise InvalidMatrix("length must be at least 1")
    if not 0 <= i < n:
        raise InvalidMatrix("basis index %d out of range for length %d" % (i, n))
    v = np.zeros(n)
    v[i] = 1.0
    return v


def _as_array(M):
    if isinstance(M, SymMatrix):
        return M.entries
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidMatrix("expected a square matrix, got shape %r" % (arr.shape,))
    return 0.5 * (arr + arr.T)


def frobenius(M):
    return float(np.linalg.norm(_as_array(M)))


def eigenvalues_sym(M):
    """All eigenvalues of a symmetric matrix, ascending.

    Cyclic Jacobi sweeps (limit JACOBI_SWEEP_LIMIT) with off-diagonal
    convergence threshold OFFDIAG_REL_TOL * ||M||_F.
    """
    a = _as_array(M)
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    if a.shape[0] == 1:
        return a[0, :1].copy()
    work = a.copy()
    off_tol = OFFDIAG_REL_TOL * float(np.linalg.norm(a))
    d = _kernels.jacobi_eigenvalues(work, JACOBI_SWEEP_LIMIT, off_tol)
    return np.sort(d)


def is_nsd(M, tol=NSD_TOL):
    """True iff max eigenvalue <= tol * max(1, ||M||_F)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    evals = eigenvalues_sym(M)
    return bool(evals[-1] <= tol * max(1.0, frobenius(M)))


def is_pd(M, tol=NSD_TOL):
    """True iff min eigenvalue >= tol * max(1, ||M||_F)."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    evals = eigenvalues_sym(M)
    return bool(evals[0] >= tol * max(1.0, frobenius(M)))


def scaled_max_eig(M):
    """max eigenvalue / max(1, ||M||_F); the NSD feasibility margin."""
    evals = eigenvalues_sym(M)
    return float(evals[-1] / max(1.0, frobenius(M)))


def scaled_min_eig(M):
    """min eigenvalue / max(1, ||M||_F); the PD feasibility margin."""
    evals = eigenvalues_sym(M)
    return float(evals[0] / max(1.0, frobenius(M)))


def kron_identity(M, p):
    """M substituted with p-dimensional blocks: M kron I_p."""
    if p < 1:
        raise InvalidMatrix("p must be a positive integer")
    a = _as_array(M)
    return SymMatrix(np.kron(a, np.eye(int(p))))


def schur_reduce(M, block, tol=NSD_TOL):
    """Schur complement of the sub-block indexed by ``block``.

    The pivot block must be negative definite; raises SingularBlock when
    any of its eigenvalues lies above -tol * max(1, ||pivot||_F).
    """
    a = _as_array(M)
    d = a.shape[0]
    idx = sorted({int(i) for i in block})
    if not idx:
        raise InvalidMatrix("pivot index set is empty")
    if idx[0] < 0 or idx[-1] >= d:
        raise InvalidMatrix("pivot index out of range")
    if len(idx) >= d:
        raise InvalidMatrix("pivot block must leave a nonempty complement")
    rest = [i for i in range(d) if i not in set(idx)]
    pivot = a[np.ix_(idx, idx)]
    pivot_evals = eigenvalues_sym(pivot)
    if pivot_evals[-1] > -tol * max(1.0, float(np.linalg.norm(pivot))):
        raise SingularBlock("pivot block is not negative definite "
                            "(max eigenvalue %.3e)" % pivot_evals[-1])
    cross = a[np.ix_(idx, rest)]
    comp = a[np.ix_(rest, rest)] - cross.T @ np.linalg.solve(pivot, cross)
    return SymMatrix(comp)
