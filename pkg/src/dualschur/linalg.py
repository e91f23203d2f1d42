"""Dense symmetric linear algebra.

Everything here works on plain ``numpy`` arrays. Matrices are validated for
symmetry on entry and returned read-only so they can be shared freely.
"""
from __future__ import annotations

import numpy as np
from scipy import linalg as sla
from scipy import sparse
from scipy.sparse import linalg as spla

from .exceptions import NoConvergence, NotPositiveDefinite

PIVOT_RTOL = 1e-14
EIG_RTOL = 1e-10
EIG_MAXITER = 50_000
DEFAULT_SEED = 20090521
# above this size, factors and matrix-vector products go through sparse storage
SPARSE_MIN_DOF = 400


def as_symmetric(a, rtol: float = 1e-12) -> np.ndarray:
    """Return ``a`` as a read-only symmetric float matrix.

    Raises ``ValueError`` if ``a`` is not square or is asymmetric beyond
    ``rtol`` (relative to its largest entry). Small asymmetries are removed
    by averaging with the transpose.
    """
    s = np.array(a, dtype=float, copy=True, ndmin=2)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {s.shape}")
    scale = max(np.max(np.abs(s)), 1.0)
    if np.max(np.abs(s - s.T)) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    s = 0.5 * (s + s.T)
    s.setflags(write=False)
    return s


def identity(n: int) -> np.ndarray:
    return as_symmetric(np.eye(n))


class CholeskyFactor:
    """Lower Cholesky factor ``S = L L^T`` with a pivot-size guard."""

    def __init__(self, s):
        s = as_symmetric(s)
        self.n = s.shape[0]
        try:
            lower = sla.cholesky(s, lower=True, check_finite=True)
        except sla.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        pivots = np.diag(lower) ** 2
        tol = PIVOT_RTOL * np.max(np.abs(np.diag(s)))
        if np.any(pivots <= tol):
            raise NotPositiveDefinite(
                f"pivot {pivots.min():.3e} below tolerance {tol:.3e}"
            )
        lower.setflags(write=False)
        self.lower = lower

    def solve(self, b) -> np.ndarray:
        """Solve ``S x = b`` for a vector or a matrix of right-hand sides."""
        return sla.cho_solve((self.lower, True), np.asarray(b, dtype=float),
                             check_finite=False)

    def solve_lower(self, b) -> np.ndarray:
        """``L^{-1} b``."""
        return sla.solve_triangular(self.lower, b, lower=True, check_finite=False)

    def solve_upper(self, b) -> np.ndarray:
        """``L^{-T} b``."""
        return sla.solve_triangular(self.lower, b, lower=True, trans="T",
                                    check_finite=False)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.n))


class SparseSPDFactor:
    """Symmetric-mode sparse LU ``P S P^T = L D L^T`` of an SPD matrix.

    Row and column permutations coincide and no off-diagonal pivoting
    happens, so the pivots are those of a Cholesky factorization of the
    reordered matrix; the same size guard as :class:`CholeskyFactor` applies.
    """

    def __init__(self, s):
        a = sparse.csc_array(s)
        if a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix")
        if abs(a - a.T).max() > 1e-12 * max(abs(a).max(), 1.0):
            raise ValueError("matrix is not symmetric")
        self.n = a.shape[0]
        try:
            lu = spla.splu(a, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options=dict(SymmetricMode=True))
        except RuntimeError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        if not np.array_equal(lu.perm_r, lu.perm_c):
            raise NotPositiveDefinite("pivoting left the diagonal")
        pivots = lu.U.diagonal()
        tol = PIVOT_RTOL * np.max(np.abs(a.diagonal()))
        if np.any(pivots <= tol):
            raise NotPositiveDefinite(f"pivot {pivots.min():.3e} below tolerance {tol:.3e}")
        self._lu = lu

    def solve(self, b) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.n))


def cholesky_factor(s) -> CholeskyFactor:
    return CholeskyFactor(s)


def spd_factor(s):
    """Dense Cholesky for small matrices, sparse symmetric LU for large ones."""
    n = s.shape[0]
    if n >= SPARSE_MIN_DOF:
        return SparseSPDFactor(s)
    return CholeskyFactor(s.toarray() if sparse.issparse(s) else s)


def as_operator(a):
    """Matrix for repeated products: CSR when large, the array itself otherwise."""
    if a.shape[0] >= SPARSE_MIN_DOF and not sparse.issparse(a):
        return sparse.csr_array(a)
    return a


def is_positive_definite(s) -> bool:
    try:
        CholeskyFactor(s)
    except NotPositiveDefinite:
        return False
    return True


def max_generalized_eigenvalue(m, k, *, seed: int | None = None,
                               rtol: float = EIG_RTOL,
                               maxiter: int = EIG_MAXITER) -> float:
    """Largest ``omega`` of ``omega M phi = K phi`` by power iteration.

    The iteration runs on the symmetric operator ``L^{-1} K L^{-T}`` (with
    ``M = L L^T``), which has the same spectrum as ``M^{-1} K``. It stops once
    two successive Rayleigh quotients agree to ``rtol``.
    """
    m = as_symmetric(m)
    k = as_symmetric(k)
    if m.shape != k.shape:
        raise ValueError("M and K must have the same dimension")
    fac = CholeskyFactor(m)
    n = m.shape[0]

    def apply(y):
        return fac.solve_lower(k @ fac.solve_upper(y))

    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    y = rng.standard_normal(n)
    y /= np.linalg.norm(y)
    theta_old = None
    delta_old = None
    for _ in range(maxiter):
        z = apply(y)
        theta = float(y @ z)
        norm = np.linalg.norm(z)
        if norm == 0.0:
            # y lies in the kernel of K; with a random start only K = 0 gets here
            return 0.0
        y = z / norm
        if theta_old is not None:
            delta = abs(theta - theta_old)
            tol = rtol * abs(theta)
            if delta <= tol:
                # geometric tail: remaining error ~ delta * rho / (1 - rho)
                rho = delta / delta_old if delta_old else 0.0
                if delta == 0.0 or rho >= 1.0 or delta * rho / (1.0 - rho) <= tol:
                    return max(theta, 0.0)
            delta_old = delta
        theta_old = theta
    raise NoConvergence(f"power iteration did not converge in {maxiter} iterations")
