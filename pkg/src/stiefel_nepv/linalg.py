"""Dense linear-algebra kernels.

Matrices are plain two-dimensional ``float64`` numpy arrays. The functions
here validate shapes and finiteness and then defer to LAPACK through
``numpy.linalg`` and ``scipy.linalg``.
"""
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, NonFiniteError, NonSymmetricError

SYMMETRY_RTOL = 1e-10


class SymEigResult(NamedTuple):
    """Eigenpairs sorted by descending eigenvalue."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdResult(NamedTuple):
    """Thin SVD ``A = u @ diag(singular_values) @ v.T``."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray


class Norms(NamedTuple):
    frobenius: float
    spectral: float
    trace_norm: float


def as_matrix(A, name="matrix"):
    """Return `A` as a finite 2-D float array, raising on bad input."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return A


def _require_square(A, name):
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")


def sym_part(A):
    """Symmetric part ``(A + A.T) / 2``, exactly symmetric."""
    A = as_matrix(A)
    _require_square(A, "sym_part input")
    S = 0.5 * (A + A.T)
    # mirror the upper triangle so S == S.T bitwise
    iu = np.triu_indices_from(S, k=1)
    S[(iu[1], iu[0])] = S[iu]
    return S


def check_symmetric(H, rtol=SYMMETRY_RTOL):
    """Validate symmetry of `H` to relative tolerance and return its symmetrized copy."""
    H = as_matrix(H, "H")
    _require_square(H, "H")
    scale = np.linalg.norm(H)
    if np.linalg.norm(H - H.T) > rtol * max(scale, np.finfo(float).tiny):
        raise NonSymmetricError(
            f"||H - H^T||_F = {np.linalg.norm(H - H.T):.3e} exceeds {rtol:g} * ||H||_F"
        )
    return sym_part(H)


def sym_eig(H):
    """Full eigendecomposition of symmetric `H`, eigenvalues descending."""
    H = check_symmetric(H)
    w, V = np.linalg.eigh(H)
    return SymEigResult(w[::-1].copy(), V[:, ::-1].copy())


def sym_eig_top(H, p):
    """Leading `p` eigenpairs of a symmetric matrix.

    Parameters
    ----------
    H : array, shape (n, n)
        Symmetric to within ``1e-10`` relative Frobenius tolerance.
    p : int
        Number of pairs, ``1 <= p <= n``.

    Returns
    -------
    SymEigResult
        ``eigenvalues`` of shape (p,) in descending order and
        ``eigenvectors`` of shape (n, p) with orthonormal columns.

    Notes
    -----
    When ``lambda_p == lambda_{p+1}`` any orthonormal basis of the
    returned invariant subspace is equally valid.
    """
    H = check_symmetric(H)
    n = H.shape[0]
    if not 1 <= p <= n:
        raise DimensionError(f"p must satisfy 1 <= p <= n={n}, got {p}")
    w, V = scipy.linalg.eigh(H, subset_by_index=(n - p, n - 1), driver="evr")
    return SymEigResult(w[::-1].copy(), V[:, ::-1].copy())


def svd_thin(A):
    """Thin SVD with ``min(n, p)`` singular values in descending order."""
    A = as_matrix(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return SvdResult(U, s, Vt.T)


def trace_inner(X, Y):
    """Frobenius inner product ``trace(X.T @ Y)``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {Y.shape}")
    return float(np.sum(X * Y))


def norms(A):
    """Frobenius, spectral and trace (nuclear) norms of `A`."""
    s = svd_thin(A).singular_values
    return Norms(float(np.sqrt(np.sum(s**2))), float(s[0]), float(np.sum(s)))


def trace_norm(A):
    return float(np.sum(np.linalg.svd(as_matrix(A), compute_uv=False)))
