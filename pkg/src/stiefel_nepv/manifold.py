"""Stiefel manifold primitives.

Points on ``St(n, p) = {X : X.T @ X = I_p}`` are stored as plain
``(n, p)`` arrays. :func:`stiefel_point` validates (and, for small drift,
repairs) a candidate point.
"""
import enum

import numpy as np

from .errors import DimensionError, FeasibilityError, RankDeficientError
from .linalg import as_matrix, svd_thin, sym_part

FEASIBILITY_TOL = 1e-10
REPAIR_LIMIT = 1e-6
RANK_TOL = 1e-12


class Retraction(str, enum.Enum):
    QR = "qr"
    POLAR = "polar"


def feasibility_residual(X):
    """``||X.T X - I_p||_F``."""
    X = as_matrix(X, "X")
    n, p = X.shape
    if p > n:
        raise DimensionError(f"Stiefel point needs p <= n, got shape {X.shape}")
    return float(np.linalg.norm(X.T @ X - np.eye(p)))


def _qr_positive(A):
    Q, R = np.linalg.qr(A)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d, R * d[:, None]


def stiefel_point(X, tol=FEASIBILITY_TOL):
    """Return `X` as a feasible Stiefel point.

    Points within `tol` are returned unchanged. Points with residual in
    ``(tol, 1e-6]`` are re-orthonormalized by QR; anything further away
    raises :class:`FeasibilityError`.
    """
    X = as_matrix(X, "X")
    res = feasibility_residual(X)
    if res <= tol:
        return X
    if res <= REPAIR_LIMIT:
        return _qr_positive(X)[0]
    raise FeasibilityError(f"||X^T X - I||_F = {res:.3e} is too large to repair")


def _check_same_shape(X, G):
    if X.shape != G.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {G.shape}")


def tangent_project(X, G):
    """Project `G` onto the tangent space at `X`: ``G - X sym(X.T G)``."""
    X = as_matrix(X, "X")
    G = as_matrix(G, "G")
    _check_same_shape(X, G)
    return G - X @ sym_part(X.T @ G)


def riemannian_grad(X, euclid_grad):
    """Riemannian gradient on the Stiefel manifold (embedded metric).

    Parameters
    ----------
    X : array, shape (n, p)
        Point on the manifold.
    euclid_grad : array, shape (n, p)
        Euclidean partial derivative of the objective at `X`.

    Returns
    -------
    array, shape (n, p)
        ``G - X sym(X.T G)``; satisfies ``sym(X.T xi) = 0``.
    """
    return tangent_project(X, euclid_grad)


def retract(X, xi, kind=Retraction.QR):
    """Map the tangent step `xi` at `X` back onto the manifold.

    ``kind="qr"`` returns the Q factor of ``X + xi`` with positive diagonal
    on R; ``kind="polar"`` returns ``U V.T`` from the thin SVD of ``X + xi``.
    """
    X = as_matrix(X, "X")
    xi = as_matrix(xi, "xi")
    _check_same_shape(X, xi)
    kind = Retraction(kind)
    A = X + xi
    if kind is Retraction.QR:
        Q, R = _qr_positive(A)
        if np.min(np.abs(np.diag(R))) < RANK_TOL:
            raise RankDeficientError("X + xi is rank deficient")
        return Q
    svd = svd_thin(A)
    if svd.singular_values[-1] < RANK_TOL:
        raise RankDeficientError("X + xi is rank deficient")
    return svd.u @ svd.v.T


def align_q(Xhat, D):
    """Right-rotate an orthonormal basis to maximize ``trace(X.T D)``.

    With ``Xhat.T @ D = U S V.T`` the rotation ``Q = U V.T`` gives
    ``trace((Xhat Q).T D) = ||Xhat.T D||_trace``, the largest value over
    all orthogonal ``Q`` (von Neumann equality case).

    Returns
    -------
    Q : array, shape (p, p)
    Xtilde : array, shape (n, p)
    """
    Xhat = as_matrix(Xhat, "Xhat")
    D = as_matrix(D, "D")
    _check_same_shape(Xhat, D)
    svd = svd_thin(Xhat.T @ D)
    Q = svd.u @ svd.v.T
    return Q, Xhat @ Q


def random_stiefel(n, p, rng):
    """Haar-distributed point on ``St(n, p)`` drawn from generator `rng`."""
    if p > n:
        raise DimensionError(f"p={p} exceeds n={n}")
    return _qr_positive(rng.standard_normal((n, p)))[0]
