"""Convex regularizers with closed-form proximal operators.

Two penalties are supported: the elementwise l1 norm ``mu * sum |X_ij|``
and the weighted row-wise l2,1 norm ``sum_i gamma_i ||X_i.||_2``. Both
proximal maps produce exact zeros, so sparsity can be counted without a
threshold.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

SUBDIFF_TOL = 1e-10


def soft_threshold(Z, tau):
    """Entrywise ``sign(z) * max(|z| - tau, 0)``."""
    Z = np.asarray(Z, dtype=float)
    out = np.sign(Z) * np.maximum(np.abs(Z) - tau, 0.0)
    return np.where(out == 0, 0.0, out)  # drop negative zeros


def _check_shapes(A, B):
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")


@dataclass(frozen=True)
class L1:
    """Elementwise l1 penalty ``mu * ||X||_1``.

    ``mu = 0`` is accepted as the unregularized limit.
    """

    mu: float

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")

    def __call__(self, X):
        return float(self.mu * np.sum(np.abs(X)))

    def prox(self, Z, t):
        """``argmin_Y t * r(Y) + 0.5 * ||Y - Z||_F^2``."""
        if t <= 0:
            raise ValueError(f"prox step must be positive, got {t}")
        return soft_threshold(Z, t * self.mu)

    def subgradient(self, X):
        """A subgradient of ``r`` at `X`, taking 0 where ``X_ij = 0``."""
        return self.mu * np.sign(X)

    def subdiff_check(self, Y, Lam, tol=SUBDIFF_TOL):
        """Whether ``Lam`` is in the subdifferential of ``r`` at ``Y``."""
        Y = np.asarray(Y, dtype=float)
        Lam = np.asarray(Lam, dtype=float)
        _check_shapes(Y, Lam)
        if np.any(np.abs(Lam) > self.mu + tol):
            return False
        nz = Y != 0
        return bool(np.all(np.abs(Lam[nz] - self.mu * np.sign(Y[nz])) <= tol))


@dataclass(frozen=True, eq=False)
class RowL21:
    """Row-wise group penalty ``sum_i gamma_i ||X_i.||_2``.

    `gamma` is either a scalar (same weight on every row) or a vector with
    one nonnegative weight per row.
    """

    gamma: object

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if g.ndim != 1 or np.any(~(g >= 0)):
            raise ValueError("gamma must be a nonnegative scalar or 1-D vector")
        object.__setattr__(self, "gamma", g)

    def weights(self, n_rows):
        g = self.gamma
        if g.size == 1:
            return np.full(n_rows, g[0])
        if g.size != n_rows:
            raise DimensionError(f"gamma has {g.size} weights but X has {n_rows} rows")
        return g

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return float(self.weights(X.shape[0]) @ np.linalg.norm(X, axis=1))

    def prox(self, Z, t):
        if t <= 0:
            raise ValueError(f"prox step must be positive, got {t}")
        Z = np.asarray(Z, dtype=float)
        g = self.weights(Z.shape[0])
        rn = np.linalg.norm(Z, axis=1)
        safe = np.where(rn > 0, rn, 1.0)
        scale = np.where(rn > 0, np.maximum(1.0 - t * g / safe, 0.0), 0.0)
        out = Z * scale[:, None]
        return np.where(out == 0, 0.0, out)

    def subgradient(self, X):
        X = np.asarray(X, dtype=float)
        g = self.weights(X.shape[0])
        rn = np.linalg.norm(X, axis=1)
        safe = np.where(rn > 0, rn, 1.0)
        return X * np.where(rn > 0, g / safe, 0.0)[:, None]

    def subdiff_check(self, Y, Lam, tol=SUBDIFF_TOL):
        Y = np.asarray(Y, dtype=float)
        Lam = np.asarray(Lam, dtype=float)
        _check_shapes(Y, Lam)
        g = self.weights(Y.shape[0])
        if np.any(np.linalg.norm(Lam, axis=1) > g + tol):
            return False
        rn = np.linalg.norm(Y, axis=1)
        nz = rn > 0
        target = g[nz, None] * Y[nz] / rn[nz, None]
        return bool(np.all(np.linalg.norm(Lam[nz] - target, axis=1) <= tol))


def sparsity(X):
    """Fraction of exactly-zero entries."""
    X = np.asarray(X)
    return float(np.count_nonzero(X == 0)) / X.size
