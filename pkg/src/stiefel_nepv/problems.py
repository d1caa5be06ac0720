"""Problem instances of ``min f(X) + r(X)`` over the Stiefel manifold.

Every problem is posed as maximizing the smooth part ``phi = -f`` and
carries the pieces the solvers need: ``phi``, its Euclidean gradient, a
builder for the symmetric NEPv matrix ``H(X)`` of the X-subproblem, and
the regularizer ``r``.

The three bundled applications are all trace-quadratic,
``phi(X) = 0.5 * trace(X.T K X)`` for a fixed symmetric ``K``:

========================  =================  =====================
problem                   K                  r
========================  =================  =====================
sparse PCA                ``M = s * A A.T``  ``mu * ||X||_1``
compressed modes          ``-2 H_op``        ``(1/mu) * ||X||_1``
feature selection         ``-2 M_fs``        ``gamma * ||X||_2,1``
========================  =================  =====================
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError
from .linalg import as_matrix, check_symmetric, sym_eig_top, sym_part
from .prox import L1, RowL21


def generic_h_builder(G, X, D, beta):
    """NEPv matrix for a general smooth part.

    Returns ``G X.T + X G.T + D X.T + X D.T - beta I``, exactly symmetric,
    where ``G`` is the Euclidean gradient of ``phi`` at `X` and
    ``D = beta Y - Lambda``.
    """
    G = as_matrix(G, "G")
    X = as_matrix(X, "X")
    D = as_matrix(D, "D")
    if not (G.shape == X.shape == D.shape):
        raise DimensionError(f"shape mismatch G{G.shape}, X{X.shape}, D{D.shape}")
    W = G + D
    H = W @ X.T
    H = H + H.T
    H[np.diag_indices_from(H)] -= beta
    return sym_part(H)


def quadratic_h_builder(K, X, D, beta):
    """NEPv matrix ``K - beta I + D X.T + X D.T`` for ``phi = 0.5 tr(X.T K X)``.

    On the orthogonal complement of ``span(X)`` its action on `X` agrees
    with :func:`generic_h_builder`; the two differ by ``X (X.T K X)``,
    which only changes the eigenvalue matrix of the NEPv.
    """
    DX = D @ X.T
    H = K + DX + DX.T
    H[np.diag_indices_from(H)] -= beta
    return sym_part(H)


@dataclass(frozen=True, eq=False)
class Problem:
    """A composite problem ``min_{X in St(n,p)} -phi(X) + r(X)``.

    Parameters
    ----------
    name : str
    n, p : int
    phi : callable
        Smooth part to be maximized.
    phi_grad : callable
        Euclidean gradient of `phi`.
    regularizer : L1 or RowL21
    quad : array, optional
        ``K`` when ``phi(X) = 0.5 tr(X.T K X)``. Enables the specialized
        ``H(X)`` and the eigenbasis warm start.
    h_builder : callable, optional
        ``(X, D, beta) -> H``. Defaults to the specialized builder when
        `quad` is given and to :func:`generic_h_builder` otherwise.
    """

    name: str
    n: int
    p: int
    phi: Callable
    phi_grad: Callable
    regularizer: object
    quad: Optional[np.ndarray] = None
    h_builder: Optional[Callable] = None
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.p <= self.n:
            raise DimensionError(f"need 1 <= p <= n, got n={self.n}, p={self.p}")
        if self.h_builder is None:
            if self.quad is not None:
                K = self.quad
                builder = lambda X, D, beta: quadratic_h_builder(K, X, D, beta)
            else:
                builder = lambda X, D, beta: generic_h_builder(self.phi_grad(X), X, D, beta)
            object.__setattr__(self, "h_builder", builder)

    def f(self, X):
        return -self.phi(X)

    def objective(self, X):
        """``F(X) = f(X) + r(X)``; `X` need not be feasible."""
        X = np.asarray(X, dtype=float)
        if X.shape != (self.n, self.p):
            raise DimensionError(f"expected shape {(self.n, self.p)}, got {X.shape}")
        return -self.phi(X) + self.regularizer(X)

    def initial_point(self):
        """Leading ``p``-dimensional eigenbasis of ``K`` (the unregularized optimum)."""
        if self.quad is None:
            raise ValueError(f"problem {self.name!r} has no quadratic matrix for a warm start")
        return sym_eig_top(self.quad, self.p).eigenvectors


def quadratic_problem(name, K, p, regularizer, data=None):
    """Build a problem with ``phi(X) = 0.5 tr(X.T K X)``."""
    K = check_symmetric(K)
    n = K.shape[0]
    return Problem(
        name=name,
        n=n,
        p=p,
        phi=lambda X: 0.5 * float(np.sum(X * (K @ X))),
        phi_grad=lambda X: K @ X,
        regularizer=regularizer,
        quad=K,
        data=data or {},
    )


def sparse_pca_from_data(A, p, mu, gram_scale=None):
    """Sparse PCA on a features-by-samples data matrix `A` (n x m).

    ``M = gram_scale * A A.T``; `gram_scale` defaults to ``1 / (2 m)``.
    """
    A = as_matrix(A, "A")
    m = A.shape[1]
    scale = 1.0 / (2.0 * m) if gram_scale is None else float(gram_scale)
    M = scale * (A @ A.T)
    return quadratic_problem("sparse_pca", M, p, L1(mu), data={"A": A, "M": M, "mu": mu})


def make_sparse_pca(n, p, mu, seed, m_samples=None, gram_scale=None):
    """Random sparse PCA instance with ``A ~ randn(n, m_samples)``.

    `m_samples` defaults to `n`.
    """
    m = n if m_samples is None else m_samples
    if n < 1 or m < 1:
        raise DimensionError("n and m_samples must be positive")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    return sparse_pca_from_data(A, p, mu, gram_scale=gram_scale)


def periodic_hamiltonian(n, domain_length=50.0):
    """Free-particle Hamiltonian ``-0.5 * Laplacian`` on a periodic 1-D grid."""
    if n < 3:
        raise DimensionError(f"periodic stencil needs n >= 3, got {n}")
    h = domain_length / n
    L = -2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    L[0, -1] = L[-1, 0] = 1.0
    return -0.5 * L / h**2


def compressed_modes_from_hamiltonian(H_op, p, mu):
    """``min tr(X.T H X) + (1/mu) ||X||_1``."""
    H_op = check_symmetric(H_op)
    return quadratic_problem(
        "compressed_modes", -2.0 * H_op, p, L1(1.0 / mu), data={"H_op": H_op, "mu": mu}
    )


def make_compressed_modes(n, p, mu, domain_length=50.0, seed=None):
    """Compressed modes of the periodic free-particle Hamiltonian.

    The instance is deterministic; `seed` is accepted for a uniform
    constructor signature and ignored.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    H_op = periodic_hamiltonian(n, domain_length)
    return compressed_modes_from_hamiltonian(H_op, p, mu)


def feature_select_from_matrix(M_fs, p, gamma):
    """``min tr(W.T M W) + gamma ||W||_2,1``."""
    M_fs = check_symmetric(M_fs)
    return quadratic_problem(
        "feature_select", -2.0 * M_fs, p, RowL21(gamma), data={"M_fs": M_fs, "gamma": gamma}
    )


def make_feature_select(n, p, gamma, seed):
    """Feature selection with a random PSD matrix ``B.T B / n``."""
    if p > n:
        raise DimensionError(f"p={p} exceeds n={n}")
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    return feature_select_from_matrix(B.T @ B / n, p, gamma)


def load_matrix_csv(path):
    """Read a headerless comma-separated matrix file."""
    A = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_matrix(A, str(path))


def save_matrix_csv(path, A):
    np.savetxt(path, np.asarray(A, dtype=float), delimiter=",", fmt="%.17g")


PROBLEM_FACTORIES = {
    "sparse_pca": make_sparse_pca,
    "compressed_modes": make_compressed_modes,
    "feature_select": make_feature_select,
}
