"""NEPv-based ADMM and baselines for nonsmooth optimization on the Stiefel manifold."""
from .errors import (
    ConfigError,
    DimensionError,
    FeasibilityError,
    NonFiniteError,
    NonSymmetricError,
    NumericalBreakdown,
    RankDeficientError,
)
from .manifold import Retraction
from .problems import (
    Problem,
    make_compressed_modes,
    make_feature_select,
    make_sparse_pca,
)
from .prox import L1, RowL21
from .solvers import (
    RunRecord,
    SolverConfig,
    SolverKind,
    solve,
    solve_madmm,
    solve_nepv_admm,
    solve_riemannian_subgrad,
)

__version__ = "0.1.0"
