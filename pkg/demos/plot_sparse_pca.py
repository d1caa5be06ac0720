"""
Sparse principal components
===========================

Find p orthonormal loading vectors that explain most of the variance of a
random data matrix while keeping most loadings exactly zero.
"""

import numpy as np

from stiefel_nepv import SolverConfig, make_sparse_pca, solve

# 300 variables, 5 components, l1 weight 0.5
prob = make_sparse_pca(300, 5, 0.5, seed=0)

###############################################################################
# The NEPv splitting solver replaces the Stiefel subproblem by one
# eigendecomposition per outer iteration.

rec = solve(prob, SolverConfig(solver_kind="nepv_admm"))
print(f"objective {rec.final_objective:.4f}  sparsity {rec.sparsity:.4f}  "
      f"iterations {rec.outer_iters}  eigendecompositions {rec.eig_count}")

###############################################################################
# Compare with the two baselines. The subgradient method never produces
# exact zeros, so its sparsity is 0.

for kind in ("madmm", "rsg"):
    r = solve(prob, SolverConfig(solver_kind=kind))
    print(f"{kind:10s} objective {r.final_objective:.4f}  sparsity {r.sparsity:.4f}")

###############################################################################
# Each retained column of Y touches only a handful of variables.

print("nonzeros per component:", np.count_nonzero(rec.Y, axis=0))
