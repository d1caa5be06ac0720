"""
Unsupervised feature selection
==============================

A row-wise l2,1 penalty zeroes out entire rows of the loading matrix, so
the surviving rows are the selected features.
"""

import numpy as np

from stiefel_nepv import SolverConfig, make_feature_select, solve

for gamma in (0.1, 1.0, 10.0):
    prob = make_feature_select(20, 3, gamma, seed=0)
    rec = solve(prob, SolverConfig(max_outer_iters=1000))
    kept = np.flatnonzero(np.any(rec.Y != 0, axis=1))
    print(f"gamma={gamma:5.1f}: {kept.size:2d} features kept {kept.tolist()}")
