"""
Running a benchmark grid
========================

The same grid machinery behind ``stiefel-nepv run`` is available from
Python. Results go to a summary CSV plus one convergence trace per run.
"""

import tempfile
from pathlib import Path

from stiefel_nepv import bench

cfg = bench.ExperimentConfig(
    problem="sparse_pca",
    grid=[(100, 3), (100, 10)],
    mu=[0.5],
    solvers=["nepv_admm", "madmm", "rsg"],
    seeds=[0, 1],
    max_iters=2000,
)
rows, traces = bench.run_experiment(cfg)

out = Path(tempfile.mkdtemp())
bench.write_outputs(cfg, rows, traces, out)
print((out / "summary.csv").read_text())

###############################################################################
# Per-cell means over seeds.

for agg in bench.aggregate(rows):
    print(agg)
