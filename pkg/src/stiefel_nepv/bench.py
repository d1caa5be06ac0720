"""Seeded benchmark grids: run solvers over (penalty, n, p, seed) cells.

An experiment is described by a flat JSON document::

    {
      "problem": "sparse_pca",
      "grid": [[300, 5], [300, 50]],
      "mu": [0.5, 1.0],
      "solvers": ["nepv_admm", "rsg", "madmm"],
      "seeds": [0, 1, 2, 3, 4],
      "beta": 20, "max_iters": 5000, "tol": 1e-8,
      "out_dir": "results"
    }

``mu`` holds the penalty list (it is ``gamma`` for feature selection).
Optional keys: ``solver_options`` (extra :class:`SolverConfig` fields),
``problem_options`` (extra factory keyword arguments), ``data_csv`` (load
the problem matrix from a file instead of generating it), ``jobs``.
"""
import csv
import io
import json
import logging
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import problems
from .errors import ConfigError
from .solvers import SolverConfig, SolverKind, solve

logger = logging.getLogger(__name__)

SUMMARY_HEADER = ["mu", "n", "p", "solver", "seed", "objective", "sparsity", "iters",
                  "wall_time_s", "converged"]
TRACE_HEADER = ["iter", "objective", "primal_residual", "elapsed_s"]
JOBS_ENV = "STIEFEL_NEPV_JOBS"


@dataclass
class ExperimentConfig:
    problem: str
    grid: list
    mu: list
    solvers: list
    seeds: list
    beta: float = 20.0
    max_iters: int = 5000
    tol: float = 1e-8
    out_dir: Optional[str] = None
    data_csv: Optional[str] = None
    solver_options: dict = field(default_factory=dict)
    problem_options: dict = field(default_factory=dict)
    no_timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.problem not in problems.PROBLEM_FACTORIES:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if not self.grid:
            raise ConfigError("grid must contain at least one (n, p) pair")
        if not self.mu:
            raise ConfigError("penalty list must not be empty")
        if not self.solvers:
            raise ConfigError("solver list must not be empty")
        if not self.seeds:
            raise ConfigError("seed list must not be empty")
        try:
            self.grid = [(int(n), int(p)) for n, p in self.grid]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid entries must be (n, p) pairs: {exc}") from None
        for n, p in self.grid:
            if not n >= p >= 1:
                raise ConfigError(f"grid pair (n={n}, p={p}) violates n >= p >= 1")
        try:
            self.solvers = [SolverKind(s).value for s in self.solvers]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.mu = [float(m) for m in self.mu]
        self.seeds = [int(s) for s in self.seeds]
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        valid = {f.name for f in fields(SolverConfig)}
        bad = set(self.solver_options) - valid
        if bad:
            raise ConfigError(f"unknown solver options {sorted(bad)}")
        try:
            self.solver_config("nepv_admm", 0)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        missing = {"problem", "grid", "mu", "solvers", "seeds"} - set(d)
        if missing:
            raise ConfigError(f"missing config keys {sorted(missing)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def solver_config(self, solver, seed):
        opts = dict(self.solver_options)
        opts.update(beta=self.beta, max_outer_iters=self.max_iters, rel_obj_tol=self.tol,
                    solver_kind=solver, seed=seed)
        return SolverConfig(**opts)

    def cells(self):
        """``(cell_index, mu, n, p)`` in output order."""
        out = []
        for mu in self.mu:
            for n, p in self.grid:
                out.append((len(out), mu, n, p))
        return out


@dataclass
class SummaryRow:
    mu: float
    n: int
    p: int
    solver: str
    seed: int
    objective: float
    sparsity: float
    iters: int
    wall_time_s: float
    converged: bool
    error: str = ""


def build_problem(config, mu, n, p, seed, cell_index):
    """Problem for one cell; the data RNG stream is keyed by (seed, cell_index)."""
    opts = dict(config.problem_options)
    data_seed = [seed, cell_index]
    if config.data_csv is not None:
        mat = problems.load_matrix_csv(config.data_csv)
        if mat.shape[0] != n:
            raise ConfigError(f"data file has {mat.shape[0]} rows but grid asks n={n}")
        if config.problem == "sparse_pca":
            return problems.sparse_pca_from_data(mat, p, mu, **opts)
        if config.problem == "compressed_modes":
            return problems.compressed_modes_from_hamiltonian(mat, p, mu)
        return problems.feature_select_from_matrix(mat, p, mu)
    if config.problem == "sparse_pca":
        return problems.make_sparse_pca(n, p, mu, data_seed, **opts)
    if config.problem == "compressed_modes":
        return problems.make_compressed_modes(n, p, mu, seed=data_seed, **opts)
    return problems.make_feature_select(n, p, mu, data_seed)


def _run_unit(config, cell_index, mu, n, p, seed):
    """All solvers on one (cell, seed); errors become failed rows."""
    results = []
    try:
        prob = build_problem(config, mu, n, p, seed, cell_index)
    except ConfigError:
        raise
    except Exception as exc:  # noqa: BLE001 -- recorded per row
        note = f"problem generation failed: {exc!r}"
        for solver in config.solvers:
            results.append((_failed_row(mu, n, p, solver, seed, note), None))
        return results
    for solver in config.solvers:
        try:
            rec = solve(prob, config.solver_config(solver, seed))
        except Exception as exc:  # noqa: BLE001
            logger.debug(traceback.format_exc())
            results.append((_failed_row(mu, n, p, solver, seed, repr(exc)), None))
            continue
        wall = 0.0 if config.no_timing else rec.wall_time_s
        row = SummaryRow(mu, n, p, solver, seed, rec.final_objective, rec.sparsity,
                         rec.outer_iters, wall, rec.converged)
        trace = [list(t) for t in rec.trace]
        if config.no_timing:
            for t in trace:
                t[3] = 0.0
        results.append((row, trace))
    return results


def _failed_row(mu, n, p, solver, seed, note):
    return SummaryRow(mu, n, p, solver, seed, math.nan, math.nan, 0, 0.0, False, note)


def run_experiment(config):
    """Run every (penalty, n, p) cell for every seed and solver.

    Returns
    -------
    rows : list of SummaryRow
        One per cell, solver and seed, ordered by penalty, grid pair,
        solver, seed. Failed runs are kept with ``converged=False`` and
        an ``error`` note.
    traces : dict
        ``(mu, n, p, solver, seed) -> list of trace rows``.
    """
    units = [(c, mu, n, p, s) for (c, mu, n, p) in config.cells() for s in config.seeds]
    if config.jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_unit, config, *u) for u in units]
            outputs = [f.result() for f in futures]
    else:
        outputs = [_run_unit(config, *u) for u in units]

    order = {s: i for i, s in enumerate(config.solvers)}
    flat = [item for out in outputs for item in out]
    flat.sort(key=lambda it: (config.mu.index(it[0].mu),
                              config.grid.index((it[0].n, it[0].p)),
                              order[it[0].solver],
                              config.seeds.index(it[0].seed)))
    rows = [r for r, _ in flat]
    traces = {(r.mu, r.n, r.p, r.solver, r.seed): t for r, t in flat if t is not None}
    return rows, traces


def aggregate(rows):
    """Per (mu, n, p, solver) means over seeds, skipping failed runs."""
    groups = {}
    for r in rows:
        groups.setdefault((r.mu, r.n, r.p, r.solver), []).append(r)
    out = []
    for (mu, n, p, solver), rs in groups.items():
        ok = [r for r in rs if not r.error]
        mean = lambda attr: float(np.mean([getattr(r, attr) for r in ok])) if ok else math.nan
        out.append({
            "mu": mu, "n": n, "p": p, "solver": solver, "runs": len(rs), "failed": len(rs) - len(ok),
            "objective_mean": mean("objective"), "sparsity_mean": mean("sparsity"),
            "iters_mean": mean("iters"), "wall_time_s_mean": mean("wall_time_s"),
            "converged_frac": float(np.mean([r.converged for r in rs])),
        })
    return out


def _fmt(x, digits=6):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{digits}g}"
    return str(x)


def _write_csv(path, header, rows, digits=6):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v, digits) for v in row])
    return path


def emit_summary(rows, path):
    """Write the Table-1 style summary CSV (6 significant digits)."""
    if not rows:
        raise ValueError("no summary rows to write")
    return _write_csv(path, SUMMARY_HEADER,
                      [[getattr(r, k) for k in SUMMARY_HEADER] for r in rows])


def parse_summary(path_or_text):
    """Inverse of :func:`emit_summary`; accepts a path or CSV text."""
    if isinstance(path_or_text, Path) or (
        isinstance(path_or_text, str) and "\n" not in path_or_text
    ):
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(SummaryRow(
            mu=float(rec["mu"]), n=int(rec["n"]), p=int(rec["p"]), solver=rec["solver"],
            seed=int(rec["seed"]), objective=float(rec["objective"]),
            sparsity=float(rec["sparsity"]), iters=int(rec["iters"]),
            wall_time_s=float(rec["wall_time_s"]), converged=rec["converged"] == "true",
        ))
    return rows


def emit_trace(trace, path, with_inner=False):
    """Write one run's convergence trace.

    `trace` rows are ``(iter, objective, primal_residual, elapsed_s,
    inner_iters_cum)``; the last column is written only when `with_inner`.
    Floats keep full precision.
    """
    if not trace:
        raise ValueError("empty trace")
    header = TRACE_HEADER + (["inner_iters_cum"] if with_inner else [])
    width = len(header)
    return _write_csv(path, header, [list(t)[:width] for t in trace], digits=17)


def parse_trace(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {h: [float(r[i]) for r in body] for i, h in enumerate(header)}
    cols["iter"] = [int(v) for v in cols["iter"]]
    return cols


def trace_filename(problem, key):
    mu, n, p, solver, seed = key
    return f"{problem}_mu{_fmt(mu)}_n{n}_p{p}_{solver}_seed{seed}.csv"


def write_outputs(config, rows, traces, out_dir):
    """Summary, per-cell means, error notes and traces under `out_dir`."""
    out_dir = Path(out_dir)
    emit_summary(rows, out_dir / "summary.csv")
    agg = aggregate(rows)
    keys = list(agg[0])
    _write_csv(out_dir / "summary_mean.csv", keys, [[a[k] for k in keys] for a in agg])
    failed = [r for r in rows if r.error]
    if failed:
        _write_csv(out_dir / "errors.csv", ["mu", "n", "p", "solver", "seed", "error"],
                   [[r.mu, r.n, r.p, r.solver, r.seed, r.error] for r in failed])
    for key, trace in traces.items():
        emit_trace(trace, out_dir / "traces" / trace_filename(config.problem, key),
                   with_inner=key[3] == SolverKind.MADMM.value)


def default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1
