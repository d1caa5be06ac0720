"""Solvers for nonsmooth composite problems on the Stiefel manifold.

Three drivers share one interface, ``solve_*(problem, config) -> RunRecord``:

* :func:`solve_nepv_admm` -- ADMM on the splitting ``X = Y`` whose
  X-subproblem is handled by a single self-consistent-field step of the
  NEPv ``H(X) X = X Omega`` followed by an SVD rotation.
* :func:`solve_madmm` -- the same outer loop with a few Armijo
  Riemannian gradient ascent steps as the X-update.
* :func:`solve_riemannian_subgrad` -- retraction-based subgradient descent
  with diminishing steps.
"""
import enum
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from . import manifold
from .errors import ConfigError, NumericalBreakdown
from .linalg import sym_eig_top
from .manifold import Retraction, feasibility_residual, retract, riemannian_grad
from .prox import sparsity

DENOM_FLOOR = 1e-16


class SolverKind(str, enum.Enum):
    NEPV_ADMM = "nepv_admm"
    RSG = "rsg"
    MADMM = "madmm"


@dataclass
class SolverConfig:
    """Hyperparameters shared by all three solvers.

    Attributes
    ----------
    beta : float
        ADMM penalty.
    max_outer_iters : int
    rel_obj_tol : float
        Stop when ``|F_{k+1} - F_k| / |F_k| < rel_obj_tol``.
    solver_kind : SolverKind
    rsg_step0 : float
        Initial subgradient step; step k is ``rsg_step0 / sqrt(k + 1)``.
    madmm_inner_iters : int
        Riemannian gradient steps per MADMM X-update.
    madmm_inner_step : float, optional
        Initial trial step for the Armijo backtracking; ``None`` means
        ``1 / beta``, the reciprocal curvature of the penalty term.
    armijo_shrink, armijo_slope, armijo_max_trials
        Backtracking parameters.
    retraction : Retraction
    init : {"eig", "random"}
        Starting point: leading eigenbasis of the problem's quadratic
        matrix, or a Haar-random point drawn with `seed`.
    seed : int
    check_invariants : bool
        Track feasibility and dual-feasibility violations at every iterate.
    """

    beta: float = 20.0
    max_outer_iters: int = 5000
    rel_obj_tol: float = 1e-8
    solver_kind: SolverKind = SolverKind.NEPV_ADMM
    rsg_step0: float = 0.1
    madmm_inner_iters: int = 5
    madmm_inner_step: Optional[float] = None
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-4
    armijo_max_trials: int = 20
    retraction: Retraction = Retraction.QR
    init: str = "eig"
    seed: int = 0
    check_invariants: bool = True

    def __post_init__(self):
        self.solver_kind = SolverKind(self.solver_kind)
        self.retraction = Retraction(self.retraction)
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if int(self.max_outer_iters) != self.max_outer_iters or self.max_outer_iters < 0:
            raise ConfigError("max_outer_iters must be a nonnegative integer")
        if not 0 < self.rel_obj_tol < 1:
            raise ConfigError("rel_obj_tol must lie in (0, 1)")
        if not self.rsg_step0 >= 0:
            raise ConfigError("rsg_step0 must be nonnegative")
        if self.madmm_inner_iters < 0:
            raise ConfigError("madmm_inner_iters must be nonnegative")
        if self.madmm_inner_step is None:
            self.madmm_inner_step = 1.0 / self.beta
        if not self.madmm_inner_step > 0:
            raise ConfigError("madmm_inner_step must be positive")
        if not 0 < self.armijo_shrink < 1 or not 0 < self.armijo_slope < 1:
            raise ConfigError("Armijo shrink and slope must lie in (0, 1)")
        if self.init not in ("eig", "random"):
            raise ConfigError(f"unknown init {self.init!r}")


@dataclass
class SolverState:
    X: np.ndarray
    Y: np.ndarray
    Lam: np.ndarray
    k: int = 0
    objective_history: list = field(default_factory=list)
    primal_residual_history: list = field(default_factory=list)


class TraceRow(NamedTuple):
    iter: int
    objective: float
    primal_residual: float
    elapsed_s: float
    inner_iters_cum: int


@dataclass
class RunRecord:
    solver: str
    final_objective: float
    sparsity: float
    outer_iters: int
    wall_time_s: float
    converged: bool
    trace: list
    X: np.ndarray
    Y: Optional[np.ndarray]
    eig_count: int = 0
    inner_iters_total: int = 0
    max_feasibility: float = 0.0
    dual_violations: int = 0

    @property
    def objective_history(self):
        return np.array([row.objective for row in self.trace])

    @property
    def primal_residual(self):
        return self.trace[-1].primal_residual


def augmented_objective(problem, X, Y, Lam, beta):
    """X-subproblem objective ``g_k(X) = phi(X) - <Lam, X - Y> - beta/2 ||X - Y||^2``."""
    R = X - Y
    return problem.phi(X) - float(np.sum(Lam * R)) - 0.5 * beta * float(np.sum(R * R))


def augmented_grad(problem, X, Y, Lam, beta):
    """Euclidean gradient of :func:`augmented_objective`."""
    return problem.phi_grad(X) - Lam - beta * (X - Y)


def scf_step(problem, X, Y, Lam, beta):
    """One self-consistent-field step for the X-subproblem.

    Builds ``H = H(X)`` with ``D = beta Y - Lam``, takes the eigenbasis of
    its ``p`` largest eigenvalues, and rotates it by ``Q = U V.T`` where
    ``Xhat.T D = U S V.T``.
    """
    D = beta * Y - Lam
    H = problem.h_builder(X, D, beta)
    Xhat = sym_eig_top(H, problem.p).eigenvectors
    _, X_new = manifold.align_q(Xhat, D)
    return X_new


def _initial_point(problem, config):
    if config.init == "random":
        return manifold.random_stiefel(problem.n, problem.p, np.random.default_rng(config.seed))
    return problem.initial_point()


def _rel_change(F_new, F_old):
    return abs(F_new - F_old) / max(abs(F_old), DENOM_FLOOR)


def _check_finite(F, k):
    if not np.isfinite(F):
        raise NumericalBreakdown(f"objective became non-finite at iteration {k}")


def _riemannian_ascent(problem, X, Y, Lam, config):
    """Armijo-backtracked Riemannian gradient ascent on ``g_k``; returns (X, steps)."""
    beta = config.beta
    g = augmented_objective(problem, X, Y, Lam, beta)
    steps = 0
    for _ in range(config.madmm_inner_iters):
        xi = riemannian_grad(X, augmented_grad(problem, X, Y, Lam, beta))
        steps += 1
        slope = float(np.sum(xi * xi))
        if slope == 0.0:
            break
        t = config.madmm_inner_step
        for _ in range(config.armijo_max_trials):
            X_try = retract(X, t * xi, config.retraction)
            g_try = augmented_objective(problem, X_try, Y, Lam, beta)
            if g_try >= g + config.armijo_slope * t * slope:
                X, g = X_try, g_try
                break
            t *= config.armijo_shrink
    return X, steps


def _admm(problem, config, x_update, callback):
    beta = config.beta
    r = problem.regularizer
    X = _initial_point(problem, config)
    Y = X.copy()
    Lam = np.zeros_like(X)

    F = problem.objective(Y)
    trace = [TraceRow(0, F, 0.0, 0.0, 0)]
    state = SolverState(X, Y, Lam, 0, [F], [0.0])
    max_feas = feasibility_residual(X) if config.check_invariants else 0.0
    dual_violations = 0
    work = 0
    converged = False

    t0 = time.perf_counter()
    for k in range(1, config.max_outer_iters + 1):
        X, n_work = x_update(X, Y, Lam)
        work += n_work
        Y = r.prox(X + Lam / beta, 1.0 / beta)
        Lam = Lam + beta * (X - Y)

        F_new = problem.objective(Y)
        _check_finite(F_new, k)
        res = float(np.linalg.norm(X - Y))
        trace.append(TraceRow(k, F_new, res, time.perf_counter() - t0, work))
        if config.check_invariants:
            max_feas = max(max_feas, feasibility_residual(X))
            if not r.subdiff_check(Y, Lam):
                dual_violations += 1
        state.X, state.Y, state.Lam, state.k = X, Y, Lam, k
        state.objective_history.append(F_new)
        state.primal_residual_history.append(res)
        if callback is not None:
            callback(state)
        done = _rel_change(F_new, F) < config.rel_obj_tol
        F = F_new
        if done:
            converged = True
            break
    wall = time.perf_counter() - t0

    return RunRecord(
        solver=config.solver_kind.value,
        final_objective=F,
        sparsity=sparsity(Y),
        outer_iters=trace[-1].iter,
        wall_time_s=wall,
        converged=converged,
        trace=trace,
        X=X,
        Y=Y,
        max_feasibility=max_feas,
        dual_violations=dual_violations,
    ), work


def solve_nepv_admm(problem, config=None, callback=None):
    """ADMM whose X-update is a single SCF eigen-step.

    Parameters
    ----------
    problem : Problem
    config : SolverConfig, optional
    callback : callable, optional
        Called as ``callback(state)`` after every outer iteration.

    Returns
    -------
    RunRecord
        ``eig_count`` is the number of eigendecompositions performed.
    """
    config = config or SolverConfig(solver_kind=SolverKind.NEPV_ADMM)

    def x_update(X, Y, Lam):
        return scf_step(problem, X, Y, Lam, config.beta), 1

    rec, work = _admm(problem, _with_kind(config, SolverKind.NEPV_ADMM), x_update, callback)
    rec.eig_count = work
    return rec


def solve_madmm(problem, config=None, callback=None):
    """Manifold ADMM with an inner Riemannian gradient X-update.

    ``inner_iters_total`` counts the Riemannian gradient steps taken.
    """
    config = config or SolverConfig(solver_kind=SolverKind.MADMM)

    def x_update(X, Y, Lam):
        return _riemannian_ascent(problem, X, Y, Lam, config)

    rec, work = _admm(problem, _with_kind(config, SolverKind.MADMM), x_update, callback)
    rec.inner_iters_total = work
    return rec


def solve_riemannian_subgrad(problem, config=None, callback=None):
    """Riemannian subgradient descent ``X <- Retr_X(-alpha_k nu_k)``.

    ``nu_k`` is the tangent projection of ``-phi_grad(X) + s`` with ``s``
    a subgradient of the regularizer (zero at kinks), and
    ``alpha_k = rsg_step0 / sqrt(k + 1)``.
    """
    config = _with_kind(config or SolverConfig(), SolverKind.RSG)
    r = problem.regularizer
    X = _initial_point(problem, config)
    F = problem.objective(X)
    trace = [TraceRow(0, F, 0.0, 0.0, 0)]
    state = SolverState(X, X, np.zeros_like(X), 0, [F], [0.0])
    max_feas = feasibility_residual(X) if config.check_invariants else 0.0
    converged = False

    t0 = time.perf_counter()
    for k in range(1, config.max_outer_iters + 1):
        alpha = config.rsg_step0 / np.sqrt(k)
        if alpha > 0:
            nu = riemannian_grad(X, -problem.phi_grad(X) + r.subgradient(X))
            X = retract(X, -alpha * nu, config.retraction)
        F_new = problem.objective(X)
        _check_finite(F_new, k)
        trace.append(TraceRow(k, F_new, 0.0, time.perf_counter() - t0, 0))
        if config.check_invariants:
            max_feas = max(max_feas, feasibility_residual(X))
        state.X = state.Y = X
        state.k = k
        state.objective_history.append(F_new)
        state.primal_residual_history.append(0.0)
        if callback is not None:
            callback(state)
        done = _rel_change(F_new, F) < config.rel_obj_tol
        F = F_new
        if done:
            converged = True
            break
    wall = time.perf_counter() - t0

    return RunRecord(
        solver=SolverKind.RSG.value,
        final_objective=F,
        sparsity=sparsity(X),
        outer_iters=trace[-1].iter,
        wall_time_s=wall,
        converged=converged,
        trace=trace,
        X=X,
        Y=None,
        max_feasibility=max_feas,
    )


def _with_kind(config, kind):
    if config.solver_kind is kind:
        return config
    return replace(config, solver_kind=kind)


SOLVERS = {
    SolverKind.NEPV_ADMM: solve_nepv_admm,
    SolverKind.RSG: solve_riemannian_subgrad,
    SolverKind.MADMM: solve_madmm,
}


def solve(problem, config, callback=None):
    """Dispatch on ``config.solver_kind``."""
    return SOLVERS[SolverKind(config.solver_kind)](problem, config, callback)
