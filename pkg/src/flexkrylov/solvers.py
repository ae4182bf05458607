"""Iteration drivers for (flexible) Golub-Kahan and Arnoldi hybrid methods.

Method ids (case-insensitive)::

    lsqr  lsmr  lsqr-i  lsqr-r  lsmr-i  lsmr-r         fixed L = I
    flsqr flsmr flsqr-i flsqr-r flsmr-i flsmr-r        IRN weights rebuilt every step
    gmres fgmres gat (= fgmres-i) gmres-i               square A only

The ``-I`` variants regularize the projected problem with ``lam ||y||^2`` and
the ``-R`` variants with ``lam ||R_k y||^2`` where ``Z_k = Q_k R_k``.  LSQR type
methods project ``min ||A x - b||``, LSMR type methods
``min ||A^T (A x - b)||``.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import regparam
from .decomp import arnoldi_init, fgk_expand, fgk_init, flex_arnoldi_expand
from .linop import (
    ConfigurationError,
    CountingOperator,
    DiagonalOperator,
    IdentityOperator,
    LinearOperator,
    aslinearoperator,
    compose,
    conjugate_by_transform,
)
from .projsolve import ProjectedProblem, qr_append, tikhonov_projected
from .regparam import ParamPolicy
from .weights import WeightPolicy, build_weights


class SolverAbort(RuntimeError):
    """Non-finite values or divergence; the run cannot continue."""


class MethodSpec(NamedTuple):
    process: str  # "fgk" or "arnoldi"
    objective: str  # "lsqr", "lsmr" or "gmres"
    flexible: bool
    reg: str  # "none", "I" or "R"


_BASE = {"lsqr": ("fgk", "lsqr"), "lsmr": ("fgk", "lsmr"), "gmres": ("arnoldi", "gmres")}


def parse_method(method: str) -> MethodSpec:
    name = method.lower().strip()
    if name == "gat":
        name = "fgmres-i"
    base, _, suffix = name.partition("-")
    flexible = base.startswith("f") and base[1:] in _BASE
    if flexible:
        base = base[1:]
    if base not in _BASE or suffix not in ("", "i", "r"):
        raise ConfigurationError(f"unknown method {method!r}")
    process, objective = _BASE[base]
    reg = {"": "none", "i": "I", "r": "R"}[suffix]
    if process == "arnoldi" and reg == "R":
        raise ConfigurationError("Arnoldi methods support only the -I hybrid variant")
    return MethodSpec(process, objective, flexible, reg)


METHODS = (
    "lsqr", "lsmr", "lsqr-i", "lsqr-r", "lsmr-i", "lsmr-r",
    "flsqr", "flsmr", "flsqr-i", "flsqr-r", "flsmr-i", "flsmr-r",
    "gmres", "fgmres", "gmres-i", "gat",
)


@dataclass
class SolverConfig:
    """Settings of one hybrid Krylov run.

    ``transform`` is an orthonormal operator ``Psi``; the solver then works on
    ``s = Psi x`` with ``H = A Psi^T`` and reports ``x = Psi^T s``.
    ``preconditioners`` pins the sequence ``L_1, L_2, ...`` (diagonal
    operators) instead of building IRN weights from the iterates.
    """

    method: str = "flsqr"
    maxiter: int = 50
    weights: WeightPolicy = field(default_factory=WeightPolicy)
    param: ParamPolicy = field(default_factory=ParamPolicy)
    stop: str = "maxiter"
    stagnation_tol: float = 1e-8
    stagnation_window: int = 3
    x_true: np.ndarray | None = None
    transform: LinearOperator | None = None
    preconditioners: Sequence[DiagonalOperator] | None = None
    keep_iterates: bool = False

    def __post_init__(self):
        self.spec = parse_method(self.method)
        if self.maxiter < 1:
            raise ConfigurationError("maxiter must be positive")
        if self.stop not in ("maxiter", "discrepancy"):
            raise ConfigurationError(f"unknown stopping rule {self.stop!r}")
        if self.spec.reg == "none" and not (self.param.kind == "fixed" and self.param.value == 0):
            raise ConfigurationError(f"{self.method} is not a hybrid method; use an -I or -R variant to regularize")
        if self.param.kind == "optimal" and self.x_true is None:
            raise ConfigurationError("the optimal parameter policy needs x_true")


@dataclass
class IterationRecord:
    k: int
    lam: float
    res_norm: float
    ne_res_norm: float
    rel_err: float
    matvecs: int
    wall_ms: float


@dataclass
class SolverRun:
    method: str
    records: list[IterationRecord] = field(default_factory=list)
    x: np.ndarray | None = None
    x_best: np.ndarray | None = None
    best_iter: int = 0
    stop_reason: str = ""
    iterates: list[np.ndarray] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    @property
    def rel_errors(self) -> np.ndarray:
        return self.column("rel_err")

    @property
    def lambdas(self) -> np.ndarray:
        return self.column("lam")

    @property
    def final_lambda(self) -> float:
        return self.records[-1].lam if self.records else float("nan")

    @property
    def best_rel_err(self) -> float:
        e = self.rel_errors
        return float(np.nanmin(e)) if e.size and not np.all(np.isnan(e)) else float("nan")


class _Tracker:
    """Bookkeeping shared by all iteration drivers."""

    def __init__(self, cfg: SolverConfig, run: SolverRun, counter: CountingOperator):
        self.cfg, self.run, self.counter = cfg, run, counter
        self.t0 = time.perf_counter()
        x_true = cfg.x_true
        self.x_true = None if x_true is None else np.asarray(x_true, dtype=np.float64).ravel()
        self.xt_norm = None if self.x_true is None else float(np.linalg.norm(self.x_true))
        self.best = np.inf
        self.prev_x = None
        self.small_steps = 0

    def record(self, k, lam, x, res, ne_res) -> str | None:
        if not (np.all(np.isfinite(x)) and np.isfinite(res)):
            raise SolverAbort(f"{self.run.method}: non-finite values at iteration {k} (lambda={lam:.3e})")
        rel = float("nan")
        if self.x_true is not None:
            rel = float(np.linalg.norm(x - self.x_true) / self.xt_norm)
        rec = IterationRecord(
            k, float(lam), float(res), float(ne_res), rel, self.counter.matvecs,
            1000.0 * (time.perf_counter() - self.t0),
        )
        self.run.records.append(rec)
        self.run.x = x
        if self.cfg.keep_iterates:
            self.run.iterates.append(x.copy())
        if self.x_true is None or rel < self.best:
            self.best = rel
            self.run.x_best = x
            self.run.best_iter = k
        # stagnation
        if self.prev_x is not None:
            step = np.linalg.norm(x - self.prev_x)
            if step <= self.cfg.stagnation_tol * max(np.linalg.norm(x), np.finfo(float).tiny):
                self.small_steps += 1
            else:
                self.small_steps = 0
        self.prev_x = x
        if self.small_steps >= self.cfg.stagnation_window:
            return "stagnation"
        return None


def _preconditioner(cfg: SolverConfig, k: int, s_prev: np.ndarray, n: int) -> LinearOperator:
    """``L_k^{-1}`` for step ``k`` (1-based)."""
    if cfg.preconditioners is not None:
        seq = cfg.preconditioners
        return seq[min(k, len(seq)) - 1].inverse()
    if not cfg.spec.flexible or k == 1:
        return IdentityOperator(n)
    return build_weights(s_prev, cfg.weights)[1]


def _select_lambda(cfg, problem, lam_prev, eps, data_residual, solve_coeffs, s_true):
    """Lambda for the current projected problem according to the policy."""
    pol = cfg.param
    if cfg.spec.reg == "none":
        return 0.0
    if pol.kind == "fixed":
        return pol.value
    if pol.kind == "dp_exact":
        return regparam.select_dp_exact(problem, eps, pol.eta, residual=data_residual, lam_min=pol.lam_min, lam_max=pol.lam_max)
    if pol.kind == "dp_secant":
        res = data_residual if data_residual is not None else regparam.ResidualFunction(problem)
        return regparam.select_dp_secant(lam_prev, res(lam_prev), res(0.0), eps, pol.eta, pol.lam_min, pol.lam_max)
    return regparam.select_optimal(pol.candidate_grid(), solve_coeffs, s_true)


def _setup(a, b, cfg: SolverConfig):
    a = aslinearoperator(a)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != a.nrows:
        raise ConfigurationError(f"b has length {b.size} but the operator has {a.nrows} rows")
    psi = cfg.transform
    op = conjugate_by_transform(a, psi) if psi is not None else a
    counter = CountingOperator(op)
    s_true = None
    if cfg.x_true is not None:
        xt = np.asarray(cfg.x_true, dtype=np.float64).ravel()
        s_true = psi.apply(xt) if psi is not None else xt
    eps = None
    if cfg.param.kind.startswith("dp") or cfg.stop == "discrepancy":
        eps = cfg.param.noise_norm(b)
    return a, b, psi, counter, s_true, eps


def _abort_on_overflow(driver):
    @functools.wraps(driver)
    def wrapped(a, b, cfg: SolverConfig) -> SolverRun:
        try:
            return driver(a, b, cfg)
        except FloatingPointError as exc:
            raise SolverAbort(f"{cfg.method}: {exc}") from exc
    return wrapped


@_abort_on_overflow
def run_flexible(a, b, cfg: SolverConfig) -> SolverRun:
    """Run an FGK based method (LSQR/LSMR family, flexible or not)."""
    spec = cfg.spec
    if spec.process != "fgk":
        raise ConfigurationError(f"{cfg.method} is an Arnoldi method; use run_gat")
    a, b, psi, counter, s_true, eps = _setup(a, b, cfg)
    run = SolverRun(cfg.method)
    track = _Tracker(cfg, run, counter)
    n = counter.ncols
    state = fgk_init(counter, b, capacity=min(cfg.maxiter, 64))
    lam = cfg.param.initial_lambda(state.beta1, eps) if cfg.param.kind == "dp_secant" else 0.0
    q = r = None
    s = np.zeros(n)
    reason = "maxiter"
    if state.breakdown:
        run.x = run.x_best = psi.apply_adjoint(s) if psi is not None else s
        run.stop_reason = "breakdown"
        return run
    for k in range(1, cfg.maxiter + 1):
        l_inv = _preconditioner(cfg, k, s, n)
        state, broke = fgk_expand(state, counter, l_inv)
        if spec.reg == "R":
            q, r, deficient = qr_append(q, r, state.Z[:, -1])
            broke = broke or deficient
        M, T = state.M, state.T
        reg = r if spec.reg == "R" else None
        data_problem = ProjectedProblem(M, state.beta1, reg)
        if spec.objective == "lsqr":
            problem = data_problem
            data_residual = None
        else:
            problem = ProjectedProblem(T @ M, state.beta1 * state.t11, reg)

            def data_residual(lam, problem=problem, data_problem=data_problem):
                return data_problem.residual(tikhonov_projected(problem, lam).y)

        Z = state.Z

        def solve_coeffs(lam, problem=problem, Z=Z):
            return Z @ tikhonov_projected(problem, lam).y

        lam = _select_lambda(cfg, problem, lam, eps, data_residual, solve_coeffs, s_true)
        y = tikhonov_projected(problem, lam).y
        s = Z @ y
        x = psi.apply_adjoint(s) if psi is not None else s
        res = data_problem.residual(y)
        ne_res = ProjectedProblem(T @ M, state.beta1 * state.t11).residual(y)
        stop = track.record(k, lam, x, res, ne_res)
        if stop:
            reason = stop
            break
        if cfg.stop == "discrepancy" and res <= cfg.param.eta * eps:
            reason = "discrepancy"
            break
        if broke:
            reason = "breakdown"
            break
    run.stop_reason = reason
    run.info.update(state=state, qr=(q, r), eps=eps)
    return run


@_abort_on_overflow
def run_gat(a, b, cfg: SolverConfig) -> SolverRun:
    """Run a flexible Arnoldi method: GMRES, FGMRES, or GAT (``-I`` hybrid)."""
    spec = cfg.spec
    if spec.process != "arnoldi":
        raise ConfigurationError(f"{cfg.method} is a Golub-Kahan method; use run_flexible")
    a, b, psi, counter, s_true, eps = _setup(a, b, cfg)
    if psi is not None:
        # square transformed operator H = Psi A Psi^T so that data stay in the coefficient domain
        counter = CountingOperator(conjugate_by_transform(a, psi, psi))
        b = psi.apply(b)
    if counter.nrows != counter.ncols:
        raise ConfigurationError(f"{cfg.method} needs a square operator, got {counter.shape}")
    run = SolverRun(cfg.method)
    track = _Tracker(cfg, run, counter)
    n = counter.ncols
    state = arnoldi_init(counter, b, capacity=min(cfg.maxiter, 64))
    lam = cfg.param.initial_lambda(state.r0norm, eps) if cfg.param.kind == "dp_secant" else 0.0
    s = np.zeros(n)
    reason = "maxiter"
    for k in range(1, cfg.maxiter + 1):
        l_inv = _preconditioner(cfg, k, s, n)
        state, broke = flex_arnoldi_expand(state, counter, l_inv)
        problem = ProjectedProblem(state.Hhat, state.r0norm)
        Z = state.Zhat

        def solve_coeffs(lam, problem=problem, Z=Z):
            return Z @ tikhonov_projected(problem, lam).y

        lam = _select_lambda(cfg, problem, lam, eps, None, solve_coeffs, s_true)
        sol = tikhonov_projected(problem, lam)
        s = Z @ sol.y
        x = psi.apply_adjoint(s) if psi is not None else s
        stop = track.record(k, lam, x, sol.residual, float("nan"))
        if stop:
            reason = stop
            break
        if cfg.stop == "discrepancy" and sol.residual <= cfg.param.eta * eps:
            reason = "discrepancy"
            break
        if broke:
            reason = "breakdown"
            break
    run.stop_reason = reason
    run.info.update(state=state, eps=eps)
    return run


def solve(a, b, cfg: SolverConfig) -> SolverRun:
    """Dispatch to :func:`run_flexible` or :func:`run_gat` by method id."""
    if cfg.spec.process == "arnoldi":
        return run_gat(a, b, cfg)
    return run_flexible(a, b, cfg)


def verify_flsmr_fgmres_equivalence(a, b, precond_seq: Sequence[DiagonalOperator], k: int) -> float:
    """Max relative gap between FLSMR iterates and FGMRES iterates on ``A^T A x = A^T b``.

    Both runs use the same fixed preconditioner sequence.  If either method
    breaks down early, the comparison covers the common iterations.
    """
    a = aslinearoperator(a)
    common = dict(maxiter=k, preconditioners=list(precond_seq), keep_iterates=True, stagnation_window=k + 1)
    lsmr = run_flexible(a, b, SolverConfig(method="flsmr", **common))
    normal = compose([a.T, a])
    gm = run_gat(normal, a.apply_adjoint(b), SolverConfig(method="fgmres", **common))
    worst = 0.0
    for x1, x2 in zip(lsmr.iterates, gm.iterates):
        worst = max(worst, float(np.linalg.norm(x1 - x2) / np.linalg.norm(x1)))
    return worst
