"""Reference solvers for l1/lp problems: reweighting schemes and FISTA.

IRN and PIRN are inner-outer schemes: an outer loop rebuilds the weights
``L_k`` from the current iterate and an inner CGLS solves

* IRN:  ``min ||A x - b||^2 + lam ||L_k x||^2``
* PIRN: ``min ||A L_k^{-1} xh - b||^2 + lam ||xh||^2``,  ``x = L_k^{-1} xh``

FISTA minimizes ``1/2 ||A x - b||^2 + lam ||x||_1`` with step ``1/sigma_1^2``
and soft threshold ``lam/sigma_1^2``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .linop import (
    ConfigurationError,
    CountingOperator,
    DiagonalOperator,
    LinearOperator,
    aslinearoperator,
    compose,
    conjugate_by_transform,
    estimate_norm,
    to_dense,
)
from .solvers import IterationRecord, SolverAbort, SolverRun
from .weights import WeightPolicy, build_weights


@dataclass
class IrnConfig:
    outer: int = 20
    inner: int = 20
    inner_tol: float = 0.0
    lam: float = 1e-3
    weights: WeightPolicy = field(default_factory=WeightPolicy)
    inner_solver: str = "cgls"  # or "exact" (dense, small problems only)
    x_true: np.ndarray | None = None
    transform: LinearOperator | None = None

    def __post_init__(self):
        if self.outer < 1 or self.inner < 1:
            raise ConfigurationError("iteration counts must be positive")
        if self.lam < 0:
            raise ConfigurationError("lam must be nonnegative")
        if self.inner_solver not in ("cgls", "exact"):
            raise ConfigurationError(f"unknown inner solver {self.inner_solver!r}")


@dataclass
class FistaConfig:
    lam: float = 1e-3
    maxiter: int = 100
    step: float | None = None  # default 1 / sigma_1^2 from power iteration
    norm_iterations: int = 30
    x_true: np.ndarray | None = None
    transform: LinearOperator | None = None

    def __post_init__(self):
        if self.lam < 0 or self.maxiter < 1:
            raise ConfigurationError("need lam >= 0 and maxiter >= 1")


def cgls(a: LinearOperator, b, x0=None, maxiter: int = 20, tol: float = 0.0, lam: float = 0.0, d=None):
    """CGLS for ``min ||A x - b||^2 + lam ||diag(d) x||^2``.

    Returns ``(x, converged)``.  ``tol`` is relative to the initial
    normal-equation residual.
    """
    x = np.zeros(a.ncols) if x0 is None else np.array(x0, dtype=np.float64)
    d2 = 1.0 if d is None else np.asarray(d, dtype=np.float64) ** 2
    r = b - a.apply(x)
    s = a.apply_adjoint(r) - lam * d2 * x
    p = s.copy()
    gamma = float(s @ s)
    g0 = np.sqrt(gamma)
    if g0 == 0:
        return x, True
    for _ in range(maxiter):
        q = a.apply(p)
        delta = float(q @ q) + lam * float(np.sum(d2 * p * p))
        if delta <= 0:
            break
        alpha = gamma / delta
        x += alpha * p
        r -= alpha * q
        s = a.apply_adjoint(r) - lam * d2 * x
        gamma_new = float(s @ s)
        if np.sqrt(gamma_new) <= tol * g0:
            return x, True
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
    return x, tol == 0.0


def _exact_solve(a_dense: np.ndarray, b, lam: float, d) -> np.ndarray:
    aug = np.vstack([a_dense, np.sqrt(lam) * np.diag(d)]) if lam > 0 else a_dense
    rhs = np.concatenate([b, np.zeros(a_dense.shape[1])]) if lam > 0 else b
    return np.linalg.lstsq(aug, rhs, rcond=None)[0]


class _Trace:
    def __init__(self, name, x_true, psi, counter, raw_op, b):
        self.run = SolverRun(name)
        self.x_true = None if x_true is None else np.asarray(x_true, dtype=np.float64).ravel()
        self.psi, self.counter, self.raw, self.b = psi, counter, raw_op, b
        self.t0 = time.perf_counter()
        self.best = np.inf

    def record(self, k, lam, s):
        if not np.all(np.isfinite(s)):
            raise SolverAbort(f"{self.run.method}: non-finite iterate at step {k}")
        x = self.psi.apply_adjoint(s) if self.psi is not None else s
        # reporting only: these products are not charged to the method
        r = self.raw.apply(s) - self.b
        ne = self.raw.apply_adjoint(r)
        rel = float("nan") if self.x_true is None else float(np.linalg.norm(x - self.x_true) / np.linalg.norm(self.x_true))
        self.run.records.append(IterationRecord(
            k, float(lam), float(np.linalg.norm(r)), float(np.linalg.norm(ne)), rel,
            self.counter.matvecs, 1000.0 * (time.perf_counter() - self.t0)))
        self.run.x = x
        if self.x_true is None or rel < self.best:
            self.best = rel
            self.run.x_best, self.run.best_iter = x, k


def _prepare(a, b, transform):
    a = aslinearoperator(a)
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.size != a.nrows:
        raise ConfigurationError(f"b has length {b.size} but the operator has {a.nrows} rows")
    op = conjugate_by_transform(a, transform) if transform is not None else a
    return op, CountingOperator(op), b


def _run_irn(a, b, cfg: IrnConfig, preconditioned: bool) -> SolverRun:
    op, counter, b = _prepare(a, b, cfg.transform)
    name = "pirn" if preconditioned else "irn"
    tr = _Trace(name, cfg.x_true, cfg.transform, counter, op, b)
    dense = to_dense(op) if cfg.inner_solver == "exact" else None
    n = op.ncols
    x = np.zeros(n)
    inner_ok = True
    for k in range(1, cfg.outer + 1):
        if k == 1:
            d = np.ones(n)
        else:
            d = build_weights(x, cfg.weights)[0].diag
        if preconditioned:
            if dense is not None:
                xh = _exact_solve(dense / d[None, :], b, cfg.lam, np.ones(n))
            else:
                scaled = compose([counter, DiagonalOperator(1.0 / d)])
                xh, ok = cgls(scaled, b, d * x, cfg.inner, cfg.inner_tol, cfg.lam)
                inner_ok &= ok
            x = xh / d
        else:
            if dense is not None:
                x = _exact_solve(dense, b, cfg.lam, d)
            else:
                x, ok = cgls(counter, b, x, cfg.inner, cfg.inner_tol, cfg.lam, d)
                inner_ok &= ok
        tr.record(k, cfg.lam, x)
    tr.run.stop_reason = "maxiter"
    tr.run.info["inner_converged"] = bool(inner_ok)
    return tr.run


def run_irn(a, b, cfg: IrnConfig) -> SolverRun:
    """IRN: outer reweighting with inner CGLS on ``[A; sqrt(lam) L_k]``, warm started."""
    return _run_irn(a, b, cfg, preconditioned=False)


def run_pirn(a, b, cfg: IrnConfig) -> SolverRun:
    """PIRN: inner CGLS on the standard-form system ``[A L_k^{-1}; sqrt(lam) I]``."""
    return _run_irn(a, b, cfg, preconditioned=True)


def soft_threshold(t, gamma: float):
    """``sign(t) max(|t| - gamma, 0)``."""
    t = np.asarray(t, dtype=np.float64)
    return np.sign(t) * np.maximum(np.abs(t) - gamma, 0.0)


def fista_objective(a: LinearOperator, b, x, lam: float) -> float:
    r = a.apply(x) - b
    return 0.5 * float(r @ r) + lam * float(np.sum(np.abs(x)))


def run_fista(a, b, cfg: FistaConfig) -> SolverRun:
    """Accelerated proximal gradient (FISTA) with soft thresholding.

    The power-iteration cost of the default step size is reported in
    ``run.info['setup_matvecs']`` and not charged to the iteration trace.
    """
    op, counter, b = _prepare(a, b, cfg.transform)
    tr = _Trace("fista", cfg.x_true, cfg.transform, counter, op, b)
    if cfg.step is None:
        sigma = estimate_norm(op, cfg.norm_iterations)
        step = 1.0 / sigma ** 2
        tr.run.info["sigma1"] = sigma
        tr.run.info["setup_matvecs"] = 2 * cfg.norm_iterations
    else:
        step = float(cfg.step)
    tr.run.info["step"] = step
    thresh = cfg.lam * step
    x = np.zeros(op.ncols)
    y = x.copy()
    t = 1.0
    f0 = 0.5 * float(b @ b)
    for k in range(1, cfg.maxiter + 1):
        grad = counter.apply_adjoint(counter.apply(y) - b)
        x_new = soft_threshold(y - step * grad, thresh)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        tr.record(k, cfg.lam, x)
        rec = tr.run.records[-1]
        obj = 0.5 * rec.res_norm ** 2 + cfg.lam * float(np.sum(np.abs(x)))
        if obj > 10.0 * f0:
            raise SolverAbort(f"fista diverged at step {k} (objective {obj:.3e}); the step size is probably too large")
    tr.run.stop_reason = "maxiter"
    tr.run.info["objective"] = fista_objective(op, b, x, cfg.lam)
    return tr.run
