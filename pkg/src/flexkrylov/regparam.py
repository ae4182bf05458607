"""Regularization parameter policies for hybrid projected problems.

* ``fixed``: a constant lambda (``0`` gives the purely iterative methods).
* ``dp_exact``: the discrepancy principle enforced on every projected problem.
* ``dp_secant``: one secant-type update of lambda per iteration.
* ``optimal``: the grid value minimizing the error against a known solution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .projsolve import ProjectedProblem

LAMBDA_MIN = 1e-12
LAMBDA_MAX = 1e12
KINDS = ("fixed", "dp_exact", "dp_secant", "optimal")


@dataclass
class ParamPolicy:
    kind: str = "fixed"
    value: float = 0.0
    eps: float | None = None
    noise_level: float | None = None
    eta: float = 1.01
    lambda0: float | None = None
    lam_min: float = LAMBDA_MIN
    lam_max: float = LAMBDA_MAX
    grid_size: int = 40
    grid: list[float] | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown parameter policy {self.kind!r}; choose one of {KINDS}")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if self.kind == "fixed" and self.value < 0:
            raise ValueError("fixed lambda must be nonnegative")
        if self.kind.startswith("dp") and self.eps is None and self.noise_level is None:
            raise ValueError(f"{self.kind} needs eps (noise norm) or noise_level")
        if not 0 < self.lam_min < self.lam_max:
            raise ValueError("need 0 < lam_min < lam_max")

    def noise_norm(self, b) -> float:
        """``eps`` if given, else ``noise_level * ||b||``."""
        if self.eps is not None:
            return float(self.eps)
        if self.noise_level is not None:
            return float(self.noise_level * np.linalg.norm(b))
        raise ValueError("no noise information configured")

    def initial_lambda(self, beta1: float, eps: float) -> float:
        if self.lambda0 is not None:
            return float(self.lambda0)
        return clamp((self.eta * eps / beta1) ** 2, self.lam_min, self.lam_max)

    def candidate_grid(self) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=np.float64)
        return log_grid(self.lam_min, self.lam_max, self.grid_size)

    def to_dict(self) -> dict:
        return asdict(self)


def clamp(lam: float, lo: float = LAMBDA_MIN, hi: float = LAMBDA_MAX) -> float:
    return float(min(max(lam, lo), hi))


def log_grid(lo: float, hi: float, num: int) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), int(num))


class ResidualFunction:
    """Fast ``lam -> ||matrix y(lam) - beta e_1||`` through one SVD.

    With ``reg = R`` invertible, substitute ``w = R y``; for the matrix
    ``matrix R^{-1} = P S Q^T`` and ``c = P^T beta e_1`` the residual is
    ``sqrt(sum_i (lam c_i/(s_i^2 + lam))^2 + sum_{i>k} c_i^2)``.
    """

    def __init__(self, p: ProjectedProblem):
        mat = p.matrix
        if p.reg is not None:
            mat = np.linalg.solve(p.reg.T, mat.T).T
        P, s, _ = np.linalg.svd(mat, full_matrices=True)
        self.s2 = s ** 2
        c = p.beta * P[0, :]
        self.c_head = c[: s.size]
        self.tail2 = float(np.sum(c[s.size:] ** 2))
        self.beta = float(p.beta)

    def __call__(self, lam: float) -> float:
        if lam == 0:
            f = np.where(self.s2 > 0, 0.0, 1.0)
        else:
            f = lam / (self.s2 + lam)
        return float(np.sqrt(np.sum((f * self.c_head) ** 2) + self.tail2))


def select_dp_exact(
    p: ProjectedProblem,
    eps: float,
    eta: float = 1.01,
    residual: Callable[[float], float] | None = None,
    lam_min: float = LAMBDA_MIN,
    lam_max: float = LAMBDA_MAX,
) -> float:
    """Lambda with ``residual(lam) = eta * eps``.

    Returns ``0`` while the discrepancy is not reachable in the current
    subspace and ``lam_max`` when even ``y = 0`` satisfies it.  ``residual``
    overrides the residual curve (default: the projected problem's own).
    """
    target = eta * eps
    if target <= 0:
        return 0.0
    res = residual if residual is not None else ResidualFunction(p)
    if res(0.0) >= target:
        return 0.0
    if residual is None and target >= p.beta:
        return float(lam_max)
    lo, hi = np.log(lam_min), np.log(lam_max)
    if res(lam_min) >= target:
        return float(lam_min)
    if res(lam_max) <= target:
        return float(lam_max)
    t = brentq(lambda t: res(np.exp(t)) - target, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(np.exp(t))


def select_dp_secant(
    prev_lambda: float,
    r_reg: float,
    r_zero: float,
    eps: float,
    eta: float = 1.01,
    lam_min: float = LAMBDA_MIN,
    lam_max: float = LAMBDA_MAX,
) -> float:
    """``lam_next = lam * |eta eps - r_zero| / |r_reg - r_zero|``, clamped.

    ``r_reg`` is the projected residual at ``prev_lambda`` and ``r_zero`` the
    one at ``lam = 0``.  Fixed points satisfy ``r_reg = eta * eps``.

    While the discrepancy is unreachable (``r_zero >= eta * eps``) or the two
    residuals coincide to rounding, the previous lambda is kept.
    """
    target = eta * eps
    den = abs(r_reg - r_zero)
    if r_zero >= target or den <= 1e-12 * max(r_reg, r_zero):
        return clamp(prev_lambda, lam_min, lam_max)
    return clamp(prev_lambda * abs(target - r_zero) / den, lam_min, lam_max)


def select_optimal(candidate_lambdas: Sequence[float], solve: Callable[[float], np.ndarray], x_true) -> float:
    """Grid argmin of ``||solve(lam) - x_true||``; ties go to the smaller lambda."""
    x_true = np.asarray(x_true, dtype=np.float64)
    best_lam, best_err = None, np.inf
    for lam in sorted(float(v) for v in candidate_lambdas):
        err = float(np.linalg.norm(solve(lam) - x_true))
        if err < best_err:
            best_lam, best_err = lam, err
    if best_lam is None:
        raise ValueError("empty candidate grid")
    return best_lam
