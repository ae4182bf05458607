"""Small dense kernels for the projected problems of hybrid Krylov methods."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .decomp import orthogonalize

RANK_TOL = 1e-14


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass
class ProjectedProblem:
    """``min_y ||matrix y - beta e_1||^2 + lam ||reg y||^2``.

    ``reg=None`` stands for the identity.
    """

    matrix: np.ndarray
    beta: float
    reg: np.ndarray | None = None

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=np.float64))
        if self.reg is not None:
            self.reg = np.atleast_2d(np.asarray(self.reg, dtype=np.float64))
            if self.reg.shape != (self.k, self.k):
                raise ValueError(f"regularizer must be {self.k}x{self.k}, got {self.reg.shape}")

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    @property
    def rhs(self) -> np.ndarray:
        r = np.zeros(self.matrix.shape[0])
        r[0] = self.beta
        return r

    def residual(self, y) -> float:
        r = self.matrix @ y
        r[0] -= self.beta
        return float(np.linalg.norm(r))


class TikhonovSolution(NamedTuple):
    y: np.ndarray
    residual: float
    rank_deficient: bool


def qr_append(q: np.ndarray | None, r: np.ndarray | None, z_new) -> tuple[np.ndarray, np.ndarray, bool]:
    """Append a column to a thin QR factorization ``Z = Q R``.

    Returns the new factors and a flag that is set when ``z_new`` is
    numerically in the span of ``Q``.
    """
    z_new = np.asarray(z_new, dtype=np.float64).ravel()
    if q is None or q.size == 0:
        q = np.zeros((z_new.size, 0))
        r = np.zeros((0, 0))
    k = q.shape[1]
    w, h = orthogonalize(q, z_new)
    rho = float(np.linalg.norm(w))
    deficient = rho <= RANK_TOL * float(np.linalg.norm(z_new))
    q_new = np.empty((z_new.size, k + 1))
    q_new[:, :k] = q
    q_new[:, k] = w / rho if not deficient else 0.0
    r_new = np.zeros((k + 1, k + 1))
    r_new[:k, :k] = r
    r_new[:k, k] = h
    r_new[k, k] = rho
    return q_new, r_new, deficient


def tikhonov_projected(p: ProjectedProblem, lam: float) -> TikhonovSolution:
    """Solve the projected Tikhonov problem through QR of ``[matrix; sqrt(lam) reg]``."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    k = p.k
    if lam > 0:
        reg = np.eye(k) if p.reg is None else p.reg
        aug = np.vstack([p.matrix, np.sqrt(lam) * reg])
    else:
        aug = p.matrix
    rhs = np.zeros(aug.shape[0])
    rhs[0] = p.beta
    q, rr = np.linalg.qr(aug)
    d = np.abs(np.diag(rr))
    scale = max(float(np.max(d)) if d.size else 0.0, np.finfo(float).tiny)
    if np.all(d > RANK_TOL * scale):
        y = solve_triangular(rr, q.T @ rhs)
        deficient = False
    else:
        y = np.linalg.lstsq(aug, rhs, rcond=None)[0]
        deficient = True
    return TikhonovSolution(y, p.residual(y), deficient)


def projected_residual_curve(p: ProjectedProblem, lambdas) -> np.ndarray:
    """``||matrix y(lam) - beta e_1||`` for each ``lam``."""
    return np.array([tikhonov_projected(p, float(lam)).residual for lam in lambdas])


def approx_singular_values(m: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Singular values of ``m r^{-1}`` in descending order.

    With ``Z_k = Q_k R_k`` and ``A Z_k = U_{k+1} M_k`` these are the singular
    values of ``A Q_k``, i.e. Ritz-type approximations of those of ``A``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    r = np.atleast_2d(np.asarray(r, dtype=np.float64))
    d = np.abs(np.diag(r))
    if d.size == 0 or np.any(d <= RANK_TOL * d.max()):
        raise np.linalg.LinAlgError("triangular factor is singular")
    cond = np.linalg.cond(r)
    if cond > 1e12:
        warnings.warn(f"triangular factor has condition number {cond:.2e}", IllConditionedWarning, stacklevel=2)
    mr = solve_triangular(r, m.T, trans="T").T
    return np.linalg.svd(mr, compute_uv=False)
