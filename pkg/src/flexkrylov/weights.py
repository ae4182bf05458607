"""Iteratively reweighted norm (IRN) weights.

For ``p >= 1`` the penalty ``||x||_p^p`` is approximated by ``||L(x) x||_2^2``
with ``L(x) = diag(f(|x|)^((p-2)/2))`` and the thresholding
``f(t) = t if t >= tau1 else tau2``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .linop import DiagonalOperator

TAU1_FLOOR = 1e-10


@dataclass(frozen=True)
class WeightPolicy:
    """Parameters of the reweighting.

    ``tau1=None`` selects the relative threshold ``tau1_rel * max|x|``
    (never below ``1e-10``); a number is used as an absolute threshold.
    With ``clip=True`` the value ``tau2`` is ignored and ``f(t) = max(t, tau1)``,
    so small entries are floored at ``tau1`` instead of being pushed to zero.
    """

    p: float = 1.0
    tau1: float | None = None
    tau2: float = 1e-10
    tau1_rel: float = 1e-4
    clip: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.tau2 <= 0 or (self.tau1 is not None and self.tau1 <= 0):
            raise ValueError("thresholds must be positive")
        if self.tau1 is not None and self.tau2 > self.tau1:
            raise ValueError("tau2 must not exceed tau1")

    def threshold(self, x) -> float:
        if self.tau1 is not None:
            return self.tau1
        xmax = float(np.max(np.abs(x))) if np.size(x) else 0.0
        return max(self.tau1_rel * xmax, TAU1_FLOOR)

    def to_dict(self) -> dict:
        return asdict(self)


def weight_diagonal(x, policy: WeightPolicy) -> np.ndarray:
    """Diagonal of ``L(x)``."""
    t = np.abs(np.asarray(x, dtype=np.float64))
    if policy.p == 2:
        return np.ones_like(t)
    tau1 = policy.threshold(t)
    f = np.where(t >= tau1, t, tau1 if policy.clip else policy.tau2)
    return f ** ((policy.p - 2.0) / 2.0)


def build_weights(x, policy: WeightPolicy) -> tuple[DiagonalOperator, DiagonalOperator]:
    """Return ``(L, L^{-1})`` built from the current iterate ``x``."""
    d = weight_diagonal(x, policy)
    return DiagonalOperator(d, name="L"), DiagonalOperator(1.0 / d, name="L^-1")
