"""One-dimensional test problems: inverse heat equation and Gaussian blur."""

from __future__ import annotations

import numpy as np
from scipy.linalg import toeplitz

from ..linop import MatrixOperator
from ..transforms import HaarTransform, haar_inverse
from .base import TestProblem, make_problem


def heat_matrix(n: int, kappa: float = 1.0) -> np.ndarray:
    """Midpoint-quadrature discretization of the inverse heat Volterra kernel.

    ``k(t) = t^{-3/2} / (2 kappa sqrt(pi)) exp(-1/(4 kappa^2 t))`` on ``[0, 1]``,
    giving a lower triangular Toeplitz matrix.
    """
    h = 1.0 / n
    t = (np.arange(n) + 0.5) * h
    c = h / (2.0 * kappa * np.sqrt(np.pi))
    d = 1.0 / (4.0 * kappa ** 2)
    col = c * t ** -1.5 * np.exp(-d / t)
    row = np.zeros(n)
    row[0] = col[0]
    return toeplitz(col, row)


def heat_solution(n: int) -> np.ndarray:
    """Smooth bump on the first half of ``[0, 1]``, exactly zero on the second half."""
    x = np.zeros(n)
    for i in range(1, n // 2 + 1):
        ti = i * 20.0 / n
        if ti < 2:
            x[i - 1] = 0.75 * ti ** 2 / 4
        elif ti < 3:
            x[i - 1] = 0.75 + (ti - 2) * (3 - ti)
        else:
            x[i - 1] = 0.75 * np.exp(-(ti - 3) * 2)
    return x


def gen_heat(n: int = 512, kappa: float = 1.0) -> TestProblem:
    if n < 16:
        raise ValueError("heat needs n >= 16")
    a = MatrixOperator(heat_matrix(n, kappa), name="heat")
    return make_problem(a, heat_solution(n), {"generator": "heat", "params": {"n": n, "kappa": kappa}})


def gaussian_toeplitz(n: int, variance: float, band: int) -> np.ndarray:
    """Symmetric banded Toeplitz blur, entries for ``|i-j| < band``, kernel summing to one."""
    if band < 1 or n < band:
        raise ValueError("need 1 <= band <= n")
    j = np.arange(band, dtype=np.float64)
    if variance <= 0:
        z = (j == 0).astype(np.float64)
    else:
        z = np.exp(-(j ** 2) / (2.0 * variance))
    z /= z[0] + 2.0 * z[1:].sum()
    col = np.zeros(n)
    col[:band] = z
    return toeplitz(col)


def sparse_haar_signal(n: int = 64) -> np.ndarray:
    """Piecewise constant signal whose 1-level Haar transform has exactly 8 nonzeros."""
    if n % 2 or n < 32:
        raise ValueError("need an even n >= 32")
    s = np.zeros(n)
    h = n // 2
    for lo, amp in ((h // 4, 1.0), (h // 4 + 1, 1.0), (h // 4 + 2, 1.0), (h // 4 + 3, 1.0),
                    (h // 2 + 2, 2.0), (h // 2 + 3, 2.0),
                    (3 * h // 4 + 2, 0.5), (3 * h // 4 + 3, 0.5)):
        s[lo] = amp * np.sqrt(2.0)
    return haar_inverse(s, 1)


def gen_blur1d(n: int = 64, variance: float = 2.25, band: int = 5, x_true=None) -> TestProblem:
    a = MatrixOperator(gaussian_toeplitz(n, variance, band), name="blur1d")
    x = sparse_haar_signal(n) if x_true is None else np.asarray(x_true, dtype=np.float64)
    p = make_problem(a, x, {"generator": "blur1d", "params": {"n": n, "variance": variance, "band": band}})
    p.psi = HaarTransform((n,), 1)
    return p
