"""2D deblurring with a spatially invariant PSF and reflexive boundary conditions."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.signal import convolve, correlate

from ..linop import LinearOperator
from ..transforms import HaarTransform
from .base import TestProblem, make_problem
from .images import IMAGES


def gaussian_psf(sigma: float, radius: int | None = None) -> np.ndarray:
    r = int(np.ceil(3 * sigma)) if radius is None else int(radius)
    j = np.arange(-r, r + 1)
    g = np.exp(-(j[:, None] ** 2 + j[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def disk_psf(radius: float) -> np.ndarray:
    """Out-of-focus blur: uniform over the disk ``i^2 + j^2 <= radius^2``."""
    r = int(np.floor(radius))
    j = np.arange(-r, r + 1)
    d = (j[:, None] ** 2 + j[None, :] ** 2 <= radius ** 2).astype(np.float64)
    return d / d.sum()


def make_psf(kind: str = "gaussian", sigma: float = 2.0, radius: float = 4.0) -> np.ndarray:
    if kind == "gaussian":
        return gaussian_psf(sigma)
    if kind == "disk":
        return disk_psf(radius)
    if kind == "delta":
        return np.ones((1, 1))
    raise ValueError(f"unknown PSF kind {kind!r}")


def _fold_matrix(n: int, r: int) -> sp.csr_matrix:
    """``F`` with ``F.T @ v`` = half-sample symmetric padding of ``v`` by ``r`` on both sides."""
    src = np.pad(np.arange(n), r, mode="symmetric")
    return sp.csr_matrix((np.ones(src.size), (src, np.arange(src.size))), shape=(n, src.size))


class BlurOperator(LinearOperator):
    """2D correlation with ``psf`` under reflexive boundary conditions.

    The adjoint is the exact transpose: full convolution with ``psf``
    followed by folding the padded border back onto the image.
    """

    def __init__(self, shape: tuple[int, int], psf):
        psf = np.asarray(psf, dtype=np.float64)
        if psf.ndim != 2 or psf.shape[0] % 2 == 0 or psf.shape[1] % 2 == 0:
            raise ValueError("psf must be 2D with odd side lengths (centered)")
        self.image_shape = tuple(int(s) for s in shape)
        self.psf = psf
        r0, r1 = psf.shape[0] // 2, psf.shape[1] // 2
        f0 = _fold_matrix(self.image_shape[0], r0)
        f1 = _fold_matrix(self.image_shape[1], r1)
        n = self.image_shape[0] * self.image_shape[1]

        def mv(x):
            padded = f0.T @ (f1.T @ x.reshape(self.image_shape).T).T
            return correlate(padded, psf, mode="valid").ravel()

        def rmv(y):
            full = convolve(y.reshape(self.image_shape), psf, mode="full")
            return (f0 @ (f1 @ full.T).T).ravel()

        super().__init__((n, n), mv, rmv, name="Blur2D")


def gen_deblur2d(
    side: int = 64,
    psf: str = "gaussian",
    sigma: float = 2.0,
    radius: float = 4.0,
    image: str = "satellite",
    levels: int = 3,
) -> TestProblem:
    """Blurred image problem; ``levels`` sets the Haar transform attached as ``psi``."""
    if side & (side - 1):
        raise ValueError("side must be a power of two")
    kernel = make_psf(psf, sigma=sigma, radius=radius)
    a = BlurOperator((side, side), kernel)
    x = IMAGES[image](side)
    params = {"side": side, "psf": psf, "sigma": sigma, "radius": radius, "image": image, "levels": levels}
    p = make_problem(a, x, {"generator": "deblur2d", "params": params}, image_shape=(side, side))
    p.psi = HaarTransform((side, side), levels)
    return p
