"""Orthonormal multilevel Haar wavelet transforms.

Coefficient layout (flattened, row-major inside each block):

* 1D: ``[a_L, d_L, d_{L-1}, ..., d_1]``, coarsest approximation first.
* 2D: ``[LL_L, (LH_L, HL_L, HH_L), ..., (LH_1, HL_1, HH_1)]`` where the first
  letter refers to the row axis (axis 0) and the second to the column axis.

Each level maps a pair ``(a, b)`` to ``((a + b)/sqrt(2), (a - b)/sqrt(2))``
along the columns first and then along the rows.
"""

from __future__ import annotations

import numpy as np

from .linop import ConfigurationError, LinearOperator

SQRT2 = np.sqrt(2.0)


def _check_divisible(shape, levels):
    if levels < 1:
        raise ConfigurationError("levels must be a positive integer")
    for s in shape:
        if s % (2 ** levels):
            raise ConfigurationError(
                f"dimension {s} is not divisible by 2**{levels}; pad the signal to a multiple of {2 ** levels}"
            )


def _split(a, axis):
    even = np.take(a, np.arange(0, a.shape[axis], 2), axis=axis)
    odd = np.take(a, np.arange(1, a.shape[axis], 2), axis=axis)
    return (even + odd) / SQRT2, (even - odd) / SQRT2


def _merge(lo, hi, axis):
    shape = list(lo.shape)
    shape[axis] *= 2
    out = np.empty(shape)
    idx = [slice(None)] * lo.ndim
    idx[axis] = slice(0, None, 2)
    out[tuple(idx)] = (lo + hi) / SQRT2
    idx[axis] = slice(1, None, 2)
    out[tuple(idx)] = (lo - hi) / SQRT2
    return out


def haar_forward(x, levels: int) -> np.ndarray:
    """Multilevel Haar coefficients of a 1D signal or a 2D image (as a flat vector)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2):
        raise ConfigurationError("haar_forward expects a 1D signal or a 2D image")
    _check_divisible(x.shape, levels)
    a = x
    details = []
    for _ in range(levels):
        if x.ndim == 1:
            a, d = _split(a, 0)
            details.append(d.ravel())
        else:
            lo, hi = _split(a, 1)
            a, hl = _split(lo, 0)
            lh, hh = _split(hi, 0)
            details.append(np.concatenate([lh.ravel(), hl.ravel(), hh.ravel()]))
    return np.concatenate([a.ravel()] + details[::-1])


def haar_inverse(s, levels: int, shape=None) -> np.ndarray:
    """Invert :func:`haar_forward`.  ``shape`` defaults to ``(len(s),)``."""
    s = np.asarray(s, dtype=np.float64).ravel()
    shape = (s.size,) if shape is None else tuple(int(n) for n in np.atleast_1d(shape))
    if int(np.prod(shape)) != s.size:
        raise ConfigurationError(f"coefficient vector of length {s.size} does not match shape {shape}")
    if len(shape) not in (1, 2):
        raise ConfigurationError("haar_inverse supports 1D and 2D shapes only")
    _check_divisible(shape, levels)
    coarse = tuple(n // 2 ** levels for n in shape)
    pos = int(np.prod(coarse))
    a = s[:pos].reshape(coarse)
    for _ in range(levels):
        if len(shape) == 1:
            d = s[pos:pos + a.size]
            pos += a.size
            a = _merge(a, d, 0)
        else:
            blk = a.size
            lh = s[pos:pos + blk].reshape(a.shape)
            hl = s[pos + blk:pos + 2 * blk].reshape(a.shape)
            hh = s[pos + 2 * blk:pos + 3 * blk].reshape(a.shape)
            pos += 3 * blk
            lo = _merge(a, hl, 0)
            hi = _merge(lh, hh, 0)
            a = _merge(lo, hi, 1)
    return a


def count_sparsity(s, tol: float = 0.0) -> int:
    """Number of entries with ``|s_i| > tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return int(np.count_nonzero(np.abs(np.asarray(s)) > tol))


class HaarTransform(LinearOperator):
    """Orthonormal Haar transform on flattened signals/images of a fixed shape.

    ``apply`` is the forward transform and ``apply_adjoint`` its inverse.
    """

    def __init__(self, shape, levels: int):
        shape = tuple(int(n) for n in np.atleast_1d(shape))
        _check_divisible(shape, levels)
        self.signal_shape = shape
        self.levels = int(levels)
        n = int(np.prod(shape))
        super().__init__(
            (n, n),
            lambda x: haar_forward(x.reshape(shape), self.levels),
            lambda s: haar_inverse(s, self.levels, shape).ravel(),
            name=f"Haar{len(shape)}D[{self.levels}]",
        )

    def forward(self, x) -> np.ndarray:
        return self.apply(x)

    def inverse(self, s) -> np.ndarray:
        return self.apply_adjoint(s)

    def to_dict(self) -> dict:
        return {"kind": "haar", "shape": list(self.signal_shape), "levels": self.levels}


OrthonormalTransform = HaarTransform
