"""Synthetic test images: the modified Shepp-Logan phantom and a sparse 'satellite' scene."""

from __future__ import annotations

import numpy as np

# (intensity, semi-axis a, semi-axis b, center x, center y, rotation in degrees)
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


def pixel_centers(side: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates in ``[-1, 1]^2``; row 0 is the top (largest y)."""
    c = (np.arange(side) + 0.5) / side * 2.0 - 1.0
    return np.meshgrid(c, -c)


def shepp_logan(side: int = 256) -> np.ndarray:
    """Modified (Toft) Shepp-Logan phantom rasterized at pixel centers, values in [0, 1]."""
    if side < 16:
        raise ValueError("phantom side must be >= 16")
    x, y = pixel_centers(side)
    img = np.zeros((side, side))
    for amp, a, b, x0, y0, phi in SHEPP_LOGAN_ELLIPSES:
        c, s = np.cos(np.radians(phi)), np.sin(np.radians(phi))
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += amp
    # overlapping +/- intensities leave rounding residue
    img = np.round(img, 12)
    img[np.abs(img) < 1e-12] = 0.0
    return img


def satellite(side: int = 64) -> np.ndarray:
    """Sparse scene: a bright body with panels and antennas on a black background."""
    x, y = pixel_centers(side)
    img = np.zeros((side, side))
    img[(np.abs(x) < 0.12) & (np.abs(y) < 0.2)] = 1.0
    img[(np.abs(x) > 0.18) & (np.abs(x) < 0.55) & (np.abs(y) < 0.07)] = 0.6
    img[(x ** 2 + (y - 0.3) ** 2) < 0.07 ** 2] = 0.8
    img[(np.abs(x + y * 0.5) < 0.015) & (y < -0.2) & (y > -0.5)] = 0.5
    img[((x - 0.3) ** 2 + (y + 0.35) ** 2) < 0.03 ** 2] = 0.9
    return img


def blocks(side: int = 64) -> np.ndarray:
    """Piecewise constant image that is sparse in the Haar domain but not in pixels."""
    x, y = pixel_centers(side)
    img = 0.3 + 0.0 * x
    img[(x > -0.6) & (x < 0.1) & (y > -0.2) & (y < 0.5)] = 0.8
    img[(x > 0.25) & (x < 0.75) & (y > -0.75) & (y < 0.0)] = 0.1
    img[(x ** 2 + (y + 0.55) ** 2) < 0.2 ** 2] = 1.0
    return img


IMAGES = {"shepp_logan": shepp_logan, "satellite": satellite, "blocks": blocks}
