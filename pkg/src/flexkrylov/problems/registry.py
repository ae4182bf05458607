from __future__ import annotations

from .base import TestProblem
from .deblur import gen_deblur2d
from .onedim import gen_blur1d, gen_heat
from .tomo import gen_tomo

GENERATORS = {
    "heat": (gen_heat, "1D inverse heat equation, n x n (params: n, kappa)"),
    "blur1d": (gen_blur1d, "1D Gaussian blur of a Haar-sparse signal (params: n, variance, band)"),
    "deblur2d": (gen_deblur2d, "2D PSF blur, reflexive boundary (params: side, psf, sigma, radius, image, levels)"),
    "tomo": (gen_tomo, "2D parallel-beam tomography of Shepp-Logan (params: n_grid, angles_deg, rays_per_angle, detector_width, levels)"),
}


def generate(name: str, **params) -> TestProblem:
    try:
        gen = GENERATORS[name][0]
    except KeyError:
        raise KeyError(f"unknown problem generator {name!r}; available: {sorted(GENERATORS)}") from None
    return gen(**params)
