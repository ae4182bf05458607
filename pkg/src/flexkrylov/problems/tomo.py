"""2D parallel-beam tomography with exact ray/pixel intersection lengths.

Geometry: an ``N x N`` grid of unit pixels covering ``[-N/2, N/2]^2``.  For
projection angle ``theta`` and detector offset ``s`` the ray passes through
``s (cos theta, sin theta)`` with direction ``(-sin theta, cos theta)``.
Offsets are ``linspace(-d/2, d/2, p)`` (a single ray sits at offset 0).
Row ``i * p + j`` holds ray ``j`` of angle ``i``; column ``r * N + c`` is the
pixel in image row ``r`` (counted from the top) and column ``c``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..linop import MatrixOperator
from ..transforms import HaarTransform
from .base import TestProblem, make_problem
from .images import shepp_logan


def detector_offsets(rays: int, width: float) -> np.ndarray:
    if rays == 1:
        return np.zeros(1)
    return np.linspace(-width / 2.0, width / 2.0, rays)


def _rays_for_angle(theta_deg: float, offsets: np.ndarray, n: int):
    """Siddon traversal of all rays of one angle; returns (ray, pixel, length) triplets."""
    th = np.radians(theta_deg)
    tiny = 1e-12
    c, s = np.cos(th), np.sin(th)
    # exact zeros for axis-aligned rays so that rays on grid lines are assigned consistently
    c = 0.0 if abs(c) <= tiny else c
    s = 0.0 if abs(s) <= tiny else s
    dx, dy = -s, c
    px, py = offsets * c, offsets * s
    edges = np.arange(n + 1) - n / 2.0
    p = offsets.size
    inf = np.full(p, np.inf)

    parts = []
    if abs(dx) > tiny:
        tx = (edges[None, :] - px[:, None]) / dx
        lo_x, hi_x = np.minimum(tx[:, 0], tx[:, -1]), np.maximum(tx[:, 0], tx[:, -1])
        parts.append(tx)
    else:
        inside = np.abs(px) < n / 2.0
        lo_x, hi_x = np.where(inside, -inf, inf), np.where(inside, inf, -inf)
    if abs(dy) > tiny:
        ty = (edges[None, :] - py[:, None]) / dy
        lo_y, hi_y = np.minimum(ty[:, 0], ty[:, -1]), np.maximum(ty[:, 0], ty[:, -1])
        parts.append(ty)
    else:
        inside = np.abs(py) < n / 2.0
        lo_y, hi_y = np.where(inside, -inf, inf), np.where(inside, inf, -inf)
    t_in = np.maximum(lo_x, lo_y)
    t_out = np.minimum(hi_x, hi_y)
    hit = t_out > t_in
    if not np.any(hit):
        return np.empty(0, int), np.empty(0, int), np.empty(0)

    t = np.concatenate(parts + [t_in[:, None], t_out[:, None]], axis=1)[hit]
    t_in, t_out = t_in[hit], t_out[hit]
    t[(t < t_in[:, None]) | (t > t_out[:, None])] = np.nan
    t.sort(axis=1)
    seg = np.diff(t, axis=1)
    mid = 0.5 * (t[:, 1:] + t[:, :-1])
    ok = np.isfinite(seg) & (seg > 1e-12)
    ray_idx = np.broadcast_to(np.flatnonzero(hit)[:, None], seg.shape)[ok]
    mid = mid[ok]
    xm = px[ray_idx] + mid * dx
    ym = py[ray_idx] + mid * dy
    col = np.clip(np.floor(xm + n / 2.0).astype(int), 0, n - 1)
    row = n - 1 - np.clip(np.floor(ym + n / 2.0).astype(int), 0, n - 1)
    return ray_idx, row * n + col, seg[ok]


def tomo_matrix(n_grid: int, angles_deg, rays_per_angle: int | None = None, detector_width: float | None = None) -> sp.csr_matrix:
    """Sparse parallel-beam system matrix (rays that miss the grid give zero rows)."""
    if n_grid < 1:
        raise ValueError("n_grid must be positive")
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=np.float64))
    if angles.size == 0:
        raise ValueError("need at least one angle")
    p = int(round(np.sqrt(2) * n_grid)) if rays_per_angle is None else int(rays_per_angle)
    d = np.sqrt(2) * n_grid if detector_width is None else float(detector_width)
    offsets = detector_offsets(p, d)
    rows, cols, vals = [], [], []
    for i, theta in enumerate(angles):
        r, c, v = _rays_for_angle(theta, offsets, n_grid)
        rows.append(r + i * p)
        cols.append(c)
        vals.append(v)
    rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(angles.size * p, n_grid * n_grid))


def gen_tomo(
    n_grid: int = 64,
    angles_deg=None,
    rays_per_angle: int | None = None,
    detector_width: float | None = None,
    levels: int = 4,
) -> TestProblem:
    """Shepp-Logan phantom seen by a parallel-beam scanner; ``psi`` is a 2D Haar transform."""
    angles = np.arange(0, 180, 2) if angles_deg is None else np.asarray(angles_deg, dtype=np.float64)
    p = int(round(np.sqrt(2) * n_grid)) if rays_per_angle is None else int(rays_per_angle)
    d = np.sqrt(2) * n_grid if detector_width is None else float(detector_width)
    a = MatrixOperator(tomo_matrix(n_grid, angles, p, d), name="paralleltomo")
    params = {
        "n_grid": n_grid,
        "angles_deg": [float(t) for t in angles],
        "rays_per_angle": p,
        "detector_width": d,
        "levels": levels,
    }
    spec = {"generator": "tomo", "params": params, "detector_offsets": detector_offsets(p, d).tolist()}
    prob = make_problem(a, shepp_logan(n_grid), spec, image_shape=(n_grid, n_grid))
    prob.psi = HaarTransform((n_grid, n_grid), levels)
    return prob
