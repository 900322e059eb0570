"""Independent certificates for candidate designs.

:func:`kw_check` applies the Kiefer-Wolfowitz bound ``psi <= k + 1`` on a
fine grid. The oracles maximize the log-determinant by brute force without
touching the root equations or stationarity system used by the solver.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import MarginalDesign, sensitivity
from .models import ShiftedIntensity

__all__ = ["KWResult", "kw_check", "oracle_two_point", "oracle_three_point",
           "DEFAULT_GRID", "KW_TOL"]

DEFAULT_GRID = 10001
KW_TOL = 1e-6


class KWResult(NamedTuple):
    max_psi: float
    argmax_x1: float
    passed: bool
    support_psi: np.ndarray


def kw_check(s: ShiftedIntensity, marginal: MarginalDesign, k: int,
             grid_size: int = DEFAULT_GRID, tol: float = KW_TOL) -> KWResult:
    """Maximum of the sensitivity over a uniform grid on [-1, 1].

    Raises :class:`~balldesign.core.SingularDesignError` for singular designs.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(-1.0, 1.0, grid_size)
    psi = sensitivity(s, marginal, k, grid)
    i = int(np.argmax(psi))
    support = np.atleast_1d(sensitivity(s, marginal, k, marginal.points))
    return KWResult(float(psi[i]), float(grid[i]), bool(psi[i] <= k + 1 + tol), support)


def _best_alpha(A, B, k, iters=40):
    """Maximizer in alpha of ``log a + log(1-a) + (k-1) log(A a + B (1-a))``.

    The objective is concave in ``a``, so bisection on the sign of the
    derivative finds the global maximum; 40 halvings give width < 1e-12.
    """
    if k == 1:
        return np.full(np.shape(A), 0.5)
    lo = np.zeros(np.shape(A))
    hi = np.ones(np.shape(A))
    for _ in range(iters):
        a = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = 1.0 / a - 1.0 / (1.0 - a) + (k - 1) * (A - B) / (A * a + B * (1.0 - a))
        up = g > 0
        lo = np.where(up, a, lo)
        hi = np.where(up, hi, a)
    return 0.5 * (lo + hi)


def oracle_two_point(s: ShiftedIntensity, k: int, resolution: int = 2001,
                     chunk: int = 256) -> MarginalDesign:
    """Best two-point marginal with support on a uniform grid of [-1, 1].

    Every pair ``x > y`` of grid points is scored with its optimal weight.
    Test oracle only: cost is quadratic in ``resolution``.
    """
    if resolution < 101:
        raise ValueError("resolution must be >= 101")
    grid = np.linspace(-1.0, 1.0, resolution)
    lq = np.asarray(s.log_q(grid), dtype=float)
    m = float(np.max(lq))
    orbit = np.exp(lq - m) * (1.0 - grid * grid)
    best = (-math.inf, None)
    for start in range(1, resolution, chunk):
        xi = np.arange(start, min(start + chunk, resolution))
        J, I = np.meshgrid(xi, np.arange(resolution), indexing="ij")
        mask = I < J
        J, I = J[mask], I[mask]
        A, B = orbit[J], orbit[I]
        alpha = _best_alpha(A, B, k)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (lq[J] + lq[I] + 2.0 * np.log(grid[J] - grid[I])
                   + np.log(alpha) + np.log1p(-alpha))
            if k > 1:
                val = val + (k - 1) * (m + np.log(A * alpha + B * (1.0 - alpha)) - math.log(k - 1))
        val = np.where(np.isfinite(val), val, -np.inf)
        n = int(np.argmax(val))
        if val[n] > best[0]:
            best = (float(val[n]), (grid[J[n]], grid[I[n]], float(alpha[n])))
    x, y, a = best[1]
    return MarginalDesign.two_point(x, y, a)


def oracle_three_point(s: ShiftedIntensity, k: int, resolution: int = 401,
                       iterations: int = 3000) -> MarginalDesign:
    """Best design on ``{1, t, -1}`` with ``t`` on an interior grid.

    Weights for each ``t`` come from the multiplicative algorithm
    ``w_i <- w_i psi_i / (k + 1)``, which increases the log-det monotonically
    on a fixed support.
    """
    t = np.linspace(-1.0, 1.0, resolution)[1:-1]
    n = t.size
    pts = np.stack([np.ones(n), t, -np.ones(n)], axis=1)
    lq = np.asarray(s.log_q(pts), dtype=float)
    shift = lq.max(axis=1)
    q = np.exp(lq - shift[:, None])
    w = np.full((n, 3), 1.0 / 3.0)

    def moments(w):
        wq = w * q
        a = wq.sum(1)
        b = (wq * pts).sum(1)
        c = (wq * pts * pts).sum(1)
        orbit = (wq * (1 - pts * pts)).sum(1)
        return a, b, c, a * c - b * b, orbit

    for _ in range(iterations):
        a, b, c, det, orbit = moments(w)
        quad = (c[:, None] - 2 * b[:, None] * pts + a[:, None] * pts * pts) / det[:, None]
        if k > 1:
            quad = quad + (k - 1) * (1 - pts * pts) / orbit[:, None]
        w = w * q * quad / (k + 1)
        w = w / w.sum(1, keepdims=True)

    a, b, c, det, orbit = moments(w)
    # q was rescaled by exp(-shift) per row, which scales det M by exp(-(k+1) shift)
    with np.errstate(divide="ignore"):
        val = np.log(det) + (k + 1) * shift
        if k > 1:
            val = val + (k - 1) * (np.log(orbit) - math.log(k - 1))
    i = int(np.argmax(val))
    keep = w[i] > 1e-12
    return MarginalDesign(pts[i][keep], w[i][keep] / w[i][keep].sum())
