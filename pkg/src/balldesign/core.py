"""Information matrices, the log-det objective and the sensitivity function.

A rotation-invariant design on the sphere is a marginal ``xi1`` on [-1, 1]
for ``x1`` combined with the uniform distribution on each orbit
``{x : x_1 = t}``. Its information matrix is block diagonal::

    [ sum w q      sum w q x    |                              ]
    [ sum w q x    sum w q x^2  |                              ]
    [ ---------------------------+----------------------------- ]
    [                           | sum w q (1 - x^2) / (k-1) * I ]

Determinants are taken blockwise. Intensities are handled in log space and
rescaled by their maximum before exponentiation, so designs in extreme tails
(probit with |eta| ~ 40) still give finite log-determinants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import ShiftedIntensity, get_model

__all__ = [
    "MarginalDesign",
    "ExactDesign",
    "SingularDesignError",
    "regressors",
    "elemental_info",
    "exact_info",
    "exact_log_det",
    "exact_sensitivity",
    "marginal_info",
    "marginal_log_det",
    "log_det_two_point",
    "sensitivity",
]

_WEIGHT_TOL = 1e-9
_SPHERE_TOL = 1e-12
_TINY = 1e-300


class SingularDesignError(ValueError):
    """The design's information matrix is singular."""


@dataclass(frozen=True)
class MarginalDesign:
    """Support points on [-1, 1] for ``x1`` with their weights.

    Points are stored strictly decreasing. Weights are renormalized to sum to
    one exactly once they pass a loose check.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float)).copy()
        w = np.atleast_1d(np.asarray(self.weights, dtype=float)).copy()
        if pts.shape != w.shape or pts.ndim != 1 or pts.size == 0:
            raise ValueError("points and weights must be non-empty 1-d arrays of equal length")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        if np.any(np.abs(pts) > 1.0 + _SPHERE_TOL):
            raise ValueError("marginal support points must lie in [-1, 1]")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        order = np.argsort(-pts, kind="stable")
        pts = np.clip(pts[order], -1.0, 1.0)
        w = w[order] / w.sum()
        if np.any(np.diff(pts) >= 0):
            raise ValueError("marginal support points must be pairwise distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def two_point(cls, x, y, alpha) -> "MarginalDesign":
        """``{x: alpha, y: 1 - alpha}``."""
        return cls([x, y], [alpha, 1.0 - alpha])

    @property
    def size(self) -> int:
        return int(self.points.size)

    def reflect(self) -> "MarginalDesign":
        """Image under ``x1 -> -x1``."""
        return MarginalDesign(-self.points[::-1], self.weights[::-1])

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True)
class ExactDesign:
    """Finitely many points on the unit sphere in R^k with positive weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[0] != w.size or w.size == 0:
            raise ValueError("points must be (n, k) with one weight per point")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError("weights must be positive and sum to 1")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > _SPHERE_TOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise ValueError(f"design points must lie on the unit sphere (off by {worst:.3g})")
        object.__setattr__(self, "points", pts.copy())
        object.__setattr__(self, "weights", w / w.sum())

    @property
    def k(self) -> int:
        return int(self.points.shape[1])

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def marginal(self, tol: float = 1e-12) -> MarginalDesign:
        """Aggregate weights by first coordinate."""
        x1 = self.points[:, 0]
        order = np.argsort(-x1, kind="stable")
        levels, weights = [], []
        for x, w in zip(x1[order], self.weights[order]):
            if levels and abs(levels[-1] - x) <= tol:
                weights[-1] += w
            else:
                levels.append(x)
                weights.append(w)
        return MarginalDesign(levels, weights)

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}


def regressors(points) -> np.ndarray:
    """Rows ``f(x) = (1, x_1, ..., x_k)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.hstack([np.ones((pts.shape[0], 1)), pts])


def elemental_info(model, beta, x) -> np.ndarray:
    """``lambda(f(x)'beta) f(x) f(x)'`` for a single point ``x``."""
    model = get_model(model)
    f = np.concatenate([[1.0], np.atleast_1d(np.asarray(x, dtype=float))])
    beta = np.asarray(beta, dtype=float)
    if f.size != beta.size:
        raise ValueError(f"x has dimension {f.size - 1}, beta expects {beta.size - 1}")
    return float(model.intensity(f @ beta)) * np.outer(f, f)


def _design_arrays(design, weights):
    if isinstance(design, ExactDesign):
        return design.points, design.weights
    pts = np.atleast_2d(np.asarray(design, dtype=float))
    return pts, np.asarray(weights, dtype=float)


def _scaled_exact_info(model, beta, design, weights=None):
    pts, w = _design_arrays(design, weights)
    F = regressors(pts)
    beta = np.asarray(beta, dtype=float)
    if F.shape[1] != beta.size:
        raise ValueError(f"design lives in R^{F.shape[1] - 1}, beta expects {beta.size - 1}")
    ll = np.atleast_1d(model.log_intensity(F @ beta))
    m = float(np.max(ll))
    lw = w * np.exp(ll - m)
    return (F * lw[:, None]).T @ F, m


def exact_info(model, beta, design, weights=None) -> np.ndarray:
    """``sum_i w_i lambda(f(x_i)'beta) f(x_i) f(x_i)'``.

    ``design`` is an :class:`ExactDesign` or an ``(n, k)`` point array with
    ``weights`` given separately (points off the sphere are allowed there).
    """
    M, m = _scaled_exact_info(get_model(model), beta, design, weights)
    return math.exp(m) * M


def exact_log_det(model, beta, design, weights=None) -> float:
    M, m = _scaled_exact_info(get_model(model), beta, design, weights)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0 or not np.isfinite(logdet):
        return -math.inf
    return float(logdet + M.shape[0] * m)


def exact_sensitivity(model, beta, design, x, weights=None) -> np.ndarray:
    """``lambda(f(x)'beta) f(x)' M^{-1} f(x)`` at each row of ``x``."""
    model = get_model(model)
    M, m = _scaled_exact_info(model, beta, design, weights)
    if np.linalg.matrix_rank(M) < M.shape[0]:
        raise SingularDesignError("information matrix is singular")
    F = regressors(x)
    ll = np.atleast_1d(model.log_intensity(F @ np.asarray(beta, dtype=float)))
    quad = np.einsum("ij,ij->i", F, np.linalg.solve(M, F.T).T)
    return np.exp(ll - m) * quad


# -- marginal (rotation-invariant) designs -----------------------------------


def _scaled_moments(s: ShiftedIntensity, xi1: MarginalDesign):
    """Moments of ``w q`` with ``q`` rescaled by ``exp(-m)``."""
    lq = np.atleast_1d(s.log_q(xi1.points))
    m = float(np.max(lq))
    wq = xi1.weights * np.exp(lq - m)
    x = xi1.points
    a, b, c = wq.sum(), (wq * x).sum(), (wq * x * x).sum()
    # Cauchy-Binet: a c - b^2 = sum_{i<j} wq_i wq_j (x_i - x_j)^2, never negative
    diff = x[:, None] - x[None, :]
    det_b = 0.5 * float(np.sum(np.outer(wq, wq) * diff * diff))
    orbit = float((wq * (1.0 - x * x)).sum())
    return m, a, b, c, det_b, orbit


def marginal_info(s: ShiftedIntensity, xi1: MarginalDesign, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    m, a, b, c, _, orbit = _scaled_moments(s, xi1)
    scale = math.exp(m)
    M = np.zeros((k + 1, k + 1))
    M[0, 0], M[0, 1], M[1, 0], M[1, 1] = a, b, b, c
    if k > 1:
        M[2:, 2:] = np.eye(k - 1) * (orbit / (k - 1))
    return scale * M


def marginal_log_det(s: ShiftedIntensity, xi1: MarginalDesign, k: int) -> float:
    """``log det`` of :func:`marginal_info`; ``-inf`` when singular."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m, _, _, _, det_b, orbit = _scaled_moments(s, xi1)
    if not det_b > _TINY:
        return -math.inf
    val = 2.0 * m + math.log(det_b)
    if k > 1:
        if not orbit > _TINY:
            return -math.inf
        val += (k - 1) * (m + math.log(orbit) - math.log(k - 1))
    return val


def log_det_two_point(s: ShiftedIntensity, x, y, alpha, k: int):
    """Closed-form log-det for the marginal ``{x: alpha, y: 1 - alpha}``.

    Vectorized over ``x``, ``y`` and ``alpha``. Singular or infeasible
    designs map to ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    x, y, alpha = np.broadcast_arrays(x, y, alpha)
    ok = (x != y) & (alpha > 0) & (alpha < 1) & (np.abs(x) <= 1) & (np.abs(y) <= 1)
    a = np.where(ok, alpha, 0.5)
    xs, ys = np.where(ok, x, 0.5), np.where(ok, y, -0.5)
    lqx = np.asarray(s.log_q(xs), dtype=float)
    lqy = np.asarray(s.log_q(ys), dtype=float)
    with np.errstate(divide="ignore"):
        val = lqx + lqy + 2.0 * np.log(np.abs(xs - ys)) + np.log(a) + np.log1p(-a)
        if k > 1:
            mx = np.maximum(lqx, lqy)
            orbit = (np.exp(lqx - mx) * (1.0 - xs * xs) * a
                     + np.exp(lqy - mx) * (1.0 - ys * ys) * (1.0 - a))
            ok = ok & (orbit > _TINY)
            val = val + (k - 1) * (mx + np.log(np.where(orbit > 0, orbit, 1.0)) - math.log(k - 1))
    out = np.where(ok & np.isfinite(val), val, -np.inf)
    return float(out) if out.ndim == 0 else out


def sensitivity(s: ShiftedIntensity, xi1: MarginalDesign, k: int, x1):
    """``psi`` at any sphere point whose first coordinate is ``x1``.

    ``q(x1) * [(1, x1) B^{-1} (1, x1)' + (k-1)(1 - x1^2) / sum w q (1 - x^2)]``
    with ``B`` the leading 2x2 block.
    """
    m, a, b, c, det_b, orbit = _scaled_moments(s, xi1)
    if not det_b > _TINY or (k > 1 and not orbit > _TINY):
        raise SingularDesignError(
            "information matrix is singular; the design needs two distinct x1 levels"
            + (" and an orbit with |x1| < 1" if k > 1 else ""))
    t = np.asarray(x1, dtype=float)
    p = (c - 2.0 * b * t + a * t * t) / det_b
    if k > 1:
        p = p + (k - 1) * (1.0 - t * t) / orbit
    psi = np.exp(np.asarray(s.log_q(t)) - m) * p
    return float(psi) if np.ndim(psi) == 0 else psi
