"""Rotating a parameter vector into canonical form and designs back out.

D-optimal designs on the ball are equivariant under orthogonal maps: if
``g`` is orthogonal then ``g x`` is optimal for ``(beta0, g b)`` whenever
``x`` is optimal for ``(beta0, b)``. We use this to reduce any slope vector
``b = (beta_1, ..., beta_k)`` to ``(||b||, 0, ..., 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ExactDesign

__all__ = [
    "CanonicalProblem",
    "ZERO_SLOPE_TOL",
    "canonicalize",
    "householder_to",
    "push_forward",
    "pull_back",
    "ellipsoid_to_ball",
    "scale_design",
]

ZERO_SLOPE_TOL = 1e-14


@dataclass(frozen=True)
class CanonicalProblem:
    """Canonical parameters and the orthogonal map back to the original frame.

    ``rotation @ (beta1_tilde, 0, ..., 0)`` reproduces the original slopes.
    """

    k: int
    beta0: float
    beta1_tilde: float
    rotation: np.ndarray

    @property
    def beta(self) -> np.ndarray:
        b = np.zeros(self.k + 1)
        b[0] = self.beta0
        b[1] = self.beta1_tilde
        return b


def householder_to(v: np.ndarray) -> np.ndarray:
    """Orthogonal (symmetric) matrix ``H`` with ``H e1 = v`` for unit ``v``.

    ``1 - v1`` is formed as ``sum(v[1:]**2) / (1 + v1)`` when ``v1 >= 0`` so
    vectors close to ``e1`` keep full relative accuracy.
    """
    v = np.asarray(v, dtype=float)
    k = v.size
    w = -v.copy()
    tail = float(np.dot(v[1:], v[1:]))
    w[0] = tail / (1.0 + v[0]) if v[0] >= 0 else 1.0 - v[0]
    ww = float(np.dot(w, w))
    if ww == 0.0:
        return np.eye(k)
    return np.eye(k) - (2.0 / ww) * np.outer(w, w)


def canonicalize(beta) -> CanonicalProblem:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size < 2:
        raise ValueError("beta needs an intercept and at least one slope (k >= 1)")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    k = beta.size - 1
    slopes = beta[1:]
    norm = float(np.linalg.norm(slopes))
    if norm < ZERO_SLOPE_TOL:
        return CanonicalProblem(k, float(beta[0]), 0.0, np.eye(k))
    return CanonicalProblem(k, float(beta[0]), norm, householder_to(slopes / norm))


def push_forward(design: ExactDesign, problem: CanonicalProblem) -> ExactDesign:
    """Map a canonical-frame design into the original coordinates."""
    if design.k != problem.k:
        raise ValueError(f"design lives in R^{design.k}, problem in R^{problem.k}")
    return ExactDesign(design.points @ problem.rotation.T, design.weights.copy())


def pull_back(design: ExactDesign, problem: CanonicalProblem) -> ExactDesign:
    """Inverse of :func:`push_forward`."""
    if design.k != problem.k:
        raise ValueError(f"design lives in R^{design.k}, problem in R^{problem.k}")
    return ExactDesign(design.points @ problem.rotation, design.weights.copy())


# Ellipsoids E = {S z : ||z|| <= 1}. The predictor beta0 + b'(S z) is the
# ball problem with slopes S' b, and M_E(S xi) = D M_ball(xi) D with
# D = diag(1, S), so det scales by det(S)^2 independently of the design.


def ellipsoid_to_ball(beta, shape) -> np.ndarray:
    """Ball-frame parameters for the ellipsoid ``{shape @ z : ||z|| <= 1}``."""
    beta = np.asarray(beta, dtype=float)
    S = np.asarray(shape, dtype=float)
    if S.ndim == 1:
        S = np.diag(S)
    out = beta.copy()
    out[1:] = S.T @ beta[1:]
    return out


def scale_design(design: ExactDesign, shape) -> np.ndarray:
    """Image of a ball design under ``z -> shape @ z``.

    Returns the raw point array since the result is no longer on the unit
    sphere.
    """
    S = np.asarray(shape, dtype=float)
    if S.ndim == 1:
        S = np.diag(S)
    return design.points @ S.T
