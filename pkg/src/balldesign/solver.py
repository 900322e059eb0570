"""Optimal marginal designs by case analysis on the mode of ``q``.

With ``q(x1) = lambda(beta0 + beta1 x1)`` and ``c_q = (c_lambda - beta0)/beta1``:

* A (``c_q > 1``): ``q`` increases on [-1, 1]. One support point at the
  pole ``x1 = 1`` with weight ``1/(k+1)``, the other a root in (-1, 1).
* B (``c_q < -1``): the mirror image of A.
* C (``c_q`` in [-1, 1]): either two interior orbits solving the stationarity
  system of the log-det, or one of the pole forms above. Both are computed and
  the larger log-det wins.
* DEGENERATE (``beta1 = 0``): a regular simplex on the sphere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, root

from .core import (
    ExactDesign,
    MarginalDesign,
    log_det_two_point,
    marginal_log_det,
)
from .discretize import orbit_vertices
from .equivariance import CanonicalProblem, canonicalize
from .models import IntensityModel, ShiftedIntensity, get_model
from .verify import DEFAULT_GRID, KW_TOL, kw_check

__all__ = [
    "CaseLabel",
    "ConvergenceError",
    "SolveReport",
    "classify",
    "solve_case_a",
    "solve_case_b",
    "solve_case_c",
    "solve_degenerate",
    "degenerate_marginal",
    "stationarity_residuals",
    "optimal_alpha",
    "solve",
    "asymptotic_inner_point",
]

log = logging.getLogger(__name__)

ROOT_RESIDUAL_TOL = 1e-9
STATIONARITY_TOL = 1e-9
BOUNDARY_MARGIN = 1e-7
GRID_X = 41
GRID_ALPHA = 21
ZOOM_LEVELS = 24


class CaseLabel(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    DEGENERATE = "DEGENERATE"


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def classify(s: ShiftedIntensity, k: Optional[int] = None) -> CaseLabel:
    """Case of the optimal design; ``k`` does not enter the conditions."""
    if s.beta1 < 0:
        raise ValueError("beta1 must be >= 0; canonicalize first")
    if s.beta1 == 0:
        return CaseLabel.DEGENERATE
    c_q = s.mode
    if c_q > 1:
        return CaseLabel.A
    if c_q < -1:
        return CaseLabel.B
    return CaseLabel.C


# -- pole forms (cases A and B) ----------------------------------------------


def _pole_root(score: Callable, k: int, info: Optional[dict]) -> float:
    """Inner support point for the design with a pole at ``x1 = 1``.

    For k >= 2 solves ``score(x) k (1 - x^2) = 2 (1 + k x)``; the left minus
    right side is ``2(k-1) >= 0`` at -1 and ``-2(k+1)`` at 1, so [-1, 1] is
    always a bracket. For k = 1 solves ``score(x) (1 - x) = 2`` and falls back
    to -1 when there is no sign change.
    """
    if k >= 2:
        def h(x):
            return score(x) * k * (1.0 - x * x) - 2.0 * (1.0 + k * x)
    else:
        def h(x):
            return score(x) * (1.0 - x) - 2.0

    if k == 1 and h(-1.0) <= 0:
        if info is not None:
            info.update(iterations=0, residual=0.0, fallback=True)
        return -1.0
    x, res = brentq(h, -1.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                    maxiter=500, full_output=True)
    residual = abs(h(x))
    scale = max(1.0, abs(score(x)) * k)
    if info is not None:
        info.update(iterations=res.function_calls, residual=residual, fallback=False)
    if not res.converged or residual > ROOT_RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"pole-form root did not converge (residual {residual:.3g})",
            {"root": x, "residual": residual, "function_calls": res.function_calls})
    return float(x)


def _pole_design(inner: float, k: int) -> MarginalDesign:
    if inner <= -1.0:
        return MarginalDesign([1.0, -1.0], [0.5, 0.5])
    return MarginalDesign([1.0, inner], [1.0 / (k + 1), k / (k + 1)])


def solve_case_a(s: ShiftedIntensity, k: int, info: Optional[dict] = None) -> MarginalDesign:
    """Pole at +1 with weight ``1/(k+1)``, inner level from the root equation."""
    return _pole_design(_pole_root(s.score, k, info), k)


def solve_case_b(s: ShiftedIntensity, k: int, info: Optional[dict] = None) -> MarginalDesign:
    """Mirror of :func:`solve_case_a` under ``x1 -> -x1``."""
    def reflected(x):
        return -s.score(-x)

    return _pole_design(_pole_root(reflected, k, info), k).reflect()


# -- two interior orbits (case C) ------------------------------------------


def stationarity_residuals(s: ShiftedIntensity, k: int, x: float, y: float, alpha: float) -> np.ndarray:
    """Partial derivatives of the two-point log-det in ``(x, y, alpha)``."""
    lqx, lqy = float(s.log_q(x)), float(s.log_q(y))
    m = max(lqx, lqy)
    qx, qy = math.exp(lqx - m), math.exp(lqy - m)
    sx, sy = float(s.score(x)), float(s.score(y))
    d = x - y
    r = np.array([sx + 2.0 / d, sy - 2.0 / d, 1.0 / alpha - 1.0 / (1.0 - alpha)])
    if k > 1:
        orbit = qx * (1 - x * x) * alpha + qy * (1 - y * y) * (1 - alpha)
        r[0] += (k - 1) * (sx * qx * (1 - x * x) - 2 * x * qx) * alpha / orbit
        r[1] += (k - 1) * (sy * qy * (1 - y * y) - 2 * y * qy) * (1 - alpha) / orbit
        r[2] += (k - 1) * (qx * (1 - x * x) - qy * (1 - y * y)) / orbit
    return r


def optimal_alpha(A, B, k: int):
    """Weight on ``x`` maximizing the two-point log-det for fixed levels.

    ``A = q(x)(1 - x^2)`` and ``B = q(y)(1 - y^2)`` (any common scale). For
    k >= 2 the alpha-equation times ``A alpha + B (1 - alpha)`` is the
    quadratic ``-(k+1) c a^2 + (k c - 2B) a + B`` with ``c = A - B``; it is
    ``B >= 0`` at 0 and ``-A <= 0`` at 1, so exactly one root lies in (0, 1).
    """
    A, B = np.broadcast_arrays(np.asarray(A, dtype=float), np.asarray(B, dtype=float))
    if k == 1:
        return np.full(A.shape, 0.5)
    c = A - B
    a2, a1, a0 = -(k + 1) * c, k * c - 2.0 * B, B
    with np.errstate(divide="ignore", invalid="ignore"):
        qq = -0.5 * (a1 + np.copysign(np.sqrt(np.maximum(a1 * a1 - 4 * a2 * a0, 0.0)), a1))
        r1 = qq / a2
        r2 = a0 / qq
    alpha = np.where((r1 > 0) & (r1 < 1), r1, r2)
    return np.where(c == 0, 0.5, alpha)


def _profile_log_det(s, k, x, y):
    """Two-point log-det with alpha at its optimum for each (x, y)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    lqx, lqy = np.asarray(s.log_q(x)), np.asarray(s.log_q(y))
    m = np.maximum(lqx, lqy)
    A = np.exp(lqx - m) * (1 - x * x)
    B = np.exp(lqy - m) * (1 - y * y)
    alpha = optimal_alpha(A, B, k)
    val = log_det_two_point(s, x, y, alpha, k)
    return np.where(x > y, val, -np.inf), alpha


def _grid_starts(s, k, n_starts=3):
    xs = np.linspace(-1.0, 1.0, GRID_X)
    alphas = np.linspace(0.0, 1.0, GRID_ALPHA + 2)[1:-1]
    X, Y, A = np.meshgrid(xs, xs, alphas, indexing="ij")
    vals = log_det_two_point(s, X, Y, A, k)
    vals = np.where(X > Y, vals, -np.inf)
    flat = np.argsort(vals, axis=None)[::-1]
    starts = []
    for idx in flat:
        if not np.isfinite(vals.flat[idx]):
            break
        p = np.array([X.flat[idx], Y.flat[idx]])
        if all(np.max(np.abs(p - q)) > 0.15 for q in starts):
            starts.append(p)
        if len(starts) == n_starts:
            break
    return starts


def _zoom(s, k, x, y, half=0.05, levels=ZOOM_LEVELS, n=11):
    """Shrinking-window grid ascent in (x, y); windows are clipped to [-1, 1]."""
    for _ in range(levels):
        gx = np.linspace(max(-1.0, x - half), min(1.0, x + half), n)
        gy = np.linspace(max(-1.0, y - half), min(1.0, y + half), n)
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        vals, _ = _profile_log_det(s, k, X, Y)
        i = int(np.argmax(vals))
        x, y = float(X.flat[i]), float(Y.flat[i])
        half *= 0.5
    return x, y


def _on_boundary(x, y):
    return x >= 1.0 - BOUNDARY_MARGIN or y <= -1.0 + BOUNDARY_MARGIN


def solve_case_c(s: ShiftedIntensity, k: int, info: Optional[dict] = None) -> Optional[MarginalDesign]:
    """Two interior orbits, or ``None`` when the maximum sits on a pole.

    Coarse grid over ``(x, y, alpha)``; from the best few cells a
    shrinking-window ascent in ``(x, y)`` with alpha profiled out, then
    Newton-type polishing of the full stationarity system.
    """
    best, attempts = None, []
    saw_boundary = False
    seen = []
    for start in _grid_starts(s, k):
        x, y = _zoom(s, k, *start)
        _, a = _profile_log_det(s, k, x, y)
        a = float(a)
        record = {"start": start.tolist(), "ascent": [x, y, a]}
        attempts.append(record)
        if any(abs(x - u) + abs(y - v) < 1e-6 for u, v in seen):
            record["outcome"] = "duplicate"
            continue
        seen.append((x, y))
        if _on_boundary(x, y):
            saw_boundary = True
            record["outcome"] = "boundary"
            continue
        sol = root(lambda p: stationarity_residuals(s, k, *p), [x, y, a], method="hybr",
                   options={"xtol": 1e-13})
        x, y, a = sol.x
        feasible = -1 < y < x < 1 and 0 < a < 1
        resid = (float(np.max(np.abs(stationarity_residuals(s, k, x, y, a))))
                 if feasible else math.inf)
        record.update(polished=sol.x.tolist(), residual=resid)
        if not feasible or resid > STATIONARITY_TOL:
            record["outcome"] = "polish-failed"
            continue
        if _on_boundary(x, y):
            saw_boundary = True
            record["outcome"] = "boundary"
            continue
        record["outcome"] = "interior"
        value = float(log_det_two_point(s, x, y, a, k))
        if best is None or value > best[0]:
            best = (value, x, y, a, resid)
    if info is not None:
        info["attempts"] = attempts
    if best is not None:
        if info is not None:
            info["residual"] = best[4]
        return MarginalDesign.two_point(best[1], best[2], best[3])
    if saw_boundary:
        return None
    raise ConvergenceError("no interior stationary point and no boundary maximum found",
                           {"attempts": attempts})


# -- beta1 = 0 ---------------------------------------------------------------


def degenerate_marginal(k: int) -> MarginalDesign:
    """x1-marginal of a regular simplex with one vertex at ``e1``."""
    if k == 1:
        return MarginalDesign([1.0, -1.0], [0.5, 0.5])
    return MarginalDesign([1.0, -1.0 / k], [1.0 / (k + 1), k / (k + 1)])


def solve_degenerate(k: int) -> ExactDesign:
    """Equally weighted regular simplex inscribed in the unit sphere."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pole = np.zeros((1, k))
    pole[0, 0] = 1.0
    ring = orbit_vertices(k, -1.0 if k == 1 else -1.0 / k, "simplex").points
    pts = np.vstack([pole, ring])
    return ExactDesign(pts, np.full(k + 1, 1.0 / (k + 1)))


# -- dispatcher --------------------------------------------------------------


@dataclass
class SolveReport:
    case: CaseLabel
    marginal: MarginalDesign
    log_det: float
    kw_max: float
    kw_argmax: float
    kw_pass: bool
    k: int
    model: IntensityModel
    beta: np.ndarray
    problem: CanonicalProblem
    diagnostics: dict = field(default_factory=dict)

    @property
    def shifted(self) -> ShiftedIntensity:
        return ShiftedIntensity(self.model, self.problem.beta0, self.problem.beta1_tilde)

    @property
    def interior(self) -> bool:
        """Both support levels strictly inside (-1, 1)."""
        return bool(np.all(np.abs(self.marginal.points) < 1.0 - BOUNDARY_MARGIN))

    def to_dict(self) -> dict:
        return {
            "model": self.model.name,
            "k": self.k,
            "beta": np.asarray(self.beta).tolist(),
            "canonical": {"beta0": self.problem.beta0, "beta1": self.problem.beta1_tilde,
                          "rotation": self.problem.rotation.tolist()},
            "case": self.case.value,
            "marginal": self.marginal.to_dict(),
            "log_det": self.log_det,
            "kw_max": self.kw_max,
            "kw_argmax": self.kw_argmax,
            "kw_pass": self.kw_pass,
        }


def solve(beta, model="logit", k: Optional[int] = None, *,
          kw_grid: int = DEFAULT_GRID, kw_tol: float = KW_TOL) -> SolveReport:
    """Locally D-optimal rotation-invariant design for ``beta``.

    ``beta = (beta0, beta1, ..., beta_k)`` in the original coordinates. The
    returned marginal lives in the canonical frame; rotate discretized designs
    back with :func:`balldesign.equivariance.push_forward`.
    """
    model = get_model(model)
    beta = np.asarray(beta, dtype=float).ravel()
    if k is not None and beta.size != k + 1:
        raise ValueError(f"beta has length {beta.size}, expected k + 1 = {k + 1}")
    problem = canonicalize(beta)
    k = problem.k
    s = ShiftedIntensity(model, problem.beta0, problem.beta1_tilde)
    case = classify(s, k)
    diagnostics: dict = {}

    if case is CaseLabel.DEGENERATE:
        candidates = {"degenerate": degenerate_marginal(k)}
    else:
        diagnostics["c_q"] = s.mode
        candidates = {}
        wanted = {CaseLabel.A: ("A",), CaseLabel.B: ("B",), CaseLabel.C: ("C", "A", "B")}[case]
        for form in wanted:
            info: dict = {}
            diagnostics[form] = info
            try:
                if form == "A":
                    design = solve_case_a(s, k, info)
                elif form == "B":
                    design = solve_case_b(s, k, info)
                else:
                    design = solve_case_c(s, k, info)
            except ConvergenceError as exc:
                if case is not CaseLabel.C:
                    raise
                info["error"] = str(exc)
                continue
            if design is not None:
                candidates[form] = design
        if not candidates:
            raise ConvergenceError("no candidate design found", diagnostics)

    scored = {name: marginal_log_det(s, d, k) for name, d in candidates.items()}
    diagnostics["candidate_log_det"] = scored
    chosen = max(scored, key=scored.get)
    diagnostics["chosen"] = chosen
    marginal = candidates[chosen]

    kw = kw_check(s, marginal, k, grid_size=kw_grid, tol=kw_tol)
    if not kw.passed:
        log.warning("design fails the equivalence check: max psi %.9g > %d at x1 = %.6f",
                    kw.max_psi, k + 1, kw.argmax_x1)
    return SolveReport(case=case, marginal=marginal, log_det=scored[chosen],
                       kw_max=kw.max_psi, kw_argmax=kw.argmax_x1, kw_pass=kw.passed,
                       k=k, model=model, beta=beta, problem=problem,
                       diagnostics=diagnostics)


def asymptotic_inner_point(beta1: float, k: int, model="logit") -> float:
    """Limit of the logit inner support level as ``|beta0| -> inf`` (case A side)."""
    if get_model(model).name != "logit":
        raise ValueError("the closed-form limit is only known for the logit model")
    if beta1 < 0 or k < 1:
        raise ValueError("need beta1 >= 0 and k >= 1")
    if beta1 == 0:
        return -1.0 / k
    disc = 1.0 - 2.0 * beta1 / k + beta1 * beta1
    if disc < 0:
        raise ValueError("negative discriminant")
    return (-1.0 + math.sqrt(disc)) / beta1
