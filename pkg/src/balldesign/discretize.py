"""Exact designs from rotation-invariant ones.

The uniform distribution on an orbit ``{x : x_1 = t, ||x|| = 1}`` only enters
the information matrix through its first two moments, so it can be replaced
by the equally weighted vertices of any regular polytope that is a tight
frame: regular simplex (k vertices), cross-polytope (2(k-1)) or cube
(2^(k-1)), each inscribed in the (k-1)-sphere of radius ``sqrt(1 - t^2)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ExactDesign, MarginalDesign, exact_log_det, marginal_log_det
from .models import ShiftedIntensity, get_model

__all__ = [
    "POLYTOPES",
    "OrbitDiscretization",
    "simplex_vertices",
    "cross_polytope_vertices",
    "cube_vertices",
    "polytope_vertices",
    "vertex_count",
    "orbit_vertices",
    "random_orthogonal",
    "discretize_design",
    "d_efficiency",
]

POLYTOPES = ("simplex", "cross", "cube")
_ALIASES = {"cross-polytope": "cross", "cross_polytope": "cross", "crosspolytope": "cross"}
MAX_CUBE_DIM = 20
_POLE_TOL = 1e-12


def _kind(name: str) -> str:
    name = _ALIASES.get(name.lower(), name.lower())
    if name not in POLYTOPES + ("point",):
        raise ValueError(f"unknown polytope {name!r}; choose from {POLYTOPES}")
    return name


def simplex_vertices(d: int) -> np.ndarray:
    """The ``d + 1`` vertices of a regular simplex on the unit sphere of R^d.

    Built recursively: one vertex at ``e1`` and a (d-1)-simplex of radius
    ``sqrt(1 - 1/d^2)`` in the hyperplane ``x_1 = -1/d``.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    verts = np.zeros((1, 0))
    for n in range(1, d + 1):
        ring = np.hstack([np.full((n, 1), -1.0 / n), math.sqrt(1.0 - 1.0 / n**2) * verts])
        top = np.zeros((1, n))
        top[0, 0] = 1.0
        verts = np.vstack([top, ring])
    return verts


def cross_polytope_vertices(d: int) -> np.ndarray:
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def cube_vertices(d: int) -> np.ndarray:
    if d > MAX_CUBE_DIM:
        raise ValueError(f"cube in dimension {d} has 2^{d} vertices; limit is {MAX_CUBE_DIM}")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    return signs / math.sqrt(d)


def polytope_vertices(kind: str, d: int) -> np.ndarray:
    kind = _kind(kind)
    if d < 1:
        raise ValueError("polytopes need dimension >= 1")
    if kind == "simplex":
        return simplex_vertices(d)
    if kind == "cross":
        return cross_polytope_vertices(d)
    if kind == "cube":
        return cube_vertices(d)
    raise ValueError("a point is not a polytope in dimension >= 1")


def vertex_count(kind: str, k: int) -> int:
    """Vertices used on one orbit of the k-ball."""
    kind = _kind(kind)
    d = k - 1
    return {"simplex": d + 1, "cross": 2 * d, "cube": 2**d, "point": 1}[kind]


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class OrbitDiscretization:
    x1: float
    radius: float
    polytope: str
    points: np.ndarray

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def orbit_vertices(k: int, x1: float, polytope: str = "simplex",
                   orientation: Optional[np.ndarray] = None) -> OrbitDiscretization:
    """Polytope vertices inscribed in the orbit ``x_1 = x1`` of the unit sphere.

    ``orientation`` is an optional ``(k-1) x (k-1)`` orthogonal matrix applied
    to the canonical embedding. Poles (``|x1| = 1``) collapse to one point.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if abs(x1) > 1.0 + _POLE_TOL:
        raise ValueError("orbit level must lie in [-1, 1]")
    if abs(abs(x1) - 1.0) <= _POLE_TOL:
        pt = np.zeros((1, k))
        pt[0, 0] = math.copysign(1.0, x1)
        return OrbitDiscretization(float(pt[0, 0]), 0.0, "point", pt)
    if k == 1:
        raise ValueError("for k = 1 the sphere is {-1, 1}; interior orbits do not exist")
    kind = _kind(polytope)
    if kind == "point":
        raise ValueError("only the poles |x1| = 1 are single points")
    base = polytope_vertices(kind, k - 1)
    if orientation is not None:
        base = base @ np.asarray(orientation, dtype=float).T
    radius = math.sqrt(1.0 - x1 * x1)
    pts = np.hstack([np.full((base.shape[0], 1), float(x1)), radius * base])
    return OrbitDiscretization(float(x1), radius, kind, pts)


def _decompose(n: int, sizes: dict) -> list:
    """Fewest polytopes whose vertex counts add up to ``n``."""
    best = {0: []}
    for total in range(1, n + 1):
        for kind, size in sizes.items():
            prev = best.get(total - size)
            if prev is not None and (total not in best or len(prev) + 1 < len(best[total])):
                best[total] = prev + [kind]
    if n not in best:
        raise ValueError(f"{n} vertices cannot be split into polytopes of sizes {sorted(set(sizes.values()))}")
    return best[n]


def _orbit_union(k, x1, kinds, rng):
    """Union of polytopes on one orbit; later copies are rotated apart."""
    d = k - 1
    blocks = []
    for j, kind in enumerate(kinds):
        if rng is not None:
            orient = random_orthogonal(d, rng)
        elif j > 0 and d >= 2:
            theta = j * math.pi / (len(kinds) + 1.5)
            orient = np.eye(d)
            orient[:2, :2] = [[math.cos(theta), -math.sin(theta)],
                              [math.sin(theta), math.cos(theta)]]
        else:
            orient = None
        blocks.append(orbit_vertices(k, x1, kind, orient).points)
    return np.vstack(blocks)


def _merge_duplicates(points, weights, tol=1e-12):
    keep_pts, keep_w = [], []
    for p, w in zip(points, weights):
        for i, q in enumerate(keep_pts):
            if np.max(np.abs(p - q)) <= tol:
                keep_w[i] += w
                break
        else:
            keep_pts.append(p)
            keep_w.append(w)
    return np.array(keep_pts), np.array(keep_w)


def _available(k):
    sizes = {"simplex": vertex_count("simplex", k), "cross": vertex_count("cross", k)}
    if k - 1 <= MAX_CUBE_DIM:
        sizes["cube"] = vertex_count("cube", k)
    return sizes


def discretize_design(marginal: MarginalDesign, k: int, strategy: str = "auto", *,
                      shifted: Optional[ShiftedIntensity] = None,
                      vertex_counts: Optional[Sequence[int]] = None,
                      equal_weights: bool = True,
                      seed: Optional[int] = None) -> ExactDesign:
    """Replace every orbit of ``marginal`` by polytope vertices.

    Parameters
    ----------
    strategy : {"auto", "simplex", "cross", "cube"}
        Polytope used on the non-polar orbits. ``"auto"`` tries every
        assignment and keeps the one whose equal-weight rounding loses the
        least D-efficiency (this needs ``shifted``; without it the weight
        mismatch is minimized instead). Ties go to fewer points.
    vertex_counts : sequence of int, optional
        Explicit number of points per orbit, in the marginal's (decreasing)
        order. Counts that are sums of polytope sizes become unions of
        polytopes. Overrides ``strategy``.
    equal_weights : bool
        True gives the implementable design with weight ``1/N`` on each of
        the ``N`` points; False splits each orbit's weight over its vertices,
        which reproduces the marginal information exactly.
    seed : int, optional
        Randomizes polytope orientations about the x1-axis.
    """
    rng = np.random.default_rng(seed) if seed is not None else None
    levels, w = marginal.points, marginal.weights
    poles = np.abs(np.abs(levels) - 1.0) <= _POLE_TOL
    if k == 1 and not np.all(poles):
        raise ValueError("for k = 1 every support point must be +1 or -1")
    sizes = _available(k) if k > 1 else {}

    if vertex_counts is not None:
        counts = [int(c) for c in vertex_counts]
        if len(counts) != marginal.size:
            raise ValueError("need one vertex count per support point")
        plan = []
        for c, pole in zip(counts, poles):
            if pole:
                plan.append(["point"])
            else:
                plan.append(_decompose(c, sizes))
    else:
        strategy = strategy.lower()
        interior = [i for i in range(marginal.size) if not poles[i]]
        if strategy == "auto":
            choices = list(sizes)
        else:
            choices = [_kind(strategy)]
            if interior and choices[0] not in sizes:
                raise ValueError(f"{strategy} is unavailable for k = {k}")
        best = None
        for combo in itertools.product(choices, repeat=len(interior)):
            plan = [["point"] for _ in range(marginal.size)]
            for i, kind in zip(interior, combo):
                plan[i] = [kind]
            n = np.array([sum(vertex_count(kd, k) for kd in p) for p in plan], dtype=float)
            if equal_weights:
                rounded = n / n.sum()
                if shifted is not None:
                    score = marginal_log_det(shifted, MarginalDesign(levels, rounded), k)
                else:
                    score = -float(np.abs(rounded - w).sum())
            else:
                score = 0.0
            key = (score, -n.sum())
            if best is None or key > best[0]:
                best = (key, plan)
        plan = best[1]

    pts, wts = [], []
    counts = [sum(vertex_count(kd, k) for kd in p) for p in plan]
    total = float(sum(counts))
    for x1, wi, kinds, c in zip(levels, w, plan, counts):
        block = (orbit_vertices(k, x1).points if kinds == ["point"]
                 else _orbit_union(k, x1, kinds, rng))
        pts.append(block)
        per_point = 1.0 / total if equal_weights else wi / c
        wts.append(np.full(block.shape[0], per_point))
    pts, wts = _merge_duplicates(np.vstack(pts), np.concatenate(wts))
    return ExactDesign(pts, wts)


def d_efficiency(candidate: ExactDesign, optimal_log_det: float, k: int, beta, model) -> float:
    """``(det M(candidate) / det M(optimum)) ** (1/k)``.

    The exponent is ``1/k``, not the more common ``1/(k+1)``.
    """
    ld = exact_log_det(get_model(model), beta, candidate)
    if not math.isfinite(ld):
        return 0.0
    return math.exp((ld - optimal_log_det) / k)
