"""Tangent and normal cones of convex bodies in R^d, and one-sided curves.

Two body types are enough to exercise both phenomena of interest: polytopes
have closed tangent cones, while a ball's tangent cone at a boundary point is
open along the tangent plane, so tangent directions are reachable only as
limits (the curve is then built from chords tilting into the boundary arc).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConstructionError, DomainError

ACTIVE_TOL = 1e-9
DUAL_TOL = 1e-12

IN_TANGENT_CONE = "in_tangent_cone"
IN_CLOSURE_ONLY = "in_closure_only"
OUTSIDE = "outside"


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Bounded nonempty set {x : A x <= b}."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError("A and b row counts differ")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        verts = _enumerate_vertices(A, b)
        if not verts:
            raise ConstructionError("polytope is empty")
        if _has_recession_direction(A):
            raise ConstructionError("polytope is unbounded")
        object.__setattr__(self, "_vertices", tuple(map(tuple, verts)))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def vertices(self) -> np.ndarray:
        return np.asarray(self._vertices, dtype=float)

    def residual(self, x) -> float:
        """Max constraint violation at x (<= 0 means inside)."""
        return float(np.max(self.A @ np.asarray(x, dtype=float) - self.b))

    def contains(self, x, tol: float = ACTIVE_TOL) -> bool:
        return self.residual(x) <= tol

    def active_rows(self, p, tol: float = ACTIVE_TOL) -> np.ndarray:
        res = self.A @ np.asarray(p, dtype=float) - self.b
        return np.where(np.abs(res) <= tol)[0]

    @classmethod
    def box(cls, lows: Sequence[float], highs: Sequence[float]) -> "HPolytope":
        lows = np.asarray(lows, dtype=float)
        highs = np.asarray(highs, dtype=float)
        d = lows.size
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([highs, -lows]))


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray = field(repr=False)
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.size

    def residual(self, x) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center) - self.radius)

    def contains(self, x, tol: float = ACTIVE_TOL) -> bool:
        return self.residual(x) <= tol


ConvexBody = HPolytope | Ball


def _enumerate_vertices(A: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> List[np.ndarray]:
    m, d = A.shape
    verts: List[np.ndarray] = []
    for rows in itertools.combinations(range(m), d):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.max(A @ x - b) <= tol and not any(np.allclose(x, v, atol=1e-9) for v in verts):
            verts.append(x)
    return verts


def _has_recession_direction(A: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff {v != 0 : A v <= 0} is nonempty."""
    m, d = A.shape
    if np.linalg.matrix_rank(A) < d:
        return True  # nontrivial lineality space
    if d == 1:
        return bool(np.all(A.ravel() <= tol) or np.all(A.ravel() >= -tol))
    # the cone is pointed, so if nontrivial it has an extreme ray cut out by
    # d-1 active constraints
    for rows in itertools.combinations(range(m), d - 1):
        sub = A[list(rows)]
        if np.linalg.matrix_rank(sub) < d - 1:
            continue
        _, _, vh = np.linalg.svd(sub)
        v = vh[-1]
        for cand in (v, -v):
            if np.max(A @ cand) <= tol and np.linalg.norm(cand) > 0.5:
                return True
    return False


def normal_functionals(body: ConvexBody, p) -> List[np.ndarray]:
    """Generators of the linear functionals minimized over the body at p."""
    p = np.asarray(p, dtype=float)
    if not body.contains(p):
        raise DomainError(f"point has constraint residual {body.residual(p):.3g} > {ACTIVE_TOL}")
    if isinstance(body, HPolytope):
        return [-body.A[i] for i in body.active_rows(p)]
    gap = body.residual(p)
    if gap < -ACTIVE_TOL:
        return []
    n = (p - body.center) / np.linalg.norm(p - body.center)
    return [-n]


def classify_direction(body: ConvexBody, p, v) -> str:
    """Whether p + t v enters the body for some t > 0, or only in the limit."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if not body.contains(p):
        raise DomainError("base point is not in the body")
    scale = max(1.0, float(np.linalg.norm(v)))
    if isinstance(body, HPolytope):
        active = body.active_rows(p)
        if all(float(body.A[i] @ v) <= DUAL_TOL * scale for i in active):
            return IN_TANGENT_CONE
        return OUTSIDE
    if body.residual(p) < -ACTIVE_TOL or np.linalg.norm(v) == 0.0:
        return IN_TANGENT_CONE
    n = (p - body.center) / np.linalg.norm(p - body.center)
    inward = float(n @ v)
    if inward < -DUAL_TOL * scale:
        return IN_TANGENT_CONE
    if inward <= DUAL_TOL * scale:
        return IN_CLOSURE_ONLY
    return OUTSIDE


@dataclass(frozen=True, eq=False)
class CurveSample:
    """Piecewise-linear curve through points p_j = p + t_j v_j, t_j decreasing."""

    p: np.ndarray
    v: np.ndarray
    times: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def __call__(self, t: float) -> np.ndarray:
        if t <= 0.0:
            return self.p.copy()
        if t >= self.times[0]:
            return self.points[0].copy()
        j = int(np.searchsorted(-self.times, -t, side="right")) - 1
        t_hi, t_lo = self.times[j], self.times[j + 1] if j + 1 < self.times.size else 0.0
        p_hi = self.points[j]
        p_lo = self.points[j + 1] if j + 1 < self.times.size else self.p
        w = (t - t_lo) / (t_hi - t_lo)
        return (1 - w) * p_lo + w * p_hi


def construct_curve(
    body: ConvexBody,
    p,
    v,
    t_start: float = 0.125,
    num_points: int = 28,
    tilt: Optional[Sequence[float]] = None,
) -> CurveSample:
    """Build a curve c with c(0) = p, c(t) in the body, and right derivative v.

    ``tilt`` optionally perturbs the direction used at node j by tilt[j] times
    a fixed unit vector, for studying the convergence rate of the difference
    quotients.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    verdict = classify_direction(body, p, v)
    if verdict == OUTSIDE:
        theta = min(normal_functionals(body, p), key=lambda th: float(th @ v))
        raise DomainError(
            f"direction is outside the solid tangent cone; violating functional {theta}"
        )
    times = t_start * 2.0 ** -np.arange(num_points)

    if verdict == IN_TANGENT_CONE and tilt is None:
        vjs = np.tile(v, (num_points, 1))
        horizon = _max_feasible_step(body, p, v)
        if np.isfinite(horizon) and horizon < times[0]:
            times = horizon * 2.0 ** -np.arange(num_points)
    elif verdict == IN_TANGENT_CONE:
        u = _unit_perp(v)
        vjs = np.array([v + tilt[j] * u for j in range(num_points)])
        feas = [_max_feasible_step(body, p, vj) for vj in vjs]
        times = np.minimum(times, np.minimum.accumulate(np.asarray(feas)))
        times = _strictly_decreasing(times)
    else:
        # ball boundary, tangent direction: chords into the boundary arc
        n = (p - body.center) / np.linalg.norm(p - body.center)
        speed = np.linalg.norm(v)
        vjs = np.empty((num_points, p.size))
        for j, t in enumerate(times):
            half_angle = np.arcsin(min(1.0, np.sqrt(t * speed / (2.0 * body.radius))))
            direction = np.cos(half_angle) * v / speed - np.sin(half_angle) * n
            q = p + 2.0 * body.radius * np.sin(half_angle) * direction
            vjs[j] = v if half_angle == 0.0 else (q - p) / np.linalg.norm(q - p) * speed
        feas = [_max_feasible_step(body, p, vj) for vj in vjs]
        times = np.minimum(times, np.asarray(feas))
        times = _strictly_decreasing(times)

    points = p[None, :] + times[:, None] * vjs
    for pt in points:
        if body.residual(pt) > ACTIVE_TOL:
            raise ConstructionError("curve node left the body")
    return CurveSample(p=p, v=v, times=times, points=points)


def _strictly_decreasing(times: np.ndarray) -> np.ndarray:
    out = times.copy()
    for j in range(1, out.size):
        out[j] = min(out[j], 0.5 * out[j - 1])
    return out


def _unit_perp(v: np.ndarray) -> np.ndarray:
    u = np.zeros_like(v)
    i = int(np.argmin(np.abs(v)))
    u[i] = 1.0
    u = u - (u @ v) * v / max(v @ v, 1e-300)
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        u = np.zeros_like(v)
        u[0] = 1.0
        return u
    return u / nrm


def _max_feasible_step(body: ConvexBody, p: np.ndarray, v: np.ndarray) -> float:
    if isinstance(body, HPolytope):
        slack = body.b - body.A @ p
        rates = body.A @ v
        steps = [s / r for s, r in zip(slack, rates) if r > 1e-14]
        return min(steps) if steps else np.inf
    # ball: largest t with |p + t v - c| <= r
    d = p - body.center
    a = float(v @ v)
    if a == 0.0:
        return np.inf
    bq = float(d @ v)
    cq = float(d @ d) - body.radius**2
    disc = bq * bq - a * cq
    if disc <= 0.0:
        return 0.0
    return max(0.0, (-bq + np.sqrt(disc)) / a)


def verify_curve_derivative(curve: CurveSample, p, v, t_grid) -> Tuple[float, float]:
    """Max quotient error over the grid and the fitted convergence order.

    Errors below 1e-14 are treated as exact and excluded from the rate fit;
    an all-exact grid reports order infinity.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    errs = np.array([np.linalg.norm((curve(t) - p) / t - v) for t in t_grid])
    max_err = float(np.max(errs))
    good = errs > 1e-14
    if good.sum() < 2:
        return max_err, np.inf
    slope = np.polyfit(np.log(t_grid[good]), np.log(errs[good]), 1)[0]
    return max_err, float(slope)
