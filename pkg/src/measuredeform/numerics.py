"""Uniform-grid functions, quadrature, seminorms, and one-sided extrapolation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
from scipy import integrate

from .errors import EvaluationError

QUAD_PANELS = 2**12  # default panel count for closed-form integrands


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real function sampled on a uniform grid over [x_lo, x_hi]."""

    x_lo: float
    x_hi: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 9:
            raise ValueError("grid needs at least 9 samples")
        if not self.x_hi > self.x_lo:
            raise ValueError("grid interval must have positive length")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n)

    @classmethod
    def sample(cls, fn, x_lo: float, x_hi: float, n: int) -> "GridFunction":
        x = np.linspace(x_lo, x_hi, n)
        return cls(x_lo, x_hi, np.asarray(fn(x), dtype=float))

    def quadrature(self) -> float:
        return float(integrate.simpson(self.values, dx=self.h))

    def cumulative(self) -> "GridFunction":
        """Running integral from x_lo, same grid, value 0 at the left end."""
        cum = integrate.cumulative_simpson(self.values, dx=self.h, initial=0.0)
        return GridFunction(self.x_lo, self.x_hi, cum)

    def derivative(self, order: int = 1) -> "GridFunction":
        vals = self.values
        for _ in range(order):
            vals = _diff_h6(vals, self.h)
        return GridFunction(self.x_lo, self.x_hi, vals)

    def interpolate(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.x, self.values, left=0.0, right=0.0)

    def sup_abs(self, lo: float | None = None, hi: float | None = None) -> float:
        if lo is None and hi is None:
            return float(np.max(np.abs(self.values)))
        lo = self.x_lo if lo is None else lo
        hi = self.x_hi if hi is None else hi
        mask = (self.x >= lo) & (self.x <= hi)
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.values[mask])))

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.x_lo, self.x_hi, self.values * other.values)
        return GridFunction(self.x_lo, self.x_hi, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.x_lo, self.x_hi, self.values + other.values)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.x_lo, self.x_hi, -self.values)

    def _check_same_grid(self, other: "GridFunction"):
        if (self.x_lo, self.x_hi, self.n) != (other.x_lo, other.x_hi, other.n):
            raise ValueError("grid functions live on different grids")


def _diff_h6(v: np.ndarray, h: float) -> np.ndarray:
    """First derivative, O(h^6) central stencil, one-sided O(h^4) at the edges."""
    n = v.size
    out = np.empty_like(v)
    if n >= 7:
        out[3:-3] = (
            -v[:-6] + 9 * v[1:-5] - 45 * v[2:-4] + 45 * v[4:-2] - 9 * v[5:-1] + v[6:]
        ) / (60 * h)
    for i in (0, 1, 2):
        out[i] = _one_sided4(v, i, h, forward=True)
    for i in (n - 3, n - 2, n - 1):
        out[i] = _one_sided4(v, i, h, forward=False)
    return out


def _one_sided4(v: np.ndarray, i: int, h: float, forward: bool) -> float:
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    if forward:
        w = v[i : i + 5]
        return float(np.dot(c, w)) / h
    w = v[i - 4 : i + 1][::-1]
    return -float(np.dot(c, w)) / h


def quadrature(fn, x_lo: float, x_hi: float, panels: int = QUAD_PANELS) -> float:
    """Composite-Simpson integral of a callable over [x_lo, x_hi].

    An empty interval integrates to 0; reversed endpoints flip the sign.
    """
    if x_lo == x_hi:
        return 0.0
    if x_hi < x_lo:
        return -quadrature(fn, x_hi, x_lo, panels)
    x = np.linspace(x_lo, x_hi, panels + 1)
    y = np.asarray(fn(x), dtype=float)
    return float(integrate.simpson(y, dx=(x_hi - x_lo) / panels))


def seminorm(fn, interval: Tuple[float, float], order: int, num_points: int = 10**4 + 1) -> float:
    """Sum over derivative orders 0..order of the sup of |fn^(k)| on the interval.

    The sup is approximated on a uniform grid of ``num_points`` samples; ``fn``
    must expose exact derivatives through ``deriv(x, k)``.
    """
    lo, hi = interval
    x = np.linspace(lo, hi, num_points)
    total = 0.0
    for k in range(order + 1):
        total += float(np.max(np.abs(fn.deriv(x, k))))
    return total


def richardson_one_sided(
    F: Callable[[float], float],
    t0: float = 0.0,
    direction: int = +1,
    t_start: float = 0.1,
    levels: int = 12,
) -> Tuple[float, float]:
    """One-sided derivative dF/dt at t0 from the given side, by extrapolating
    forward difference quotients on the ladder t_j = t_start * 2**-j.

    Returns (estimate, error_bound) where the bound is the extrapolation
    increment at the noise floor.  Stops early once increments grow for two
    consecutive levels.
    """
    if direction not in (+1, -1):
        raise ValueError("direction must be +1 or -1")
    if levels < 2:
        raise ValueError("need at least 2 ladder levels")
    F0 = float(F(t0))
    if not np.isfinite(F0):
        raise EvaluationError("F(t0) is not finite")

    prev_row: list[float] = []
    best = None
    best_err = np.inf
    prev_diag = None
    prev_inc = None
    grow = 0
    for j in range(levels + 1):
        h = t_start * 2.0**-j
        val = float(F(t0 + direction * h))
        if not np.isfinite(val):
            raise EvaluationError(f"F evaluated to a non-finite value at step {h}")
        row = [(val - F0) / (direction * h)]
        for m in range(1, j + 1):
            fac = 2.0**m
            row.append((fac * row[m - 1] - prev_row[m - 1]) / (fac - 1.0))
        diag = row[-1]
        if prev_diag is not None:
            inc = abs(diag - prev_diag)
            if inc <= best_err:
                best, best_err = diag, inc
            if prev_inc is not None and inc > 4.0 * prev_inc:
                grow += 1
                if grow >= 2:
                    break
            else:
                grow = 0
            prev_inc = inc
        prev_diag = diag
        prev_row = row
    if best is None:
        best, best_err = prev_diag, np.inf
    return float(best), float(best_err)
