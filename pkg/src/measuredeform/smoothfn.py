"""Smooth scalar functions with exact derivatives of every tracked order.

Test functions, pairing integrands, and velocity-field checks all need
derivative values that are trustworthy well past the point where finite
differences lose digits, so functions are assembled from primitives with
closed-form derivatives (polynomials, trig/exp, affine pullbacks) combined
through the Leibniz rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import UnsupportedOrderError

Interval = Tuple[float, float]


def _hull(a: Optional[Interval], b: Optional[Interval]) -> Optional[Interval]:
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]))


def _intersect(a: Optional[Interval], b: Optional[Interval]) -> Optional[Interval]:
    if a is None:
        return b
    if b is None:
        return a
    return (max(a[0], b[0]), min(a[1], b[1]))


@dataclass(frozen=True)
class SmoothFn:
    """A real function on the line with evaluable derivatives.

    ``support`` is a conservative compact interval outside which the function
    vanishes identically, or None for functions of full support.  ``max_order``
    bounds the derivative orders that can be requested (None: unlimited).
    """

    eval_fn: Callable[[np.ndarray, int], np.ndarray]
    max_order: Optional[int] = None
    support: Optional[Interval] = None

    def deriv(self, x, order: int = 0):
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        if self.max_order is not None and order > self.max_order:
            raise UnsupportedOrderError(
                f"derivative order {order} exceeds available order {self.max_order}"
            )
        arr = np.asarray(x, dtype=float)
        out = self.eval_fn(np.atleast_1d(arr), order)
        return float(out[0]) if arr.ndim == 0 else out

    def __call__(self, x):
        return self.deriv(x, 0)

    def __neg__(self) -> "SmoothFn":
        return self * (-1.0)

    def __add__(self, other: "SmoothFn") -> "SmoothFn":
        if not isinstance(other, SmoothFn):
            return NotImplemented
        mo = _min_order(self.max_order, other.max_order)

        def ev(x, k):
            return self.eval_fn(x, k) + other.eval_fn(x, k)

        return SmoothFn(ev, mo, _hull(self.support, other.support))

    def __sub__(self, other: "SmoothFn") -> "SmoothFn":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SmoothFn):
            return _leibniz_product(self, other)
        c = float(other)

        def ev(x, k):
            return c * self.eval_fn(x, k)

        return SmoothFn(ev, self.max_order, self.support)

    __rmul__ = __mul__


def _min_order(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _leibniz_product(f: SmoothFn, g: SmoothFn) -> SmoothFn:
    support = _intersect(f.support, g.support)

    def ev(x, k):
        total = np.zeros_like(x, dtype=float)
        for j in range(k + 1):
            total += math.comb(k, j) * f.eval_fn(x, j) * g.eval_fn(x, k - j)
        return total

    return SmoothFn(ev, _min_order(f.max_order, g.max_order), support)


def constant_fn(c: float) -> SmoothFn:
    def ev(x, k):
        return np.full_like(x, c, dtype=float) if k == 0 else np.zeros_like(x, dtype=float)

    return SmoothFn(ev)


def polynomial_fn(coeffs) -> SmoothFn:
    """Polynomial with ``coeffs`` in ascending-power order."""
    base = np.asarray(coeffs, dtype=float)

    def ev(x, k):
        ck = npoly.polyder(base, k) if k > 0 else base
        if ck.size == 0:
            return np.zeros_like(x, dtype=float)
        return npoly.polyval(x, ck)

    return SmoothFn(ev)


def monomial_fn(degree: int, coeff: float = 1.0) -> SmoothFn:
    c = np.zeros(degree + 1)
    c[degree] = coeff
    return polynomial_fn(c)


def sin_fn() -> SmoothFn:
    def ev(x, k):
        return np.sin(x + k * np.pi / 2.0)

    return SmoothFn(ev)


def cos_fn() -> SmoothFn:
    def ev(x, k):
        return np.cos(x + k * np.pi / 2.0)

    return SmoothFn(ev)


def exp_fn(rate: float = 1.0) -> SmoothFn:
    def ev(x, k):
        return rate**k * np.exp(rate * x)

    return SmoothFn(ev)


def affine_pullback(f: SmoothFn, scale: float, shift: float = 0.0) -> SmoothFn:
    """The function x -> f((x - shift) / scale), with exact chain rule."""
    if scale == 0:
        raise ValueError("scale must be nonzero")
    support = None
    if f.support is not None:
        lo = f.support[0] * scale + shift
        hi = f.support[1] * scale + shift
        support = (min(lo, hi), max(lo, hi))

    def ev(x, k):
        return f.eval_fn((x - shift) / scale, k) / scale**k

    return SmoothFn(ev, f.max_order, support)
