"""Plateau mollifiers with exact derivatives of every order up to a cap.

The bump is 1 on [-a, a], 0 outside [-s, s], and on the transition band uses
the classic smooth step built from T(u) = exp(-1/u):

    psi(x) = T(u) / (T(u) + T(1 - u)),   u = (s - |x|) / (s - a).

Derivatives are evaluated in closed form: d^n/du^n T(u) = P_n(1/u) T(u) with
P_0 = 1 and P_{n+1}(y) = y^2 (P_n(y) - P_n'(y)), and the quotient is
differentiated through the Leibniz recurrence.  Downstream moderateness
checks need derivative orders where finite differences are hopeless, so the
closed form is the implementation and finite differences are only a test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate, interpolate, optimize

from .errors import ConstructionError, UnsupportedOrderError
from .numerics import quadrature
from .smoothfn import SmoothFn

# exp(-1/u) underflow guard: beyond this the true values are < 1e-250
_INV_CLAMP = 700.0

DEFAULT_MAX_ORDER = 8


@lru_cache(maxsize=None)
def _exp_inv_polys(k_max: int):
    """Coefficient arrays of P_n, n = 0..k_max, ascending powers of y = 1/u."""
    polys = [np.array([1.0])]
    for _ in range(k_max):
        p = polys[-1]
        q = npoly.polysub(p, npoly.polyder(p))
        polys.append(npoly.polymulx(npoly.polymulx(q)))
    return polys


def _exp_inv_derivs(u: np.ndarray, k_max: int) -> np.ndarray:
    """Rows n = 0..k_max of d^n/du^n exp(-1/u), elementwise over u > 0."""
    u = np.asarray(u, dtype=float)
    y = np.where(u > 0, 1.0 / np.where(u > 0, u, 1.0), np.inf)
    alive = y <= _INV_CLAMP
    ysafe = np.where(alive, y, 0.0)
    base = np.where(alive, np.exp(-ysafe), 0.0)
    out = np.empty((k_max + 1,) + u.shape)
    for n, coeffs in enumerate(_exp_inv_polys(k_max)):
        out[n] = npoly.polyval(ysafe, coeffs) * base
    return out


def _step_derivs(u: np.ndarray, k_max: int) -> np.ndarray:
    """Rows n = 0..k_max of d^n/du^n [T(u) / (T(u) + T(1-u))] on 0 < u < 1."""
    Tu = _exp_inv_derivs(u, k_max)
    Tv = _exp_inv_derivs(1.0 - u, k_max)
    signs = (-1.0) ** np.arange(k_max + 1)
    D = Tu + signs[:, None] * Tv  # derivatives of the denominator
    S = np.empty_like(Tu)
    for n in range(k_max + 1):
        acc = Tu[n].copy()
        for j in range(n):
            acc -= math.comb(n, j) * S[j] * D[n - j]
        S[n] = acc / D[0]
    return S


@dataclass(frozen=True)
class Mollifier:
    """Even plateau bump: 1 on [-plateau, plateau], 0 outside [-support, support]."""

    plateau: float
    support: float
    k_max: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if not 0 < self.plateau < self.support:
            raise ConstructionError("need 0 < plateau < support")

    def deriv(self, x, k: int = 0):
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        if k > self.k_max:
            raise UnsupportedOrderError(f"order {k} exceeds k_max={self.k_max}")
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        ax = np.abs(np.atleast_1d(arr))
        out = np.zeros_like(ax)
        if k == 0:
            out[ax <= self.plateau] = 1.0
        band = (ax > self.plateau) & (ax < self.support)
        if band.any():
            width = self.support - self.plateau
            u = (self.support - ax[band]) / width
            s_derivs = _step_derivs(u, k)
            vals = s_derivs[k] * (-1.0 / width) ** k
            if k % 2 == 1:
                # odd derivatives are odd functions
                vals = vals * np.sign(np.atleast_1d(arr)[band])
            out[band] = vals
        return float(out[0]) if scalar else out

    def __call__(self, x):
        return self.deriv(x, 0)

    def mass(self) -> float:
        return 2.0 * self.plateau + 2.0 * quadrature(self, self.plateau, self.support)

    def sup_abs_deriv(self, k: int, num_points: int = 20001) -> float:
        """Sup over the line of |psi^(k)|, from a dense transition-band grid."""
        if k == 0:
            return 1.0
        return _sup_abs_deriv_cached(self, k, num_points)

    def antiderivative(self, x):
        """Running integral from the left, a smooth 0-to-mass sigmoid."""
        spline = _antiderivative_spline(self)
        arr = np.asarray(x, dtype=float)
        vals = spline(np.clip(np.atleast_1d(arr), -self.support, self.support))
        return float(vals[0]) if arr.ndim == 0 else vals

    def as_smoothfn(self) -> SmoothFn:
        return SmoothFn(
            lambda x, k: np.atleast_1d(self.deriv(x, k)),
            max_order=self.k_max,
            support=(-self.support, self.support),
        )

    def unit_bump(self) -> SmoothFn:
        """The bump rescaled to support exactly [-1, 1] (plateau [-r, r])."""
        s = self.support

        def ev(x, k):
            return np.atleast_1d(self.deriv(x * s, k)) * s**k

        return SmoothFn(ev, max_order=self.k_max, support=(-1.0, 1.0))


@lru_cache(maxsize=256)
def _sup_abs_deriv_cached(moll: "Mollifier", k: int, num_points: int) -> float:
    x = np.linspace(moll.plateau, moll.support, num_points)
    return float(np.max(np.abs(moll.deriv(x, k))))


@lru_cache(maxsize=16)
def _antiderivative_spline(moll: "Mollifier"):
    x = np.linspace(-moll.support, moll.support, 2**16 + 1)
    cum = integrate.cumulative_simpson(moll(x), dx=x[1] - x[0], initial=0.0)
    return interpolate.CubicSpline(x, cum)


@dataclass(frozen=True)
class ScaledMollifier:
    """psi_eps(x) = psi(x / eps) / eps for 0 < eps < 1."""

    base: Mollifier
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ConstructionError("eps must lie in (0, 1)")

    @property
    def support(self) -> float:
        return self.eps * self.base.support

    @property
    def k_max(self) -> int:
        return self.base.k_max

    def deriv(self, x, k: int = 0):
        return self.base.deriv(np.asarray(x, dtype=float) / self.eps, k) / self.eps ** (k + 1)

    def __call__(self, x):
        return self.deriv(x, 0)

    def sup_abs_deriv(self, k: int) -> float:
        return self.base.sup_abs_deriv(k) / self.eps ** (k + 1)

    def antiderivative(self, x):
        return self.base.antiderivative(np.asarray(x, dtype=float) / self.eps)

    def as_smoothfn(self) -> SmoothFn:
        return SmoothFn(
            lambda x, k: np.atleast_1d(self.deriv(x, k)),
            max_order=self.k_max,
            support=(-self.support, self.support),
        )


def build_mollifier(shape_ratio: float, k_max: int = DEFAULT_MAX_ORDER) -> Mollifier:
    """Build the unit-mass plateau bump with plateau = shape_ratio * support.

    The support half-width is fixed by root-finding so that the bump
    integrates to 1.
    """
    if not 0 < shape_ratio < 1:
        raise ConstructionError("shape_ratio must lie in (0, 1)")

    def mass_defect(s: float) -> float:
        return Mollifier(shape_ratio * s, s, k_max).mass() - 1.0

    lo, hi = 0.25 / (1.0 + shape_ratio), 4.0 / (1.0 + shape_ratio)
    try:
        s_star = optimize.brentq(mass_defect, lo, hi, xtol=1e-15, rtol=8.9e-16)
    except ValueError as exc:
        raise ConstructionError("could not normalize the bump to unit mass") from exc
    moll = Mollifier(shape_ratio * s_star, s_star, k_max)
    if abs(moll.mass() - 1.0) > 1e-10:
        raise ConstructionError("normalization missed the unit-mass target")
    return moll
