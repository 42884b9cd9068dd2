"""Finite-order distributions and positive Radon measures on the line.

A structured distribution is a finite sum of derivative-of-delta atoms plus a
compactly supported density; pairing against a smooth test function uses the
convention <d^k delta_p, f> = (-1)^k f^(k)(p).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .mollifier import ScaledMollifier
from .numerics import GridFunction, quadrature
from .smoothfn import SmoothFn

MERGE_TOL = 0.0  # atoms merge only at exactly equal (location, order)


@dataclass(frozen=True)
class SupportSet:
    """Canonical finite union of disjoint closed intervals (points allowed)."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        ivs = sorted((float(a), float(b)) for a, b in self.intervals)
        for a, b in ivs:
            if b < a:
                raise ValueError("interval endpoints out of order")
        merged: list[Tuple[float, float]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def empty(cls) -> "SupportSet":
        return cls(())

    @classmethod
    def from_pieces(cls, intervals: Iterable[Tuple[float, float]] = (), points: Iterable[float] = ()) -> "SupportSet":
        ivs = [tuple(iv) for iv in intervals]
        ivs.extend((p, p) for p in points)
        return cls(tuple(ivs))

    def is_empty(self) -> bool:
        return not self.intervals

    def bounds(self) -> Tuple[float, float]:
        if self.is_empty():
            raise ValueError("empty support has no bounds")
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(a - tol <= x <= b + tol for a, b in self.intervals)

    def classify_point(self, p: float, tol: float = 1e-12) -> str:
        """One of 'outside', 'isolated', 'interior', 'boundary'.

        'boundary' means an endpoint of a positive-length component, where
        every smooth nonnegative function vanishing on the support has all
        derivatives equal to zero.
        """
        for a, b in self.intervals:
            if p < a - tol or p > b + tol:
                continue
            if b - a <= 2 * tol:
                return "isolated"
            if abs(p - a) <= tol or abs(p - b) <= tol:
                return "boundary"
            return "interior"
        return "outside"

    def pad(self, r: float) -> "SupportSet":
        """Minkowski sum with [-r, r]."""
        return SupportSet(tuple((a - r, b + r) for a, b in self.intervals))

    def union(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(self.intervals + other.intervals)

    def within(self, other: "SupportSet", tol: float = 1e-12) -> bool:
        return all(
            any(oa - tol <= a and b <= ob + tol for oa, ob in other.intervals)
            for a, b in self.intervals
        )

    def complement_components(self, lo: float, hi: float) -> Tuple[Tuple[float, float], ...]:
        """Open intervals of [lo, hi] \\ support (positive length only)."""
        gaps = []
        cursor = lo
        for a, b in self.intervals:
            if a > cursor:
                gaps.append((cursor, min(a, hi)))
            cursor = max(cursor, b)
            if cursor >= hi:
                break
        if cursor < hi:
            gaps.append((cursor, hi))
        return tuple((a, b) for a, b in gaps if b > a)


@dataclass(frozen=True, eq=False)
class Density:
    """Compactly supported piecewise-smooth density given by a callable.

    Uniform (indicator) densities are tagged so that convolutions can use the
    closed form through the mollifier antiderivative instead of a discrete
    convolution with its endpoint-quantization error.
    """

    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    lo: float = 0.0
    hi: float = 1.0
    uniform_height: Optional[float] = None

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("density support must have positive length")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        vals = np.asarray(self.fn(np.atleast_1d(arr)), dtype=float)
        inside = (np.atleast_1d(arr) >= self.lo) & (np.atleast_1d(arr) <= self.hi)
        vals = np.where(inside, vals, 0.0)
        return float(vals[0]) if arr.ndim == 0 else vals

    @classmethod
    def uniform(cls, lo: float, hi: float, height: float = 1.0) -> "Density":
        return cls(lambda x: np.full_like(x, float(height)), lo, hi, uniform_height=float(height))

    @classmethod
    def from_grid(cls, gf: GridFunction) -> "Density":
        return cls(gf.interpolate, gf.x_lo, gf.x_hi)

    def scaled(self, c: float) -> "Density":
        height = None if self.uniform_height is None else c * self.uniform_height
        return Density(lambda x: c * self(x), self.lo, self.hi, uniform_height=height)

    def integral(self) -> float:
        return quadrature(self, self.lo, self.hi)

    def abs_integral(self) -> float:
        return quadrature(lambda x: np.abs(self(x)), self.lo, self.hi)

    def integrate_against(self, phi) -> float:
        lo, hi = self.lo, self.hi
        support = getattr(phi, "support", None)
        if support is not None:
            lo, hi = max(lo, support[0]), min(hi, support[1])
            if hi <= lo:
                return 0.0
        return quadrature(lambda x: self(x) * np.asarray(phi(x), dtype=float), lo, hi)

    def min_on_grid(self, num_points: int = 10**5) -> float:
        x = np.linspace(self.lo, self.hi, num_points)
        return float(np.min(self(x)))


Atom = Tuple[float, int, float]  # (location, derivative order, coefficient)


def _canonical_atoms(atoms: Iterable[Atom]) -> Tuple[Atom, ...]:
    merged: dict[Tuple[float, int], float] = {}
    for p, k, c in atoms:
        k = int(k)
        if k < 0:
            raise ValueError("atom order must be >= 0")
        key = (float(p), k)
        merged[key] = merged.get(key, 0.0) + float(c)
    out = [(p, k, c) for (p, k), c in merged.items() if c != 0.0]
    out.sort(key=lambda a: (a[0], a[1]))
    return tuple(out)


@dataclass(frozen=True)
class StructuredDistribution:
    """Sum of c * d^k delta_p atoms plus an optional compactly supported density."""

    atoms: Tuple[Atom, ...] = ()
    density: Optional[Density] = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", _canonical_atoms(self.atoms))

    @classmethod
    def delta(cls, location: float = 0.0, order: int = 0, coeff: float = 1.0) -> "StructuredDistribution":
        return cls(atoms=((location, order, coeff),))

    @property
    def order(self) -> int:
        return max((k for _, k, _ in self.atoms), default=0)

    def scaled(self, c: float) -> "StructuredDistribution":
        dens = self.density.scaled(c) if self.density is not None else None
        return StructuredDistribution(tuple((p, k, c * a) for p, k, a in self.atoms), dens)

    def __neg__(self) -> "StructuredDistribution":
        return self.scaled(-1.0)

    def __add__(self, other: "StructuredDistribution") -> "StructuredDistribution":
        if self.density is not None and other.density is not None:
            raise ValueError("cannot combine two densities")
        dens = self.density if self.density is not None else other.density
        return StructuredDistribution(self.atoms + other.atoms, dens)

    def coefficient_scale(self) -> float:
        """Sum of |atom coefficients| plus the total variation of the density."""
        total = sum(abs(c) for _, _, c in self.atoms)
        if self.density is not None:
            total += self.density.abs_integral()
        return total

    def is_zero(self) -> bool:
        return not self.atoms and self.density is None


@dataclass(frozen=True)
class RadonMeasureSpec:
    """Positive measure: nonnegative density plus nonnegative point masses.

    ``declared_support`` overrides the computed support; it is meant for
    singular measures known only through the closed set carrying them.
    """

    density: Optional[Density] = None
    point_masses: Tuple[Tuple[float, float], ...] = ()
    declared_support: Optional[SupportSet] = None

    def __post_init__(self):
        masses = tuple((float(p), float(m)) for p, m in self.point_masses)
        object.__setattr__(self, "point_masses", masses)
        for _, m in masses:
            if m < 0:
                raise DomainError("point masses must be nonnegative")
        if self.density is not None and self.density.min_on_grid(10**4) < -1e-12:
            raise DomainError("measure density must be nonnegative")
        if self.declared_support is not None:
            computed = self._computed_support()
            if not computed.within(self.declared_support, tol=1e-12):
                raise DomainError("declared support must contain the measure's mass")

    def _computed_support(self) -> SupportSet:
        pieces = []
        if self.density is not None:
            pieces.append((self.density.lo, self.density.hi))
        return SupportSet.from_pieces(pieces, [p for p, m in self.point_masses if m > 0])

    @property
    def support(self) -> SupportSet:
        if self.declared_support is not None:
            return self.declared_support
        return self._computed_support()

    @classmethod
    def point(cls, location: float = 0.0, mass: float = 1.0) -> "RadonMeasureSpec":
        return cls(point_masses=((location, mass),))

    @classmethod
    def uniform(cls, lo: float, hi: float, height: float = 1.0) -> "RadonMeasureSpec":
        return cls(density=Density.uniform(lo, hi, height))

    def total_mass(self) -> float:
        total = sum(m for _, m in self.point_masses)
        if self.density is not None:
            total += self.density.integral()
        return total

    def integrate(self, phi) -> float:
        total = sum(m * float(np.asarray(phi(p))) for p, m in self.point_masses)
        if self.density is not None:
            total += self.density.integrate_against(phi)
        return total

    def as_distribution(self) -> StructuredDistribution:
        atoms = tuple((p, 0, m) for p, m in self.point_masses)
        return StructuredDistribution(atoms, self.density)


def pair(eta: StructuredDistribution, phi) -> float:
    """The pairing <eta, phi> for a smooth test function phi.

    phi must provide derivatives up to the order of each atom through
    ``deriv(x, k)``; plain callables are accepted for atom-free distributions.
    """
    total = 0.0
    for p, k, c in eta.atoms:
        if k == 0:
            total += c * float(np.asarray(phi(p)))
        else:
            total += c * (-1.0) ** k * float(np.asarray(phi.deriv(p, k)))
    if eta.density is not None:
        total += eta.density.integrate_against(phi)
    return total


def total_action_on_one(eta: StructuredDistribution) -> float:
    """<eta, 1> for compactly supported eta; derivative atoms contribute zero."""
    total = sum(c for _, k, c in eta.atoms if k == 0)
    if eta.density is not None:
        total += eta.density.integral()
    return total


def support_of(obj) -> SupportSet:
    """Canonical support of a StructuredDistribution or RadonMeasureSpec."""
    if isinstance(obj, RadonMeasureSpec):
        return obj.support
    pieces = []
    if obj.density is not None:
        pieces.append((obj.density.lo, obj.density.hi))
    return SupportSet.from_pieces(pieces, [p for p, _, _ in obj.atoms])


def convolve_mollifier(
    psi_eps: ScaledMollifier,
    eta: StructuredDistribution,
    points_per_eps: int = 2000,
    pad: float = 0.0,
) -> GridFunction:
    """Smooth eta by convolution with the scaled mollifier.

    Atoms convolve in closed form, (psi_eps * d^k delta_p)(x) =
    psi_eps^(k)(x - p); the density part uses a discrete convolution.  The
    result is sampled on a grid covering supp(eta) + [-eps*s, eps*s] + pad.
    """
    supp = support_of(eta)
    r = psi_eps.support
    if supp.is_empty():
        return GridFunction(-r - max(pad, r), r + max(pad, r), np.zeros(64))
    lo, hi = supp.bounds()
    lo, hi = lo - r - pad, hi + r + pad
    h_target = r / points_per_eps
    n = max(int(np.ceil((hi - lo) / h_target)) + 1, 65)
    x = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    vals = np.zeros(n)
    for p, k, c in eta.atoms:
        vals += c * psi_eps.deriv(x - p, k)
    dens_part = eta.density
    if dens_part is not None:
        if dens_part.uniform_height is not None:
            vals += dens_part.uniform_height * (
                psi_eps.antiderivative(x - dens_part.lo) - psi_eps.antiderivative(x - dens_part.hi)
            )
        else:
            dens = dens_part(x)
            half = int(np.ceil(r / h))
            kernel = psi_eps(np.arange(-half, half + 1) * h)
            vals += np.convolve(dens, kernel, mode="same") * h
    return GridFunction(lo, hi, vals)
