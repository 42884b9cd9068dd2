"""Explicit weakly differentiable measure families and a derivative verifier.

Each family exposes, besides a plain sampler t -> measure, a cancellation-free
``pairing_increment(phi, t)`` equal to the integral of phi against mu_t minus
its value at t = 0.  Difference quotients built from increments avoid the
catastrophic loss of digits that hits F(t) - F(0) once t is deep in the
extrapolation ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .distributions import (
    Density,
    RadonMeasureSpec,
    StructuredDistribution,
    pair,
)
from .errors import DomainError
from .mollifier import Mollifier
from .numerics import quadrature, richardson_one_sided
from .smoothfn import SmoothFn, affine_pullback, polynomial_fn

INCREMENT_QUAD_POINTS = 2**17  # panels for the moving-perturbation integrals


@dataclass(frozen=True, eq=False)
class MeasureFamily:
    """A family t -> mu_t with a declared derivative at t = 0."""

    target: StructuredDistribution
    t_max: float
    two_sided: bool
    at: Callable[[float], RadonMeasureSpec] = field(repr=False)
    pairing_increment: Callable[[SmoothFn, float], float] = field(repr=False)
    mass_at: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def check_t(self, t: float):
        if abs(t) > self.t_max or (t < 0.0 and not self.two_sided):
            raise DomainError(f"t={t:g} outside validity interval (t_max={self.t_max:g})")

    def mass(self, t: float) -> float:
        if self.mass_at is not None:
            return self.mass_at(t)
        return self.at(t).total_mass()


def max_valid_t(k: int, q: float, psi: Mollifier, U: Tuple[float, float] = (-0.5, 0.5)) -> float:
    """Largest |t| keeping the perturbed density nonnegative and inside U.

    The amplitude bound keeps |t|^q sup|psi^(k)| <= 1; the containment bound
    keeps the rescaled perturbation support inside U.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if not 0 < q < 1:
        raise DomainError("q must lie in (0, 1)")
    half_width = min(-U[0], U[1])
    if half_width <= 0:
        raise DomainError("U must contain 0 in its interior")
    t_amp = psi.sup_abs_deriv(k) ** (-1.0 / q)
    t_cont = (half_width / psi.support) ** ((k + 1.0) / (1.0 - q))
    return min(t_amp, t_cont)


def explicit_density(
    x, t: float, k: int, q: float, psi: Mollifier, U: Tuple[float, float] = (-0.5, 0.5)
):
    """Density of the uniform measure on U carrying a shrinking k-th derivative
    perturbation of size |t|^q at scale |t|^((1-q)/(k+1))."""
    x = np.asarray(x, dtype=float)
    # closed endpoints: the restriction to the closure of U stays smooth, so
    # quadrature over the support sees no jump
    vals = np.where((x >= U[0]) & (x <= U[1]), 1.0, 0.0)
    if t != 0.0:
        lam = abs(t) ** ((q - 1.0) / (k + 1.0))
        vals = vals + (-1.0) ** k * np.sign(t) * abs(t) ** q * psi.deriv(lam * x, k)
    return vals


def explicit_family(
    U: Tuple[float, float] = (-0.5, 0.5),
    k: int = 1,
    q: float = 0.5,
    psi: Optional[Mollifier] = None,
) -> MeasureFamily:
    """Two-sided family of probability densities on U whose derivative at 0 is
    the pure k-th derivative atom (-1)^k d^k delta_0."""
    if psi is None:
        from .mollifier import build_mollifier

        psi = build_mollifier(0.5)
    t_max = max_valid_t(k, q, psi, U)
    target = StructuredDistribution.delta(0.0, k, (-1.0) ** k)

    def at(t: float) -> RadonMeasureSpec:
        if abs(t) > t_max:
            raise DomainError(f"|t|={abs(t):g} exceeds t_max={t_max:g}")
        return RadonMeasureSpec(
            density=Density(lambda x: explicit_density(x, t, k, q, psi, U), U[0], U[1])
        )

    def pairing_increment(phi: SmoothFn, t: float) -> float:
        if t == 0.0:
            return 0.0
        if abs(t) > t_max:
            raise DomainError(f"|t|={abs(t):g} exceeds t_max={t_max:g}")
        lam = abs(t) ** ((q - 1.0) / (k + 1.0))
        r = psi.support / lam
        lo, hi = -r, r
        if phi.support is not None:
            lo, hi = max(lo, phi.support[0]), min(hi, phi.support[1])
            if hi <= lo:
                return 0.0
        integral = quadrature(
            lambda x: np.asarray(phi(x), dtype=float) * psi.deriv(lam * x, k),
            lo,
            hi,
            panels=INCREMENT_QUAD_POINTS,
        )
        return (-1.0) ** k * np.sign(t) * abs(t) ** q * integral

    return MeasureFamily(
        target=target,
        t_max=t_max,
        two_sided=True,
        at=at,
        pairing_increment=pairing_increment,
        mass_at=lambda t: 1.0,
    )


def delta_family() -> MeasureFamily:
    """mu_t = unit point mass at t; derivative is -d delta_0."""
    return MeasureFamily(
        target=StructuredDistribution.delta(0.0, 1, -1.0),
        t_max=np.inf,
        two_sided=True,
        at=lambda t: RadonMeasureSpec.point(t),
        pairing_increment=lambda phi, t: float(np.asarray(phi(t))) - float(np.asarray(phi(0.0))),
        mass_at=lambda t: 1.0,
    )


def scaling_family(mu: RadonMeasureSpec, c: float) -> MeasureFamily:
    """mu_t = (1 + c t) mu; derivative is c * mu viewed as a distribution."""
    t_max = np.inf if c == 0.0 else 1.0 / abs(c)

    def at(t: float) -> RadonMeasureSpec:
        factor = 1.0 + c * t
        if factor <= 0.0:
            raise DomainError("scaling factor must stay positive")
        dens = mu.density.scaled(factor) if mu.density is not None else None
        masses = tuple((p, factor * m) for p, m in mu.point_masses)
        return RadonMeasureSpec(dens, masses, mu.declared_support)

    m0 = mu.total_mass()
    return MeasureFamily(
        target=mu.as_distribution().scaled(c),
        t_max=t_max,
        two_sided=True,
        at=at,
        pairing_increment=lambda phi, t: c * t * mu.integrate(phi),
        mass_at=lambda t: (1.0 + c * t) * m0,
    )


def normalize_to_probability(family: MeasureFamily) -> MeasureFamily:
    """Divide each mu_t by its total mass.

    The derivative becomes (eta - <eta,1> mu_0 / m0) / m0; when <eta,1> = 0
    and m0 = 1 it is unchanged.
    """
    m0 = family.mass(0.0)
    if not m0 > 0.0:
        raise DomainError("initial mass must be positive")
    mu0 = family.at(0.0)
    from .distributions import total_action_on_one

    action = total_action_on_one(family.target)
    target = family.target.scaled(1.0 / m0)
    if abs(action) > 0.0:
        target = target + mu0.as_distribution().scaled(-action / m0**2)

    def at(t: float) -> RadonMeasureSpec:
        raw = family.at(t)
        m = family.mass(t)
        if not m > 1e-12:
            raise DomainError("family mass vanished; cannot normalize")
        dens = raw.density.scaled(1.0 / m) if raw.density is not None else None
        masses = tuple((p, mm / m) for p, mm in raw.point_masses)
        return RadonMeasureSpec(dens, masses, raw.declared_support)

    def pairing_increment(phi: SmoothFn, t: float) -> float:
        # (F0 + dF)/(m0 + dm) - F0/m0, written without cancellation
        dF = family.pairing_increment(phi, t)
        dm = family.mass(t) - m0
        F0 = mu0.integrate(phi)
        return (m0 * dF - F0 * dm) / (m0 * (m0 + dm))

    return MeasureFamily(
        target=target,
        t_max=family.t_max,
        two_sided=family.two_sided,
        at=at,
        pairing_increment=pairing_increment,
        mass_at=lambda t: 1.0,
    )


@dataclass(frozen=True)
class DerivativeCheck:
    phi_id: str
    estimate: float
    target: float
    error_bound: float

    @property
    def abs_err(self) -> float:
        return abs(self.estimate - self.target)


def verify_weak_derivative(
    family: MeasureFamily,
    battery: Sequence[Tuple[str, SmoothFn]],
    side: str = "+",
    t_start: Optional[float] = None,
    levels: int = 12,
) -> List[DerivativeCheck]:
    """Richardson-extrapolated derivative of t -> integral of phi d mu_t at 0,
    compared to the declared pairing <target, phi>, per battery function."""
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    direction = +1 if side == "+" else -1
    if direction < 0 and not family.two_sided:
        raise DomainError("family is one-sided; no left derivative")
    if t_start is None:
        t_start = min(family.t_max / 4.0, 0.1)
    rows = []
    for phi_id, phi in battery:
        est, bound = richardson_one_sided(
            lambda t: family.pairing_increment(phi, t) if t != 0.0 else 0.0,
            t0=0.0,
            direction=direction,
            t_start=t_start,
            levels=levels,
        )
        rows.append(DerivativeCheck(phi_id, est, pair(family.target, phi), bound))
    return rows


def ladder_table(
    family: MeasureFamily,
    battery: Sequence[Tuple[str, SmoothFn]],
    side: str = "+",
    t_start: Optional[float] = None,
    levels: int = 12,
) -> List[Tuple[float, str, float]]:
    """Rows (t, phi_id, integral of phi d mu_t) along the extrapolation ladder."""
    direction = +1 if side == "+" else -1
    if t_start is None:
        t_start = min(family.t_max / 4.0, 0.1)
    mu0 = family.at(0.0)
    rows = []
    for phi_id, phi in battery:
        base = mu0.integrate(phi)
        for j in range(levels + 1):
            t = direction * t_start * 2.0**-j
            rows.append((t, phi_id, base + family.pairing_increment(phi, t)))
    return rows


def jet_battery(
    psi: Mollifier,
    size: int = 10,
    seed: int = 0,
    ensure_order: Optional[int] = None,
    width: float = 1.0,
    degree: int = 6,
) -> List[Tuple[str, SmoothFn]]:
    """Smooth compactly supported test functions with prescribed polynomial
    jets at 0: phi = P(x) * bump(x / width), so phi^(j)(0) = P^(j)(0) exactly
    on the bump plateau and pairings against atoms at 0 are analytic.

    ``ensure_order`` keeps |phi^(k)(0)| away from zero so relative errors
    against that jet are well defined.
    """
    rng = np.random.default_rng(seed)
    bump = affine_pullback(psi.unit_bump(), width)
    battery = []
    for i in range(size):
        jets = rng.uniform(-1.0, 1.0, degree + 1)
        if ensure_order is not None:
            sign = 1.0 if rng.random() < 0.5 else -1.0
            jets[ensure_order] = sign * rng.uniform(0.5, 1.5)
        coeffs = [jets[j] / math.factorial(j) for j in range(degree + 1)]
        battery.append((f"phi{i:02d}", polynomial_fn(coeffs) * bump))
    return battery
