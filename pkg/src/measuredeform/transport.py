"""Mollified mass-transport pipeline on the line.

For a positive measure mu and an admissible derivative direction eta, smooth
both with one scaled mollifier per epsilon and solve the smoothed continuity
equation g_eps + (f_eps v_eps)' = 0 exactly by cumulative integration:
f_eps v_eps = -G with G the running integral of g_eps.  The velocity is only
meaningful where f_eps carries mass, so it is defined on the mask
{f_eps > tau max f_eps} and zero outside; a running integral that fails to
vanish over a massless gap means no compactly supported solution exists there
and is reported as an error rather than divided through.

Also provides empirical scaling diagnostics for families over an epsilon
ladder: growth exponents c / eps^N by log-log fit, negligibility tail tests,
and association against a target distribution.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .distributions import (
    RadonMeasureSpec,
    StructuredDistribution,
    SupportSet,
    convolve_mollifier,
    pair,
    support_of,
)
from .errors import DomainError, EvaluationError, NoCompactSolutionError, SupportViolationError
from .mollifier import Mollifier, ScaledMollifier
from .numerics import GridFunction
from .smoothfn import SmoothFn

DEFAULT_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)
MASK_TAU = 1e-8
BALANCE_TOL = 1e-8
POINTS_PER_EPS = 5000  # grid samples per mollifier support half-width
RESIDUAL_TOL = 1e-6


def _common_grid(mu: RadonMeasureSpec, psi_eps: ScaledMollifier, points_per_eps: int):
    supp = mu.support
    if supp.is_empty():
        raise DomainError("measure carries no mass")
    lo, hi = supp.bounds()
    pad = 1.25 * psi_eps.support
    lo, hi = lo - pad, hi + pad
    h = psi_eps.support / points_per_eps
    n = int(np.ceil((hi - lo) / h)) + 1
    return lo, hi, max(n, 65)


def smooth_measure(
    mu: RadonMeasureSpec,
    psi: Mollifier,
    eps: float,
    points_per_eps: int = POINTS_PER_EPS,
    grid: Optional[Tuple[float, float, int]] = None,
) -> GridFunction:
    """f_eps = psi_eps * mu: nonnegative, unit mass for a probability mu."""
    psi_eps = ScaledMollifier(psi, eps)
    if grid is None:
        grid = _common_grid(mu, psi_eps, points_per_eps)
    lo, hi, n = grid
    x = np.linspace(lo, hi, n)
    vals = np.zeros(n)
    for p, m in mu.point_masses:
        vals += m * psi_eps(x - p)
    if mu.density is not None:
        d = mu.density
        if d.uniform_height is not None:
            vals += d.uniform_height * (
                psi_eps.antiderivative(x - d.lo) - psi_eps.antiderivative(x - d.hi)
            )
        else:
            gf = convolve_mollifier(psi_eps, StructuredDistribution(density=d))
            vals += gf.interpolate(x)
    return GridFunction(lo, hi, vals)


def smooth_distribution(
    eta: StructuredDistribution,
    psi: Mollifier,
    eps: float,
    mu_support: SupportSet,
    points_per_eps: int = POINTS_PER_EPS,
    grid: Optional[Tuple[float, float, int]] = None,
) -> GridFunction:
    """g_eps = psi_eps * eta, after checking supp(eta) inside supp(mu)."""
    psi_eps = ScaledMollifier(psi, eps)
    for p, k, c in eta.atoms:
        if not mu_support.contains(p, tol=1e-12):
            raise SupportViolationError(
                f"atom (p={p:g}, k={k}, c={c:g}) lies outside the measure support"
            )
    if eta.density is not None:
        dens_supp = SupportSet(((eta.density.lo, eta.density.hi),))
        if not dens_supp.within(mu_support):
            raise SupportViolationError("density support is not contained in the measure support")
    if grid is None:
        gf = convolve_mollifier(psi_eps, eta, points_per_eps=points_per_eps)
        return gf
    lo, hi, n = grid
    x = np.linspace(lo, hi, n)
    vals = np.zeros(n)
    for p, k, c in eta.atoms:
        vals += c * psi_eps.deriv(x - p, k)
    if eta.density is not None:
        gf = convolve_mollifier(psi_eps, StructuredDistribution(density=eta.density))
        vals += gf.interpolate(x)
    return GridFunction(lo, hi, vals)


def solve_velocity(
    f_eps: GridFunction, g_eps: GridFunction, tau: float = MASK_TAU
) -> GridFunction:
    """Solve g + (f v)' = 0 for v: f v = -G with G the running integral of g.

    v is -G/f on the mask {f > tau max f} and 0 elsewhere.  Raises when G
    fails to vanish at the right end (no compactly supported solution: the
    distribution moves total mass) or over an off-mask gap (mass would have to
    cross a region that carries none).
    """
    if (f_eps.x_lo, f_eps.x_hi, f_eps.n) != (g_eps.x_lo, g_eps.x_hi, g_eps.n):
        raise DomainError("f and g must share one grid")
    sup_g = g_eps.sup_abs()
    G = g_eps.cumulative()
    if sup_g == 0.0:
        return GridFunction(f_eps.x_lo, f_eps.x_hi, np.zeros(f_eps.n))
    balance_tol = BALANCE_TOL * sup_g
    if abs(G.values[-1]) > balance_tol:
        raise NoCompactSolutionError(
            f"running integral ends at {G.values[-1]:.3g}; the direction changes total mass"
        )
    mask = f_eps.values > tau * np.max(f_eps.values)
    off_mask_G = np.abs(G.values[~mask])
    if off_mask_G.size and float(np.max(off_mask_G)) > balance_tol:
        raise SupportViolationError(
            "running integral does not vanish over a gap with no mass"
        )
    v = np.where(mask, -G.values / np.where(mask, f_eps.values, 1.0), 0.0)
    return GridFunction(f_eps.x_lo, f_eps.x_hi, v)


def continuity_residual(
    f_eps: GridFunction, g_eps: GridFunction, v_eps: GridFunction, tau: float = MASK_TAU
) -> float:
    """Sup over the mask of |g + (f v)'|, with a discrete product derivative.

    The sup excludes the outermost stencil-halfwidth of the mask: v is cut to
    zero below the mask threshold, so a derivative stencil crossing the mask
    edge would see that artificial jump rather than the solved flux.
    """
    mask = f_eps.values > tau * np.max(f_eps.values)
    core = mask.copy()
    for shift in range(1, 4):
        core[shift:] &= mask[:-shift]
        core[:-shift] &= mask[shift:]
    flux_rate = (f_eps * v_eps).derivative()
    res = g_eps.values + flux_rate.values
    return float(np.max(np.abs(res[core]))) if core.any() else 0.0


@dataclass(frozen=True, eq=False)
class EpsSlice:
    eps: float
    f: GridFunction
    g: GridFunction
    v: GridFunction
    mask: np.ndarray = field(repr=False)
    residual: float
    sup_v: float


@dataclass(frozen=True, eq=False)
class VelocityRepresentative:
    """Per-epsilon smoothed data and velocity fields along a ladder."""

    ladder: Tuple[float, ...]
    slices: Tuple[EpsSlice, ...]

    def slice_at(self, eps: float) -> EpsSlice:
        for s in self.slices:
            if s.eps == eps:
                return s
        raise KeyError(f"no slice at eps={eps}")


def velocity_representative(
    mu: RadonMeasureSpec,
    eta: StructuredDistribution,
    psi: Mollifier,
    ladder: Sequence[float] = DEFAULT_LADDER,
    points_per_eps: int = POINTS_PER_EPS,
    tau: float = MASK_TAU,
    jobs: int = 1,
) -> VelocityRepresentative:
    """Run the full pipeline for each epsilon in the (decreasing) ladder."""
    ladder = tuple(float(e) for e in ladder)
    if not ladder or any(not 0 < e < 1 for e in ladder):
        raise DomainError("epsilon ladder must lie in (0, 1)")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise DomainError("epsilon ladder must be strictly decreasing")

    def run_one(eps: float) -> EpsSlice:
        psi_eps = ScaledMollifier(psi, eps)
        grid = _common_grid(mu, psi_eps, points_per_eps)
        f = smooth_measure(mu, psi, eps, grid=grid)
        g = smooth_distribution(eta, psi, eps, mu.support, grid=grid)
        v = solve_velocity(f, g, tau=tau)
        res = continuity_residual(f, g, v, tau=tau)
        mask = f.values > tau * np.max(f.values)
        sup_g = g.sup_abs()
        if sup_g > 0 and res > RESIDUAL_TOL * sup_g:
            raise EvaluationError(
                f"continuity residual {res:.3g} exceeds {RESIDUAL_TOL:g} * sup|g| at eps={eps}"
            )
        return EpsSlice(eps, f, g, v, mask, res, float(np.max(np.abs(v.values))))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            slices = tuple(pool.map(run_one, ladder))
    else:
        slices = tuple(run_one(e) for e in ladder)
    return VelocityRepresentative(ladder, slices)


@dataclass(frozen=True)
class ExponentFit:
    c: float
    N_fit: float
    r_squared: float


def moderateness_estimate(
    family: Sequence[Tuple[float, GridFunction]],
    K: Tuple[float, float],
    order: int = 0,
) -> ExponentFit:
    """Fit sup_K |d^order f_eps| ~ c / eps^N by least squares in log-log."""
    if len(family) < 5:
        raise DomainError("need at least 5 ladder points")
    eps = np.array([e for e, _ in family], dtype=float)
    if np.log10(eps.max() / eps.min()) < 1.5:
        raise DomainError("ladder must span at least 1.5 decades")
    sups = []
    for _, gf in family:
        d = gf.derivative(order) if order > 0 else gf
        sups.append(d.sup_abs(K[0], K[1]))
    sups = np.array(sups)
    if not np.all(np.isfinite(sups)) or np.any(sups <= 0):
        raise EvaluationError("sup values are not finite and positive; cannot fit")
    xs = -np.log(eps)
    ys = np.log(sups)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    # a flat family has no variance to explain; report a perfect fit
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-24 else 1.0
    return ExponentFit(float(np.exp(intercept)), float(slope), r2)


def negligibility_test(
    family: Sequence[Tuple[float, GridFunction]],
    K: Tuple[float, float],
    order: int = 0,
    q_max: int = 3,
    growth_slack: float = 1.01,
) -> dict[int, bool]:
    """For each q <= q_max, whether sup_K |d^order f_eps| / eps^q stays bounded
    as eps shrinks, judged by a non-growing tail along the ladder."""
    eps = np.array([e for e, _ in family], dtype=float)
    sups = []
    for _, gf in family:
        d = gf.derivative(order) if order > 0 else gf
        sups.append(d.sup_abs(K[0], K[1]))
    sups = np.array(sups)
    out = {}
    for q in range(q_max + 1):
        w = sups / eps**q
        if np.all(w <= 1e-300):
            out[q] = True
            continue
        ratios = w[1:] / np.maximum(w[:-1], 1e-300)
        out[q] = bool(np.all(ratios <= growth_slack))
    return out


@dataclass(frozen=True)
class AssociationRow:
    phi_id: str
    residuals: Tuple[Tuple[float, float], ...]  # (eps, |integral - pairing|)
    decreasing_tail: bool


def verify_association(
    family: Sequence[Tuple[float, GridFunction]],
    eta: StructuredDistribution,
    battery: Sequence[Tuple[str, SmoothFn]],
) -> List[AssociationRow]:
    """Residuals |integral(phi f_eps) - <eta, phi>| along the ladder, per phi."""
    rows = []
    for phi_id, phi in battery:
        target = pair(eta, phi)
        residuals = []
        for eps, gf in family:
            integral = float(integrate.simpson(gf.values * np.asarray(phi(gf.x)), dx=gf.h))
            residuals.append((eps, abs(integral - target)))
        vals = np.array([r for _, r in residuals])
        tail_ok = bool(np.all(np.diff(vals) <= 1e-12 + 0.5 * vals[:-1])) and vals[-1] <= max(
            0.5 * vals[0], 1e-12
        )
        rows.append(AssociationRow(phi_id, tuple(residuals), tail_ok))
    return rows
