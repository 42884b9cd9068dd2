"""Decide whether a distribution can be the derivative of a measure family.

A family of positive measures starting at mu admits derivative eta iff
<eta, f> >= 0 for every smooth nonnegative f vanishing on supp(mu); the
two-sided version requires equality.  A fast rule engine decides structured
instances; an independent falsification oracle searches nonnegative test
functions for violations.  The oracle can refute but never certify, so
admissible verdicts rest on the rules, each grounded in the Taylor behaviour
of admissible test functions at points of the support:

  R1  the measure part (density + order-0 atoms) must be >= 0 off supp(mu);
  R2  atoms of order >= 1 strictly outside supp(mu) are inadmissible;
  R3  atoms at interior or non-isolated boundary points are unconstrained
      (every admissible test function is flat there);
  R4  at an isolated support point, test functions vanish to second order
      with free nonnegative quadratic coefficient: order <= 2 is required,
      the order-2 coefficient must be >= 0, orders 0 and 1 are free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .distributions import (
    RadonMeasureSpec,
    StructuredDistribution,
    SupportSet,
    pair,
    support_of,
    total_action_on_one,
)
from .mollifier import Mollifier, build_mollifier
from .smoothfn import SmoothFn, affine_pullback, polynomial_fn

ONE_SIDED = "one_sided"
TWO_SIDED = "two_sided"

REL_TOL = 1e-9
PROB_TOL = 1e-10
POINT_TOL = 1e-12


@dataclass(frozen=True)
class TestFunctionSpec:
    """Parameters of a smooth nonnegative test function vanishing on supp(mu).

    free_bump:   f(x) = bump((x - center) / width); support [center +- width]
                 must avoid supp(mu).
    pinned_bump: f(x) = (x-p)^(2m) (1 + tilt (x-p)) bump((x-p)/width) at an
                 isolated support point p = center; needs |tilt| * width <= 0.9
                 so f stays nonnegative.
    """

    kind: str
    center: float
    width: float
    pin_order: int = 0
    tilt: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free_bump", "pinned_bump"):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.kind == "pinned_bump":
            if self.pin_order < 1:
                raise ValueError("pin order must be >= 1")
            if abs(self.tilt) * self.width > 0.9 + 1e-12:
                raise ValueError("|tilt| * width must be <= 0.9")

    def build(self, bump: SmoothFn) -> SmoothFn:
        """Realize the test function; ``bump`` is a unit bump on [-1, 1]."""
        scaled = affine_pullback(bump, self.width, self.center)
        if self.kind == "free_bump":
            return scaled
        poly = polynomial_fn(_shifted_poly_coeffs(self.center, self.pin_order, self.tilt))
        return poly * scaled


def _shifted_poly_coeffs(p: float, m: int, c: float) -> np.ndarray:
    """Ascending x-coefficients of (x-p)^(2m) (1 + c (x-p))."""
    y = np.array([-p, 1.0])  # x - p
    poly = np.polynomial.polynomial
    return poly.polymul(poly.polypow(y, 2 * m), poly.polyadd([1.0], c * y))


@dataclass(frozen=True)
class Counterexample:
    spec: TestFunctionSpec
    value: float


@dataclass(frozen=True)
class RuleEvent:
    rule: str
    subject: str
    outcome: str  # "ok" | "violated"
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    mode: str
    probability_constraint_ok: Optional[bool] = None
    rule_trace: Tuple[RuleEvent, ...] = ()
    counterexample: Optional[Counterexample] = None

    def violations(self) -> Tuple[RuleEvent, ...]:
        return tuple(e for e in self.rule_trace if e.outcome == "violated")


def scale_of(eta: StructuredDistribution) -> float:
    return max(eta.coefficient_scale(), 1e-300)


def check_probability_constraint(eta: StructuredDistribution) -> bool:
    return abs(total_action_on_one(eta)) <= PROB_TOL * max(1.0, scale_of(eta))


def check_one_sided(mu: RadonMeasureSpec, eta: StructuredDistribution) -> Verdict:
    events = _run_rules(mu, eta, sign=+1)
    ok = all(e.outcome == "ok" for e in events)
    return Verdict(
        admissible=ok,
        mode=ONE_SIDED,
        probability_constraint_ok=check_probability_constraint(eta),
        rule_trace=tuple(events),
    )


def check_two_sided(mu: RadonMeasureSpec, eta: StructuredDistribution) -> Verdict:
    events = _run_rules(mu, eta, sign=+1) + _run_rules(mu, eta.scaled(-1.0), sign=-1)
    ok = all(e.outcome == "ok" for e in events)
    return Verdict(
        admissible=ok,
        mode=TWO_SIDED,
        probability_constraint_ok=check_probability_constraint(eta),
        rule_trace=tuple(events),
    )


def _run_rules(mu: RadonMeasureSpec, eta: StructuredDistribution, sign: int) -> List[RuleEvent]:
    supp = mu.support
    tol = REL_TOL * scale_of(eta)
    label = "+eta" if sign > 0 else "-eta"
    events: List[RuleEvent] = []

    # R1, density part: nonnegative on the open complement of supp(mu)
    if eta.density is not None:
        worst = _density_min_off_support(eta.density, supp)
        if worst < -tol:
            events.append(
                RuleEvent("R1", f"density of {label}", "violated", f"min off-support value {worst:.3g}")
            )
        else:
            events.append(RuleEvent("R1", f"density of {label}", "ok"))

    order2: dict[float, float] = {}
    for p, k, c in eta.atoms:
        where = supp.classify_point(p, POINT_TOL)
        subject = f"{label} atom (p={p:g}, k={k}, c={c:g})"
        if where == "outside":
            if k == 0:
                if c < -tol:
                    events.append(RuleEvent("R1", subject, "violated", "negative mass off support"))
                else:
                    events.append(RuleEvent("R1", subject, "ok"))
            else:
                events.append(RuleEvent("R2", subject, "violated", "derivative atom off support"))
        elif where in ("interior", "boundary"):
            events.append(RuleEvent("R3", subject, "ok", f"{where} point: test functions flat"))
        else:  # isolated support point
            if k > 2:
                events.append(RuleEvent("R4", subject, "violated", "order > 2 at isolated point"))
            elif k == 2:
                order2[p] = order2.get(p, 0.0) + c
            else:
                events.append(RuleEvent("R4", subject, "ok", f"order {k} unconstrained"))
    for p, b in order2.items():
        subject = f"{label} order-2 coefficient at p={p:g}"
        if b < -tol:
            events.append(RuleEvent("R4", subject, "violated", f"b = {b:.3g} < 0"))
        elif abs(b) <= tol:
            events.append(RuleEvent("R4", subject, "ok", "b = 0 boundary case"))
        else:
            events.append(RuleEvent("R4", subject, "ok", f"b = {b:.3g} >= 0"))
    return events


def _density_min_off_support(density, supp: SupportSet, points_per_gap: int = 2000) -> float:
    worst = 0.0
    for lo, hi in supp.complement_components(density.lo, density.hi):
        pad = min((hi - lo) * 1e-9, 1e-12)
        x = np.linspace(lo + pad, hi - pad, points_per_gap)
        if x.size:
            worst = min(worst, float(np.min(density(x))))
    if supp.is_empty() or density.hi < supp.bounds()[0] or density.lo > supp.bounds()[1]:
        x = np.linspace(density.lo, density.hi, points_per_gap)
        worst = min(worst, float(np.min(density(x))))
    return worst


def falsify(
    mu: RadonMeasureSpec,
    eta: StructuredDistribution,
    mode: str = ONE_SIDED,
    budget: int = 10**4,
    seed: int = 0,
    bump: Optional[SmoothFn] = None,
) -> Optional[Counterexample]:
    """Search nonnegative test functions vanishing on supp(mu) for a violation.

    Returns the first candidate whose pairing is < -tol (one-sided) or has
    |pairing| > tol (two-sided), with tol = 1e-9 * scale(eta).  Absence of a
    counterexample is evidence, not proof.  Deterministic for a fixed seed:
    the structured sweep runs in canonical order before the random sweep.
    """
    if mode not in (ONE_SIDED, TWO_SIDED):
        raise ValueError(f"unknown mode {mode!r}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if bump is None:
        bump = _default_bump()
    tol = REL_TOL * scale_of(eta)
    evaluations = 0
    for spec in _candidates(mu, eta, budget, seed):
        if evaluations >= budget:
            break
        evaluations += 1
        f = spec.build(bump)
        value = pair(eta, f)
        if mode == ONE_SIDED and value < -tol:
            return Counterexample(spec, value)
        if mode == TWO_SIDED and abs(value) > tol:
            return Counterexample(spec, value)
    return None


_BUMP_CACHE: dict = {}


def _default_bump() -> SmoothFn:
    if "bump" not in _BUMP_CACHE:
        _BUMP_CACHE["bump"] = build_mollifier(0.5).unit_bump()
    return _BUMP_CACHE["bump"]


def _candidates(
    mu: RadonMeasureSpec, eta: StructuredDistribution, budget: int, seed: int
) -> Iterator[TestFunctionSpec]:
    """Structured sweep, then a seeded random sweep up to the budget."""
    supp = mu.support
    eta_supp = support_of(eta)
    if eta_supp.is_empty():
        lo, hi = (-1.0, 1.0) if supp.is_empty() else supp.bounds()
    else:
        lo, hi = eta_supp.bounds()
    if not supp.is_empty():
        lo = min(lo, supp.bounds()[0])
        hi = max(hi, supp.bounds()[1])
    lo, hi = lo - 1.0, hi + 1.0

    widths = [w for w in (0.5, 0.1, 0.02, 4e-3, 8e-4, 1.6e-4) if w >= 1e-4]
    isolated = [
        p
        for (a, b) in supp.intervals
        if b - a <= 2 * POINT_TOL
        for p in (0.5 * (a + b),)
    ]

    # free bumps centered in the open complement, widths shrunk to fit
    for gap_lo, gap_hi in supp.complement_components(lo, hi):
        centers = np.linspace(gap_lo, gap_hi, 13)[1:-1] if gap_hi > gap_lo else []
        interesting = [p for p, _, _ in eta.atoms if gap_lo < p < gap_hi]
        for q in sorted(set(np.concatenate([centers, interesting]) if len(centers) else interesting)):
            room = min(q - gap_lo, gap_hi - q)
            for w in widths:
                if w < room:
                    yield TestFunctionSpec("free_bump", float(q), float(w))

    # pinned bumps at isolated support points
    for p in isolated:
        room = _distance_to_rest(supp, p)
        for w in widths:
            if w >= room:
                continue
            for m in (1, 2, 3):
                for tilt in (-0.9 / w, -0.45 / w, 0.0, 0.45 / w, 0.9 / w):
                    yield TestFunctionSpec("pinned_bump", float(p), float(w), m, float(tilt))

    rng = np.random.default_rng(seed)
    gaps = supp.complement_components(lo, hi)
    for _ in range(budget):
        if isolated and (not gaps or rng.random() < 0.5):
            p = isolated[rng.integers(len(isolated))]
            room = _distance_to_rest(supp, p)
            w = float(min(room * 0.9, 10.0 ** rng.uniform(-4, -0.3)))
            if w <= 0:
                continue
            m = int(rng.integers(1, 4))
            tilt = float(rng.uniform(-0.9, 0.9) / w)
            yield TestFunctionSpec("pinned_bump", float(p), w, m, tilt)
        elif gaps:
            a, b = gaps[rng.integers(len(gaps))]
            q = float(rng.uniform(a, b))
            room = min(q - a, b - q)
            if room <= 0:
                continue
            w = float(min(room * 0.9, 10.0 ** rng.uniform(-4, -0.3)))
            if w <= 0:
                continue
            yield TestFunctionSpec("free_bump", q, w)


def _distance_to_rest(supp: SupportSet, p: float) -> float:
    dist = np.inf
    for a, b in supp.intervals:
        if abs(a - p) <= POINT_TOL and abs(b - p) <= POINT_TOL:
            continue
        if p < a:
            dist = min(dist, a - p)
        elif p > b:
            dist = min(dist, p - b)
        else:
            return 0.0
    return float(dist)
