"""Tangent directions of measure families on the line.

Decides which distributions arise as derivatives of weakly differentiable
families of positive (or probability) measures, builds explicit deforming
families and verifies their derivatives numerically, checks the circle-case
trigonometric-moment tangent criterion, and computes mollified velocity
fields solving the smoothed continuity equation, together with a
finite-dimensional tangent-cone curve demonstrator.
"""

from .admissibility import (
    Counterexample,
    TestFunctionSpec,
    Verdict,
    check_one_sided,
    check_probability_constraint,
    check_two_sided,
    falsify,
)
from .caratheodory import FourierData, fourier_coefficients, tangent_condition, toeplitz_psd
from .cone import (
    Ball,
    CurveSample,
    HPolytope,
    classify_direction,
    construct_curve,
    normal_functionals,
    verify_curve_derivative,
)
from .distributions import (
    Density,
    RadonMeasureSpec,
    StructuredDistribution,
    SupportSet,
    convolve_mollifier,
    pair,
    support_of,
    total_action_on_one,
)
from .families import (
    MeasureFamily,
    delta_family,
    explicit_family,
    jet_battery,
    max_valid_t,
    normalize_to_probability,
    scaling_family,
    verify_weak_derivative,
)
from .mollifier import Mollifier, ScaledMollifier, build_mollifier
from .numerics import GridFunction, quadrature, richardson_one_sided, seminorm
from .transport import (
    VelocityRepresentative,
    moderateness_estimate,
    negligibility_test,
    smooth_distribution,
    smooth_measure,
    solve_velocity,
    velocity_representative,
    verify_association,
)

__version__ = "0.1.0"
