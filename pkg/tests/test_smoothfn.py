import numpy as np
import pytest

from measuredeform.errors import UnsupportedOrderError
from measuredeform.smoothfn import (
    affine_pullback,
    constant_fn,
    cos_fn,
    exp_fn,
    monomial_fn,
    polynomial_fn,
    sin_fn,
)


def test_polynomial_derivatives():
    p = polynomial_fn([1.0, -2.0, 0.0, 4.0])  # 1 - 2x + 4x^3
    assert p(0.5) == pytest.approx(1 - 1 + 0.5)
    assert p.deriv(0.5, 1) == pytest.approx(-2 + 12 * 0.25)
    assert p.deriv(0.0, 3) == pytest.approx(24.0)
    assert p.deriv(1.0, 4) == 0.0


def test_trig_derivative_cycle():
    s = sin_fn()
    x = np.linspace(-2, 2, 11)
    np.testing.assert_allclose(s.deriv(x, 1), np.cos(x), atol=1e-15)
    np.testing.assert_allclose(s.deriv(x, 2), -np.sin(x), atol=1e-15)
    np.testing.assert_allclose(cos_fn().deriv(x, 1), -np.sin(x), atol=1e-15)


def test_exp_rate():
    e = exp_fn(3.0)
    assert e.deriv(0.2, 2) == pytest.approx(9.0 * np.exp(0.6), rel=1e-14)


def test_product_leibniz_vs_expanded():
    # (x^2) * (1 + x) == x^2 + x^3, derivatives must agree at every order
    prod = monomial_fn(2) * polynomial_fn([1.0, 1.0])
    direct = polynomial_fn([0.0, 0.0, 1.0, 1.0])
    x = np.linspace(-1.5, 1.5, 7)
    for k in range(5):
        np.testing.assert_allclose(prod.deriv(x, k), direct.deriv(x, k), atol=1e-13)


def test_sum_and_scalar():
    f = 2.0 * sin_fn() + constant_fn(1.0)
    assert f(0.0) == pytest.approx(1.0)
    assert f.deriv(0.0, 1) == pytest.approx(2.0)
    assert (-f)(0.0) == pytest.approx(-1.0)


def test_affine_pullback_chain_rule():
    f = sin_fn()
    g = affine_pullback(f, scale=0.5, shift=1.0)  # sin((x-1)/0.5)
    assert g(1.0) == pytest.approx(0.0, abs=1e-15)
    assert g.deriv(1.0, 1) == pytest.approx(2.0, rel=1e-14)
    assert g.deriv(1.0, 3) == pytest.approx(-8.0, rel=1e-14)


def test_support_tracking(psi):
    bump = psi.unit_bump()
    assert bump.support == (-1.0, 1.0)
    shifted = affine_pullback(bump, scale=0.5, shift=2.0)
    assert shifted.support == (1.5, 2.5)
    prod = shifted * polynomial_fn([1.0])
    assert prod.support == (1.5, 2.5)
    assert shifted(2.0) == pytest.approx(1.0)
    assert shifted(3.0) == 0.0


def test_unit_bump_plateau_and_derivatives(psi):
    bump = psi.unit_bump()
    # plateau on [-r, r] with r = plateau/support
    r = psi.plateau / psi.support
    x = np.linspace(-r, r, 33)
    np.testing.assert_allclose(bump(x), 1.0, atol=0.0)
    assert bump.deriv(0.0, 4) == 0.0
    with pytest.raises(UnsupportedOrderError):
        bump.deriv(0.0, psi.k_max + 1)


def test_product_of_bump_and_poly_jets(psi):
    # phi = (x^2)(1 + 0.3 x) * bump(x/w): jets at 0 come from the polynomial
    bump = affine_pullback(psi.unit_bump(), 0.4)
    phi = polynomial_fn([0.0, 0.0, 1.0, 0.3]) * bump
    assert phi(0.0) == 0.0
    assert phi.deriv(0.0, 1) == pytest.approx(0.0, abs=1e-15)
    assert phi.deriv(0.0, 2) == pytest.approx(2.0, rel=1e-14)
    assert phi.deriv(0.0, 3) == pytest.approx(6 * 0.3, rel=1e-13)
