import numpy as np
import pytest

from measuredeform.distributions import (
    RadonMeasureSpec,
    StructuredDistribution,
    pair,
    total_action_on_one,
)
from measuredeform.errors import DomainError
from measuredeform.families import (
    MeasureFamily,
    delta_family,
    explicit_density,
    explicit_family,
    jet_battery,
    ladder_table,
    max_valid_t,
    normalize_to_probability,
    scaling_family,
    verify_weak_derivative,
)
from measuredeform.smoothfn import polynomial_fn


class TestExplicitFamily:
    def test_density_at_zero_is_indicator(self, psi):
        fam = explicit_family(k=1, q=0.5, psi=psi)
        rho = fam.at(0.0).density
        x = np.linspace(-0.49, 0.49, 101)
        np.testing.assert_array_equal(rho(x), 1.0)
        assert rho(0.6) == 0.0

    def test_density_nonnegative_at_half_t_max(self, psi):
        fam = explicit_family(k=1, q=0.5, psi=psi)
        rho = fam.at(fam.t_max / 2).density
        assert rho.min_on_grid(10**5) >= 0.0

    def test_positivity_across_validity_interval(self, psi):
        for k in (1, 2):
            fam = explicit_family(k=k, q=0.5, psi=psi)
            for frac in (-0.99, -0.5, 0.25, 0.99):
                rho = fam.at(frac * fam.t_max).density
                assert rho.min_on_grid(10**5) >= -1e-12

    def test_mass_conserved(self, psi):
        fam = explicit_family(k=1, q=0.5, psi=psi)
        for frac in (-0.99, -0.3, 0.0, 0.7, 0.99):
            mass = fam.at(frac * fam.t_max).density.integral()
            assert mass == pytest.approx(1.0, abs=1e-8)

    def test_target_is_kth_derivative_atom(self, psi):
        fam = explicit_family(k=3, q=0.5, psi=psi)
        assert fam.target.atoms == ((0.0, 3, -1.0),)

    def test_out_of_validity_refused(self, psi):
        fam = explicit_family(k=1, q=0.5, psi=psi)
        with pytest.raises(DomainError):
            fam.at(1.01 * fam.t_max)

    def test_density_goes_negative_just_beyond_t_max(self, psi):
        # k=1, q=1/2 is amplitude-bound, so slightly larger |t| dips below 0
        fam = explicit_family(k=1, q=0.5, psi=psi)
        x = np.linspace(-0.5, 0.5, 10**5)
        vals = explicit_density(x, 1.01 * fam.t_max, 1, 0.5, psi)
        assert np.min(vals) < 0.0


class TestMaxValidT:
    def test_positive(self, psi):
        assert max_valid_t(1, 0.5, psi) > 0.0

    def test_amplitude_bound_binds_for_k1(self, psi):
        t = max_valid_t(1, 0.5, psi)
        assert t == pytest.approx(psi.sup_abs_deriv(1) ** -2.0, rel=1e-12)

    def test_grid_positivity_at_099(self, psi):
        t = max_valid_t(1, 0.5, psi)
        x = np.linspace(-0.5, 0.5, 10**5)
        assert np.min(explicit_density(x, 0.99 * t, 1, 0.5, psi)) >= 0.0

    def test_monotone_in_q_for_containment_branch(self, psi):
        # with k fixed, the containment bound shrinks as q -> 1
        qs = np.linspace(0.55, 0.95, 9)
        half = 0.5
        bounds = [(half / psi.support) ** ((1 + 1) / (1 - q)) for q in qs]
        assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
        # and the full formula respects whichever branch is smaller
        for q in qs:
            t = max_valid_t(1, q, psi)
            assert t <= min(psi.sup_abs_deriv(1) ** (-1.0 / q), bounds[0]) + 1e-15

    def test_parameter_validation(self, psi):
        with pytest.raises(DomainError):
            max_valid_t(0, 0.5, psi)
        with pytest.raises(DomainError):
            max_valid_t(1, 1.0, psi)


class TestDeltaFamily:
    def test_integral_is_point_evaluation(self):
        fam = delta_family()
        phi = polynomial_fn([1.0, 2.0, 3.0])
        got = fam.at(0.3).integrate(phi)
        assert got == pytest.approx(phi(0.3))

    def test_flat_quadratic_has_zero_derivative(self, psi):
        fam = delta_family()
        phi = polynomial_fn([0.0, 0.0, 1.0])
        rows = verify_weak_derivative(fam, [("x2", phi)])
        assert rows[0].estimate == pytest.approx(0.0, abs=1e-10)

    def test_recovers_slope_three(self):
        fam = delta_family()
        phi = polynomial_fn([0.0, 3.0, 5.0, -1.0])
        rows = verify_weak_derivative(fam, [("p", phi)])
        assert rows[0].estimate == pytest.approx(3.0, abs=1e-8)
        assert rows[0].target == pytest.approx(3.0)

    def test_battery_accuracy(self, psi):
        fam = delta_family()
        battery = jet_battery(psi, 10, seed=3, ensure_order=1)
        rows = verify_weak_derivative(fam, battery)
        assert max(r.abs_err for r in rows) <= 1e-8

    def test_left_derivative_matches(self, psi):
        fam = delta_family()
        battery = jet_battery(psi, 4, seed=5, ensure_order=1)
        rows = verify_weak_derivative(fam, battery, side="-")
        assert max(r.abs_err for r in rows) <= 1e-8


class TestScalingFamily:
    def test_mass_growth_derivative(self, psi):
        fam = scaling_family(RadonMeasureSpec.point(0.0), 2.0)
        phi = jet_battery(psi, 1, seed=0)[0][1]
        row = verify_weak_derivative(fam, [("p", phi)])[0]
        assert row.estimate == pytest.approx(2.0 * phi(0.0), abs=1e-10)
        assert row.target == pytest.approx(2.0 * phi(0.0), abs=1e-12)

    def test_zero_rate(self, psi):
        fam = scaling_family(RadonMeasureSpec.uniform(-0.5, 0.5), 0.0)
        phi = jet_battery(psi, 1, seed=1)[0][1]
        row = verify_weak_derivative(fam, [("p", phi)])[0]
        assert row.estimate == pytest.approx(0.0, abs=1e-12)

    def test_validity_interval(self):
        fam = scaling_family(RadonMeasureSpec.point(0.0), -2.0)
        with pytest.raises(DomainError):
            fam.at(0.6)


class TestNormalization:
    def test_explicit_family_unchanged(self, psi):
        fam = explicit_family(k=1, q=0.5, psi=psi)
        norm = normalize_to_probability(fam)
        assert norm.target.atoms == fam.target.atoms
        phi = jet_battery(psi, 1, seed=2, ensure_order=1)[0][1]
        a = fam.pairing_increment(phi, fam.t_max / 8)
        b = norm.pairing_increment(phi, fam.t_max / 8)
        assert a == pytest.approx(b, rel=1e-10)

    def test_scaling_family_becomes_constant(self, psi):
        fam = normalize_to_probability(scaling_family(RadonMeasureSpec.point(0.0), 2.0))
        phi = jet_battery(psi, 1, seed=0)[0][1]
        row = verify_weak_derivative(fam, [("p", phi)])[0]
        assert row.estimate == pytest.approx(0.0, abs=1e-12)
        assert row.target == pytest.approx(0.0, abs=1e-12)

    def test_mass_transfer_direction(self, psi):
        # mu_t = delta_0 + t delta_1, one-sided; normalized derivative is
        # delta_1 - delta_0 with zero total action
        fam = MeasureFamily(
            target=StructuredDistribution.delta(1.0, 0, 1.0),
            t_max=1.0,
            two_sided=False,
            at=lambda t: RadonMeasureSpec(point_masses=((0.0, 1.0), (1.0, t))),
            pairing_increment=lambda phi, t: t * float(np.asarray(phi(1.0))),
            mass_at=lambda t: 1.0 + t,
        )
        norm = normalize_to_probability(fam)
        assert norm.target.atoms == ((0.0, 0, -1.0), (1.0, 0, 1.0))
        assert total_action_on_one(norm.target) == pytest.approx(0.0, abs=1e-14)
        phi = polynomial_fn([0.5, -0.25, 0.125])
        row = verify_weak_derivative(norm, [("p", phi)])[0]
        assert row.abs_err <= 1e-9

    def test_one_sidedness_respected(self):
        fam = MeasureFamily(
            target=StructuredDistribution.delta(1.0, 0, 1.0),
            t_max=1.0,
            two_sided=False,
            at=lambda t: RadonMeasureSpec(point_masses=((0.0, 1.0), (1.0, t))),
            pairing_increment=lambda phi, t: t * float(np.asarray(phi(1.0))),
        )
        with pytest.raises(DomainError):
            verify_weak_derivative(fam, [("p", polynomial_fn([1.0]))], side="-")


class TestWeakDerivativeVerifier:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_explicit_family_battery(self, psi, k):
        fam = explicit_family(k=k, q=0.5, psi=psi)
        battery = jet_battery(psi, 10, seed=10 + k, ensure_order=k)
        rows = verify_weak_derivative(fam, battery)
        for r in rows:
            assert r.abs_err <= 1e-2 * abs(r.target)

    def test_explicit_family_left_side(self, psi):
        fam = explicit_family(k=2, q=0.5, psi=psi)
        battery = jet_battery(psi, 4, seed=40, ensure_order=2)
        rows = verify_weak_derivative(fam, battery, side="-")
        for r in rows:
            assert r.abs_err <= 1e-2 * abs(r.target)

    def test_explicit_targets_are_prescribed_jets(self, psi):
        # pairing <(-1)^k d^k delta_0, phi> = phi^(k)(0), an exact jet
        fam = explicit_family(k=2, q=0.5, psi=psi)
        battery = jet_battery(psi, 5, seed=21, ensure_order=2)
        for phi_id, phi in battery:
            assert pair(fam.target, phi) == pytest.approx(phi.deriv(0.0, 2), rel=1e-13)

    def test_ladder_table_shape(self, psi):
        fam = delta_family()
        battery = jet_battery(psi, 2, seed=0)
        rows = ladder_table(fam, battery, levels=5)
        assert len(rows) == 2 * 6
        ts = sorted({t for t, _, _ in rows}, reverse=True)
        assert ts[0] == pytest.approx(0.1) and len(ts) == 6
