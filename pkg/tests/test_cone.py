import numpy as np
import pytest

from measuredeform.cone import (
    IN_CLOSURE_ONLY,
    IN_TANGENT_CONE,
    OUTSIDE,
    Ball,
    HPolytope,
    classify_direction,
    construct_curve,
    normal_functionals,
    verify_curve_derivative,
)
from measuredeform.errors import ConstructionError, DomainError


@pytest.fixture(scope="module")
def square():
    return HPolytope.box([0.0, 0.0], [1.0, 1.0])


@pytest.fixture(scope="module")
def ball():
    return Ball(center=[0.0, 0.0], radius=1.0)


class TestBodies:
    def test_square_vertices(self, square):
        verts = {tuple(np.round(v, 9)) for v in square.vertices}
        assert verts == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}

    def test_unbounded_rejected(self):
        with pytest.raises(ConstructionError):
            HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))

    def test_halfline_lineality_rejected(self):
        with pytest.raises(ConstructionError):
            HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, 1.0]))

    def test_empty_rejected(self):
        with pytest.raises(ConstructionError):
            HPolytope(np.array([[1.0], [-1.0]]), np.array([-2.0, 1.0]))

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            Ball(center=[0.0], radius=0.0)

    def test_interval_in_1d(self):
        seg = HPolytope(np.array([[1.0], [-1.0]]), np.array([2.0, 1.0]))
        assert seg.contains([0.0]) and not seg.contains([3.0])


class TestNormalFunctionals:
    def test_square_corner(self, square):
        thetas = {tuple(th) for th in normal_functionals(square, [0.0, 0.0])}
        assert thetas == {(1.0, -0.0), (-0.0, 1.0)} or thetas == {(1.0, 0.0), (0.0, 1.0)}

    def test_ball_interior_empty(self, ball):
        assert normal_functionals(ball, [0.2, 0.1]) == []

    def test_ball_boundary(self, ball):
        (theta,) = normal_functionals(ball, [1.0, 0.0])
        np.testing.assert_allclose(theta, [-1.0, 0.0], atol=1e-14)

    def test_outside_point_rejected(self, square):
        with pytest.raises(DomainError):
            normal_functionals(square, [2.0, 0.0])


class TestClassify:
    def test_square_inward(self, square):
        assert classify_direction(square, [0.0, 0.0], [1.0, 0.0]) == IN_TANGENT_CONE

    def test_square_outward(self, square):
        assert classify_direction(square, [0.0, 0.0], [-1.0, 0.0]) == OUTSIDE

    def test_ball_tangent_is_closure_only(self, ball):
        assert classify_direction(ball, [1.0, 0.0], [0.0, 1.0]) == IN_CLOSURE_ONLY

    def test_ball_outward(self, ball):
        assert classify_direction(ball, [1.0, 0.0], [1.0, 0.0]) == OUTSIDE

    def test_ball_inward(self, ball):
        assert classify_direction(ball, [1.0, 0.0], [-1.0, 0.0]) == IN_TANGENT_CONE

    def test_zero_direction(self, square):
        assert classify_direction(square, [0.0, 0.0], [0.0, 0.0]) == IN_TANGENT_CONE

    def test_dual_consistency(self, square):
        # tangent-cone members satisfy theta(v) >= 0 for every normal functional
        rng = np.random.default_rng(5)
        for _ in range(100):
            v = rng.normal(size=2)
            if classify_direction(square, [0.0, 0.0], v) == IN_TANGENT_CONE:
                for theta in normal_functionals(square, [0.0, 0.0]):
                    assert float(theta @ v) >= -1e-12


class TestCurves:
    def test_linear_curve_exact(self, square):
        curve = construct_curve(square, [0.0, 0.0], [1.0, 1.0])
        max_err, rate = verify_curve_derivative(
            curve, [0.0, 0.0], [1.0, 1.0], 0.1 * 2.0 ** -np.arange(10)
        )
        assert max_err <= 1e-12
        assert rate == np.inf

    def test_ball_boundary_curve(self, ball):
        curve = construct_curve(ball, [1.0, 0.0], [0.0, 1.0], t_start=2.0**-3)
        t_grid = 2.0 ** -np.arange(3, 14)
        p = np.array([1.0, 0.0])
        v = np.array([0.0, 1.0])
        errs = [np.linalg.norm((curve(t) - p) / t - v) for t in t_grid]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        for t in t_grid:
            assert ball.residual(curve(t)) <= 1e-9

    def test_outside_direction_refused_with_certificate(self, square):
        with pytest.raises(DomainError) as err:
            construct_curve(square, [0.0, 0.0], [-1.0, 0.0])
        assert "violating functional" in str(err.value)

    def test_perturbed_sequence_first_order_in_index(self, square):
        # nodes use v_j = v + (1/j) u, so node quotient errors decay like 1/j
        n = 20
        tilts = [1.0 / (j + 1) for j in range(n)]
        curve = construct_curve(square, [0.0, 0.0], [1.0, 1.0], tilt=tilts, num_points=n)
        p = np.array([0.0, 0.0])
        v = np.array([1.0, 1.0])
        for j, t in enumerate(curve.times):
            err = np.linalg.norm((curve(t) - p) / t - v)
            assert err * (j + 1) == pytest.approx(1.0, rel=1e-9)

    def test_every_curve_passes_derivative_check(self, square, ball):
        cases = [
            (square, [0.0, 0.0], [1.0, 0.5]),
            (square, [1.0, 1.0], [-1.0, -1.0]),
            (ball, [0.0, 0.0], [0.3, 0.4]),
            (ball, [1.0, 0.0], [0.0, 1.0]),
            (ball, [1.0, 0.0], [-1.0, 0.2]),
        ]
        for body, p, v in cases:
            curve = construct_curve(body, p, v, t_start=2.0**-3)
            grid = curve.times[2:14]
            errs = [
                np.linalg.norm((curve(t) - np.asarray(p)) / t - np.asarray(v)) for t in grid
            ]
            assert errs[-1] <= max(1e-12, 0.8 * errs[0] + 1e-12)

    def test_nodes_inside_body(self, ball):
        curve = construct_curve(ball, [1.0, 0.0], [0.0, 1.0])
        for pt in curve.points:
            assert ball.residual(pt) <= 1e-9


def random_polytope_instance(rng):
    """A box cut by a random halfplane, a base point on its boundary, and a
    direction whose active-row products stay away from the tolerance floor."""
    d = 2
    lows = rng.uniform(-2.0, -0.5, d)
    highs = rng.uniform(0.5, 2.0, d)
    body = HPolytope.box(lows, highs)
    cut_normal = rng.normal(size=d)
    cut_normal /= np.linalg.norm(cut_normal)
    verts = body.vertices
    anchor = verts[rng.integers(len(verts))]
    body = HPolytope(
        np.vstack([body.A, cut_normal]), np.append(body.b, float(cut_normal @ anchor))
    )
    verts = body.vertices
    if len(verts) < 2 or rng.random() < 0.5:
        p = verts[rng.integers(len(verts))]
    else:
        i, j = rng.choice(len(verts), size=2, replace=False)
        p = 0.5 * (verts[i] + verts[j])
    while True:
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)
        products = body.A[body.active_rows(p)] @ v
        if products.size == 0 or np.min(np.abs(products)) > 0.5:
            return body, p, v


def membership_probe(body, p, v, j_max=40, tol=1e-13):
    return any(body.residual(p + 2.0**-j * v) <= tol for j in range(j_max + 1))


def test_membership_oracle_agreement_200_instances():
    rng = np.random.default_rng(20240521)
    seen = {IN_TANGENT_CONE: 0, OUTSIDE: 0}
    for _ in range(200):
        body, p, v = random_polytope_instance(rng)
        verdict = classify_direction(body, p, v)
        assert verdict != IN_CLOSURE_ONLY  # polyhedral tangent cones are closed
        seen[verdict] += 1
        assert (verdict == IN_TANGENT_CONE) == membership_probe(body, p, v)
        if verdict == IN_TANGENT_CONE:
            for theta in normal_functionals(body, p):
                assert float(theta @ v) >= -1e-12
    assert seen[IN_TANGENT_CONE] > 20 and seen[OUTSIDE] > 20
