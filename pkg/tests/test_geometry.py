import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poscone import oracles
from poscone.algebra import (
    HermitianElement,
    PositiveElement,
    TracialAlgebra,
    expm,
    inner2,
    norm2,
    random_hermitian,
    random_invertible,
    random_positive,
    random_tangent,
    random_unitary,
)
from poscone.geometry import (
    Geodesic,
    SingularElementError,
    angle,
    congruence,
    convexity_profile,
    curvature,
    curve_length,
    dexp,
    dist,
    emi_slack,
    exp_map,
    exp_map_product,
    geodesic,
    geodesic_symmetry,
    jacobi_integrate,
    log_map,
    lower_bound_slack,
    metric_inner,
    metric_norm,
    sectional,
    t_operator,
    t_operator_inverse,
    triangle_report,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
algebras = st.sampled_from([
    TracialAlgebra.matrix(2),
    TracialAlgebra.matrix(3),
    TracialAlgebra.matrix(5),
    TracialAlgebra.from_blocks([(3, 0.6), (2, 0.4)]),
])


def pair(alg, seed):
    rng = np.random.default_rng(seed)
    return random_positive(alg, rng, 2.0), random_positive(alg, rng, 2.0)


class TestMetric:
    def test_identity_base_point(self, pauli, m2):
        assert metric_inner(m2.identity(), pauli[0], pauli[2]) == pytest.approx(0.0)
        assert metric_inner(m2.identity(), pauli[0], pauli[0]) == pytest.approx(1.0)

    def test_scalar_base_point_is_conformal(self, m2, pauli):
        a = PositiveElement(m2.scalar(math.e ** 2))
        x = pauli[0] + pauli[1]
        assert metric_inner(a, x, x) == pytest.approx(math.exp(-4) * inner2(x, x))


class TestGeodesics:
    def test_constant_when_endpoints_agree(self, two_block):
        p = random_positive(two_block, 3)
        g = geodesic(p, p)
        assert g(0.37).allclose(p, 1e-12)

    def test_from_identity_is_one_parameter_group(self, two_block):
        b = random_positive(two_block, 4)
        g = geodesic(two_block.identity(), b)
        assert g(0.3).allclose(expm(b.log * 0.3), 1e-12)

    def test_commuting_case(self, m2):
        g = geodesic(m2.identity(), m2.diag([math.e ** 2, math.e ** 4]))
        assert g(0.5).allclose(m2.diag([math.e, math.e ** 2]), 1e-12)

    def test_endpoints(self, two_block):
        a, b = pair(two_block, 7)
        g = Geodesic.from_velocity(a, log_map(a, b))
        assert g(0.0).allclose(a, 0.0)
        assert norm2(g(1.0) - b) <= 1e-10 * norm2(b)

    @given(algebras, seeds)
    def test_midpoint_equidistant(self, alg, seed):
        a, b = pair(alg, seed)
        m = geodesic(a, b)(0.5)
        d = dist(a, b)
        assert abs(dist(a, m) - d / 2) <= 1e-9
        assert abs(dist(m, b) - d / 2) <= 1e-9

    @given(algebras, seeds)
    def test_constant_speed(self, alg, seed):
        a, b = pair(alg, seed)
        g = geodesic(a, b)
        speeds = [g.speed(t) for t in np.linspace(0, 1, 11)]
        assert max(speeds) - min(speeds) <= 1e-9
        assert speeds[0] == pytest.approx(dist(a, b), abs=1e-10)

    def test_derivative_matches_finite_difference(self, two_block):
        a, b = pair(two_block, 8)
        g = geodesic(a, b)
        fd = oracles.finite_difference_derivative(g, 0.4, 1e-5)
        assert norm2(fd - g.derivative(0.4)) <= 1e-8 * norm2(g.derivative(0.4))


class TestExpLog:
    def test_exp_at_identity(self, two_block):
        x = random_hermitian(two_block, 1.0, 1)
        assert exp_map(two_block.identity(), x).allclose(expm(x), 1e-12)

    def test_exp_of_zero(self, two_block):
        p = random_positive(two_block, 2)
        assert exp_map(p, two_block.zero()).allclose(p, 1e-13)

    def test_log_at_identity(self, two_block):
        x = random_hermitian(two_block, 1.0, 5)
        assert log_map(two_block.identity(), expm(x)).allclose(x, 1e-12)

    def test_log_of_self(self, two_block):
        p = random_positive(two_block, 6)
        assert norm2(log_map(p, p)) < 1e-13

    @given(algebras, seeds)
    def test_forms_agree_and_invert(self, alg, seed):
        rng = np.random.default_rng(seed)
        p = random_positive(alg, rng, 2.0)
        v = random_tangent(alg, rng, 2.0)
        q = exp_map(p, v)
        assert norm2(exp_map_product(p, v) - q) <= 1e-10 * norm2(q)
        assert norm2(exp_map(p, log_map(p, q)) - q) <= 1e-9 * norm2(q)
        assert Geodesic.from_velocity(p, v)(0.6).allclose(exp_map(p, v * 0.6), 1e-10 * norm2(q))


class TestDistance:
    def test_self_distance(self, two_block):
        p = random_positive(two_block, 1)
        assert dist(p, p) == pytest.approx(0.0, abs=1e-14)

    def test_diagonal_value(self, m2):
        assert dist(m2.identity(), m2.diag([math.e ** 2, math.e ** -2])) == pytest.approx(2.0, abs=1e-15)

    def test_frozen_value(self, m2):
        # a^{-1/2} b a^{-1/2} = [[2, 1/2], [1/2, 1/2]], eigenvalues (5/2 +- sqrt(13/4)) / 2
        a = PositiveElement(m2.diag([1.0, 4.0]))
        b = PositiveElement(HermitianElement(m2, [np.array([[2.0, 1.0], [1.0, 2.0]])]))
        lam = [(2.5 + s * math.sqrt(3.25)) / 2 for s in (1, -1)]
        expect = math.sqrt(sum(math.log(x) ** 2 for x in lam) / 2)
        assert dist(a, b) == pytest.approx(expect, abs=1e-15)
        assert dist(a, b) == pytest.approx(0.92125285900903767, abs=1e-15)  # 40-digit mpmath value

    @given(algebras, seeds)
    def test_symmetric_and_matches_oracle(self, alg, seed):
        a, b = pair(alg, seed)
        assert dist(a, b) == pytest.approx(dist(b, a), abs=1e-12)
        assert dist(a, b) == pytest.approx(oracles.oracle_dist(a, b), abs=1e-12)
        assert dist(a, b) == pytest.approx(metric_norm(a, log_map(a, b)), abs=1e-12)

    @given(algebras, seeds)
    def test_congruence_invariance(self, alg, seed):
        rng = np.random.default_rng(seed)
        a, b = random_positive(alg, rng), random_positive(alg, rng)
        g = random_invertible(alg, rng, 1.0)
        assert abs(dist(congruence(g, a), congruence(g, b)) - dist(a, b)) <= 1e-10

    @given(algebras, seeds)
    def test_lower_bound(self, alg, seed):
        rng = np.random.default_rng(seed)
        x, y = random_tangent(alg, rng), random_tangent(alg, rng)
        assert lower_bound_slack(x, y) >= -1e-10

    def test_lower_bound_equality_cases(self, m2):
        x, y = m2.diag([0.3, 1.0]), m2.diag([-2.0, 0.5])
        assert lower_bound_slack(x, y) == pytest.approx(0.0, abs=1e-14)
        assert lower_bound_slack(x, x) == pytest.approx(0.0, abs=1e-14)


class TestDexpAndT:
    def test_dexp_at_zero(self, two_block):
        y = random_hermitian(two_block, 1.0, 3)
        assert dexp(two_block.zero(), y).allclose(y, 1e-15)

    def test_dexp_at_scalar(self, two_block):
        y = random_hermitian(two_block, 1.0, 3)
        assert dexp(two_block.scalar(-0.4), y).allclose(y * math.exp(-0.4), 1e-14)

    def test_dexp_linear(self, two_block):
        rng = np.random.default_rng(0)
        x, y, z = (random_hermitian(two_block, 1.0, rng) for _ in range(3))
        assert dexp(x, y * 2.0 + z).allclose(dexp(x, y) * 2.0 + dexp(x, z), 1e-12)

    def test_emi_equality_for_commuting(self, m2):
        assert emi_slack(m2.diag([1.0, -0.5]), m2.diag([0.2, 3.0])) == pytest.approx(0.0, abs=1e-14)

    def test_emi_scalar_algebra(self):
        alg = TracialAlgebra.matrix(1)
        assert emi_slack(alg.scalar(1.3), alg.scalar(-0.7)) == pytest.approx(0.0, abs=1e-15)

    @given(algebras, seeds)
    def test_emi(self, alg, seed):
        rng = np.random.default_rng(seed)
        x, y = random_tangent(alg, rng), random_tangent(alg, rng)
        assert emi_slack(x, y) >= -1e-10

    def test_t_at_zero_is_identity(self, two_block):
        y = random_hermitian(two_block, 1.0, 2)
        assert t_operator(two_block.zero(), y).allclose(y, 1e-15)

    def test_t_on_diagonal_generator(self, m2, pauli):
        s = 0.8
        x = m2.diag([s, -s])
        y = pauli[0] + pauli[2]
        out = t_operator(x, y)
        assert out.blocks[0][0, 1] == pytest.approx(math.sinh(s) / s)
        assert out.blocks[0][0, 0] == pytest.approx(1.0)
        e = expm(x * -0.5)
        quad = (e @ oracles.dexp_quadrature(x, y, 200) @ e).hermitian_part()
        assert norm2(out - quad) <= 1e-10

    @given(algebras, seeds)
    def test_t_symmetric_inverse_contractive(self, alg, seed):
        rng = np.random.default_rng(seed)
        x, y, z = (random_tangent(alg, rng) for _ in range(3))
        assert inner2(t_operator(x, y), z) == pytest.approx(inner2(y, t_operator(x, z)), abs=1e-10)
        assert norm2(t_operator_inverse(x, z)) <= norm2(z) + 1e-10
        assert norm2(t_operator(x, t_operator_inverse(x, z)) - z) <= 1e-10


class TestCurvature:
    def test_pauli_value(self, m2, pauli):
        sx, sy, _ = pauli
        r = curvature(m2.identity(), sx, sy, sy)
        assert r.allclose(-sx, 1e-14)
        assert sectional(m2.identity(), sx, sy) == pytest.approx(-1.0)

    def test_commuting_vanishes(self, m2):
        x, y = m2.diag([1.0, 2.0]), m2.diag([0.0, 3.0])
        assert norm2(curvature(m2.identity(), x, y, y)) == 0.0

    @given(algebras, seeds)
    def test_sectional_nonpositive(self, alg, seed):
        rng = np.random.default_rng(seed)
        a = random_positive(alg, rng)
        x, y = random_tangent(alg, rng), random_tangent(alg, rng)
        assert sectional(a, x, y) <= 1e-12


class TestJacobi:
    def test_commuting_linear_growth(self, m2):
        x, k1 = m2.diag([1.0, -1.0]), m2.diag([0.5, 2.0])
        sol = jacobi_integrate(x, m2.zero(), k1, 1.0, 1e-2)
        assert sol.K_values[-1].allclose(k1, 1e-13)
        assert sol.K_values[50].allclose(k1 * 0.5, 1e-13)

    def test_velocity_field_is_constant(self, two_block):
        x = random_hermitian(two_block, 1.0, 3)
        sol = jacobi_integrate(x, x, two_block.zero(), 1.0, 1e-2)
        assert max(norm2(k - x) for k in sol.K_values) < 1e-13

    def test_matches_closed_form(self, two_block):
        rng = np.random.default_rng(5)
        x, k0, k1 = (random_tangent(two_block, rng) for _ in range(3))
        sol = jacobi_integrate(x, k0, k1, 1.0, 1e-3)
        for n in (0, 250, 1000):
            exact = oracles.jacobi_exact(x, k0, k1, sol.grid[n])
            assert norm2(sol.K_values[n] - exact) <= 1e-10 * max(1.0, norm2(exact))

    def test_diagnostics(self, two_block):
        rng = np.random.default_rng(6)
        x, k0, k1 = (random_tangent(two_block, rng) for _ in range(3))
        sol = jacobi_integrate(x, k0, k1, 1.0, 1e-3)
        assert sol.ode_residual() <= 1e-6
        assert sol.convexity_defect() <= 1e-9
        assert sol.kkddot().min() >= -1e-10
        j_norms = [math.sqrt(max(metric_inner(expm(x * t), j, j), 0.0))
                   for t, j in zip(sol.grid[::200], sol.J_values[::200])]
        assert np.allclose(j_norms, sol.norms()[::200], atol=1e-12)

    def test_bad_step(self, m2):
        with pytest.raises(ValueError):
            jacobi_integrate(m2.zero(), m2.zero(), m2.zero(), 1.0, 0.0)


class TestAnglesAndTriangles:
    def test_same_direction(self, m2, pauli):
        assert angle(m2.identity(), pauli[0], pauli[0] * 3.0) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal_paulis(self, m2, pauli):
        assert angle(m2.identity(), pauli[0], pauli[2]) == pytest.approx(math.pi / 2)

    def test_zero_vector(self, m2, pauli):
        with pytest.raises(ValueError):
            angle(m2.identity(), pauli[0], m2.zero())

    def test_flat_triangle(self, m2):
        rep = triangle_report(m2.identity(), PositiveElement(m2.diag([2.0, 0.5])),
                              PositiveElement(m2.diag([0.3, 4.0])))
        assert rep.angle_sum == pytest.approx(math.pi, abs=1e-9)

    def test_degenerate_triangle(self, two_block):
        a, b = pair(two_block, 12)
        c = geodesic(a, b)(0.4)
        rep = triangle_report(a, b, c)
        assert rep.angles[2] == pytest.approx(math.pi, abs=1e-6)

    @given(algebras, seeds)
    def test_angle_sum_and_comparison(self, alg, seed):
        rng = np.random.default_rng(seed)
        rep = triangle_report(*(random_positive(alg, rng) for _ in range(3)))
        assert rep.angle_sum <= math.pi + 1e-9
        assert min(rep.comparison_slack()) >= -1e-9


class TestLengthsAndConvexity:
    def test_constant_curve(self, two_block):
        p = random_positive(two_block, 1)
        assert curve_length([p] * 5) == 0.0

    def test_geodesic_length(self, two_block):
        x = random_tangent(two_block, 2, 2.0)
        samples = [expm(x * t) for t in np.linspace(0, 1, 200)]
        assert curve_length(samples) == pytest.approx(norm2(x), abs=1e-4)
        assert curve_length(samples) >= norm2(x) - 1e-12

    def test_needs_two_samples(self, two_block):
        with pytest.raises(ValueError):
            curve_length([two_block.identity()])

    def test_identical_geodesics(self, two_block):
        g = geodesic(*pair(two_block, 3))
        assert all(d < 1e-12 for _, d in convexity_profile(g, g, np.linspace(0, 1, 9)))

    def test_scalar_translate(self, m2):
        x = random_tangent(m2, 4)
        g1 = geodesic(m2.identity(), expm(x))
        shift = math.exp(0.7)
        g2 = geodesic(PositiveElement(m2.scalar(shift)), PositiveElement(expm(x) * shift))
        prof = [d for _, d in convexity_profile(g1, g2, np.linspace(0, 1, 9))]
        assert np.allclose(prof, 0.7, atol=1e-12)

    @given(algebras, seeds)
    def test_distance_convex_along_geodesics(self, alg, seed):
        rng = np.random.default_rng(seed)
        g1 = geodesic(random_positive(alg, rng), random_positive(alg, rng))
        g2 = geodesic(random_positive(alg, rng), random_positive(alg, rng))
        f = np.array([d for _, d in convexity_profile(g1, g2, np.linspace(0, 1, 33))])
        assert np.max(f[1:-1] - (f[:-2] + f[2:]) / 2) <= 1e-9


class TestSymmetryAndCongruence:
    def test_symmetry_fixes_center(self, two_block):
        p = random_positive(two_block, 1)
        assert geodesic_symmetry(p, p).allclose(p, 1e-12)

    def test_symmetry_at_identity_is_inverse(self, two_block):
        q = random_positive(two_block, 2)
        assert geodesic_symmetry(two_block.identity(), q).allclose(q.inverse, 1e-13)

    @given(algebras, seeds)
    def test_involution_and_reversal(self, alg, seed):
        p, q = pair(alg, seed)
        s = geodesic_symmetry(p, q)
        assert norm2(geodesic_symmetry(p, s) - q) <= 1e-10 * norm2(q)
        g = geodesic(p, q)
        back = Geodesic.from_velocity(p, log_map(p, q) * -1.0)
        assert norm2(geodesic_symmetry(p, g(0.3)) - back(0.3)) <= 1e-10 * norm2(back(0.3))

    def test_congruence_identity_and_unitary(self, two_block):
        a = random_positive(two_block, 3)
        assert congruence(two_block.identity(), a).allclose(a, 1e-15)
        u = random_unitary(two_block, 4)
        assert congruence(u, two_block.identity()).allclose(two_block.identity(), 1e-14)

    def test_congruence_rejects_singular(self, m2):
        from poscone.algebra import AlgebraElement

        g = AlgebraElement(m2, [np.array([[1.0, 2.0], [2.0, 4.0]])])
        with pytest.raises(SingularElementError):
            congruence(g, m2.identity())
