import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poscone.algebra import (
    HermitianElement,
    PositiveElement,
    TracialAlgebra,
    expm,
    norm2,
    random_hermitian,
    random_tangent,
    trace,
)
from poscone.convexity import (
    ClosureError,
    ConvexSubmanifold,
    NotInSubmanifoldError,
    Subspace,
    aba_closure_test,
    check_double_bracket,
    conditional_expectation,
    double_bracket,
    falsification_scan,
    flat_immersion,
    geodesic_stays_inside,
    hermitian_to_vector,
    membership,
    orthogonal_supplement,
    orthonormalize,
    parse_subspace_spec,
    project_subspace,
    standard_basis,
    standard_subspace,
    tangent_at,
    vector_to_hermitian,
)
from poscone.geometry import geodesic, geodesic_symmetry, metric_inner

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def e11(alg):
    return HermitianElement(alg, [np.diag([1.0, 0.0])])


class TestCoordinates:
    def test_vector_roundtrip(self, two_block):
        x = random_hermitian(two_block, 1.0, 1)
        assert vector_to_hermitian(two_block, hermitian_to_vector(x)).allclose(x, 1e-15)

    def test_vector_inner_is_trace_inner(self, two_block):
        x, y = random_hermitian(two_block, 1.0, 1), random_hermitian(two_block, 1.0, 2)
        assert hermitian_to_vector(x) @ hermitian_to_vector(y) == pytest.approx(trace(x @ y).real)

    def test_standard_basis_orthonormal(self, two_block):
        H = Subspace(two_block, standard_basis(two_block))
        assert H.dimension == two_block.real_dim
        assert H.gram_residual() < 1e-14


class TestOrthonormalize:
    def test_identity(self, m2):
        assert orthonormalize([m2.identity()]).dimension == 1

    def test_dependent_dropped(self, pauli):
        sz = pauli[2]
        assert orthonormalize([sz, sz * 2.0]).dimension == 1

    def test_random_gram(self):
        alg = TracialAlgebra.matrix(4)
        H = orthonormalize([random_hermitian(alg, 1.0, s) for s in range(5)])
        assert H.dimension == 5
        assert H.gram_residual() <= 1e-10

    def test_all_zero_rejected(self, m2):
        with pytest.raises(ValueError):
            orthonormalize([m2.zero()])


class TestProjectionOntoSubspace:
    def test_member_is_fixed(self, m2):
        H = standard_subspace(m2, "diagonal")
        x = m2.diag([1.0, -3.0])
        assert project_subspace(H, x).allclose(x, 1e-15)

    def test_offdiagonal_killed(self, m2, pauli):
        H = standard_subspace(m2, "diagonal")
        assert norm2(project_subspace(H, pauli[0])) < 1e-16

    def test_supplement_dimensions(self, m2):
        S = orthogonal_supplement(standard_subspace(m2, "diagonal"))
        assert S.dimension == 2
        assert orthogonal_supplement(standard_subspace(m2, "full")).dimension == 0

    def test_supplement_completes_basis(self, two_block):
        H = orthonormalize([random_hermitian(two_block, 1.0, s) for s in range(4)])
        S = orthogonal_supplement(H)
        assert H.dimension + S.dimension == two_block.real_dim
        assert np.abs(H.matrix @ S.matrix.T).max() < 1e-12


class TestDoubleBracket:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_diagonal_closed(self, n):
        assert check_double_bracket(standard_subspace(TracialAlgebra.matrix(n), "diagonal")) is None

    @pytest.mark.parametrize("n", [2, 3])
    def test_full_closed(self, n):
        assert check_double_bracket(standard_subspace(TracialAlgebra.matrix(n), "full")) is None

    def test_block_diagonal_closed(self):
        alg = TracialAlgebra.matrix(3)
        H = standard_subspace(alg, "block_diagonal", partition=[[1, 2], [3]])
        assert H.dimension == 5
        assert check_double_bracket(H) is None

    def test_single_generator_closed(self, two_block):
        H = standard_subspace(two_block, "single_generator", x=random_hermitian(two_block, 1.0, 3))
        assert H.dimension == 1
        assert check_double_bracket(H) is None

    def test_real_symmetric_closed(self, m2, pauli):
        H = orthonormalize([m2.identity(), pauli[0], pauli[2]])
        assert check_double_bracket(H) is None

    def test_witness_sign(self, m2, pauli):
        # [sx, [sx, E11]] = 2 (E11 - E22)
        assert double_bracket(pauli[0], e11(m2)).allclose(m2.diag([2.0, -2.0]), 1e-15)

    def test_failing_span_gives_witness(self, m2, pauli):
        w = check_double_bracket(orthonormalize([e11(m2), pauli[0]]))
        assert w is not None
        assert w.residual > 1.0
        assert norm2(w.offending - double_bracket(w.x, w.y)) < 1e-14
        doc = w.to_dict()
        assert set(doc) == {"x", "y", "offending", "residual", "triple"}

    def test_certify_raises(self, m2, pauli):
        with pytest.raises(ClosureError) as info:
            ConvexSubmanifold.certify(orthonormalize([e11(m2), pauli[0]]))
        assert info.value.witness is not None


class TestMembership:
    def test_identity_member(self, two_block):
        assert membership(ConvexSubmanifold.standard(two_block, "diagonal"), two_block.identity())

    def test_exponential_of_member(self, m2):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        assert membership(M, expm(m2.diag([0.4, -1.0])))

    def test_orthogonal_exponent_rejected(self, m2, pauli):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        assert not membership(M, expm(pauli[0] * 0.3))

    def test_aba_trivial_cases(self, m2):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        assert aba_closure_test(M, m2.identity(), m2.identity())
        assert aba_closure_test(M, expm(m2.diag([1.0, 2.0])), expm(m2.diag([-0.5, 0.1])))

    def test_aba_rejects_outsiders(self, m2, pauli):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        with pytest.raises(NotInSubmanifoldError):
            aba_closure_test(M, expm(pauli[0]), m2.identity())

    @given(seeds, st.sampled_from(["diagonal", "full", "block", "single"]))
    def test_closed_sets_are_stable(self, seed, kind):
        alg = TracialAlgebra.from_blocks([(3, 0.5), (2, 0.5)])
        rng = np.random.default_rng(seed)
        if kind == "block":
            M = ConvexSubmanifold.standard(alg, "block_diagonal", partition=[[1, 2], [3], [4, 5]])
        elif kind == "single":
            M = ConvexSubmanifold.standard(alg, "single_generator", x=random_tangent(alg, rng))
        else:
            M = ConvexSubmanifold.standard(alg, kind)
        a, b = M.random_point(rng), M.random_point(rng)
        assert aba_closure_test(M, a, b)
        assert geodesic_stays_inside(M, a, b)
        assert membership(M, geodesic_symmetry(a, b))
        for alpha in (-1.0, 0.5, 3.0):
            assert membership(M, a.power(alpha))

    def test_falsification_scan_finds_counterexample(self, m2, pauli):
        gens = [e11(m2), pauli[0]]
        M = ConvexSubmanifold(orthonormalize(gens), False)
        found = falsification_scan(M, gens[0], gens[1])
        assert found is not None
        a, b, res = found
        assert res > 1e-8
        assert not membership(M, PositiveElement((a @ b @ a).hermitian_part()))

    def test_falsification_scan_silent_for_closed(self, m2, pauli):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        assert falsification_scan(M, m2.diag([1.0, 0.0]), m2.diag([0.0, 1.0])) is None


class TestTangentAndExpectation:
    def test_projector_at_identity_is_subspace_projection(self, two_block):
        M = ConvexSubmanifold.standard(two_block, "diagonal")
        Q = tangent_at(M, two_block.identity())
        v = random_hermitian(two_block, 1.0, 4)
        assert Q(v).allclose(project_subspace(M.subspace, v), 1e-14)

    def test_tangent_vectors_fixed(self, two_block):
        M = ConvexSubmanifold.standard(two_block, "block_diagonal", partition=[[1, 2], [3], [4, 5]])
        p = M.random_point(5)
        h = M.subspace.from_coordinates(np.arange(1.0, M.subspace.dimension + 1))
        v = p.sqrt @ h @ p.sqrt
        v = HermitianElement(two_block, v.blocks)
        assert tangent_at(M, p)(v).allclose(v, 1e-12)

    def test_projector_is_metric_symmetric(self, two_block):
        M = ConvexSubmanifold.standard(two_block, "diagonal")
        p = M.random_point(6)
        Q = tangent_at(M, p)
        u, v = random_hermitian(two_block, 1.0, 7), random_hermitian(two_block, 1.0, 8)
        assert metric_inner(p, Q(u), v) == pytest.approx(metric_inner(p, u, Q(v)), abs=1e-12)

    def test_tangent_at_rejects_outsider(self, m2, pauli):
        M = ConvexSubmanifold.standard(m2, "diagonal")
        with pytest.raises(NotInSubmanifoldError):
            tangent_at(M, expm(pauli[0]))

    def test_conditional_expectation(self):
        alg = TracialAlgebra.matrix(4)
        H = standard_subspace(alg, "block_diagonal", partition=[[1, 2], [3, 4]])
        rng = np.random.default_rng(0)
        x = random_hermitian(alg, 1.0, rng) + random_hermitian(alg, 1.0, rng) * 1j
        h1 = conditional_expectation(H, random_hermitian(alg, 1.0, rng) * (1 + 2j))
        h2 = conditional_expectation(H, random_hermitian(alg, 1.0, rng))
        px = conditional_expectation(H, x)
        assert abs(trace(px) - trace(x)) < 1e-12
        assert norm2(conditional_expectation(H, h1 @ x @ h2) - h1 @ px @ h2) < 1e-12


class TestStandardSubspaces:
    def test_dimensions(self):
        alg = TracialAlgebra.matrix(3)
        assert standard_subspace(alg, "diagonal").dimension == 3
        assert standard_subspace(alg, "full").dimension == 9

    def test_partition_must_cover(self):
        with pytest.raises(ValueError):
            standard_subspace(TracialAlgebra.matrix(3), "block_diagonal", partition=[[1, 2]])

    def test_partition_cannot_straddle_blocks(self, two_block):
        with pytest.raises(ValueError):
            standard_subspace(two_block, "block_diagonal", partition=[[1, 2, 3, 4], [5]])

    def test_unknown_kind(self, m2):
        with pytest.raises(ValueError):
            standard_subspace(m2, "triangular")

    def test_parse_spec(self):
        alg = TracialAlgebra.matrix(3)
        assert parse_subspace_spec(alg, "blocks=1,2|3").subspace.dimension == 5
        assert parse_subspace_spec(alg, "diagonal").closure_certified
        with pytest.raises(ValueError):
            parse_subspace_spec(alg, "upper")

    def test_dict_roundtrip(self, two_block):
        H = standard_subspace(two_block, "block_diagonal", partition=[[1, 2], [3], [4, 5]])
        back = Subspace.from_dict(H.to_dict())
        assert back.dimension == H.dimension
        assert np.allclose(np.abs(back.matrix @ H.matrix.T).sum(axis=0), 1.0)


class TestFlatImmersion:
    def test_commuting_triangle_is_flat(self, m2):
        a, b = expm(m2.diag([1.0, -0.5])), expm(m2.diag([0.2, 0.9]))
        assert flat_immersion(a, b, 1.0, 0.0).allclose(a, 1e-13)
        mid = flat_immersion(a, b, 0.5, 0.5)
        assert mid.allclose(geodesic(b, a)(0.5), 1e-13)

    def test_noncommuting_rejected(self, pauli):
        with pytest.raises(ValueError):
            flat_immersion(expm(pauli[0]), expm(pauli[2]), 0.5, 0.5)
