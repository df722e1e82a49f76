from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from apps.engine.core.errors import CriterionInapplicable
from apps.engine.services.builders import builtin
from apps.engine.services.formality import evaluate_F_M
from apps.engine.services.gysin import total_space_cohomology
from apps.engine.services.minimal_model import (
    FreeGradedAlgebra,
    build_partial_minimal_model,
    build_sullivan_model,
    degree_seven_values,
    model_cohomology,
    model_report,
    splitting_invariance_check,
    verify_three_equivalence,
)
from conftest import cubic_form_algebras, lefschetz_holds, omega_cubed_nonzero, small_ints


class TestSullivanModel:
    def test_differential_of_x_is_omega(self, cp1_cubed):
        omega = cp1_cubed.default_omega()
        model = build_sullivan_model(cp1_cubed, omega)
        assert model.differential(model.x()) == model.from_class(omega)
        assert model.top_degree == 7

    def test_x_squares_to_zero(self, cp3):
        model = build_sullivan_model(cp3, cp3.default_omega())
        assert model.product(model.x(), model.x()).is_zero()

    def test_class_times_x_sign(self, with_h3):
        model = build_sullivan_model(with_h3, with_h3.default_omega())
        u = with_h3.basis_class(3, 0)
        left = model.product(model.from_class(u), model.x())
        right = model.product(model.x(), model.from_class(u))
        assert left == model.times_x(u)
        assert right == model.times_x(u).scale(-1)

    @pytest.mark.parametrize("name", ["cp1xcp1xcp1", "synthetic-oddker", "synthetic-h3"])
    def test_differential_algebra_laws(self, name):
        A = builtin(name)
        model = build_sullivan_model(A, A.default_omega())
        assert model.d_squared_is_zero()
        assert model.leibniz_failure() is None

    @pytest.mark.parametrize(
        "name",
        ["cp3", "cp1xcp1xcp1", "cp1xcp2", "synthetic-oddker", "synthetic-cupsquare",
         "synthetic-h3", "synthetic-indefinite"],
    )
    def test_cohomology_matches_gysin(self, name):
        A = builtin(name)
        omega = A.default_omega()
        cohomology = model_cohomology(build_sullivan_model(A, omega))
        assert cohomology.dims == total_space_cohomology(A, omega).betti

    def test_cohomology_when_omega_cubed_vanishes(self, cp1_cubed):
        # ker(omega) on H^0 is zero, so H^1 still vanishes; H^7 picks up K^6
        omega = cp1_cubed.element(2, [1, 1, 0])
        dims = model_cohomology(build_sullivan_model(cp1_cubed, omega)).dims
        assert dims[0] == 1
        assert dims[1] == 0
        assert dims == tuple(reversed(dims))

    @settings(max_examples=100)
    @given(cubic_form_algebras(max_rank=4, max_h3_rank=2))
    def test_cohomology_matches_gysin_on_random_algebras(self, A):
        assume(omega_cubed_nonzero(A))
        omega = A.default_omega()
        cohomology = model_cohomology(build_sullivan_model(A, omega))
        assert cohomology.dims == total_space_cohomology(A, omega).betti


class TestFreeAlgebra:
    def test_odd_generators_anticommute(self):
        free = FreeGradedAlgebra([("u", 3), ("v", 3)], {}, 8)
        u, v = free.generator(0), free.generator(1)
        assert free.multiply(u, v) == {(1, 1): 1}
        assert free.multiply(v, u) == {(1, 1): -1}
        assert free.multiply(u, u) == {}

    def test_truncation(self):
        free = FreeGradedAlgebra([("p", 2)], {}, 4)
        p = free.generator(0)
        assert free.multiply(free.multiply(p, p), p) == {}
        assert free.monomials(4) == [(2,)]

    def test_leibniz_on_generators(self):
        # d n = p^2, so d(n p) = p^3 and d(n n') = p^2 n' - n p^2
        free = FreeGradedAlgebra(
            [("p", 2), ("n", 3), ("m", 3)], {1: {(2, 0, 0): Fraction(1)}, 2: {(2, 0, 0): Fraction(1)}}, 8
        )
        n, m = free.generator(1), free.generator(2)
        assert free.differential(free.multiply(n, free.generator(0))) == {(3, 0, 0): 1}
        assert free.differential(free.multiply(n, m)) == {(2, 0, 1): 1, (2, 1, 0): -1}
        assert free.differential(free.differential(free.multiply(n, m))) == {}

    def test_monomial_listing(self):
        free = FreeGradedAlgebra([("p", 2), ("q", 2), ("n", 3)], {}, 8)
        assert free.monomials(4) == [(2, 0, 0), (1, 1, 0), (0, 2, 0)]
        assert free.monomials(5) == [(1, 0, 1), (0, 1, 1)]
        assert free.monomials(-1) == []

    def test_generators_need_positive_degree(self):
        with pytest.raises(ValueError):
            FreeGradedAlgebra([("c", 0)], {}, 8)


class TestPartialMinimalModel:
    def test_shape_for_cp1_cubed(self, cp1_cubed):
        pm = build_partial_minimal_model(cp1_cubed, cp1_cubed.default_omega())
        assert len(pm.v2) == 2
        assert len(pm.c3) == 0
        assert len(pm.n3) == 3
        assert pm.free.names == ("p1", "p2", "n11", "n12", "n22")
        assert all(r == 0 for r in pm.chain_map_residuals())

    def test_three_equivalence(self, cp1_cubed, with_h3, cp3):
        for A in (cp1_cubed, with_h3, cp3):
            pm = build_partial_minimal_model(A, A.default_omega())
            equivalence = verify_three_equivalence(pm)
            assert equivalence.holds
            assert [entry.degree for entry in equivalence.degrees] == [0, 1, 2, 3, 4]

    def test_induced_maps_in_low_degrees(self, cp1_cubed):
        pm = build_partial_minimal_model(cp1_cubed, cp1_cubed.default_omega())
        degrees = verify_three_equivalence(pm).degrees
        assert degrees[0].matrix == [["1/1"]]
        assert degrees[1].matrix == []
        two = sp.Matrix([[sp.Rational(x) for x in row] for row in degrees[2].matrix])
        assert two.shape == (2, 2)
        assert two.det() != 0
        for entry in degrees:
            rows = [[sp.Rational(x) for x in row] for row in entry.matrix]
            rank = sp.Matrix(rows).rank() if rows and rows[0] else 0
            assert len(entry.matrix) == entry.target_dim
            assert rank == entry.rank

    def test_degree_seven_values_match_the_exact_obstruction(self, cp1_cubed, indefinite):
        for A in (cp1_cubed, indefinite):
            omega = A.default_omega()
            pm = build_partial_minimal_model(A, omega)
            assert degree_seven_values(pm) == evaluate_F_M(A, omega).values

    def test_needs_hard_lefschetz(self, cupsquare):
        with pytest.raises(CriterionInapplicable):
            build_partial_minimal_model(cupsquare, cupsquare.default_omega())

    def test_splitting_shape(self, with_h3):
        pm = build_partial_minimal_model(with_h3, with_h3.default_omega())
        with pytest.raises(ValueError):
            degree_seven_values(pm, [[1, 0, 0]])

    @given(st.lists(st.lists(small_ints, min_size=3, max_size=3), min_size=2, max_size=2))
    def test_values_do_not_depend_on_the_splitting(self, T):
        A = builtin("synthetic-h3")
        assert splitting_invariance_check(A, A.default_omega(), T)

    @given(cubic_form_algebras(max_rank=3))
    def test_degree_seven_values_on_random_algebras(self, A):
        assume(lefschetz_holds(A))
        omega = A.default_omega()
        pm = build_partial_minimal_model(A, omega)
        assert degree_seven_values(pm) == evaluate_F_M(A, omega).values


def test_model_report(cp1_cubed):
    report = model_report(cp1_cubed, cp1_cubed.default_omega())
    assert report.model_betti == [1, 0, 2, 0, 0, 2, 0, 1]
    assert report.three_equivalence
    assert report.degree_seven_values == ["9/2"]
    assert report.chain_map_residuals == ["0/1"] * 5
