from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from apps.engine.core.errors import CriterionInapplicable
from apps.engine.models.reports import FormalityVerdict
from apps.engine.services.algebra import change_basis, rescale_integration
from apps.engine.services.builders import builtin
from apps.engine.services.formality import (
    F_eval,
    SymIndex,
    evaluate_F_M,
    lambda_crosscheck,
    massey_table,
    massey_triple,
    obstruction_kernel,
    symmetrization_map,
)
from apps.engine.services.lefschetz import primitive_subspace
from conftest import cubic_form_algebras, invertible_matrices, lefschetz_holds, small_ints


class TestKernel:
    def test_symmetrization_rank(self):
        M = symmetrization_map(2)
        assert M.shape == (5, 6)
        assert M.rank() == 5

    @pytest.mark.parametrize("m, dimension", [(0, 0), (1, 0), (2, 1), (3, 6)])
    def test_kernel_dimension(self, m, dimension):
        assert obstruction_kernel(m).dimension == dimension

    def test_kernel_basis_for_two_classes(self):
        kernel = obstruction_kernel(2)
        assert kernel.basis == ((0, 0, 1, -1, 0, 0),)
        assert kernel.index.describe(kernel.basis[0]) == ["1/1*(p1p1)(p2p2)", "-1/1*(p1p2)(p1p2)"]

    def test_index_positions(self):
        index = SymIndex.build(3)
        assert index.sym2 == ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
        assert index.sym2_position(2, 1) == 4
        assert index.monomial(1, 3) == (0, 1, 1, 1)


class TestF:
    def test_values_on_cp1_cubed(self, cp1_cubed):
        omega = cp1_cubed.default_omega()
        p1 = cp1_cubed.element(2, [1, 0, -1])
        p2 = cp1_cubed.element(2, [0, 1, -1])
        assert F_eval(cp1_cubed, omega, p1, p1, p2, p2) == 2
        assert F_eval(cp1_cubed, omega, p1, p2, p1, p2) == Fraction(-5, 2)
        assert F_eval(cp1_cubed, omega, p2, p2, p1, p1) == 2

    def test_arguments_must_be_primitive(self, cp1_cubed):
        omega = cp1_cubed.default_omega()
        p1 = cp1_cubed.element(2, [1, 0, -1])
        with pytest.raises(CriterionInapplicable):
            F_eval(cp1_cubed, omega, omega, p1, p1, p1)

    def test_needs_invertible_lefschetz_map(self, cupsquare):
        omega = cupsquare.default_omega()
        with pytest.raises(CriterionInapplicable):
            evaluate_F_M(cupsquare, omega)

    @given(cubic_form_algebras(), st.data())
    def test_symmetries(self, A, data):
        assume(lefschetz_holds(A))
        omega = A.default_omega()
        basis = primitive_subspace(A, omega).primitive_basis
        assume(basis)

        def primitive():
            coefficients = [data.draw(small_ints) for _ in basis]
            return A.element(2, [sum(c * v[i] for c, v in zip(coefficients, basis)) for i in range(A.dim(2))])

        alpha, beta, gamma, delta = (primitive() for _ in range(4))
        value = F_eval(A, omega, alpha, beta, gamma, delta)
        assert F_eval(A, omega, beta, alpha, gamma, delta) == value
        assert F_eval(A, omega, alpha, beta, delta, gamma) == value
        assert F_eval(A, omega, gamma, delta, alpha, beta) == value


class TestVerdict:
    def test_cp1_cubed_is_not_formal(self, cp1_cubed):
        evaluation = evaluate_F_M(cp1_cubed, cp1_cubed.default_omega())
        assert evaluation.m == 2
        assert evaluation.values == (Fraction(9, 2),)
        assert evaluation.verdict == FormalityVerdict.NON_FORMAL
        report = evaluation.to_report()
        assert report.witness.value == "9/2"
        assert report.kernel_dimension == 1
        assert "simply connected compact Sasakian 7-manifold" in report.hypothesis

    def test_projective_space_is_formal(self, cp3):
        evaluation = evaluate_F_M(cp3, cp3.default_omega())
        assert evaluation.m == 0
        assert evaluation.verdict == FormalityVerdict.FORMAL
        assert evaluation.to_report().witness is None

    def test_single_primitive_class_is_formal(self):
        A = builtin("cp1xcp2")
        assert evaluate_F_M(A, A.default_omega()).verdict == FormalityVerdict.FORMAL

    def test_indefinite_form(self, indefinite):
        evaluation = evaluate_F_M(indefinite, indefinite.default_omega())
        assert evaluation.values == (Fraction(-1),)
        assert evaluation.verdict == FormalityVerdict.NON_FORMAL

    def test_explicit_primitive_basis(self, cp1_cubed):
        omega = cp1_cubed.default_omega()
        swapped = evaluate_F_M(cp1_cubed, omega, [(0, 1, -1), (1, 0, -1)])
        assert swapped.values == (Fraction(9, 2),)
        with pytest.raises(ValueError):
            evaluate_F_M(cp1_cubed, omega, [(1, 0, -1), (1, 0, -1)])

    @given(st.data())
    def test_verdict_does_not_depend_on_the_basis(self, data):
        A = data.draw(cubic_form_algebras())
        assume(lefschetz_holds(A))
        M = data.draw(invertible_matrices(A.dim(2)))
        B = change_basis(A, {2: M})
        a = evaluate_F_M(A, A.default_omega())
        b = evaluate_F_M(B, B.default_omega())
        assert a.verdict == b.verdict
        assert a.kernel.dimension == b.kernel.dimension

    @given(cubic_form_algebras(), st.sampled_from([Fraction(1, 2), Fraction(3), Fraction(-2)]))
    def test_values_scale_with_the_integral(self, A, factor):
        assume(lefschetz_holds(A))
        scaled = rescale_integration(A, factor)
        a = evaluate_F_M(A, A.default_omega())
        b = evaluate_F_M(scaled, scaled.default_omega())
        assert b.values == tuple(factor * v for v in a.values)

    @given(cubic_form_algebras(), st.sampled_from([Fraction(2), Fraction(-1), Fraction(1, 3)]))
    def test_verdict_survives_rescaling_omega(self, A, factor):
        assume(lefschetz_holds(A))
        scaled = A.with_omega([factor * c for c in A.omega])
        a = evaluate_F_M(A, A.default_omega())
        b = evaluate_F_M(scaled, scaled.default_omega())
        assert a.verdict == b.verdict
        assert b.values == tuple(v / factor for v in a.values)


class TestMassey:
    def test_cp1_cubed(self, cp1_cubed):
        omega = cp1_cubed.default_omega()
        assert massey_triple(cp1_cubed, omega, (1, 2, 2, 1)) == Fraction(-9, 2)
        assert massey_triple(cp1_cubed, omega, (2, 2, 1, 1)) == Fraction(9, 2)

    def test_indices_out_of_range(self, cp1_cubed):
        with pytest.raises(ValueError):
            massey_triple(cp1_cubed, cp1_cubed.default_omega(), (1, 2, 3, 1))

    def test_table(self, cp1_cubed):
        table = dict(massey_table(cp1_cubed, cp1_cubed.default_omega()))
        assert list(table) == [(1, 1, 2, 1), (1, 1, 2, 2), (1, 2, 2, 1), (1, 2, 2, 2)]
        assert table[(1, 2, 2, 1)] == Fraction(-9, 2)

    @given(cubic_form_algebras(), st.data())
    def test_antisymmetric_in_the_outer_indices(self, A, data):
        assume(lefschetz_holds(A))
        omega = A.default_omega()
        evaluation = evaluate_F_M(A, omega)
        assume(evaluation.m >= 1)
        indices = st.integers(min_value=1, max_value=evaluation.m)
        i, j, k, l = (data.draw(indices) for _ in range(4))
        forward = massey_triple(A, omega, (i, j, k, l), evaluation)
        backward = massey_triple(A, omega, (k, j, i, l), evaluation)
        assert forward == -backward

    @given(cubic_form_algebras())
    def test_formal_exactly_when_every_product_vanishes(self, A):
        assume(lefschetz_holds(A))
        omega = A.default_omega()
        evaluation = evaluate_F_M(A, omega)
        vanishing = all(value == 0 for _, value in massey_table(A, omega, evaluation))
        assert (evaluation.verdict == FormalityVerdict.FORMAL) == vanishing


class TestCrosscheck:
    def test_definite_form_agrees(self, cp1_cubed):
        check = lambda_crosscheck(cp1_cubed, cp1_cubed.default_omega())
        assert check.applicable
        assert check.sign == -1
        assert check.max_abs_discrepancy < 1e-9

    def test_indefinite_form_is_reported(self, indefinite):
        check = lambda_crosscheck(indefinite, indefinite.default_omega())
        assert not check.applicable
        assert "indefinite" in check.reason

    def test_trivial_kernel(self, cp3):
        assert lambda_crosscheck(cp3, cp3.default_omega()).applicable

    @given(cubic_form_algebras())
    def test_agrees_with_exact_values(self, A):
        omega = A.default_omega()
        assume(lefschetz_holds(A))
        evaluation = evaluate_F_M(A, omega)
        check = lambda_crosscheck(A, omega, evaluation)
        if check.applicable:
            scale = max([1.0] + [abs(float(v)) for v in evaluation.values])
            assert check.max_abs_discrepancy <= 1e-6 * scale
        else:
            primitive = primitive_subspace(A, omega)
            assert primitive.m >= 2
