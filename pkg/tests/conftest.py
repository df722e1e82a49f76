from fractions import Fraction
from itertools import combinations_with_replacement
from typing import List, Optional

import pytest
from hypothesis import settings as hypothesis_settings
from hypothesis import strategies as st

from apps.engine.models.algebra import GradedAlgebra
from apps.engine.services.algebra import power
from apps.engine.services.builders import builtin, cubic_form_algebra
from apps.engine.services.lefschetz import analyze

# sympy elimination is slow enough that per-example deadlines only add noise
hypothesis_settings.register_profile("sasakit", deadline=None, max_examples=100)
hypothesis_settings.load_profile("sasakit")

small_ints = st.integers(min_value=-2, max_value=2)


@st.composite
def cubic_form_algebras(
    draw, max_rank: int = 3, h3_rank: Optional[int] = None, max_h3_rank: int = 1
) -> GradedAlgebra:
    """6-dimensional algebra of a random integer cubic form with a random omega"""
    r = draw(st.integers(min_value=1, max_value=max_rank))
    cubic = {key: draw(small_ints) for key in combinations_with_replacement(range(r), 3)}
    rank3 = draw(st.integers(min_value=0, max_value=max_h3_rank)) if h3_rank is None else h3_rank
    omega = [draw(small_ints) for _ in range(r)]
    return cubic_form_algebra(
        [f"e{i + 1}" for i in range(r)], cubic, h3_rank=rank3, omega=omega, name="random"
    )


@st.composite
def invertible_matrices(draw, n: int) -> List[List[Fraction]]:
    """L * U with L unit lower triangular and U upper triangular with nonzero diagonal"""
    lower = [[Fraction(1) if i == j else Fraction(draw(small_ints)) if j < i else Fraction(0)
              for j in range(n)] for i in range(n)]
    diagonal = st.sampled_from([1, -1, 2, Fraction(1, 2)])
    upper = [[Fraction(draw(diagonal)) if i == j else Fraction(draw(small_ints)) if j > i else Fraction(0)
              for j in range(n)] for i in range(n)]
    return [
        [sum((lower[i][k] * upper[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def omega_cubed_nonzero(A: GradedAlgebra) -> bool:
    omega = A.default_omega()
    return omega is not None and not power(A, omega, A.top_degree // 2).is_zero()


def lefschetz_holds(A: GradedAlgebra) -> bool:
    omega = A.default_omega()
    return omega is not None and analyze(A, omega).holds


@pytest.fixture
def cp3() -> GradedAlgebra:
    return builtin("cp3")


@pytest.fixture
def cp1_cubed() -> GradedAlgebra:
    return builtin("cp1xcp1xcp1")


@pytest.fixture
def oddker() -> GradedAlgebra:
    return builtin("synthetic-oddker")


@pytest.fixture
def cupsquare() -> GradedAlgebra:
    return builtin("synthetic-cupsquare")


@pytest.fixture
def indefinite() -> GradedAlgebra:
    return builtin("synthetic-indefinite")


@pytest.fixture
def with_h3() -> GradedAlgebra:
    return builtin("synthetic-h3")
