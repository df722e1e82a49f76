"""
Exact rational linear algebra on top of sympy matrices.

Vectors travel through the engine as tuples of Fraction; matrices are sympy
``Matrix`` objects with Rational entries. Every basis returned here is in
reduced row echelon form so results are independent of elimination order.
"""

from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import sympy as sp

Vector = Tuple[Fraction, ...]


def to_rational(value: Union[int, Fraction, str]) -> sp.Rational:
    value = Fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def to_fraction(value: Union[int, Fraction, sp.Basic]) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


def matrix(rows: Sequence[Sequence], ncols: int) -> sp.Matrix:
    """Matrix from row vectors; ``ncols`` fixes the shape when there are no rows"""
    if not rows:
        return sp.zeros(0, ncols)
    return sp.Matrix([[to_rational(x) for x in row] for row in rows])


def column_matrix(columns: Sequence[Sequence], nrows: int) -> sp.Matrix:
    """Matrix whose columns are the given vectors"""
    if not columns:
        return sp.zeros(nrows, 0)
    if nrows == 0:
        return sp.zeros(0, len(columns))
    return matrix(columns, nrows).T


def column(M: sp.Matrix, j: int) -> Vector:
    return tuple(to_fraction(M[i, j]) for i in range(M.rows))


def columns(M: sp.Matrix) -> List[Vector]:
    return [column(M, j) for j in range(M.cols)]


def apply(M: sp.Matrix, v: Sequence) -> Vector:
    if M.rows == 0:
        return ()
    if M.cols == 0:
        return tuple(Fraction(0) for _ in range(M.rows))
    result = M * sp.Matrix([to_rational(x) for x in v])
    return tuple(to_fraction(x) for x in result)


def rank(M: sp.Matrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return M.rank()


def row_echelon_basis(vectors: Sequence[Sequence], length: int) -> Tuple[List[Vector], List[int]]:
    """Reduced row echelon basis of span(vectors) and its pivot columns"""
    if not vectors or length == 0:
        return [], []
    reduced, pivots = matrix(vectors, length).rref()
    basis = [
        tuple(to_fraction(reduced[i, j]) for j in range(length)) for i in range(len(pivots))
    ]
    return basis, list(pivots)


def nullspace_basis(M: sp.Matrix) -> List[Vector]:
    """Kernel of M as reduced echelon rows (leading 1 at the earliest coordinate)"""
    ncols = M.cols
    if ncols == 0:
        return []
    if M.rows == 0:
        return [tuple(Fraction(1 if i == j else 0) for i in range(ncols)) for j in range(ncols)]
    kernel = [tuple(to_fraction(x) for x in v) for v in M.nullspace()]
    basis, _ = row_echelon_basis(kernel, ncols)
    return basis


def complement_indices(vectors: Sequence[Sequence], length: int) -> List[int]:
    """Standard basis positions spanning a complement of span(vectors).

    These are the non-pivot columns of the echelon form of the span.
    """
    _, pivots = row_echelon_basis(vectors, length)
    return [i for i in range(length) if i not in pivots]


def in_span(vectors: Sequence[Sequence], v: Sequence, length: int) -> bool:
    if all(Fraction(x) == 0 for x in v):
        return True
    if not vectors:
        return False
    return rank(matrix(list(vectors) + [v], length)) == rank(matrix(vectors, length))


def coordinates(basis: Sequence[Sequence], v: Sequence, length: int) -> Vector:
    """Coefficients of v in the independent vectors ``basis``; ValueError outside their span"""
    if not basis or length == 0:
        if any(Fraction(x) != 0 for x in v):
            raise ValueError("vector is not in the span")
        return tuple(Fraction(0) for _ in basis)
    solution, _ = column_matrix(basis, length).gauss_jordan_solve(sp.Matrix([to_rational(x) for x in v]))
    return tuple(to_fraction(x) for x in solution)


def independent_modulo(base: Sequence[Sequence], candidates: Sequence[Sequence], length: int) -> List[int]:
    """Indices of candidates that extend span(base) one dimension at a time"""
    chosen: List[int] = []
    current = [tuple(v) for v in base]
    current_rank = rank(matrix(current, length)) if current else 0
    for index, candidate in enumerate(candidates):
        trial = current + [tuple(candidate)]
        trial_rank = rank(matrix(trial, length))
        if trial_rank > current_rank:
            chosen.append(index)
            current, current_rank = trial, trial_rank
    return chosen


def is_invertible(M: sp.Matrix) -> bool:
    if M.rows != M.cols:
        return False
    if M.rows == 0:
        return True
    return M.det() != 0


def inverse(M: sp.Matrix) -> sp.Matrix:
    if M.rows == 0:
        return sp.zeros(0, 0)
    return M.inv()


def identity(n: int) -> sp.Matrix:
    return sp.eye(n)


def product(*matrices: sp.Matrix) -> sp.Matrix:
    """Left-to-right product, tolerant of zero-sized factors"""
    result = matrices[0]
    for M in matrices[1:]:
        if result.cols == 0 or M.rows == 0:
            result = sp.zeros(result.rows, M.cols)
        else:
            result = result * M
    return result
