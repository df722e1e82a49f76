"""
The degree-7 formality obstruction F_M of a Sasakian model.

F(alpha, beta, gamma, delta) = integral of L^{-1}(alpha beta) gamma delta is a
symmetric bilinear form on Sym^2 P; F_M is its restriction to the kernel K_M
of the multiplication map Sym^2(Sym^2 P) -> Sym^4 P. The pair (A, omega) is
formal exactly when F_M vanishes.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from apps.engine.core.config import settings
from apps.engine.core.errors import CriterionInapplicable
from apps.engine.models.algebra import CohomologyClass, GradedAlgebra, Vector, format_scalar
from apps.engine.models.reports import (
    FormalityReport,
    FormalityVerdict,
    KernelValue,
    LambdaCrosscheck,
    MasseyEntry,
)
from apps.engine.services import linalg
from apps.engine.services.algebra import integrate, mul
from apps.engine.services.lefschetz import analyze, lambda_tensor, primitive_subspace

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class SymIndex:
    """Lexicographic index systems for Sym^2 P, Sym^2(Sym^2 P) and Sym^4 P"""

    m: int
    sym2: Tuple[Pair, ...]
    sym2sym2: Tuple[Pair, ...]
    sym4: Tuple[Tuple[int, int, int, int], ...]

    @classmethod
    def build(cls, m: int) -> "SymIndex":
        if m < 0:
            raise ValueError("m must be non-negative")
        sym2 = tuple(combinations_with_replacement(range(m), 2))
        return cls(
            m=m,
            sym2=sym2,
            sym2sym2=tuple(combinations_with_replacement(range(len(sym2)), 2)),
            sym4=tuple(combinations_with_replacement(range(m), 4)),
        )

    def monomial(self, a: int, b: int) -> Tuple[int, int, int, int]:
        """p_i p_j p_k p_l for (p_i p_j)(p_k p_l), as a sorted index tuple"""
        return tuple(sorted(self.sym2[a] + self.sym2[b]))  # type: ignore[return-value]

    def sym2_position(self, i: int, j: int) -> int:
        return self.sym2.index((min(i, j), max(i, j)))

    def describe(self, v: Sequence[Fraction]) -> List[str]:
        """Nonzero terms of a Sym^2(Sym^2 P) vector, 1-based: "c*(p1p1)(p2p2)" """
        terms = []
        for coeff, (a, b) in zip(v, self.sym2sym2):
            if coeff == 0:
                continue
            (i, j), (k, l) = self.sym2[a], self.sym2[b]
            terms.append(f"{format_scalar(coeff)}*(p{i + 1}p{j + 1})(p{k + 1}p{l + 1})")
        return terms


@dataclass(frozen=True)
class ObstructionKernel:
    index: SymIndex
    basis: Tuple[Vector, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def symmetrization_map(m: int) -> sp.Matrix:
    """Sym^2(Sym^2 P) -> Sym^4 P, (p_i p_j)(p_k p_l) -> p_i p_j p_k p_l"""
    index = SymIndex.build(m)
    position = {mono: r for r, mono in enumerate(index.sym4)}
    M = sp.zeros(len(index.sym4), len(index.sym2sym2))
    for c, (a, b) in enumerate(index.sym2sym2):
        M[position[index.monomial(a, b)], c] = 1
    return M


def obstruction_kernel(m: int) -> ObstructionKernel:
    index = SymIndex.build(m)
    if not index.sym2sym2:
        return ObstructionKernel(index=index, basis=())
    basis = linalg.nullspace_basis(symmetrization_map(m))
    return ObstructionKernel(index=index, basis=tuple(basis))


def _inverse_lefschetz(A: GradedAlgebra, omega: CohomologyClass) -> sp.Matrix:
    if A.top_degree != 6:
        raise CriterionInapplicable(f"F is defined for top degree 6, got {A.top_degree}")
    return analyze(A, omega).inverse_on_degree_two()


def _require_primitive(A: GradedAlgebra, omega: CohomologyClass, u: CohomologyClass) -> None:
    if u.degree != 2:
        raise CriterionInapplicable(f"F takes degree-2 arguments, got degree {u.degree}")
    if not mul(A, mul(A, omega, omega), u).is_zero():
        raise CriterionInapplicable(
            f"argument {[format_scalar(c) for c in u.coords]} is not primitive (omega^2 u != 0)"
        )


def _f(
    A: GradedAlgebra,
    inverse: sp.Matrix,
    alpha: CohomologyClass,
    beta: CohomologyClass,
    gamma: CohomologyClass,
    delta: CohomologyClass,
) -> Fraction:
    lifted = A.element(2, linalg.apply(inverse, mul(A, alpha, beta).coords))
    return integrate(A, mul(A, lifted, mul(A, gamma, delta)))


def F_eval(
    A: GradedAlgebra,
    omega: CohomologyClass,
    alpha: CohomologyClass,
    beta: CohomologyClass,
    gamma: CohomologyClass,
    delta: CohomologyClass,
) -> Fraction:
    """F(alpha, beta, gamma, delta) for primitive degree-2 classes"""
    inverse = _inverse_lefschetz(A, omega)
    for u in (alpha, beta, gamma, delta):
        _require_primitive(A, omega, u)
    return _f(A, inverse, alpha, beta, gamma, delta)


@dataclass(frozen=True)
class FormalityEvaluation:
    m: int
    primitive_basis: Tuple[Vector, ...]
    kernel: ObstructionKernel
    # F((p_i p_j)(p_k p_l)) indexed by Sym^2 positions (a, b)
    table: Dict[Pair, Fraction]
    values: Tuple[Fraction, ...]

    @property
    def verdict(self) -> FormalityVerdict:
        if any(v != 0 for v in self.values):
            return FormalityVerdict.NON_FORMAL
        return FormalityVerdict.FORMAL

    def witness_index(self) -> Optional[int]:
        for position, value in enumerate(self.values):
            if value != 0:
                return position
        return None

    def F_on_pairs(self, a: int, b: int) -> Fraction:
        return self.table[(min(a, b), max(a, b))]

    def kernel_values(self) -> List[KernelValue]:
        return [
            KernelValue(index=position, element=self.kernel.index.describe(v), value=format_scalar(value))
            for position, (v, value) in enumerate(zip(self.kernel.basis, self.values))
        ]

    def to_report(
        self,
        massey: Optional[List[Tuple[Tuple[int, int, int, int], Fraction]]] = None,
        crosscheck: Optional[LambdaCrosscheck] = None,
    ) -> FormalityReport:
        values = self.kernel_values()
        witness = self.witness_index()
        return FormalityReport(
            m=self.m,
            kernel_dimension=self.kernel.dimension,
            values=values,
            verdict=self.verdict,
            witness=None if witness is None else values[witness],
            massey_table=[
                MasseyEntry(indices=list(indices), value=format_scalar(value))
                for indices, value in (massey or [])
            ],
            lambda_crosscheck=crosscheck,
        )


def evaluate_F_M(
    A: GradedAlgebra,
    omega: CohomologyClass,
    primitive_basis: Optional[Sequence[Sequence]] = None,
) -> FormalityEvaluation:
    """F on every basis vector of K_M.

    ``primitive_basis`` replaces the echelon basis of P; its vectors must be
    primitive and independent.
    """
    inverse = _inverse_lefschetz(A, omega)
    primitive = primitive_subspace(A, omega)
    if primitive_basis is None:
        basis = primitive.primitive_basis
    else:
        basis = tuple(A.element(2, v).coords for v in primitive_basis)
        if len(basis) != primitive.m or linalg.rank(linalg.matrix(basis, A.dim(2))) != primitive.m:
            raise ValueError(f"primitive basis must have {primitive.m} independent vectors")
    classes = [A.element(2, v) for v in basis]
    for u in classes:
        _require_primitive(A, omega, u)

    kernel = obstruction_kernel(len(classes))
    index = kernel.index
    lifts = []
    squares = []
    for i, j in index.sym2:
        product = mul(A, classes[i], classes[j])
        squares.append(product)
        lifts.append(A.element(2, linalg.apply(inverse, product.coords)))
    table = {
        (a, b): integrate(A, mul(A, lifts[a], squares[b])) for a, b in index.sym2sym2
    }
    values = tuple(
        sum((c * table[pair] for c, pair in zip(v, index.sym2sym2)), Fraction(0))
        for v in kernel.basis
    )
    evaluation = FormalityEvaluation(
        m=len(classes), primitive_basis=basis, kernel=kernel, table=table, values=values
    )
    logger.debug(
        "F_M on %s: m=%d dim K_M=%d verdict=%s",
        A.name or "<unnamed>",
        evaluation.m,
        kernel.dimension,
        evaluation.verdict.value,
    )
    return evaluation


def massey_triple(
    A: GradedAlgebra,
    omega: CohomologyClass,
    quadruple: Tuple[int, int, int, int],
    evaluation: Optional[FormalityEvaluation] = None,
) -> Fraction:
    """<e_i, e_j, e_k> u e_l = F((e_i e_j)(e_k e_l)) - F((e_k e_j)(e_i e_l)), indices from 1"""
    evaluation = evaluation or evaluate_F_M(A, omega)
    i, j, k, l = (t - 1 for t in quadruple)
    if not all(0 <= t < evaluation.m for t in (i, j, k, l)):
        raise ValueError(f"indices {quadruple} outside 1..{evaluation.m}")
    index = evaluation.kernel.index
    ij, kl = index.sym2_position(i, j), index.sym2_position(k, l)
    kj, il = index.sym2_position(k, j), index.sym2_position(i, l)
    return evaluation.F_on_pairs(ij, kl) - evaluation.F_on_pairs(kj, il)


def massey_table(
    A: GradedAlgebra,
    omega: CohomologyClass,
    evaluation: Optional[FormalityEvaluation] = None,
) -> List[Tuple[Tuple[int, int, int, int], Fraction]]:
    """Every quadruple with i < k; the i <-> k antisymmetry fixes the others"""
    evaluation = evaluation or evaluate_F_M(A, omega)
    m = evaluation.m
    table = []
    for i in range(1, m + 1):
        for k in range(i + 1, m + 1):
            for j in range(1, m + 1):
                for l in range(1, m + 1):
                    quadruple = (i, j, k, l)
                    table.append((quadruple, massey_triple(A, omega, quadruple, evaluation)))
    return table


def lambda_crosscheck(
    A: GradedAlgebra,
    omega: CohomologyClass,
    evaluation: Optional[FormalityEvaluation] = None,
) -> LambdaCrosscheck:
    """Recompute F_M in floating point from an orthonormal frame (omega/sqrt3, f_1..f_m).

    P carries the form B(a, b) = integral of a b omega; when it is definite with
    sign eps, F((e_i e_j)(e_k e_l)) = lam_ij0 lam_kl0 / (sqrt3 lam_000)
    + eps * sum_t lam_ijt lam_klt over an eps B-orthonormal basis f_t of P.
    """
    evaluation = evaluation or evaluate_F_M(A, omega)
    m = evaluation.m
    if m == 0 or evaluation.kernel.dimension == 0:
        return LambdaCrosscheck(applicable=True, max_abs_discrepancy=0.0)

    primitive = primitive_subspace(A, omega)
    if primitive.primitive_basis != evaluation.primitive_basis:
        lam_basis = (omega.coords,) + evaluation.primitive_basis
        lam_exact = lambda_tensor(A, omega, lam_basis)
    else:
        lam_exact = primitive.lam
    lam = np.array([[[float(x) for x in row] for row in plane] for plane in lam_exact])

    # B on P is lam[0, 1:, 1:]
    B = lam[0, 1:, 1:]
    eigenvalues = np.linalg.eigvalsh(B)
    if np.all(eigenvalues > 0):
        sign = 1
    elif np.all(eigenvalues < 0):
        sign = -1
    else:
        return LambdaCrosscheck(
            applicable=False,
            max_abs_discrepancy=0.0,
            reason="the form (a, b) -> integral of a b omega is indefinite on P",
        )

    # sign * B = C C^T; columns of inv(C)^T express f_t in the p basis
    C = np.linalg.cholesky(sign * B)
    frame = np.zeros((m + 1, m + 1))
    frame[0, 0] = 1.0 / math.sqrt(3.0)
    frame[1:, 1:] = np.linalg.inv(C).T

    lam_frame = np.einsum("ia,jb,kc,ijk->abc", frame, frame, frame, lam)
    # lambda(p_i, p_j, g_t) with p in the primitive basis, g in the frame
    mixed = np.einsum("ijc,ct->ijt", lam[1:, 1:, :], frame)

    index = evaluation.kernel.index
    discrepancy = 0.0
    for v, exact in zip(evaluation.kernel.basis, evaluation.values):
        total = 0.0
        for coeff, (a, b) in zip(v, index.sym2sym2):
            if coeff == 0:
                continue
            (i, j), (k, l) = index.sym2[a], index.sym2[b]
            value = mixed[i, j, 0] * mixed[k, l, 0] / (math.sqrt(3.0) * lam_frame[0, 0, 0])
            value += sign * float(np.dot(mixed[i, j, 1:], mixed[k, l, 1:]))
            total += float(coeff) * value
        discrepancy = max(discrepancy, abs(total - float(exact)))

    if discrepancy > settings.CROSSCHECK_TOLERANCE:
        logger.warning(
            "lambda cross-check on %s differs from the exact F_M by %.3g",
            A.name or "<unnamed>",
            discrepancy,
        )
    return LambdaCrosscheck(applicable=True, max_abs_discrepancy=discrepancy, sign=sign)
