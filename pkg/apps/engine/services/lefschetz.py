"""
Lefschetz maps of a distinguished degree-2 class omega.

All maps are exact sympy matrices in the algebra's stored bases. Kernels are
returned in reduced echelon form, cokernels as the standard basis vectors
that complete the image (non-pivot positions), so the output never depends
on elimination order.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy as sp

from apps.engine.core.errors import CriterionInapplicable, DegreeError
from apps.engine.models.algebra import CohomologyClass, GradedAlgebra, Vector, format_scalar, unit_vector
from apps.engine.models.reports import HardLefschetzReport
from apps.engine.services import linalg
from apps.engine.services.algebra import ensure_valid, integrate, mul, multiplication_matrix, power

logger = logging.getLogger(__name__)

# symmetric 3-tensor, lam[i][j][k]
Tensor3 = Tuple[Tuple[Tuple[Fraction, ...], ...], ...]


@dataclass(frozen=True)
class HardLefschetzResult:
    holds: bool
    failing_k: Optional[int]
    flags: Tuple[bool, ...]


@dataclass(frozen=True)
class PrimitiveData:
    """P = ker(alpha -> omega^2 alpha) in H^2, with lambda over (omega, p_1..p_m)"""

    primitive_basis: Tuple[Vector, ...]
    lambda_basis: Tuple[Vector, ...]
    lam: Tensor3

    @property
    def m(self) -> int:
        return len(self.primitive_basis)


@dataclass(frozen=True)
class LefschetzAnalysis:
    omega: CohomologyClass
    step_maps: Dict[int, sp.Matrix]
    kernel_bases: Dict[int, Tuple[Vector, ...]]
    cokernel_bases: Dict[int, Tuple[Vector, ...]]
    # indexed by k = 0..n for N = 2n; empty for odd N
    hard_lefschetz_flags: Tuple[bool, ...]
    top_degree: int
    primitive: Optional[PrimitiveData] = field(default=None)

    @property
    def holds(self) -> bool:
        return bool(self.hard_lefschetz_flags) and all(self.hard_lefschetz_flags)

    @property
    def failing_k(self) -> Optional[int]:
        for k, flag in enumerate(self.hard_lefschetz_flags):
            if not flag:
                return k
        return None

    def kernel_dim(self, p: int) -> int:
        return len(self.kernel_bases.get(p, ()))

    def cokernel_dim(self, p: int) -> int:
        return len(self.cokernel_bases.get(p, ()))

    def inverse_on_degree_two(self) -> sp.Matrix:
        """L^{-1}: H^4 -> H^2; requires L: H^2 -> H^4 invertible"""
        M = self.step_maps[2]
        if not linalg.is_invertible(M):
            raise CriterionInapplicable("the Lefschetz map H^2 -> H^4 is not an isomorphism")
        return linalg.inverse(M)

    def to_report(self) -> HardLefschetzReport:
        N = self.top_degree
        return HardLefschetzReport(
            omega=[format_scalar(c) for c in self.omega.coords],
            holds=self.holds,
            failing_k=self.failing_k,
            flags=list(self.hard_lefschetz_flags),
            kernel_dims=[self.kernel_dim(p) for p in range(N + 1)],
            cokernel_dims=[self.cokernel_dim(p) for p in range(N + 1)],
            primitive_dim=None if self.primitive is None else self.primitive.m,
        )


def _check_omega(A: GradedAlgebra, omega: CohomologyClass) -> None:
    if omega.degree != 2:
        raise DegreeError(f"omega must have degree 2, got degree {omega.degree}")
    if len(omega.coords) != A.dim(2):
        raise DegreeError(
            f"omega has {len(omega.coords)} coordinates, degree 2 has dimension {A.dim(2)}"
        )


def lefschetz_step(A: GradedAlgebra, omega: CohomologyClass, p: int) -> sp.Matrix:
    """Matrix of beta -> beta * omega from H^p to H^(p+2).

    Above degree N - 2 the target is zero and the matrix has no rows.
    """
    _check_omega(A, omega)
    if not 0 <= p <= A.top_degree:
        raise DegreeError(f"degree {p} outside 0..{A.top_degree}")
    if p + 2 > A.top_degree:
        return sp.zeros(0, A.dim(p))
    return multiplication_matrix(A, omega, p)


def power_map(A: GradedAlgebra, omega: CohomologyClass, k: int, p: int) -> sp.Matrix:
    """Matrix of omega^k from H^p, as the product of k step maps"""
    if k < 0:
        raise ValueError("negative Lefschetz power")
    _check_omega(A, omega)
    if k == 0:
        return linalg.identity(A.dim(p))
    if p + 2 * k > A.top_degree:
        return sp.zeros(0, A.dim(p))
    steps = [lefschetz_step(A, omega, p + 2 * t) for t in range(k)]
    return linalg.product(*reversed(steps))


def kernel_basis(A: GradedAlgebra, omega: CohomologyClass, p: int) -> List[Vector]:
    """K^p = ker(L: H^p -> H^(p+2))"""
    if not 0 <= p <= A.top_degree:
        return []
    M = lefschetz_step(A, omega, p)
    return linalg.nullspace_basis(M)


def cokernel_basis(A: GradedAlgebra, omega: CohomologyClass, p: int) -> List[Vector]:
    """Representatives of Q^p = H^p / omega H^(p-2)"""
    if not 0 <= p <= A.top_degree:
        return []
    d = A.dim(p)
    if p < 2:
        return [unit_vector(d, i) for i in range(d)]
    image = linalg.columns(lefschetz_step(A, omega, p - 2))
    return [unit_vector(d, i) for i in linalg.complement_indices(image, d)]


def _flags(A: GradedAlgebra, omega: CohomologyClass) -> Tuple[bool, ...]:
    N = A.top_degree
    if N % 2:
        return ()
    n = N // 2
    flags = []
    for k in range(n + 1):
        M = power_map(A, omega, k, n - k)
        flags.append(M.rows == M.cols and linalg.is_invertible(M))
    return tuple(flags)


def hard_lefschetz(A: GradedAlgebra, omega: CohomologyClass) -> HardLefschetzResult:
    """omega^k: H^(n-k) -> H^(n+k) bijective for every 0 <= k <= n"""
    if A.top_degree % 2:
        raise CriterionInapplicable(
            f"hard Lefschetz needs an even top degree, got {A.top_degree}"
        )
    analysis = analyze(A, omega)
    return HardLefschetzResult(
        holds=analysis.holds,
        failing_k=analysis.failing_k,
        flags=analysis.hard_lefschetz_flags,
    )


def lambda_tensor(
    A: GradedAlgebra, omega: CohomologyClass, basis: Optional[Sequence[Sequence]] = None
) -> Tensor3:
    """lambda_ijk = integral of e_i e_j e_k over a basis of H^2.

    Without an explicit basis, (omega, p_1, .., p_m) is used.
    """
    _check_omega(A, omega)
    if A.top_degree != 6:
        raise CriterionInapplicable(f"the lambda tensor needs top degree 6, got {A.top_degree}")
    if basis is None:
        basis = primitive_subspace(A, omega).lambda_basis
    vectors = [A.element(2, v) for v in basis]
    if linalg.rank(linalg.matrix([v.coords for v in vectors], A.dim(2))) != A.dim(2) or len(vectors) != A.dim(2):
        raise ValueError("lambda tensor basis does not form a basis of H^2")
    return _lambda_over(A, vectors)


def _lambda_over(A: GradedAlgebra, vectors: Sequence[CohomologyClass]) -> Tensor3:
    r = len(vectors)
    squares = {
        (i, j): mul(A, vectors[i], vectors[j]) for i in range(r) for j in range(i, r)
    }
    values: Dict[Tuple[int, int, int], Fraction] = {}
    for i in range(r):
        for j in range(i, r):
            for k in range(j, r):
                values[(i, j, k)] = integrate(A, mul(A, squares[(i, j)], vectors[k]))
    return tuple(
        tuple(tuple(values[tuple(sorted((i, j, k)))] for k in range(r)) for j in range(r))
        for i in range(r)
    )


def _primitive(A: GradedAlgebra, omega: CohomologyClass) -> PrimitiveData:
    basis = tuple(linalg.nullspace_basis(power_map(A, omega, 2, 2)))
    lambda_basis = (omega.coords,) + basis
    lam = _lambda_over(A, [A.element(2, v) for v in lambda_basis])
    return PrimitiveData(primitive_basis=basis, lambda_basis=lambda_basis, lam=lam)


def primitive_subspace(A: GradedAlgebra, omega: CohomologyClass) -> PrimitiveData:
    """P = ker(alpha -> omega^2 alpha: H^2 -> H^6), defined under hard Lefschetz"""
    if A.top_degree != 6:
        raise CriterionInapplicable(
            f"the primitive subspace is defined for top degree 6, got {A.top_degree}"
        )
    analysis = analyze(A, omega)
    if not analysis.holds:
        raise CriterionInapplicable(
            f"hard Lefschetz fails at k={analysis.failing_k}; P is not defined"
        )
    assert analysis.primitive is not None
    return analysis.primitive


def analyze(A: GradedAlgebra, omega: CohomologyClass) -> LefschetzAnalysis:
    """Every step map, kernel and cokernel of omega at once; memoised per (A, omega)"""
    _check_omega(A, omega)
    return A.memo(("lefschetz", omega.coords), lambda: _analyze(A, omega))


def _analyze(A: GradedAlgebra, omega: CohomologyClass) -> LefschetzAnalysis:
    ensure_valid(A)
    N = A.top_degree
    step_maps = {p: lefschetz_step(A, omega, p) for p in range(N + 1)}
    kernels = {p: tuple(kernel_basis(A, omega, p)) for p in range(N + 1)}
    cokernels = {p: tuple(cokernel_basis(A, omega, p)) for p in range(N + 1)}
    flags = _flags(A, omega)
    primitive = None
    if N == 6 and flags and all(flags):
        primitive = _primitive(A, omega)

    analysis = LefschetzAnalysis(
        omega=omega,
        step_maps=step_maps,
        kernel_bases=kernels,
        cokernel_bases=cokernels,
        hard_lefschetz_flags=flags,
        top_degree=N,
        primitive=primitive,
    )
    logger.debug(
        "lefschetz %s omega=%s flags=%s",
        A.name or "<unnamed>",
        [format_scalar(c) for c in omega.coords],
        flags,
    )
    return analysis


def omega_top_power_nonzero(A: GradedAlgebra, omega: CohomologyClass) -> bool:
    """omega^n != 0 in H^N (N = 2n); the k = n hard Lefschetz condition"""
    _check_omega(A, omega)
    if A.top_degree % 2:
        return False
    return not power(A, omega, A.top_degree // 2).is_zero()
