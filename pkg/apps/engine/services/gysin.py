"""
Cohomology of the Boothby-Wang circle bundle E -> M with Euler class omega.

The Gysin sequence splits degree by degree as H^i(E) = Q^i + K^(i-1) x, with
Q = coker L and K = ker L for L = multiplication by omega, and x the degree-1
class of the fibre.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from apps.engine.core.errors import CriterionInapplicable
from apps.engine.models.algebra import CohomologyClass, GradedAlgebra, Vector, format_scalar
from apps.engine.models.reports import (
    GysinPiece,
    GysinReport,
    ObstructionCheck,
    ObstructionVerdict,
    ParityReport,
    SasakianVerdict,
)
from apps.engine.services import linalg
from apps.engine.services.algebra import mul
from apps.engine.services.lefschetz import analyze, omega_top_power_nonzero

logger = logging.getLogger(__name__)

FORMALITY_NOTE = (
    "formality is not a Sasakian obstruction in dimension 7: "
    "formal and non-formal simply connected Sasakian 7-manifolds both exist"
)


@dataclass(frozen=True)
class CircleBundleCohomology:
    """H^i(E) for i = 0..N+1 as Q-part representatives plus K-part ones tagged by x"""

    base_name: str
    omega: CohomologyClass
    q_parts: Tuple[Tuple[Vector, ...], ...]
    # k_parts[i] lists representatives of K^(i-1), each standing for k * x
    k_parts: Tuple[Tuple[Vector, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.q_parts) - 1

    @property
    def betti(self) -> Tuple[int, ...]:
        return tuple(len(q) + len(k) for q, k in zip(self.q_parts, self.k_parts))

    def generator_tags(self, degree: int) -> List[Tuple[str, Vector]]:
        return [("Q", v) for v in self.q_parts[degree]] + [("Kx", v) for v in self.k_parts[degree]]

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * b for i, b in enumerate(self.betti))


@dataclass(frozen=True)
class CupSquareResult:
    fired: bool
    witness: Optional[Tuple[CohomologyClass, CohomologyClass]] = None


def _require_total_space(A: GradedAlgebra, omega: CohomologyClass) -> None:
    if A.top_degree % 2:
        raise CriterionInapplicable(
            f"the circle bundle needs an even-dimensional base, got top degree {A.top_degree}"
        )
    if not omega_top_power_nonzero(A, omega):
        raise CriterionInapplicable(
            f"omega^{A.top_degree // 2} = 0; the Gysin table is only used for omega^n != 0"
        )


def total_space_cohomology(A: GradedAlgebra, omega: CohomologyClass) -> CircleBundleCohomology:
    analysis = analyze(A, omega)
    _require_total_space(A, omega)
    N = A.top_degree
    q_parts = []
    k_parts = []
    for i in range(N + 2):
        q_parts.append(analysis.cokernel_bases.get(i, ()))
        k_parts.append(analysis.kernel_bases.get(i - 1, ()))
    bundle = CircleBundleCohomology(
        base_name=A.name,
        omega=omega,
        q_parts=tuple(q_parts),
        k_parts=tuple(k_parts),
    )
    logger.debug("total space of %s: betti %s", A.name or "<unnamed>", bundle.betti)
    return bundle


def b3_of_total_space(A: GradedAlgebra, omega: CohomologyClass) -> int:
    """b3(E) = b3(M) + dim ker(L: H^2 -> H^4)"""
    if A.top_degree != 6:
        raise CriterionInapplicable(f"b3 of the total space is read for top degree 6, got {A.top_degree}")
    return total_space_cohomology(A, omega).betti[3]


def sasaki_betti_parity(betti: Sequence[int], dimension: int) -> ParityReport:
    """Odd Betti numbers b_p, p odd and p <= n, of a (2n+1)-dimensional Sasakian manifold are even"""
    if dimension < 1 or dimension % 2 == 0:
        raise ValueError(f"Sasakian manifolds have odd dimension, got {dimension}")
    if len(betti) != dimension + 1:
        raise ValueError(f"expected {dimension + 1} Betti numbers, got {len(betti)}")
    if any(b < 0 for b in betti):
        raise ValueError("Betti numbers must be non-negative")
    n = (dimension - 1) // 2
    degrees = [p for p in range(1, n + 1) if p % 2]
    violations = [p for p in degrees if betti[p] % 2]
    return ParityReport(dimension=dimension, applicable_degrees=degrees, violations=violations)


def cup_square_obstruction(A: GradedAlgebra, omega: CohomologyClass) -> CupSquareResult:
    """Whether H^2(E) x H^2(E) -> H^4(E) is nonzero, via Q^2 x Q^2 -> Q^4"""
    if A.top_degree != 6:
        raise CriterionInapplicable(f"the cup-square check needs top degree 6, got {A.top_degree}")
    analysis = analyze(A, omega)
    image = linalg.columns(analysis.step_maps[2])
    representatives = [A.element(2, v) for v in analysis.cokernel_bases[2]]
    for i, u in enumerate(representatives):
        for v in representatives[i:]:
            square = mul(A, u, v)
            if not linalg.in_span(image, square.coords, A.dim(4)):
                return CupSquareResult(fired=True, witness=(u, v))
    return CupSquareResult(fired=False)


def _coords(u: CohomologyClass) -> List[str]:
    return [format_scalar(c) for c in u.coords]


def obstruction_verdict(A: GradedAlgebra, omega: CohomologyClass) -> ObstructionVerdict:
    """Betti parity, cup square and the formality note in one verdict"""
    checks: List[ObstructionCheck] = []

    try:
        bundle = total_space_cohomology(A, omega)
        parity = sasaki_betti_parity(bundle.betti, bundle.dimension)
        checks.append(
            ObstructionCheck(
                name="betti_parity",
                applicable=True,
                fired=bool(parity.violations),
                witness=[[str(p), str(bundle.betti[p])] for p in parity.violations] or None,
                detail=f"betti {list(bundle.betti)}",
            )
        )
    except CriterionInapplicable as e:
        checks.append(ObstructionCheck(name="betti_parity", applicable=False, fired=False, detail=str(e)))

    try:
        cup = cup_square_obstruction(A, omega)
        checks.append(
            ObstructionCheck(
                name="cup_square",
                applicable=True,
                fired=cup.fired,
                witness=[_coords(u) for u in cup.witness] if cup.witness else None,
            )
        )
    except CriterionInapplicable as e:
        checks.append(ObstructionCheck(name="cup_square", applicable=False, fired=False, detail=str(e)))

    checks.append(ObstructionCheck(name="formality", applicable=False, fired=False, detail=FORMALITY_NOTE))

    excluded = any(check.applicable and check.fired for check in checks)
    return ObstructionVerdict(
        checks=checks,
        overall=SasakianVerdict.EXCLUDED if excluded else SasakianVerdict.NO_OBSTRUCTION,
    )


def gysin_report(A: GradedAlgebra, omega: CohomologyClass) -> GysinReport:
    bundle = total_space_cohomology(A, omega)
    pieces = [
        GysinPiece(
            degree=i,
            q_dim=len(bundle.q_parts[i]),
            k_dim=len(bundle.k_parts[i]),
            q_representatives=[[format_scalar(c) for c in v] for v in bundle.q_parts[i]],
            k_representatives=[[format_scalar(c) for c in v] for v in bundle.k_parts[i]],
        )
        for i in range(bundle.dimension + 1)
    ]
    return GysinReport(
        betti=list(bundle.betti),
        pieces=pieces,
        euler_characteristic=bundle.euler_characteristic(),
        b3=bundle.betti[3] if A.top_degree == 6 else None,
        parity=sasaki_betti_parity(bundle.betti, bundle.dimension),
    )
