from pydantic import BaseModel
from enum import Enum
from typing import List, Optional, Union


class FragmentStatus(str, Enum):
    OK = "ok"
    INAPPLICABLE = "inapplicable"
    ERROR = "error"


class FormalityVerdict(str, Enum):
    FORMAL = "formal"
    NON_FORMAL = "non-formal"


class SasakianVerdict(str, Enum):
    NO_OBSTRUCTION = "no obstruction found"
    EXCLUDED = "Sasakian structure excluded"


# Recorded verbatim in every formality report: the engine decides on the
# (ring, omega) pair and cannot check that a Sasakian manifold realises it.
FORMALITY_HYPOTHESIS = (
    "Verdict applies to a simply connected compact Sasakian 7-manifold whose "
    "quasi-regular quotient has this rational cohomology ring and Euler class omega."
)


class InvariantCheck(BaseModel):
    name: str
    passed: bool
    witness: Optional[List[int]] = None
    detail: Optional[str] = None


class ValidationReport(BaseModel):
    checks: List[InvariantCheck]

    @property
    def valid(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> List[InvariantCheck]:
        return [check for check in self.checks if not check.passed]


class HardLefschetzReport(BaseModel):
    omega: List[str]
    holds: bool
    failing_k: Optional[int] = None
    flags: List[bool]
    kernel_dims: List[int]
    cokernel_dims: List[int]
    primitive_dim: Optional[int] = None


class GysinPiece(BaseModel):
    degree: int
    q_dim: int
    k_dim: int
    q_representatives: List[List[str]]
    k_representatives: List[List[str]]


class ParityReport(BaseModel):
    dimension: int
    applicable_degrees: List[int]
    violations: List[int]


class GysinReport(BaseModel):
    betti: List[int]
    pieces: List[GysinPiece]
    euler_characteristic: int
    b3: Optional[int] = None
    parity: ParityReport


class ObstructionCheck(BaseModel):
    name: str
    applicable: bool
    fired: bool
    witness: Optional[List[List[str]]] = None
    detail: Optional[str] = None


class ObstructionVerdict(BaseModel):
    checks: List[ObstructionCheck]
    overall: SasakianVerdict


class KernelValue(BaseModel):
    index: int
    element: List[str]
    value: str


class MasseyEntry(BaseModel):
    indices: List[int]
    value: str


class LambdaCrosscheck(BaseModel):
    applicable: bool
    max_abs_discrepancy: float
    sign: Optional[int] = None
    reason: Optional[str] = None


class FormalityReport(BaseModel):
    hypothesis: str = FORMALITY_HYPOTHESIS
    m: int
    kernel_dimension: int
    values: List[KernelValue]
    verdict: FormalityVerdict
    witness: Optional[KernelValue] = None
    massey_table: List[MasseyEntry] = []
    lambda_crosscheck: Optional[LambdaCrosscheck] = None


class EquivalenceDegree(BaseModel):
    degree: int
    source_dim: int
    target_dim: int
    rank: int
    isomorphism: bool
    injective: bool
    # rho_* on the chosen representatives, rows indexed by target classes
    matrix: List[List[str]]


class ModelReport(BaseModel):
    model_betti: List[int]
    v2_dim: int
    c3_dim: int
    n3_dim: int
    chain_map_residuals: List[str]
    equivalence: List[EquivalenceDegree]
    three_equivalence: bool
    degree_seven_values: List[str]


FragmentResult = Union[
    ValidationReport,
    HardLefschetzReport,
    GysinReport,
    ObstructionVerdict,
    FormalityReport,
    ModelReport,
]


class AnalysisFragment(BaseModel):
    analysis: str
    status: FragmentStatus
    reason: Optional[str] = None
    result: Optional[FragmentResult] = None


class Report(BaseModel):
    tool: str
    version: str
    source: str
    input_digest: str
    analyses: List[AnalysisFragment]
    summary: Optional[SasakianVerdict] = None
    exit_code: int = 0
