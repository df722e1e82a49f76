import logging
from fractions import Fraction
from itertools import product as cartesian
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from apps.engine.core.errors import DegreeError, InvalidAlgebraError
from apps.engine.models.algebra import (
    CohomologyClass,
    GradedAlgebra,
    ProductKey,
    Vector,
    unit_vector,
)
from apps.engine.models.reports import InvariantCheck, ValidationReport
from apps.engine.services import linalg

logger = logging.getLogger(__name__)


def assemble(
    top_degree: int,
    basis: Sequence[Sequence[str]],
    products: Mapping[ProductKey, Sequence],
    integration: Sequence,
    omega: Optional[Sequence] = None,
    name: str = "",
) -> GradedAlgebra:
    """Build a GradedAlgebra, dropping zero products and filling in the unit law
    for any product with the degree-0 basis element that was left out.
    """
    basis = tuple(tuple(labels) for labels in basis)
    table: Dict[ProductKey, Vector] = {}
    for key, value in products.items():
        vector = tuple(Fraction(x) for x in value)
        if any(x != 0 for x in vector):
            table[key] = vector
    if basis and len(basis[0]) == 1:
        for q in range(len(basis)):
            for j in range(len(basis[q])):
                key = (0, 0, q, j)
                if key not in table and key not in products:
                    table[key] = unit_vector(len(basis[q]), j)
    return GradedAlgebra(
        top_degree=top_degree,
        basis=basis,
        products=table,
        integration=tuple(Fraction(x) for x in integration),
        omega=None if omega is None else tuple(Fraction(x) for x in omega),
        name=name,
    )


def _basis_product(A: GradedAlgebra, p: int, i: int, q: int, j: int) -> Optional[Vector]:
    if p <= q:
        return A.products.get((p, i, q, j))
    stored = A.products.get((q, j, p, i))
    if stored is None:
        return None
    if (p * q) % 2:
        return tuple(-x for x in stored)
    return stored


def mul(A: GradedAlgebra, u: CohomologyClass, v: CohomologyClass) -> CohomologyClass:
    """Cup product, extended bilinearly from the stored table"""
    p, q = u.degree, v.degree
    if p + q > A.top_degree:
        raise DegreeError(
            f"product of degrees {p} and {q} exceeds top degree {A.top_degree}"
        )
    out = [Fraction(0)] * A.dim(p + q)
    for i, a in enumerate(u.coords):
        if a == 0:
            continue
        for j, b in enumerate(v.coords):
            if b == 0:
                continue
            value = _basis_product(A, p, i, q, j)
            if value is None:
                continue
            coeff = a * b
            for k, x in enumerate(value):
                out[k] += coeff * x
    return CohomologyClass(p + q, tuple(out))


def mul_or_zero(A: GradedAlgebra, u: CohomologyClass, v: CohomologyClass) -> CohomologyClass:
    """Product that vanishes above the top degree instead of raising"""
    if u.degree + v.degree > A.top_degree:
        return CohomologyClass(u.degree + v.degree, ())
    return mul(A, u, v)


def power(A: GradedAlgebra, u: CohomologyClass, k: int) -> CohomologyClass:
    if k < 0:
        raise ValueError("negative power")
    result = A.unit()
    for _ in range(k):
        result = mul(A, result, u)
    return result


def integrate(A: GradedAlgebra, u: CohomologyClass) -> Fraction:
    if u.degree != A.top_degree:
        raise DegreeError(f"can only integrate degree {A.top_degree}, got degree {u.degree}")
    return sum((a * b for a, b in zip(u.coords, A.integration)), Fraction(0))


def pairing_matrix(A: GradedAlgebra, p: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """M[i][j] = integral of e_i^(p) * e_j^(N-p)"""
    N = A.top_degree
    if not 0 <= p <= N:
        raise DegreeError(f"degree {p} outside 0..{N}")
    return tuple(
        tuple(integrate(A, mul(A, u, v)) for v in A.basis_classes(N - p))
        for u in A.basis_classes(p)
    )


def multiplication_matrix(A: GradedAlgebra, u: CohomologyClass, p: int) -> sp.Matrix:
    """Matrix of v -> u*v from degree p to degree p + deg u (columns are images)"""
    target = p + u.degree
    images = [mul(A, u, v).coords for v in A.basis_classes(p)]
    return linalg.column_matrix(images, A.dim(target))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _structure_problems(A: GradedAlgebra) -> List[InvariantCheck]:
    checks: List[InvariantCheck] = []
    N = A.top_degree

    ok, witness, detail = True, None, None
    if N < 0 or len(A.basis) != N + 1:
        ok, detail = False, f"expected {N + 1} degrees of basis, found {len(A.basis)}"
    elif len(A.integration) != A.dim(N):
        ok, witness = False, [N]
        detail = f"integration has {len(A.integration)} entries, top degree has dimension {A.dim(N)}"
    elif A.omega is not None and len(A.omega) != A.dim(2):
        ok, witness = False, [2]
        detail = f"omega has {len(A.omega)} entries, degree 2 has dimension {A.dim(2)}"
    else:
        for (p, i, q, j), value in sorted(A.products.items()):
            if p > q or p + q > N or not (0 <= i < A.dim(p)) or not (0 <= j < A.dim(q)):
                ok, witness = False, [p, i, q, j]
                detail = "product entry outside the basis or with left degree > right degree"
                break
            if len(value) != A.dim(p + q):
                ok, witness = False, [p, i, q, j]
                detail = f"product value has {len(value)} entries, degree {p + q} has dimension {A.dim(p + q)}"
                break
    checks.append(InvariantCheck(name="dimensions", passed=ok, witness=witness, detail=detail))

    seen: Dict[str, Tuple[int, int]] = {}
    duplicate = None
    for degree, labels in enumerate(A.basis):
        for index, label in enumerate(labels):
            if label in seen:
                duplicate = [degree, index]
                break
            seen[label] = (degree, index)
        if duplicate:
            break
    checks.append(
        InvariantCheck(
            name="unique_labels",
            passed=duplicate is None,
            witness=duplicate,
            detail=None if duplicate is None else f"label {A.label(*duplicate)!r} repeated",
        )
    )
    return checks


def _check_unit(A: GradedAlgebra) -> InvariantCheck:
    one = A.unit()
    for q in range(A.top_degree + 1):
        for u in A.basis_classes(q):
            if mul(A, one, u) != u:
                return InvariantCheck(name="unit", passed=False, witness=[q, u.coords.index(1)])
    return InvariantCheck(name="unit", passed=True)


def _check_commutativity(A: GradedAlgebra) -> InvariantCheck:
    N = A.top_degree
    for p in range(N + 1):
        for q in range(p, N + 1 - p):
            for i, j in cartesian(range(A.dim(p)), range(A.dim(q))):
                u, v = A.basis_class(p, i), A.basis_class(q, j)
                sign = -1 if (p * q) % 2 else 1
                uv = mul(A, u, v)
                vu = mul(A, v, u)
                if uv != vu.scale(sign):
                    return InvariantCheck(
                        name="graded_commutativity", passed=False, witness=[p, i, q, j]
                    )
    return InvariantCheck(name="graded_commutativity", passed=True)


def _check_associativity(A: GradedAlgebra) -> InvariantCheck:
    N = A.top_degree
    for p in range(1, N + 1):
        for q in range(1, N + 1 - p):
            for r in range(1, N + 1 - p - q):
                for i, j, k in cartesian(range(A.dim(p)), range(A.dim(q)), range(A.dim(r))):
                    u, v, w = A.basis_class(p, i), A.basis_class(q, j), A.basis_class(r, k)
                    if mul(A, mul(A, u, v), w) != mul(A, u, mul(A, v, w)):
                        return InvariantCheck(
                            name="associativity", passed=False, witness=[p, i, q, j, r, k]
                        )
    return InvariantCheck(name="associativity", passed=True)


def _check_duality(A: GradedAlgebra) -> InvariantCheck:
    N = A.top_degree
    for p in range(N + 1):
        rows = pairing_matrix(A, p)
        full = A.dim(p) == A.dim(N - p) and linalg.rank(linalg.matrix(rows, A.dim(N - p))) == A.dim(p)
        if not full:
            return InvariantCheck(
                name="poincare_duality",
                passed=False,
                witness=[p],
                detail=f"pairing H^{p} x H^{N - p} -> Q is degenerate",
            )
    return InvariantCheck(name="poincare_duality", passed=True)


def validate(A: GradedAlgebra) -> ValidationReport:
    """Check every structural invariant; memoised on the algebra"""
    return A.memo("validation", lambda: _validate(A))


def _validate(A: GradedAlgebra) -> ValidationReport:
    checks = _structure_problems(A)
    if all(check.passed for check in checks):
        N = A.top_degree
        checks.append(
            InvariantCheck(
                name="connected",
                passed=A.dim(0) == 1,
                witness=None if A.dim(0) == 1 else [0],
                detail=None if A.dim(0) == 1 else f"degree 0 has dimension {A.dim(0)}",
            )
        )
        simply_connected = A.dim(1) == 0
        checks.append(
            InvariantCheck(
                name="simply_connected",
                passed=simply_connected,
                witness=None if simply_connected else [1],
                detail=None if simply_connected else f"degree 1 has dimension {A.dim(1)}",
            )
        )
        if A.dim(0) == 1:
            checks.append(_check_unit(A))
            checks.append(_check_commutativity(A))
            checks.append(_check_associativity(A))
            checks.append(_check_duality(A))
        top_ok = A.dim(N) == 1
        checks.append(
            InvariantCheck(
                name="top_degree_one",
                passed=top_ok,
                witness=None if top_ok else [N],
                detail=None if top_ok else f"degree {N} has dimension {A.dim(N)}",
            )
        )
    else:
        for name in ("connected", "simply_connected", "unit", "graded_commutativity",
                     "associativity", "poincare_duality", "top_degree_one"):
            checks.append(InvariantCheck(name=name, passed=False, detail="skipped: malformed structure"))

    report = ValidationReport(checks=checks)
    if not report.valid:
        logger.debug("algebra %s failed: %s", A.name or "<unnamed>", [c.name for c in report.failed()])
    return report


def ensure_valid(A: GradedAlgebra) -> GradedAlgebra:
    report = validate(A)
    if not report.valid:
        raise InvalidAlgebraError(report)
    return A


# ---------------------------------------------------------------------------
# Changes of presentation
# ---------------------------------------------------------------------------

def change_basis(A: GradedAlgebra, changes: Mapping[int, Sequence[Sequence]]) -> GradedAlgebra:
    """Re-express A in a new basis.

    ``changes[p]`` is a square invertible matrix (list of rows) whose columns
    are the new degree-p basis vectors written in the old basis. Degree 0 must
    keep the unit. Changed degrees get labels ``b<p>_<j>``.
    """
    N = A.top_degree
    new_vectors: Dict[int, List[CohomologyClass]] = {}
    inverses: Dict[int, sp.Matrix] = {}
    for p in range(N + 1):
        if p in changes:
            if p == 0:
                raise ValueError("the unit cannot be rebased")
            M = linalg.matrix(changes[p], A.dim(p))
            if not (M.rows == M.cols == A.dim(p)) or not linalg.is_invertible(M):
                raise ValueError(f"basis change in degree {p} is not an invertible {A.dim(p)}x{A.dim(p)} matrix")
            new_vectors[p] = [A.element(p, linalg.column(M, j)) for j in range(M.cols)]
            inverses[p] = linalg.inverse(M)
        else:
            new_vectors[p] = list(A.basis_classes(p))

    def to_new(u: CohomologyClass) -> Vector:
        if u.degree in inverses:
            return linalg.apply(inverses[u.degree], u.coords)
        return u.coords

    products: Dict[ProductKey, Vector] = {}
    for p in range(N + 1):
        for q in range(p, N + 1 - p):
            for i, u in enumerate(new_vectors[p]):
                for j, v in enumerate(new_vectors[q]):
                    products[(p, i, q, j)] = to_new(mul(A, u, v))

    integration = tuple(integrate(A, u) for u in new_vectors[N])
    basis = [
        tuple(f"b{p}_{j}" for j in range(A.dim(p))) if p in changes else A.basis[p]
        for p in range(N + 1)
    ]
    omega = None
    if A.omega is not None:
        omega = to_new(A.element(2, A.omega))
    return assemble(N, basis, products, integration, omega=omega, name=A.name)


def rescale_integration(A: GradedAlgebra, factor) -> GradedAlgebra:
    factor = Fraction(factor)
    if factor == 0:
        raise ValueError("integration cannot be rescaled by zero")
    return GradedAlgebra(
        top_degree=A.top_degree,
        basis=A.basis,
        products=A.products,
        integration=tuple(factor * x for x in A.integration),
        omega=A.omega,
        name=A.name,
    )
