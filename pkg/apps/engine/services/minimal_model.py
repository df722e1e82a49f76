"""
Sullivan models of the circle bundle and the partial minimal model behind F_M.

SullivanModel is (H (x) Lambda(x), d) with x of degree 1, dx = omega and
d(h x) = (-1)^|h| h omega. PartialMinimalModel is the free algebra on
V^2 = P and V^3 = C^3 + N^3 (C^3 = H^3, N^3 = Sym^2 P, d n_ij = p_i p_j)
together with its chain map rho into the Sullivan model.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy as sp

from apps.engine.core.errors import DegreeError
from apps.engine.models.algebra import CohomologyClass, GradedAlgebra, Vector, format_scalar
from apps.engine.models.reports import EquivalenceDegree, ModelReport
from apps.engine.services import linalg
from apps.engine.services.algebra import ensure_valid, integrate, mul_or_zero
from apps.engine.services.formality import SymIndex, obstruction_kernel
from apps.engine.services.lefschetz import analyze, primitive_subspace

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Polynomial = Dict[Monomial, Fraction]

# d(rho(z)) lives in degree 8 for the degree-7 classes of I(N^3)
FREE_ALGEBRA_MAX_DEGREE = 8


# ---------------------------------------------------------------------------
# (H (x) Lambda(x), d)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelElement:
    """h + hx * x with h in H^k and hx in H^(k-1)"""

    degree: int
    h: CohomologyClass
    hx: CohomologyClass

    def __add__(self, other: "ModelElement") -> "ModelElement":
        if self.degree != other.degree:
            raise DegreeError(f"cannot add model elements of degree {self.degree} and {other.degree}")
        return ModelElement(self.degree, self.h + other.h, self.hx + other.hx)

    def __sub__(self, other: "ModelElement") -> "ModelElement":
        return self + other.scale(-1)

    def scale(self, factor) -> "ModelElement":
        return ModelElement(self.degree, self.h.scale(factor), self.hx.scale(factor))

    def is_zero(self) -> bool:
        return self.h.is_zero() and self.hx.is_zero()

    @property
    def coords(self) -> Vector:
        return self.h.coords + self.hx.coords


class SullivanModel:
    def __init__(self, algebra: GradedAlgebra, omega: CohomologyClass):
        self.algebra = algebra
        self.omega = omega
        self.top_degree = algebra.top_degree + 1
        self._d_matrices: Dict[int, sp.Matrix] = {}

    def dim(self, degree: int) -> int:
        return self.algebra.dim(degree) + self.algebra.dim(degree - 1)

    def zero(self, degree: int) -> ModelElement:
        return ModelElement(degree, self.algebra.zero(degree), self.algebra.zero(degree - 1))

    def unit(self) -> ModelElement:
        return ModelElement(0, self.algebra.unit(), self.algebra.zero(-1))

    def x(self) -> ModelElement:
        return ModelElement(1, self.algebra.zero(1), self.algebra.unit())

    def from_class(self, u: CohomologyClass) -> ModelElement:
        return ModelElement(u.degree, u, self.algebra.zero(u.degree - 1))

    def times_x(self, u: CohomologyClass) -> ModelElement:
        return ModelElement(u.degree + 1, self.algebra.zero(u.degree + 1), u)

    def element(self, degree: int, coords: Sequence) -> ModelElement:
        coords = tuple(coords)
        split = self.algebra.dim(degree)
        if len(coords) != self.dim(degree):
            raise DegreeError(f"model degree {degree} has dimension {self.dim(degree)}, got {len(coords)}")
        return ModelElement(
            degree,
            CohomologyClass(degree, coords[:split]),
            CohomologyClass(degree - 1, coords[split:]),
        )

    def basis(self, degree: int) -> List[ModelElement]:
        n = self.dim(degree)
        return [self.element(degree, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]

    def product(self, u: ModelElement, v: ModelElement) -> ModelElement:
        """(a + b x)(c + e x) = ac + (ae + (-1)^|c| bc) x"""
        A = self.algebra
        degree = u.degree + v.degree
        h = mul_or_zero(A, u.h, v.h)
        hx = mul_or_zero(A, u.h, v.hx)
        bc = mul_or_zero(A, u.hx, v.h)
        hx = hx + (bc.scale(-1) if v.degree % 2 else bc)
        return ModelElement(degree, h, hx)

    def differential(self, u: ModelElement) -> ModelElement:
        """d(a + b x) = (-1)^|b| b omega"""
        image = mul_or_zero(self.algebra, u.hx, self.omega)
        if (u.degree - 1) % 2:
            image = image.scale(-1)
        return ModelElement(u.degree + 1, image, self.algebra.zero(u.degree))

    def d_matrix(self, degree: int) -> sp.Matrix:
        if degree not in self._d_matrices:
            images = [self.differential(b).coords for b in self.basis(degree)]
            self._d_matrices[degree] = linalg.column_matrix(images, self.dim(degree + 1))
        return self._d_matrices[degree]

    def d_squared_is_zero(self) -> bool:
        for k in range(self.top_degree + 1):
            M = linalg.product(self.d_matrix(k + 1), self.d_matrix(k))
            if any(x != 0 for x in M):
                return False
        return True

    def leibniz_failure(self) -> Optional[Tuple[int, int, int, int]]:
        """First basis pair violating d(uv) = du v + (-1)^|u| u dv, or None"""
        for p in range(self.top_degree + 1):
            for q in range(self.top_degree + 1 - p):
                for i, u in enumerate(self.basis(p)):
                    for j, v in enumerate(self.basis(q)):
                        left = self.differential(self.product(u, v))
                        right = self.product(self.differential(u), v)
                        twisted = self.product(u, self.differential(v))
                        right = right + (twisted.scale(-1) if p % 2 else twisted)
                        if left != right:
                            return (p, i, q, j)
        return None


def build_sullivan_model(A: GradedAlgebra, omega: CohomologyClass) -> SullivanModel:
    ensure_valid(A)
    analyze(A, omega)
    model = SullivanModel(A, omega)
    if not model.d_squared_is_zero():
        raise RuntimeError("Sullivan model differential does not square to zero")
    return model


@dataclass(frozen=True)
class ModelCohomology:
    dims: Tuple[int, ...]
    representatives: Tuple[Tuple[Vector, ...], ...]


def _cohomology_in_degree(
    d_in: sp.Matrix, d_out: sp.Matrix, dim: int
) -> List[Vector]:
    if dim == 0:
        return []
    cycles = linalg.nullspace_basis(d_out)
    boundaries = linalg.columns(d_in)
    chosen = linalg.independent_modulo(boundaries, cycles, dim)
    return [cycles[i] for i in chosen]


def model_cohomology(model: SullivanModel) -> ModelCohomology:
    """ker d / im d in every degree 0..N+1, with representatives"""
    representatives = []
    for k in range(model.top_degree + 1):
        d_in = model.d_matrix(k - 1) if k > 0 else sp.zeros(model.dim(0), 0)
        representatives.append(tuple(_cohomology_in_degree(d_in, model.d_matrix(k), model.dim(k))))
    return ModelCohomology(
        dims=tuple(len(r) for r in representatives),
        representatives=tuple(representatives),
    )


# ---------------------------------------------------------------------------
# Truncated free graded-commutative algebra
# ---------------------------------------------------------------------------

class FreeGradedAlgebra:
    """Lambda(generators) through ``max_degree``, polynomials as {exponents: coeff}.

    Odd generators square to zero; monomials are kept in generator order and
    products pick up the Koszul sign of reordering odd generators.
    """

    def __init__(
        self,
        generators: Sequence[Tuple[str, int]],
        differential: Dict[int, Polynomial],
        max_degree: int,
    ):
        if any(degree < 1 for _, degree in generators):
            raise ValueError("generators must have positive degree")
        self.names = tuple(name for name, _ in generators)
        self.degrees = tuple(degree for _, degree in generators)
        self.max_degree = max_degree
        self._d_generators = {i: dict(p) for i, p in differential.items()}
        self._d_cache: Dict[Monomial, Polynomial] = {}
        self._monomials: Dict[int, List[Monomial]] = {}

    @property
    def rank(self) -> int:
        return len(self.degrees)

    def degree(self, monomial: Monomial) -> int:
        return sum(e * d for e, d in zip(monomial, self.degrees))

    def one(self) -> Polynomial:
        return {(0,) * self.rank: Fraction(1)}

    def generator(self, i: int) -> Polynomial:
        return {tuple(int(j == i) for j in range(self.rank)): Fraction(1)}

    def monomials(self, degree: int) -> List[Monomial]:
        """All monomials of one degree, in lexicographic exponent order (descending)"""
        if degree in self._monomials:
            return self._monomials[degree]
        result: List[Monomial] = []

        def extend(i: int, remaining: int, prefix: Tuple[int, ...]) -> None:
            if i == self.rank:
                if remaining == 0:
                    result.append(prefix)
                return
            top = remaining // self.degrees[i]
            if self.degrees[i] % 2:
                top = min(top, 1)
            for e in range(top, -1, -1):
                extend(i + 1, remaining - e * self.degrees[i], prefix + (e,))

        if degree >= 0:
            extend(0, degree, ())
        self._monomials[degree] = result
        return result

    def _multiply_monomials(self, e: Monomial, f: Monomial) -> Optional[Tuple[int, Monomial]]:
        sign = 1
        for i in range(self.rank):
            if not f[i] or self.degrees[i] % 2 == 0:
                continue
            if e[i]:
                return None
            passed = sum(e[j] for j in range(i + 1, self.rank) if self.degrees[j] % 2)
            if passed % 2:
                sign = -sign
        return sign, tuple(a + b for a, b in zip(e, f))

    def multiply(self, f: Polynomial, g: Polynomial) -> Polynomial:
        result: Polynomial = {}
        for e, a in f.items():
            for m, b in g.items():
                if self.degree(e) + self.degree(m) > self.max_degree:
                    continue
                product = self._multiply_monomials(e, m)
                if product is None:
                    continue
                sign, monomial = product
                result[monomial] = result.get(monomial, Fraction(0)) + sign * a * b
        return {k: v for k, v in result.items() if v != 0}

    def add(self, f: Polynomial, g: Polynomial, factor: Union[int, Fraction] = 1) -> Polynomial:
        result = dict(f)
        for k, v in g.items():
            result[k] = result.get(k, Fraction(0)) + Fraction(factor) * v
        return {k: v for k, v in result.items() if v != 0}

    def factors(self, monomial: Monomial) -> List[int]:
        """Generator indices of a monomial, in order, with multiplicity"""
        return [i for i, e in enumerate(monomial) for _ in range(e)]

    def _product_of(self, indices: Sequence[int]) -> Polynomial:
        exponents = [0] * self.rank
        for i in indices:
            exponents[i] += 1
        return {tuple(exponents): Fraction(1)}

    def _d_monomial(self, monomial: Monomial) -> Polynomial:
        if monomial in self._d_cache:
            return self._d_cache[monomial]
        sequence = self.factors(monomial)
        result: Polynomial = {}
        for t, i in enumerate(sequence):
            d_gen = self._d_generators.get(i)
            if not d_gen:
                continue
            left = self._product_of(sequence[:t])
            right = self._product_of(sequence[t + 1:])
            term = self.multiply(self.multiply(left, d_gen), right)
            sign = -1 if sum(self.degrees[j] for j in sequence[:t]) % 2 else 1
            result = self.add(result, term, sign)
        self._d_cache[monomial] = result
        return result

    def differential(self, f: Polynomial) -> Polynomial:
        result: Polynomial = {}
        for monomial, coeff in f.items():
            result = self.add(result, self._d_monomial(monomial), coeff)
        return result

    def coordinates(self, f: Polynomial, degree: int) -> Vector:
        positions = {m: i for i, m in enumerate(self.monomials(degree))}
        out = [Fraction(0)] * len(positions)
        for monomial, coeff in f.items():
            if self.degree(monomial) != degree:
                raise DegreeError(f"polynomial has a term outside degree {degree}")
            out[positions[monomial]] = coeff
        return tuple(out)

    def d_matrix(self, degree: int) -> sp.Matrix:
        images = [
            self.coordinates(self._d_monomial(m), degree + 1) for m in self.monomials(degree)
        ]
        return linalg.column_matrix(images, len(self.monomials(degree + 1)))


# ---------------------------------------------------------------------------
# Partial minimal model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartialMinimalModel:
    algebra: GradedAlgebra
    omega: CohomologyClass
    sullivan: SullivanModel
    free: FreeGradedAlgebra
    index: SymIndex
    primitive_basis: Tuple[Vector, ...]
    v2: Tuple[int, ...]
    c3: Tuple[int, ...]
    n3: Tuple[int, ...]
    rho_generators: Dict[int, ModelElement] = field(repr=False)

    def rho(self, f: Polynomial, degree: int) -> ModelElement:
        """Multiplicative extension of rho to a homogeneous polynomial"""
        result = self.sullivan.zero(degree)
        for monomial, coeff in f.items():
            image = self.sullivan.unit()
            for i in self.free.factors(monomial):
                image = self.sullivan.product(image, self.rho_generators[i])
            if image.degree != degree:
                raise DegreeError(f"polynomial has a term outside degree {degree}")
            result = result + image.scale(coeff)
        return result

    def chain_map_residuals(self) -> List[Fraction]:
        """max |rho(dg) - d rho(g)| per generator"""
        residuals = []
        for i, degree in enumerate(self.free.degrees):
            lhs = self.rho(self.free.differential(self.free.generator(i)), degree + 1)
            rhs = self.sullivan.differential(self.rho_generators[i])
            diff = lhs - rhs
            residuals.append(max((abs(c) for c in diff.coords), default=Fraction(0)))
        return residuals


Layout = Tuple[List[Tuple[str, int]], Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]


def _generator_layout(A: GradedAlgebra, index: SymIndex) -> Layout:
    generators: List[Tuple[str, int]] = []
    v2: List[int] = []
    for i in range(index.m):
        v2.append(len(generators))
        generators.append((f"p{i + 1}", 2))
    c3: List[int] = []
    for label in A.basis[3]:
        c3.append(len(generators))
        generators.append((label, 3))
    n3: List[int] = []
    for i, j in index.sym2:
        n3.append(len(generators))
        generators.append((f"n{i + 1}{j + 1}", 3))
    return generators, tuple(v2), tuple(c3), tuple(n3)


def build_partial_minimal_model(A: GradedAlgebra, omega: CohomologyClass) -> PartialMinimalModel:
    """Generators, d and rho through degree 3; every invariant is checked here"""
    primitive = primitive_subspace(A, omega)
    inverse = analyze(A, omega).inverse_on_degree_two()
    sullivan = build_sullivan_model(A, omega)
    index = SymIndex.build(primitive.m)
    generators, v2, c3, n3 = _generator_layout(A, index)

    rank = len(generators)
    differential: Dict[int, Polynomial] = {}
    for position, (i, j) in zip(n3, index.sym2):
        exponents = [0] * rank
        exponents[v2[i]] += 1
        exponents[v2[j]] += 1
        differential[position] = {tuple(exponents): Fraction(1)}
    free = FreeGradedAlgebra(generators, differential, FREE_ALGEBRA_MAX_DEGREE)

    classes = [A.element(2, v) for v in primitive.primitive_basis]
    rho: Dict[int, ModelElement] = {}
    for position, u in zip(v2, classes):
        rho[position] = sullivan.from_class(u)
    for position, u in zip(c3, A.basis_classes(3)):
        rho[position] = sullivan.from_class(u)
    for position, (i, j) in zip(n3, index.sym2):
        square = mul_or_zero(A, classes[i], classes[j])
        lifted = A.element(2, linalg.apply(inverse, square.coords))
        rho[position] = sullivan.times_x(lifted)

    pm = PartialMinimalModel(
        algebra=A,
        omega=omega,
        sullivan=sullivan,
        free=free,
        index=index,
        primitive_basis=primitive.primitive_basis,
        v2=v2,
        c3=c3,
        n3=n3,
        rho_generators=rho,
    )

    for i in range(free.rank):
        if free.differential(free.differential(free.generator(i))):
            raise RuntimeError(f"d^2 != 0 on generator {free.names[i]}")
    if any(r != 0 for r in pm.chain_map_residuals()):
        raise RuntimeError("rho is not a chain map")
    if n3:
        images = [free.coordinates(differential[g], 4) for g in n3]
        if linalg.rank(linalg.column_matrix(images, len(free.monomials(4)))) != len(n3):
            raise RuntimeError("d is not injective on N^3")

    logger.debug(
        "partial minimal model of %s: |V2|=%d |C3|=%d |N3|=%d",
        A.name or "<unnamed>",
        len(v2),
        len(c3),
        len(n3),
    )
    return pm


@dataclass(frozen=True)
class ThreeEquivalence:
    degrees: Tuple[EquivalenceDegree, ...]

    @property
    def holds(self) -> bool:
        for entry in self.degrees:
            if entry.degree <= 3 and not entry.isomorphism:
                return False
            if entry.degree == 4 and not entry.injective:
                return False
        return True


def verify_three_equivalence(pm: PartialMinimalModel) -> ThreeEquivalence:
    """rho_*: H^i(Lambda V) -> H^i(model), isomorphic for i <= 3 and injective for i = 4"""
    free, sullivan = pm.free, pm.sullivan
    entries = []
    for i in range(5):
        n_source = len(free.monomials(i))
        d_in = free.d_matrix(i - 1) if i > 0 else sp.zeros(n_source, 0)
        source = _cohomology_in_degree(d_in, free.d_matrix(i), n_source)

        target_in = sullivan.d_matrix(i - 1) if i > 0 else sp.zeros(sullivan.dim(0), 0)
        target = _cohomology_in_degree(target_in, sullivan.d_matrix(i), sullivan.dim(i))

        monomials = free.monomials(i)
        images = []
        for vector in source:
            polynomial = {m: c for m, c in zip(monomials, vector) if c != 0}
            images.append(pm.rho(polynomial, i).coords)
        boundaries = linalg.columns(target_in)
        induced = 0
        if images and sullivan.dim(i):
            base_rank = linalg.rank(linalg.matrix(boundaries, sullivan.dim(i))) if boundaries else 0
            induced = linalg.rank(linalg.matrix(boundaries + images, sullivan.dim(i))) - base_rank
        injective = induced == len(source)
        entries.append(
            EquivalenceDegree(
                degree=i,
                source_dim=len(source),
                target_dim=len(target),
                rank=induced,
                isomorphism=injective and induced == len(target),
                injective=injective,
                matrix=_induced_matrix(target, boundaries, images, sullivan.dim(i)),
            )
        )
    return ThreeEquivalence(degrees=tuple(entries))


def _induced_matrix(
    target: Sequence[Vector], boundaries: Sequence[Vector], images: Sequence[Vector], dim: int
) -> List[List[str]]:
    """rho_* in the chosen cohomology representatives, one row per target class"""
    boundary_basis, _ = linalg.row_echelon_basis(boundaries, dim)
    spanning = list(target) + boundary_basis
    columns = [linalg.coordinates(spanning, image, dim)[: len(target)] for image in images]
    return [[format_scalar(col[row]) for col in columns] for row in range(len(target))]


def _splitting_matrix(pm: PartialMinimalModel, splitting: Sequence[Sequence]) -> List[List[Fraction]]:
    rows = [[Fraction(x) for x in row] for row in splitting]
    b3, s = len(pm.c3), len(pm.n3)
    if len(rows) != b3 or any(len(row) != s for row in rows):
        raise ValueError(f"splitting map Sym^2 P -> H^3 must be a {b3}x{s} matrix")
    return rows


def degree_seven_values(
    pm: PartialMinimalModel, splitting: Optional[Sequence[Sequence]] = None
) -> Tuple[Fraction, ...]:
    """Integral of rho(z) / x for the closed degree-7 elements z of N^3 . Sym^2 V^2.

    One z per basis vector of K_M. With ``splitting`` T, N^3 is replaced by
    the complement {n + T n} of C^3.
    """
    T = _splitting_matrix(pm, splitting) if splitting is not None else None
    free, index = pm.free, pm.index
    kernel = obstruction_kernel(index.m)
    values = []
    for v in kernel.basis:
        z: Polynomial = {}
        for coeff, (a, b) in zip(v, index.sym2sym2):
            if coeff == 0:
                continue
            n = free.generator(pm.n3[a])
            if T is not None:
                for t, position in enumerate(pm.c3):
                    n = free.add(n, free.generator(position), T[t][a])
            k, l = index.sym2[b]
            square = free.multiply(free.generator(pm.v2[k]), free.generator(pm.v2[l]))
            z = free.add(z, free.multiply(n, square), coeff)
        if free.differential(z):
            raise RuntimeError("degree-7 element built from K_M is not closed")
        image = pm.rho(z, 7)
        values.append(integrate(pm.algebra, image.hx))
    return tuple(values)


def splitting_invariance_check(
    A: GradedAlgebra, omega: CohomologyClass, splitting: Sequence[Sequence]
) -> bool:
    """Degree-7 values agree for N^3 and for the perturbed complement {n + T n}"""
    pm = build_partial_minimal_model(A, omega)
    return degree_seven_values(pm) == degree_seven_values(pm, splitting)


def model_report(A: GradedAlgebra, omega: CohomologyClass) -> ModelReport:
    pm = build_partial_minimal_model(A, omega)
    cohomology = model_cohomology(pm.sullivan)
    equivalence = verify_three_equivalence(pm)
    if not equivalence.holds:
        logger.error("rho fails to be a 3-equivalence on %s", A.name or "<unnamed>")
    return ModelReport(
        model_betti=list(cohomology.dims),
        v2_dim=len(pm.v2),
        c3_dim=len(pm.c3),
        n3_dim=len(pm.n3),
        chain_map_residuals=[format_scalar(r) for r in pm.chain_map_residuals()],
        equivalence=list(equivalence.degrees),
        three_equivalence=equivalence.holds,
        degree_seven_values=[format_scalar(v) for v in degree_seven_values(pm)],
    )
