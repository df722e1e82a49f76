import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional, Tuple, TypeVar, cast

# Exact rational scalar; Fraction keeps numerator/denominator reduced with a
# positive denominator.
Scalar = Fraction
Vector = Tuple[Fraction, ...]
# (left degree, left index, right degree, right index), left degree <= right degree
ProductKey = Tuple[int, int, int, int]

_RATIONAL = re.compile(r"^([+-]?)(\d+)(?:/(\d+))?$")

T = TypeVar("T")


def parse_scalar(text: str) -> Fraction:
    """Parse a rational literal such as "3", "-1/2" or "+4/7".

    Raises ValueError on anything else, on a zero denominator and on a
    literal that is not in lowest terms.
    """
    match = _RATIONAL.match(text.strip()) if isinstance(text, str) else None
    if not match:
        raise ValueError(f"not a rational literal: {text!r}")
    sign, num, den = match.groups()
    numerator = int(num)
    denominator = int(den) if den is not None else 1
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    value = Fraction(numerator, denominator)
    if value.denominator != denominator and numerator != 0:
        raise ValueError(f"rational literal {text!r} is not reduced")
    return -value if sign == "-" else value


def format_scalar(value: Fraction) -> str:
    """Render an exact value as "p/q" (denominator always written)"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def zero_vector(length: int) -> Vector:
    return tuple(Fraction(0) for _ in range(length))


def unit_vector(length: int, index: int) -> Vector:
    return tuple(Fraction(1 if i == index else 0) for i in range(length))


@dataclass(frozen=True)
class CohomologyClass:
    """Element of one homogeneous degree, in the algebra's stored basis"""

    degree: int
    coords: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def _check_same(self, other: "CohomologyClass") -> None:
        if self.degree != other.degree or len(self.coords) != len(other.coords):
            raise ValueError(
                f"cannot combine classes of degree {self.degree} and {other.degree}"
            )

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        self._check_same(other)
        return CohomologyClass(self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "CohomologyClass") -> "CohomologyClass":
        self._check_same(other)
        return CohomologyClass(self.degree, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "CohomologyClass":
        return CohomologyClass(self.degree, tuple(-a for a in self.coords))

    def scale(self, factor: Fraction) -> "CohomologyClass":
        factor = Fraction(factor)
        return CohomologyClass(self.degree, tuple(factor * a for a in self.coords))


@dataclass(frozen=True)
class GradedAlgebra:
    """Finite-dimensional graded-commutative algebra over Q with a functional on
    the top degree.

    ``products`` stores the multiplication tensor for left degree <= right
    degree only, sparse (zero products omitted). Products with the unit are
    stored like any other. ``omega`` is an optional distinguished degree-2
    class carried along with the ring (from a file or a builder).
    """

    top_degree: int
    basis: Tuple[Tuple[str, ...], ...]
    products: Dict[ProductKey, Vector]
    integration: Vector
    omega: Optional[Vector] = None
    name: str = field(default="", compare=False)
    # derived results keyed by analysis name; written only through memo()
    cache: Dict[object, object] = field(default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, compare=False, repr=False)

    def memo(self, key: object, compute: Callable[[], T]) -> T:
        """Cached ``compute()`` under ``key``.

        Concurrent callers may both compute, the first stored value wins and
        every caller gets that same object back.
        """
        with self._lock:
            if key in self.cache:
                return cast(T, self.cache[key])
        value = compute()
        with self._lock:
            return cast(T, self.cache.setdefault(key, value))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(labels) for labels in self.basis)

    def dim(self, degree: int) -> int:
        if 0 <= degree <= self.top_degree and degree < len(self.basis):
            return len(self.basis[degree])
        return 0

    def label(self, degree: int, index: int) -> str:
        return self.basis[degree][index]

    def index_of(self, degree: int, label: str) -> int:
        try:
            return self.basis[degree].index(label)
        except ValueError:
            raise KeyError(f"no basis element {label!r} in degree {degree}") from None

    def basis_class(self, degree: int, index: int) -> CohomologyClass:
        return CohomologyClass(degree, unit_vector(self.dim(degree), index))

    def basis_classes(self, degree: int) -> Iterable[CohomologyClass]:
        return [self.basis_class(degree, i) for i in range(self.dim(degree))]

    def zero(self, degree: int) -> CohomologyClass:
        return CohomologyClass(degree, zero_vector(self.dim(degree)))

    def unit(self) -> CohomologyClass:
        return self.basis_class(0, 0)

    def element(self, degree: int, coords: Iterable) -> CohomologyClass:
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != self.dim(degree):
            raise ValueError(
                f"degree {degree} has dimension {self.dim(degree)}, got {len(coords)} coordinates"
            )
        return CohomologyClass(degree, coords)

    def default_omega(self) -> Optional[CohomologyClass]:
        if self.omega is None:
            return None
        return self.element(2, self.omega)

    def with_omega(self, coords: Optional[Iterable]) -> "GradedAlgebra":
        omega = None if coords is None else self.element(2, coords).coords
        return GradedAlgebra(
            top_degree=self.top_degree,
            basis=self.basis,
            products=self.products,
            integration=self.integration,
            omega=omega,
            name=self.name,
        )
