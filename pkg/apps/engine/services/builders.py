import logging
import re
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import yaml

from apps.engine.core.config import settings
from apps.engine.core.errors import ConfigError
from apps.engine.models.algebra import GradedAlgebra, ProductKey, Vector, parse_scalar
from apps.engine.services.algebra import assemble, mul

logger = logging.getLogger(__name__)


def point() -> GradedAlgebra:
    """Cohomology of a point: Q in degree 0 with integral 1"""
    return assemble(0, [("1",)], {}, (1,), name="point")


def projective_space(n: int, generator: str = "h") -> GradedAlgebra:
    """Q[h]/(h^(n+1)) with deg h = 2, integral of h^n equal to 1 and omega = h"""
    if n < 1:
        raise ValueError("projective space needs n >= 1")
    N = 2 * n
    labels: List[Tuple[str, ...]] = []
    for degree in range(N + 1):
        if degree % 2:
            labels.append(())
        else:
            k = degree // 2
            labels.append(("1" if k == 0 else generator if k == 1 else f"{generator}^{k}",))
    products: Dict[ProductKey, Vector] = {}
    for a in range(n + 1):
        for b in range(a, n + 1 - a):
            products[(2 * a, 0, 2 * b, 0)] = (Fraction(1),)
    omega = (Fraction(1),)
    return assemble(N, labels, products, (1,), omega=omega, name=f"CP{n}")


def _tensor_labels(A: GradedAlgebra, B: GradedAlgebra, order: List[List[Tuple[int, int, int, int]]]) -> List[Tuple[str, ...]]:
    def joined(x: str, y: str, explicit: bool) -> str:
        if explicit:
            return f"{x}⊗{y}"
        if x == "1":
            return y
        if y == "1":
            return x
        return f"{x}{y}"

    for explicit in (False, True):
        labels = [
            tuple(joined(A.label(a, i), B.label(b, j), explicit) for a, i, b, j in degree)
            for degree in order
        ]
        flat = [label for degree in labels for label in degree]
        if len(flat) == len(set(flat)):
            return labels
    return labels


def tensor_product(A: GradedAlgebra, B: GradedAlgebra) -> GradedAlgebra:
    """Künneth product A ⊗ B with the Koszul sign.

    The degree-n basis lists pairs (a, b) with a + b = n by decreasing degree
    of the A factor, then by A index and B index; (CP1 ⊗ CP1) ⊗ CP1 therefore
    has degree-2 basis a, b, c and degree-4 basis ab, ac, bc.
    """
    N = A.top_degree + B.top_degree
    order: List[List[Tuple[int, int, int, int]]] = []
    for n in range(N + 1):
        pieces = []
        for a in range(min(n, A.top_degree), -1, -1):
            b = n - a
            if b > B.top_degree:
                continue
            for i in range(A.dim(a)):
                for j in range(B.dim(b)):
                    pieces.append((a, i, b, j))
        order.append(pieces)
    position = {entry: (n, k) for n, pieces in enumerate(order) for k, entry in enumerate(pieces)}

    products: Dict[ProductKey, Vector] = {}
    for p in range(N + 1):
        for q in range(p, N + 1 - p):
            for k1, (a1, i1, b1, j1) in enumerate(order[p]):
                for k2, (a2, i2, b2, j2) in enumerate(order[q]):
                    if a1 + a2 > A.top_degree or b1 + b2 > B.top_degree:
                        continue
                    left = mul(A, A.basis_class(a1, i1), A.basis_class(a2, i2))
                    right = mul(B, B.basis_class(b1, j1), B.basis_class(b2, j2))
                    if left.is_zero() or right.is_zero():
                        continue
                    sign = -1 if (b1 * a2) % 2 else 1
                    out = [Fraction(0)] * len(order[p + q])
                    for i, x in enumerate(left.coords):
                        if x == 0:
                            continue
                        for j, y in enumerate(right.coords):
                            if y == 0:
                                continue
                            _, k = position[(a1 + a2, i, b1 + b2, j)]
                            out[k] += sign * x * y
                    products[(p, k1, q, k2)] = tuple(out)

    integration = [Fraction(0)] * len(order[N])
    for k, (a, i, b, j) in enumerate(order[N]):
        if a == A.top_degree and b == B.top_degree:
            integration[k] = A.integration[i] * B.integration[j]

    # omega_A ⊗ 1 + 1 ⊗ omega_B, a missing omega counting as zero
    omega: Optional[List[Fraction]] = None
    if (A.omega is not None or B.omega is not None) and N >= 2:
        omega = [Fraction(0)] * len(order[2])
        for k, (a, i, b, j) in enumerate(order[2]):
            if a == 2 and b == 0 and A.omega is not None:
                omega[k] = A.omega[i]
            elif a == 0 and b == 2 and B.omega is not None:
                omega[k] = B.omega[j]
    name = "x".join(part for part in (A.name, B.name) if part and part != "point") or "point"
    return assemble(N, _tensor_labels(A, B, order), products, integration, omega=omega, name=name)


def cubic_form_algebra(
    h2_labels: Sequence[str],
    cubic: Mapping[Tuple[int, int, int], Any],
    h3_rank: int = 0,
    omega: Optional[Sequence] = None,
    name: str = "",
) -> GradedAlgebra:
    """Simply connected 6-dimensional Poincaré duality algebra of a cubic form.

    ``cubic`` gives c_ijk on sorted index triples; it is symmetrised. H^4 is
    the dual of H^2 (labels D<label>), H^3 has a symplectic basis
    u1..u_r, v1..v_r with u_t v_t = vol, and the integral of vol is 1.
    """
    r = len(h2_labels)
    c: Dict[Tuple[int, int, int], Fraction] = {}
    for key, value in cubic.items():
        if any(not 0 <= i < r for i in key) or len(key) != 3:
            raise ValueError(f"cubic coefficient index {key} outside 0..{r - 1}")
        coeff = Fraction(value) if not isinstance(value, str) else parse_scalar(value)
        for perm in set(permutations(key)):
            c[perm] = coeff

    h3 = [f"u{t + 1}" for t in range(h3_rank)] + [f"v{t + 1}" for t in range(h3_rank)]
    basis = [("1",), (), tuple(h2_labels), tuple(h3), tuple(f"D{x}" for x in h2_labels), (), ("vol",)]
    vol = (Fraction(1),)
    products: Dict[ProductKey, Vector] = {}
    for i in range(r):
        for j in range(r):
            products[(2, i, 2, j)] = tuple(c.get((i, j, k), Fraction(0)) for k in range(r))
            products[(2, i, 4, j)] = vol if i == j else (Fraction(0),)
    for t in range(h3_rank):
        products[(3, t, 3, h3_rank + t)] = vol
        products[(3, h3_rank + t, 3, t)] = (Fraction(-1),)
    return assemble(6, basis, products, (1,), omega=omega, name=name)


# ---------------------------------------------------------------------------
# Builtin catalog
# ---------------------------------------------------------------------------

def _load_catalog(rules_dir: Optional[Path] = None) -> Dict[str, Dict[str, Any]]:
    """Load synthetic algebras from rules/synthetic.yaml"""
    catalog_file = Path(rules_dir or settings.RULES_DIR) / "synthetic.yaml"
    if not catalog_file.exists():
        logger.warning("synthetic catalog not found at %s", catalog_file)
        return {}
    with open(catalog_file, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return data.get("algebras", {}) or {}


def _from_catalog(name: str, entry: Dict[str, Any]) -> GradedAlgebra:
    labels = entry["h2_labels"]
    cubic = {}
    for term in entry.get("cubic", []):
        cubic[tuple(sorted(term["indices"]))] = str(term["coeff"])
    omega = [parse_scalar(str(x)) for x in entry["omega"]] if "omega" in entry else None
    return cubic_form_algebra(labels, cubic, h3_rank=int(entry.get("h3_rank", 0)), omega=omega, name=name)


def _projective_product(generators: Sequence[Tuple[int, str]]) -> GradedAlgebra:
    algebra = point()
    for n, generator in generators:
        algebra = tensor_product(algebra, projective_space(n, generator))
    return algebra


_STANDARD = {
    "cp1": lambda: projective_space(1),
    "cp2": lambda: projective_space(2),
    "cp3": lambda: projective_space(3),
    "cp1xcp1xcp1": lambda: _projective_product([(1, "a"), (1, "b"), (1, "c")]),
    "cp1xcp2": lambda: _projective_product([(1, "a"), (2, "h")]),
}


def builtin_names() -> List[str]:
    return list(_STANDARD) + sorted(_load_catalog())


def builtin_descriptions() -> Dict[str, str]:
    descriptions = {
        "cp1": "CP^1, omega = h",
        "cp2": "CP^2, omega = h",
        "cp3": "CP^3, omega = h",
        "cp1xcp1xcp1": "CP^1 x CP^1 x CP^1, omega = a + b + c",
        "cp1xcp2": "CP^1 x CP^2, omega = a + h",
    }
    for name, entry in sorted(_load_catalog().items()):
        descriptions[name] = str(entry.get("description", "")).strip()
    return descriptions


def builtin(name: str) -> GradedAlgebra:
    """Named algebra with its default omega (sum of the degree-2 generators for
    products of projective spaces)"""
    key = name.strip().lower()
    if key in _STANDARD:
        algebra = _STANDARD[key]()
        return GradedAlgebra(
            top_degree=algebra.top_degree,
            basis=algebra.basis,
            products=algebra.products,
            integration=algebra.integration,
            omega=algebra.omega,
            name=key,
        )
    catalog = _load_catalog()
    if key in catalog:
        return _from_catalog(key, catalog[key])
    raise ConfigError(f"unknown builtin {name!r}; known: {', '.join(builtin_names())}")


_FACTOR = re.compile(r"^cp(\d+)$")
_GENERATOR_NAMES = "abcdefgh"


def product_expression(expression: str) -> GradedAlgebra:
    """Algebra of a product such as "cp1*cp1*cp2"; generators named a, b, c, ..."""
    factors = [part.strip().lower() for part in expression.split("*") if part.strip()]
    if not factors or len(factors) > len(_GENERATOR_NAMES):
        raise ConfigError(f"bad product expression {expression!r}")
    generators = []
    for position, factor in enumerate(factors):
        match = _FACTOR.match(factor)
        if not match or int(match.group(1)) < 1:
            raise ConfigError(f"bad factor {factor!r} in product expression {expression!r}")
        generators.append((int(match.group(1)), _GENERATOR_NAMES[position]))
    algebra = _projective_product(generators)
    return GradedAlgebra(
        top_degree=algebra.top_degree,
        basis=algebra.basis,
        products=algebra.products,
        integration=algebra.integration,
        omega=algebra.omega,
        name=expression,
    )
