"""
Reading and writing algebra files (UTF-8 JSON).

The schema is checked by the pydantic models in models/algebra_file.py; this
module resolves indices and labels against the declared basis and reports
every problem with the field path it came from, e.g. products[3].value[0].coeff.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from apps.engine.core.errors import AlgebraFormatError, ConfigError
from apps.engine.models.algebra import GradedAlgebra, ProductKey, Vector, format_scalar, parse_scalar, unit_vector
from apps.engine.models.algebra_file import AlgebraFile, Term
from apps.engine.services.algebra import assemble

logger = logging.getLogger(__name__)


def _path(loc: Sequence[Union[int, str]]) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def _resolve_index(term: Term, labels: Sequence[str], location: str) -> int:
    if isinstance(term.index, str):
        if term.index not in labels:
            raise AlgebraFormatError(f"unknown basis label {term.index!r}", location)
        return list(labels).index(term.index)
    if not 0 <= term.index < len(labels):
        raise AlgebraFormatError(
            f"index {term.index} outside 0..{len(labels) - 1}", location
        )
    return term.index


def _vector(terms: List[Term], labels: Sequence[str], location: str) -> Vector:
    out = [Fraction(0)] * len(labels)
    seen = set()
    for t, term in enumerate(terms):
        where = f"{location}[{t}].index"
        index = _resolve_index(term, labels, where)
        if index in seen:
            raise AlgebraFormatError(f"index {index} listed twice", where)
        seen.add(index)
        out[index] = parse_scalar(term.coeff)
    return tuple(out)


def parse_algebra(text: str, name: str = "") -> GradedAlgebra:
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise AlgebraFormatError(e.msg, f"line {e.lineno}, column {e.colno}") from None

    try:
        spec = AlgebraFile.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        location = _path(error["loc"])
        if error["type"] == "missing":
            raise AlgebraFormatError(f"missing required block {location!r}", location or None) from None
        message = str(error["msg"]).removeprefix("Value error, ")
        raise AlgebraFormatError(message, location or None) from None

    N = spec.top_degree
    basis: List[Optional[List[str]]] = [None] * (N + 1)
    for b, block in enumerate(spec.basis):
        if block.degree > N:
            raise AlgebraFormatError(f"degree {block.degree} above top degree {N}", f"basis[{b}].degree")
        if basis[block.degree] is not None:
            raise AlgebraFormatError(f"degree {block.degree} declared twice", f"basis[{b}].degree")
        basis[block.degree] = list(block.labels)
    labels = [degree or [] for degree in basis]

    products: Dict[ProductKey, Vector] = {}
    for k, entry in enumerate(spec.products):
        (p, i), (q, j) = entry.left, entry.right
        where = f"products[{k}]"
        if p > q:
            raise AlgebraFormatError(f"left degree {p} exceeds right degree {q}", f"{where}.left")
        if p < 0 or p + q > N:
            raise AlgebraFormatError(f"degrees {p} + {q} outside 0..{N}", f"{where}.right")
        if not 0 <= i < len(labels[p]):
            raise AlgebraFormatError(f"no basis element {i} in degree {p}", f"{where}.left")
        if not 0 <= j < len(labels[q]):
            raise AlgebraFormatError(f"no basis element {j} in degree {q}", f"{where}.right")
        if (p, i, q, j) in products:
            raise AlgebraFormatError("product listed twice", where)
        products[(p, i, q, j)] = _vector(entry.value, labels[p + q], f"{where}.value")

    integration = _vector(spec.integration, labels[N], "integration")
    omega = None
    if spec.omega is not None:
        if N < 2:
            raise AlgebraFormatError("omega needs a degree-2 part", "omega")
        omega = _vector(spec.omega, labels[2], "omega")

    algebra = assemble(N, labels, products, integration, omega=omega, name=spec.name or name)
    logger.debug("parsed algebra %s with dims %s", algebra.name or "<unnamed>", algebra.dims)
    return algebra


def _terms(vector: Sequence[Fraction]) -> List[Dict[str, Any]]:
    return [
        {"index": k, "coeff": format_scalar(c)} for k, c in enumerate(vector) if c != 0
    ]


def serialize_algebra(A: GradedAlgebra) -> str:
    """Canonical JSON: sorted products, unit-law products left implicit"""
    entries = dict(A.products)
    if A.dim(0) == 1:
        # a unit product that is not the unit law has to be written out, even if zero
        for q in range(A.top_degree + 1):
            for j in range(A.dim(q)):
                entries.setdefault((0, 0, q, j), tuple(Fraction(0) for _ in range(A.dim(q))))
    products = []
    for (p, i, q, j), value in sorted(entries.items()):
        if p == 0 and A.dim(0) == 1 and value == unit_vector(A.dim(q), j):
            continue
        products.append({"left": [p, i], "right": [q, j], "value": _terms(value)})
    data: Dict[str, Any] = {}
    if A.name:
        data["name"] = A.name
    data["top_degree"] = A.top_degree
    data["basis"] = [
        {"degree": p, "labels": list(A.basis[p])} for p in range(A.top_degree + 1)
    ]
    data["products"] = products
    data["integration"] = _terms(A.integration)
    if A.omega is not None:
        data["omega"] = _terms(A.omega)
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def load_algebra_file(path: Union[str, Path]) -> GradedAlgebra:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read input {path}: {e}") from None
    return parse_algebra(text, name=path.stem)
