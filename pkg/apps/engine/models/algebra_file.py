from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Optional, Tuple, Union

from apps.engine.models.algebra import parse_scalar


class Term(BaseModel):
    """One coefficient of a sparse vector; ``index`` may also name a basis label"""

    model_config = ConfigDict(extra="forbid")

    index: Union[int, str]
    coeff: str

    @field_validator("coeff")
    @classmethod
    def rational_literal(cls, value: str) -> str:
        parse_scalar(value)
        return value


class BasisBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    degree: int = Field(ge=0)
    labels: List[str]


class ProductEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    left: Tuple[int, int]
    right: Tuple[int, int]
    value: List[Term]


class AlgebraFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    top_degree: int = Field(ge=0)
    basis: List[BasisBlock]
    products: List[ProductEntry] = []
    integration: List[Term]
    omega: Optional[List[Term]] = None
