from pydantic import BaseModel, field_validator, model_validator
from enum import Enum
from pathlib import Path
from typing import List, Optional


class Analysis(str, Enum):
    VALIDATE = "validate"
    HARD_LEFSCHETZ = "hard-lefschetz"
    GYSIN = "gysin"
    OBSTRUCTIONS = "obstructions"
    FORMALITY = "formality"
    MASSEY = "massey"
    MODEL = "model"


# Execution order of the pipeline, whatever order the analyses were requested in
ANALYSIS_ORDER = [
    Analysis.VALIDATE,
    Analysis.HARD_LEFSCHETZ,
    Analysis.GYSIN,
    Analysis.OBSTRUCTIONS,
    Analysis.FORMALITY,
    Analysis.MASSEY,
    Analysis.MODEL,
]


class OutputFormat(str, Enum):
    TEXT = "text"
    STRUCTURED = "structured"


class RunConfig(BaseModel):
    input_path: Optional[Path] = None
    builtin: Optional[str] = None
    product: Optional[str] = None
    omega: Optional[List[str]] = None
    analyses: List[Analysis]
    output_format: OutputFormat = OutputFormat.TEXT
    output_path: Optional[Path] = None

    @field_validator("analyses")
    @classmethod
    def at_least_one_analysis(cls, value: List[Analysis]) -> List[Analysis]:
        if not value:
            raise ValueError("at least one analysis must be requested")
        return [analysis for analysis in ANALYSIS_ORDER if analysis in value]

    @model_validator(mode="after")
    def exactly_one_source(self) -> "RunConfig":
        sources = [s for s in (self.input_path, self.builtin, self.product) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one of input path, builtin name or product expression is required")
        return self

    @property
    def source(self) -> str:
        if self.input_path is not None:
            return f"file:{self.input_path}"
        if self.builtin is not None:
            return f"builtin:{self.builtin}"
        return f"product:{self.product}"
