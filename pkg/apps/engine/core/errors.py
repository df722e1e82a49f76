from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from apps.engine.models.reports import ValidationReport


EXIT_OK = 0
EXIT_INPUT_INVALID = 2
EXIT_INAPPLICABLE = 3


class EngineError(Exception):
    """Base class for every error raised by the engine"""

    exit_code = EXIT_INPUT_INVALID


class AlgebraFormatError(EngineError):
    """Algebra text that does not follow the file format"""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class InvalidAlgebraError(EngineError):
    """Algebra that fails one of the structural invariants"""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        failed = [check.name for check in report.checks if not check.passed]
        super().__init__(f"algebra failed validation: {', '.join(failed)}")


class DegreeError(EngineError, ValueError):
    """Class of the wrong degree, or a product leaving the algebra"""


class ConfigError(EngineError):
    """Bad run configuration: omega, builtin name, product expression, input path"""


class CriterionInapplicable(EngineError):
    """Hypotheses of a requested analysis are not met by (A, omega)"""

    exit_code = EXIT_INAPPLICABLE
