import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from apps.engine.core.config import settings
from apps.engine.core.errors import (
    EXIT_INAPPLICABLE,
    EXIT_INPUT_INVALID,
    EXIT_OK,
    ConfigError,
    CriterionInapplicable,
    EngineError,
)
from apps.engine.models.algebra import CohomologyClass, GradedAlgebra, parse_scalar
from apps.engine.models.reports import (
    AnalysisFragment,
    FragmentResult,
    FragmentStatus,
    ObstructionVerdict,
    Report,
    SasakianVerdict,
)
from apps.engine.models.run import Analysis, RunConfig
from apps.engine.services.algebra import validate
from apps.engine.services.builders import builtin, product_expression
from apps.engine.services.formality import (
    FormalityEvaluation,
    evaluate_F_M,
    lambda_crosscheck,
    massey_table,
)
from apps.engine.services.gysin import gysin_report, obstruction_verdict
from apps.engine.services.lefschetz import analyze, hard_lefschetz
from apps.engine.services.minimal_model import model_report
from apps.engine.storage.algebra_io import load_algebra_file, serialize_algebra

logger = logging.getLogger(__name__)


def worst_exit_code(codes: Iterable[int]) -> int:
    """Invalid input outranks an inapplicable criterion, which outranks success"""
    codes = list(codes)
    if EXIT_INPUT_INVALID in codes:
        return EXIT_INPUT_INVALID
    if EXIT_INAPPLICABLE in codes:
        return EXIT_INAPPLICABLE
    return EXIT_OK


@dataclass
class _RunState:
    """Results shared between the stages of one run"""

    algebra: GradedAlgebra
    omega: Optional[CohomologyClass]
    evaluation: Optional[FormalityEvaluation] = None

    def formality(self) -> FormalityEvaluation:
        if self.evaluation is None:
            assert self.omega is not None
            self.evaluation = evaluate_F_M(self.algebra, self.omega)
        return self.evaluation


@dataclass
class RunOutcome:
    source: str
    report: Optional[Report]
    exit_code: int
    error: Optional[str] = None


class AnalysisRunner:
    """Loads one algebra and runs the requested analyses in a fixed order"""

    def __init__(self) -> None:
        self._stages: Dict[Analysis, Callable[[_RunState], FragmentResult]] = {
            Analysis.HARD_LEFSCHETZ: self._hard_lefschetz,
            Analysis.GYSIN: self._gysin,
            Analysis.OBSTRUCTIONS: self._obstructions,
            Analysis.FORMALITY: self._formality,
            Analysis.MASSEY: self._massey,
            Analysis.MODEL: self._model,
        }

    def load(self, config: RunConfig) -> GradedAlgebra:
        """Algebra named by the config, with the omega override applied"""
        if config.input_path is not None:
            algebra = load_algebra_file(config.input_path)
        elif config.builtin is not None:
            algebra = builtin(config.builtin)
        else:
            algebra = product_expression(config.product or "")

        if config.omega is not None:
            try:
                coords = [parse_scalar(c) for c in config.omega]
            except ValueError as e:
                raise ConfigError(f"malformed omega: {e}") from None
            if len(coords) != algebra.dim(2):
                raise ConfigError(
                    f"omega has {len(coords)} coefficients, degree 2 has dimension {algebra.dim(2)}"
                )
            algebra = algebra.with_omega(coords)
        return algebra

    def run(self, config: RunConfig) -> Tuple[Report, int]:
        algebra = self.load(config)
        digest = hashlib.sha256(serialize_algebra(algebra).encode("utf-8")).hexdigest()
        logger.info("running %s on %s", [a.value for a in config.analyses], config.source)

        validation = validate(algebra)
        omega = algebra.default_omega()
        if omega is None and any(a != Analysis.VALIDATE for a in config.analyses):
            raise ConfigError("no omega: give one in the algebra file or with --omega")
        state = _RunState(algebra=algebra, omega=omega)

        fragments: List[AnalysisFragment] = []
        codes = [EXIT_OK]
        for analysis in config.analyses:
            if analysis == Analysis.VALIDATE:
                fragments.append(
                    AnalysisFragment(analysis=analysis.value, status=FragmentStatus.OK, result=validation)
                )
                if not validation.valid:
                    codes.append(EXIT_INPUT_INVALID)
                continue
            if not validation.valid:
                failed = ", ".join(check.name for check in validation.failed())
                fragments.append(
                    AnalysisFragment(
                        analysis=analysis.value,
                        status=FragmentStatus.ERROR,
                        reason=f"algebra failed validation: {failed}",
                    )
                )
                codes.append(EXIT_INPUT_INVALID)
                continue
            fragment, code = self._run_stage(analysis, state)
            fragments.append(fragment)
            codes.append(code)

        exit_code = worst_exit_code(codes)
        report = Report(
            tool=settings.APP_NAME,
            version=settings.VERSION,
            source=config.source,
            input_digest=f"sha256:{digest}",
            analyses=fragments,
            summary=self._summary(fragments),
            exit_code=exit_code,
        )
        return report, exit_code

    def run_many(self, configs: List[RunConfig]) -> List[RunOutcome]:
        """Corpus mode: one outcome per config, in input order"""
        with ThreadPoolExecutor(max_workers=max(1, settings.MAX_WORKERS)) as pool:
            return list(pool.map(self._run_safely, configs))

    def _run_safely(self, config: RunConfig) -> RunOutcome:
        try:
            report, code = self.run(config)
            return RunOutcome(source=config.source, report=report, exit_code=code)
        except EngineError as e:
            logger.warning("%s: %s", config.source, e)
            return RunOutcome(source=config.source, report=None, exit_code=e.exit_code, error=str(e))

    def _run_stage(self, analysis: Analysis, state: _RunState) -> Tuple[AnalysisFragment, int]:
        try:
            result = self._stages[analysis](state)
            return AnalysisFragment(analysis=analysis.value, status=FragmentStatus.OK, result=result), EXIT_OK
        except CriterionInapplicable as e:
            logger.info("%s inapplicable: %s", analysis.value, e)
            return (
                AnalysisFragment(analysis=analysis.value, status=FragmentStatus.INAPPLICABLE, reason=str(e)),
                EXIT_INAPPLICABLE,
            )
        except EngineError as e:
            logger.warning("%s failed: %s", analysis.value, e)
            return (
                AnalysisFragment(analysis=analysis.value, status=FragmentStatus.ERROR, reason=str(e)),
                e.exit_code,
            )

    @staticmethod
    def _summary(fragments: List[AnalysisFragment]) -> Optional[SasakianVerdict]:
        for fragment in fragments:
            if fragment.status == FragmentStatus.OK and isinstance(fragment.result, ObstructionVerdict):
                return fragment.result.overall
        return None

    # stages -------------------------------------------------------------

    def _hard_lefschetz(self, state: _RunState) -> FragmentResult:
        hard_lefschetz(state.algebra, state.omega)
        return analyze(state.algebra, state.omega).to_report()

    def _gysin(self, state: _RunState) -> FragmentResult:
        return gysin_report(state.algebra, state.omega)

    def _obstructions(self, state: _RunState) -> FragmentResult:
        return obstruction_verdict(state.algebra, state.omega)

    def _formality(self, state: _RunState) -> FragmentResult:
        evaluation = state.formality()
        crosscheck = lambda_crosscheck(state.algebra, state.omega, evaluation)
        return evaluation.to_report(crosscheck=crosscheck)

    def _massey(self, state: _RunState) -> FragmentResult:
        evaluation = state.formality()
        table = massey_table(state.algebra, state.omega, evaluation)
        return evaluation.to_report(massey=table)

    def _model(self, state: _RunState) -> FragmentResult:
        report = model_report(state.algebra, state.omega)
        try:
            exact = [v.value for v in state.formality().kernel_values()]
        except CriterionInapplicable:
            exact = None
        if exact is not None and exact != report.degree_seven_values:
            logger.warning(
                "degree-7 values %s disagree with F_M %s on %s",
                report.degree_seven_values,
                exact,
                state.algebra.name or "<unnamed>",
            )
        return report
