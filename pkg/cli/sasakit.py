#!/usr/bin/env python3
"""
sasakit CLI - exact Sasakian obstructions of a 6-dimensional base algebra
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from apps.engine.core.config import settings
from apps.engine.core.errors import EXIT_INPUT_INVALID, EngineError
from apps.engine.models.reports import (
    AnalysisFragment,
    FormalityReport,
    FragmentStatus,
    GysinReport,
    HardLefschetzReport,
    ModelReport,
    ObstructionVerdict,
    Report,
    SasakianVerdict,
    ValidationReport,
)
from apps.engine.models.run import ANALYSIS_ORDER, Analysis, OutputFormat, RunConfig
from apps.engine.services.builders import builtin_descriptions
from apps.engine.services.runner import AnalysisRunner, RunOutcome, worst_exit_code

logger = logging.getLogger("sasakit")


class SasakitCLI:
    def __init__(self, runner: Optional[AnalysisRunner] = None):
        self.runner = runner or AnalysisRunner()

    def list_builtins(self) -> str:
        lines = ["📚 Builtin algebras:"]
        for name, description in builtin_descriptions().items():
            lines.append(f"  🔹 {name}: {description}")
        return "\n".join(lines)

    def display_report(self, report: Report) -> str:
        """Render a report in a readable format"""
        lines = [
            f"🧮 {report.tool} {report.version}: {report.source}",
            f"🔑 Input digest: {report.input_digest}",
        ]
        for fragment in report.analyses:
            lines.append("")
            lines.extend(self._display_fragment(fragment))

        lines.append("")
        lines.append("📊 Summary:")
        if report.summary is not None:
            emoji = "🚫" if report.summary == SasakianVerdict.EXCLUDED else "✅"
            lines.append(f"  {emoji} {report.summary.value}")
        statuses = [f"{f.analysis}={f.status.value}" for f in report.analyses]
        lines.append(f"  📋 {', '.join(statuses)}")
        lines.append(f"  🔚 exit code {report.exit_code}")
        return "\n".join(lines)

    def _display_fragment(self, fragment: AnalysisFragment) -> List[str]:
        header = fragment.analysis.upper()
        if fragment.status == FragmentStatus.INAPPLICABLE:
            return [f"⚪ {header}: criterion inapplicable", f"  📝 {fragment.reason}"]
        if fragment.status == FragmentStatus.ERROR:
            return [f"❌ {header}: error", f"  📝 {fragment.reason}"]

        result = fragment.result
        if isinstance(result, ValidationReport):
            if result.valid:
                return [f"✅ {header}: all {len(result.checks)} checks passed"]
            lines = [f"❌ {header}: {len(result.failed())} check(s) failed"]
            for check in result.failed():
                witness = "" if check.witness is None else f" at {check.witness}"
                lines.append(f"  🔴 {check.name}{witness}: {check.detail or 'failed'}")
            return lines
        if isinstance(result, HardLefschetzReport):
            verdict = "holds" if result.holds else f"fails at k={result.failing_k}"
            lines = [f"💡 {header}: {verdict}", f"  🏷️  omega: ({', '.join(result.omega)})"]
            lines.append(f"  📐 dim ker L by degree: {result.kernel_dims}")
            lines.append(f"  📐 dim coker L by degree: {result.cokernel_dims}")
            if result.primitive_dim is not None:
                lines.append(f"  🔸 dim P: {result.primitive_dim}")
            return lines
        if isinstance(result, GysinReport):
            lines = [f"🌀 {header}: Betti numbers of the total space {tuple(result.betti)}"]
            for piece in result.pieces:
                lines.append(f"  H^{piece.degree}: Q {piece.q_dim} + K·x {piece.k_dim}")
            if result.parity.violations:
                lines.append(f"  🔴 odd Betti numbers in degrees {result.parity.violations}")
            else:
                lines.append("  🟢 Betti parity satisfied")
            return lines
        if isinstance(result, ObstructionVerdict):
            lines = [f"🚨 {header}: {result.overall.value}"]
            for check in result.checks:
                if not check.applicable:
                    mark = "⚪"
                elif check.fired:
                    mark = "🔴"
                else:
                    mark = "🟢"
                detail = f" ({check.detail})" if check.detail else ""
                lines.append(f"  {mark} {check.name}{detail}")
                if check.fired and check.witness:
                    lines.append(f"     witness: {check.witness}")
            return lines
        if isinstance(result, FormalityReport):
            lines = [
                f"🔬 {header}: {result.verdict.value}",
                f"  📝 {result.hypothesis}",
                f"  🔸 m = {result.m}, dim K_M = {result.kernel_dimension}",
            ]
            for value in result.values:
                lines.append(f"  F_M[{value.index}] = {value.value}    {' + '.join(value.element)}")
            if result.witness is not None:
                lines.append(f"  🔴 witness: kernel element {result.witness.index}, value {result.witness.value}")
            for entry in result.massey_table:
                if entry.value != "0/1":
                    lines.append(f"  🧵 <e{entry.indices[0]}, e{entry.indices[1]}, e{entry.indices[2]}> u e{entry.indices[3]} = {entry.value}")
            if result.massey_table and all(e.value == "0/1" for e in result.massey_table):
                lines.append("  🧵 all triple Massey products vanish")
            crosscheck = result.lambda_crosscheck
            if crosscheck is not None:
                if crosscheck.applicable:
                    lines.append(f"  🧪 lambda cross-check: max discrepancy {crosscheck.max_abs_discrepancy:.3g}")
                else:
                    lines.append(f"  🧪 lambda cross-check inapplicable: {crosscheck.reason}")
            return lines
        if isinstance(result, ModelReport):
            lines = [
                f"🏗️  {header}: rho is {'a' if result.three_equivalence else 'NOT a'} 3-equivalence",
                f"  📐 model cohomology {tuple(result.model_betti)}",
                f"  🔸 dim V2 = {result.v2_dim}, dim C3 = {result.c3_dim}, dim N3 = {result.n3_dim}",
            ]
            if result.degree_seven_values:
                lines.append(f"  🧷 degree-7 values: {', '.join(result.degree_seven_values)}")
            return lines
        return [f"✅ {header}"]

    def export_report(self, payload: str, output_file: Path) -> None:
        output_file.write_text(payload, encoding="utf-8")
        print(f"📁 Results exported to: {output_file}", file=sys.stderr)

    def render(self, outcomes: List[RunOutcome], output_format: OutputFormat) -> str:
        if output_format == OutputFormat.STRUCTURED:
            documents = [
                json.loads(o.report.model_dump_json())
                if o.report is not None
                else {"source": o.source, "error": o.error, "exit_code": o.exit_code}
                for o in outcomes
            ]
            payload = documents[0] if len(documents) == 1 else documents
            return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
        blocks = []
        for outcome in outcomes:
            if outcome.report is not None:
                blocks.append(self.display_report(outcome.report))
            else:
                blocks.append(f"❌ {outcome.source}: {outcome.error}")
        return "\n\n".join(blocks) + "\n"


def _parse_analyses(text: str) -> List[Analysis]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    try:
        return [Analysis(name) for name in names]
    except ValueError:
        known = ", ".join(a.value for a in ANALYSIS_ORDER)
        raise argparse.ArgumentTypeError(f"unknown analysis in {text!r}; known: {known}") from None


def _parse_omega(text: str) -> List[str]:
    return [part.strip() for part in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sasakit",
        description="sasakit CLI - Sasakian obstructions from a rational cohomology ring",
    )
    parser.add_argument("command", choices=["validate", "analyze", "builtin-list"], help="Command to run")
    parser.add_argument("--input", "-i", action="append", type=Path, help="Algebra file (repeat for a corpus)")
    parser.add_argument("--builtin", "-b", help="Builtin algebra name (see builtin-list)")
    parser.add_argument("--product", "-p", help="Product of projective spaces, e.g. cp1*cp1*cp1")
    parser.add_argument("--omega", type=_parse_omega, help="omega as coefficients on the degree-2 basis, e.g. 1,1,1")
    parser.add_argument(
        "--analyses",
        "-a",
        type=_parse_analyses,
        default=list(ANALYSIS_ORDER),
        help="Comma-separated analyses (default: all)",
    )
    parser.add_argument(
        "--format",
        "-f",
        choices=[f.value for f in OutputFormat],
        default=settings.OUTPUT_FORMAT,
        help="Report format",
    )
    parser.add_argument("--output", "-o", type=Path, help="Write the report to this file")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")
    return parser


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _configs(args: argparse.Namespace) -> List[RunConfig]:
    analyses = [Analysis.VALIDATE] if args.command == "validate" else args.analyses
    common = dict(omega=args.omega, analyses=analyses, output_format=args.format, output_path=args.output)
    if args.input:
        if args.builtin or args.product:
            raise ValueError("use either --input or --builtin/--product")
        return [RunConfig(input_path=path, **common) for path in args.input]
    return [RunConfig(builtin=args.builtin, product=args.product, **common)]


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    cli = SasakitCLI()

    if args.command == "builtin-list":
        print(cli.list_builtins())
        return 0

    try:
        configs = _configs(args)
    except (ValidationError, ValueError) as e:
        message = e.errors()[0]["msg"] if isinstance(e, ValidationError) else str(e)
        print(f"❌ Error: {message}", file=sys.stderr)
        return EXIT_INPUT_INVALID

    logger.debug("%d run(s): %s", len(configs), [c.source for c in configs])
    if len(configs) == 1:
        try:
            report, code = cli.runner.run(configs[0])
            outcomes = [RunOutcome(source=configs[0].source, report=report, exit_code=code)]
        except EngineError as e:
            print(f"❌ Error: {e}", file=sys.stderr)
            return e.exit_code
    else:
        outcomes = cli.runner.run_many(configs)

    payload = cli.render(outcomes, OutputFormat(args.format))
    if args.output:
        cli.export_report(payload, args.output)
    else:
        sys.stdout.write(payload)
    return worst_exit_code(o.exit_code for o in outcomes)


if __name__ == "__main__":
    sys.exit(main())
