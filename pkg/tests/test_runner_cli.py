import json

import pytest
from pydantic import ValidationError

from apps.engine.core.errors import ConfigError
from apps.engine.models.reports import FormalityReport, FragmentStatus, SasakianVerdict
from apps.engine.models.run import ANALYSIS_ORDER, Analysis, RunConfig
from apps.engine.services.runner import AnalysisRunner, worst_exit_code
from cli.sasakit import SasakitCLI, main

ALL = list(ANALYSIS_ORDER)

BROKEN = {
    "top_degree": 2,
    "basis": [{"degree": 0, "labels": ["1"]}, {"degree": 2, "labels": ["h", "k"]}],
    "integration": [{"index": "h", "coeff": "1"}],
    "omega": [{"index": "h", "coeff": "1"}],
}


@pytest.fixture
def runner() -> AnalysisRunner:
    return AnalysisRunner()


def _fragments(report):
    return {fragment.analysis: fragment for fragment in report.analyses}


class TestRunConfig:
    def test_exactly_one_source(self):
        with pytest.raises(ValidationError):
            RunConfig(builtin="cp3", product="cp1*cp1", analyses=ALL)
        with pytest.raises(ValidationError):
            RunConfig(analyses=ALL)

    def test_analyses_run_in_pipeline_order(self):
        config = RunConfig(builtin="cp3", analyses=[Analysis.MODEL, Analysis.VALIDATE, Analysis.GYSIN])
        assert config.analyses == [Analysis.VALIDATE, Analysis.GYSIN, Analysis.MODEL]

    def test_needs_an_analysis(self):
        with pytest.raises(ValidationError):
            RunConfig(builtin="cp3", analyses=[])


def test_worst_exit_code():
    assert worst_exit_code([0, 3, 2]) == 2
    assert worst_exit_code([0, 3]) == 3
    assert worst_exit_code([]) == 0


class TestRunner:
    def test_projective_space(self, runner):
        report, code = runner.run(RunConfig(builtin="cp3", analyses=ALL))
        assert code == 0
        assert report.summary == SasakianVerdict.NO_OBSTRUCTION
        assert [f.analysis for f in report.analyses] == [a.value for a in ALL]
        assert all(f.status == FragmentStatus.OK for f in report.analyses)
        assert report.input_digest.startswith("sha256:")

    def test_cp1_cubed_formality_and_massey(self, runner):
        config = RunConfig(builtin="cp1xcp1xcp1", analyses=[Analysis.FORMALITY, Analysis.MASSEY])
        report, code = runner.run(config)
        assert code == 0
        fragments = _fragments(report)
        formality = fragments["formality"].result
        assert isinstance(formality, FormalityReport)
        assert formality.verdict.value == "non-formal"
        assert [v.value for v in formality.values] == ["9/2"]
        assert formality.lambda_crosscheck.sign == -1
        massey = {tuple(e.indices): e.value for e in fragments["massey"].result.massey_table}
        assert massey[(1, 2, 2, 1)] == "-9/2"

    def test_vanishing_top_power_is_inapplicable(self, runner):
        config = RunConfig(product="cp1*cp1*cp1", omega=["1", "1", "0"], analyses=[Analysis.GYSIN])
        report, code = runner.run(config)
        assert code == 3
        fragment = _fragments(report)["gysin"]
        assert fragment.status == FragmentStatus.INAPPLICABLE
        assert "omega^3 = 0" in fragment.reason

    def test_odd_b3_is_excluded(self, runner):
        report, code = runner.run(RunConfig(builtin="synthetic-oddker", analyses=[Analysis.OBSTRUCTIONS]))
        assert code == 0
        assert report.summary == SasakianVerdict.EXCLUDED

    def test_invalid_algebra(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(BROKEN), encoding="utf-8")
        report, code = runner.run(RunConfig(input_path=path, analyses=[Analysis.VALIDATE, Analysis.GYSIN]))
        assert code == 2
        fragments = _fragments(report)
        assert not fragments["validate"].result.valid
        assert fragments["gysin"].status == FragmentStatus.ERROR

    def test_bad_omega(self, runner):
        with pytest.raises(ConfigError):
            runner.run(RunConfig(builtin="cp3", omega=["1", "1"], analyses=ALL))
        with pytest.raises(ConfigError):
            runner.run(RunConfig(builtin="cp3", omega=["x"], analyses=ALL))

    def test_output_is_deterministic(self, runner):
        config = RunConfig(builtin="synthetic-h3", analyses=ALL)
        first, _ = runner.run(config)
        second, _ = AnalysisRunner().run(config)
        assert first.model_dump_json() == second.model_dump_json()

    def test_omega_override_changes_the_digest(self, runner):
        plain, _ = runner.run(RunConfig(builtin="cp1xcp1xcp1", analyses=[Analysis.VALIDATE]))
        other, _ = runner.run(
            RunConfig(builtin="cp1xcp1xcp1", omega=["1", "2", "3"], analyses=[Analysis.VALIDATE])
        )
        assert plain.input_digest != other.input_digest

    def test_corpus_keeps_input_order(self, runner, tmp_path):
        configs = [
            RunConfig(builtin="cp3", analyses=ALL),
            RunConfig(input_path=tmp_path / "absent.json", analyses=ALL),
            RunConfig(builtin="synthetic-cupsquare", analyses=ALL),
        ]
        outcomes = runner.run_many(configs)
        assert [o.source for o in outcomes] == [c.source for c in configs]
        assert outcomes[0].exit_code == 0
        assert outcomes[1].report is None
        assert outcomes[1].exit_code == 2
        assert outcomes[2].exit_code == 3


class TestCLI:
    def test_builtin_list(self, capsys):
        assert main(["builtin-list"]) == 0
        out = capsys.readouterr().out
        assert "synthetic-oddker" in out
        assert "cp1xcp1xcp1" in out

    def test_structured_output(self, capsys):
        assert main(["analyze", "--builtin", "cp3", "--format", "structured"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["tool"] == "sasakit"
        assert document["summary"] == "no obstruction found"
        assert document["exit_code"] == 0

    def test_formality_and_massey_with_omega(self, capsys):
        argv = ["analyze", "-b", "cp1xcp1xcp1", "--omega", "1,1,1", "-a", "formality,massey", "-f", "structured"]
        assert main(argv) == 0
        document = json.loads(capsys.readouterr().out)
        formality, massey = document["analyses"]
        assert formality["result"]["verdict"] == "non-formal"
        assert formality["result"]["witness"]["value"] == "9/2"
        assert massey["analysis"] == "massey"

    def test_projective_space_is_formal(self, capsys):
        assert main(["analyze", "-b", "cp3", "-a", "formality", "-f", "structured"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["analyses"][0]["result"]["verdict"] == "formal"

    def test_text_output(self, capsys):
        assert main(["analyze", "-b", "cp1xcp1xcp1", "-a", "formality,obstructions"]) == 0
        out = capsys.readouterr().out
        assert "non-formal" in out
        assert "📊 Summary:" in out

    def test_inapplicable_exit_code(self):
        argv = ["analyze", "--product", "cp1*cp1*cp1", "--omega", "1,1,0", "--analyses", "gysin"]
        assert main(argv) == 3

    def test_validate_reports_broken_input(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(BROKEN), encoding="utf-8")
        assert main(["validate", "--input", str(path)]) == 2
        assert "poincare_duality" in capsys.readouterr().out

    def test_missing_input(self, tmp_path, capsys):
        assert main(["validate", "--input", str(tmp_path / "absent.json")]) == 2
        assert "cannot read input" in capsys.readouterr().err

    def test_no_source(self, capsys):
        assert main(["analyze"]) == 2
        assert "exactly one of" in capsys.readouterr().err

    def test_unknown_analysis(self):
        with pytest.raises(SystemExit):
            main(["analyze", "--builtin", "cp3", "--analyses", "homotopy"])

    def test_output_file_and_corpus(self, tmp_path):
        out = tmp_path / "report.json"
        argv = [
            "analyze", "--format", "structured", "--output", str(out),
            "--input", str(tmp_path / "absent.json"), "--input", str(tmp_path / "absent2.json"),
        ]
        assert main(argv) == 2
        documents = json.loads(out.read_text(encoding="utf-8"))
        assert [d["exit_code"] for d in documents] == [2, 2]

    def test_display_report_lists_every_fragment(self):
        cli = SasakitCLI()
        report, _ = cli.runner.run(RunConfig(builtin="synthetic-cupsquare", analyses=ALL))
        text = cli.display_report(report)
        for header in ("VALIDATE", "HARD-LEFSCHETZ", "GYSIN", "OBSTRUCTIONS", "FORMALITY", "MASSEY", "MODEL"):
            assert header in text
        assert "Sasakian structure excluded" in text
