import json
import math

import pytest

import hybridsurvey as hs
from hybridsurvey import (
    AdditiveNoise,
    CostModel,
    Design,
    DesignError,
    IngestError,
    PairedSampleSet,
)
from hybridsurvey.cli import main, parse_config
from hybridsurvey.dataio import (
    build_plan_document,
    emit_report,
    ingest_paired_csv,
    ingest_point_csv,
    write_paired_csv,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


PAIRED_OK = """\
sample_id,aux_value,primary_value
c1,0.52,0.5
c2,0.61,0.7
c3,0.55,
c4,0.49,
"""


class TestPairedIngest:
    def test_happy_path(self, tmp_path):
        samples = ingest_paired_csv(write(tmp_path / "ok.csv", PAIRED_OK))
        assert samples.n_a == 2 and samples.n_b == 4
        assert samples.aux_values == (0.52, 0.61, 0.55, 0.49)
        assert samples.primary_values == (0.5, 0.7)
        assert samples.sample_ids == ("c1", "c2", "c3", "c4")

    def test_non_prefix_needs_reorder(self, tmp_path):
        text = "sample_id,aux_value,primary_value\nc1,0.5,\nc2,0.6,0.7\n"
        path = write(tmp_path / "scrambled.csv", text)
        with pytest.raises(DesignError, match="reorder"):
            ingest_paired_csv(path)
        samples = ingest_paired_csv(path, reorder=True)
        assert samples.sample_ids == ("c2", "c1")
        assert samples.n_a == 1

    @pytest.mark.parametrize(
        "body, message",
        [
            ("", "empty file"),
            ("sample_id,aux,primary\nc1,0.5,0.5\n", "bad header"),
            ("sample_id,aux_value,primary_value\nc1,0.5\n", "row 2: expected 3 fields"),
            ("sample_id,aux_value,primary_value\n,0.5,0.5\n", "row 2: empty sample_id"),
            (
                "sample_id,aux_value,primary_value\nc1,0.5,0.5\nc1,0.6,\n",
                "row 3: duplicate sample_id 'c1' \\(first seen at row 2\\)",
            ),
            ("sample_id,aux_value,primary_value\nc1,zero,0.5\n", "'zero' is not a number"),
            ("sample_id,aux_value,primary_value\nc1,inf,0.5\n", "must be finite"),
            ("sample_id,aux_value,primary_value\nc1,0.5,nan\n", "must be finite"),
            ("sample_id,aux_value,primary_value\n", "no data rows"),
        ],
    )
    def test_rejects_malformed(self, tmp_path, body, message):
        path = write(tmp_path / "bad.csv", body)
        with pytest.raises(IngestError, match=message):
            ingest_paired_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="cannot read"):
            ingest_paired_csv(tmp_path / "absent.csv")

    def test_round_trip_is_exact(self, tmp_path):
        aux = (0.1 + 0.2, 1.0 / 3.0, 0.52, 5e-324)
        primary = (2.0 / 3.0, 0.30000000000000004)
        original = PairedSampleSet(aux_values=aux, primary_values=primary)
        back = ingest_paired_csv(write_paired_csv(tmp_path / "rt.csv", original))
        assert back.aux_values == aux
        assert back.primary_values == primary
        assert back.sample_ids == ("s1", "s2", "s3", "s4")


POINTS_OK = """\
sample_id,point_id,aux_label,primary_label
s1,p1,1,1
s1,p2,0,1
s2,p1,1,
s2,p2,0,
"""


class TestPointIngest:
    def test_aggregates_fractions(self, tmp_path):
        samples = ingest_point_csv(write(tmp_path / "pts.csv", POINTS_OK))
        assert samples.aux_values == (0.5, 0.5)
        assert samples.primary_values == (1.0,)
        assert samples.sample_ids == ("s1", "s2")

    @pytest.mark.parametrize(
        "body, message",
        [
            (
                "sample_id,point_id,aux_label,primary_label\ns1,p1,1\n",
                "expected 4 fields",
            ),
            (
                "sample_id,point_id,aux_label,primary_label\ns1,p1,1,\ns1,p1,0,\n",
                "duplicate point 'p1' for sample 's1'",
            ),
            (
                "sample_id,point_id,aux_label,primary_label\ns1,p1,0.5,\n",
                "aux_label must be 0 or 1",
            ),
            (
                "sample_id,point_id,aux_label,primary_label\ns1,p1,1,2\n",
                "primary_label must be 0 or 1",
            ),
            (
                "sample_id,point_id,aux_label,primary_label\ns1,,1,\n",
                "empty sample_id or point_id",
            ),
        ],
    )
    def test_rejects_malformed(self, tmp_path, body, message):
        path = write(tmp_path / "bad.csv", body)
        with pytest.raises(IngestError, match=message):
            ingest_point_csv(path)

    def test_partial_primary_labels_rejected(self, tmp_path):
        body = (
            "sample_id,point_id,aux_label,primary_label\n"
            "s1,p1,1,1\n"
            "s1,p2,0,\n"
        )
        path = write(tmp_path / "partial.csv", body)
        with pytest.raises(IngestError, match="label all of them or none"):
            ingest_point_csv(path)

    def test_points_interleave_across_samples(self, tmp_path):
        body = (
            "sample_id,point_id,aux_label,primary_label\n"
            "s2,p1,1,\n"
            "s1,p1,1,1\n"
            "s2,p2,1,\n"
            "s1,p2,1,0\n"
        )
        samples = ingest_point_csv(write(tmp_path / "mix.csv", body), reorder=True)
        assert samples.sample_ids == ("s1", "s2")
        assert samples.aux_values == (1.0, 1.0)
        assert samples.primary_values == (0.5,)


class TestReportEmission:
    def test_json_rounds_to_12_significant_digits(self, tmp_path):
        doc = {"estimates": {"x": 0.123456789012345}, "n_a": 1, "n_b": 2, "clamped": False}
        emit_report(tmp_path, estimates=doc, figures=False)
        text = (tmp_path / "estimates.json").read_text()
        assert "0.123456789012" in text
        assert "0.123456789012345" not in text
        data = json.loads(text)
        assert data["n_a"] == 1 and data["clamped"] is False

    def test_csv_number_formatting(self, tmp_path):
        emit_report(
            tmp_path,
            tradeoff=[(53, 5.123456789012345, 103.0)],
            figures=False,
        )
        lines = (tmp_path / "tradeoff.csv").read_text().splitlines()
        assert lines[0] == "n_b,n_a,tsc"
        assert lines[1] == "53,5.12345678901,103"

    def test_plan_document_diagnostics(self, coral_inputs):
        doc = build_plan_document(coral_inputs, plans=[])
        diag = doc["diagnostics"]
        assert diag["k"] == pytest.approx(10.0)
        assert diag["hybrid_is_cheaper"] is True
        assert 0 < diag["sigma_delta"] < diag["k"]

    def test_plan_document_when_threshold_undefined(self, coral_inputs):
        import dataclasses

        from hybridsurvey import AnnotatorProfile

        noisy = dataclasses.replace(
            coral_inputs, auxiliary=AnnotatorProfile(sigma=0.5)
        )
        diag = build_plan_document(noisy, plans=[])["diagnostics"]
        assert diag["sigma_delta"] is None
        assert diag["hybrid_is_cheaper"] is False

    def test_simulation_rows_and_kind_guard(self, tmp_path):
        report = hs.run_bernoulli_comparison(
            (0.8,), (0.8,), (0.5,), (50,), n_b=100, replicates=5, seed=0
        )
        with pytest.raises(DesignError, match="pool bootstrap"):
            emit_report(tmp_path, simulation=report, figures=False)

    def test_figures_are_rendered(self, tmp_path, coral_inputs):
        from hybridsurvey.planning import cost_gap_curve, tradeoff_curve

        paths = emit_report(
            tmp_path,
            tradeoff=tradeoff_curve(coral_inputs),
            cost_gap=cost_gap_curve(coral_inputs, k_max=20),
        )
        names = [p.name for p in paths]
        assert names == ["tradeoff.csv", "tsc_diff.csv", "tradeoff.png", "tsc_diff.png"]
        for p in paths:
            assert p.stat().st_size > 0
        png = (tmp_path / "tradeoff.png").read_bytes()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"


class TestConfigParsing:
    def test_values_comments_and_aliases(self, tmp_path):
        cfg = write(
            tmp_path / "run.cfg",
            "# survey\nsigma-p = 0.16\nsigma_b=0.047  # noise\n\nbudget = 50, 100\n",
        )
        values = parse_config(cfg)
        assert values == {"sigma_p": "0.16", "sigma_b": "0.047", "budget": "50, 100"}

    @pytest.mark.parametrize(
        "body, message",
        [
            ("sigma_p 0.16\n", "expected 'key = value'"),
            ("zeta = 1.96\n", "unknown key 'zeta'"),
            ("seed = 1\nseed = 2\n", "duplicate key 'seed'"),
        ],
    )
    def test_rejects_malformed(self, tmp_path, body, message):
        from hybridsurvey.cli import CliUsageError

        cfg = write(tmp_path / "bad.cfg", body)
        with pytest.raises(CliUsageError, match=message):
            parse_config(cfg)

    def test_missing_config_file(self):
        from hybridsurvey.cli import CliUsageError

        with pytest.raises(CliUsageError, match="cannot read config"):
            parse_config("/nonexistent/run.cfg")


PLAN_FLAGS = [
    "--sigma-p", "0.16", "--sigma-b", "0.047", "--d", "0.058",
    "--cost-collect", "1", "--cost-primary", "10",
]


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestPlanCommand:
    def test_writes_report_and_prints_plans(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["plan", *PLAN_FLAGS, "--outdir", str(tmp_path)], capsys
        )
        assert code == 0, err
        assert "conventional: n_a=30 n_b=0 tsc=330" in out
        assert "hybrid_offset: n_a=6 n_b=53 tsc=113" in out
        for name in (
            "plan.json", "tradeoff.csv", "tsc_diff.csv", "tradeoff.png", "tsc_diff.png"
        ):
            assert (tmp_path / name).exists(), name
            assert f"wrote: {tmp_path / name}" in out

    def test_budget_plans_included(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["plan", *PLAN_FLAGS, "--budget", "103", "--outdir", str(tmp_path)],
            capsys,
        )
        assert code == 0, err
        doc = json.loads((tmp_path / "plan.json").read_text())
        assert doc["budget"] == 103
        by_design = {p["design"]: p for p in doc["budget_plans"]}
        assert by_design["conventional"]["n_a"] == 9
        assert by_design["hybrid_offset"]["n_a"] == 5
        assert by_design["hybrid_offset"]["n_b"] == 53
        assert doc["inputs"]["zeta"] == pytest.approx(1.959963984540054, rel=1e-11)

    def test_missing_flags_exit_1(self, tmp_path, capsys):
        code, out, err = run_cli(["plan", "--sigma-p", "0.16"], capsys)
        assert code == 1
        assert "plan requires" in err
        assert "--sigma-b" in err and "--d" in err and "--cost-primary" in err

    def test_infeasible_budget_exit_2(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["plan", *PLAN_FLAGS, "--budget", "5", "--outdir", str(tmp_path)],
            capsys,
        )
        assert code == 2
        assert "infeasible" in err

    def test_multiple_budgets_rejected(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["plan", *PLAN_FLAGS, "--budget", "50", "--budget", "100"], capsys
        )
        assert code == 1
        assert "single --budget" in err

    def test_unknown_flag_exit_1(self, capsys):
        code, out, err = run_cli(["plan", "--zeta", "2"], capsys)
        assert code == 1
        assert "error:" in err

    def test_config_supplies_values(self, tmp_path, capsys):
        cfg = write(
            tmp_path / "run.cfg",
            "sigma_p = 0.16\nsigma_b = 0.047\nd = 0.058\n"
            "cost_collect = 1\ncost_primary = 10\n"
            f"outdir = {tmp_path / 'out'}\n",
        )
        code, out, err = run_cli(["plan", "--config", str(cfg)], capsys)
        assert code == 0, err
        assert (tmp_path / "out" / "plan.json").exists()
        assert err == ""

    def test_flag_overrides_config_with_warning(self, tmp_path, capsys):
        cfg = write(tmp_path / "run.cfg", "sigma_p = 0.5\nsigma_b = 0.047\n")
        code, out, err = run_cli(
            [
                "plan", "--config", str(cfg), "--sigma-p", "0.16",
                "--d", "0.058", "--cost-collect", "1", "--cost-primary", "10",
                "--outdir", str(tmp_path),
            ],
            capsys,
        )
        assert code == 0
        assert "warning: --sigma-p overrides config value '0.5'" in err
        doc = json.loads((tmp_path / "plan.json").read_text())
        assert doc["inputs"]["sigma_p"] == 0.16

    def test_bad_config_value_exit_1(self, tmp_path, capsys):
        cfg = write(tmp_path / "run.cfg", "budget = fifty\n")
        code, out, err = run_cli(["plan", "--config", str(cfg)], capsys)
        assert code == 1
        assert "config value for budget" in err


class TestEstimateCommand:
    def test_paired_defaults_to_all_estimators(self, tmp_path, capsys):
        data = write(tmp_path / "samples.csv", PAIRED_OK)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--outdir", str(tmp_path)], capsys
        )
        assert code == 0, err
        doc = json.loads((tmp_path / "estimates.json").read_text())
        assert set(doc["estimates"]) == {
            "conventional", "hybrid_offset", "hybrid_ratio", "auxiliary"
        }
        assert doc["n_a"] == 2 and doc["n_b"] == 4 and doc["clamped"] is False
        aux = (0.52 + 0.61 + 0.55 + 0.49) / 4
        assert doc["estimates"]["conventional"] == pytest.approx(0.6)
        assert doc["estimates"]["auxiliary"] == pytest.approx(aux)
        assert doc["estimates"]["hybrid_offset"] == pytest.approx(
            aux - (0.565 - 0.6), rel=1e-9
        )

    def test_aux_only_file_gets_auxiliary_only(self, tmp_path, capsys):
        body = "sample_id,aux_value,primary_value\nc1,0.4,\nc2,0.6,\n"
        data = write(tmp_path / "aux.csv", body)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--outdir", str(tmp_path)], capsys
        )
        assert code == 0, err
        doc = json.loads((tmp_path / "estimates.json").read_text())
        assert list(doc["estimates"]) == ["auxiliary"]
        assert doc["estimates"]["auxiliary"] == pytest.approx(0.5)

    def test_clamp_clips_to_unit_interval(self, tmp_path, capsys):
        body = "sample_id,aux_value,primary_value\nc1,1.2,\nc2,1.4,\n"
        data = write(tmp_path / "hot.csv", body)
        code, out, err = run_cli(
            [
                "estimate", "--input", str(data), "--design", "auxiliary",
                "--clamp", "--outdir", str(tmp_path),
            ],
            capsys,
        )
        assert code == 0, err
        doc = json.loads((tmp_path / "estimates.json").read_text())
        assert doc["estimates"]["auxiliary"] == 1.0
        assert doc["clamped"] is True

    def test_binary_point_file(self, tmp_path, capsys):
        data = write(tmp_path / "points.csv", POINTS_OK)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--binary", "--outdir", str(tmp_path)],
            capsys,
        )
        assert code == 0, err
        doc = json.loads((tmp_path / "estimates.json").read_text())
        assert doc["estimates"]["conventional"] == 1.0
        assert doc["estimates"]["auxiliary"] == pytest.approx(0.5)
        assert doc["estimates"]["hybrid_offset"] == pytest.approx(1.0)

    def test_unknown_design_exit_1(self, tmp_path, capsys):
        data = write(tmp_path / "samples.csv", PAIRED_OK)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--design", "median"], capsys
        )
        assert code == 1
        assert "unknown design 'median'" in err

    def test_design_without_estimator_exit_1(self, tmp_path, capsys):
        data = write(tmp_path / "samples.csv", PAIRED_OK)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--design", "hybrid-bias-corrected"],
            capsys,
        )
        assert code == 1
        assert "not available in the estimate command" in err

    def test_missing_input_flag_exit_1(self, capsys):
        code, out, err = run_cli(["estimate"], capsys)
        assert code == 1
        assert "estimate requires --input" in err

    def test_missing_input_file_exit_1(self, tmp_path, capsys):
        code, out, err = run_cli(
            ["estimate", "--input", str(tmp_path / "gone.csv")], capsys
        )
        assert code == 1
        assert "cannot read" in err

    def test_outdir_from_environment(self, tmp_path, capsys, monkeypatch):
        target = tmp_path / "env_out"
        monkeypatch.setenv("HYBRIDSURVEY_OUTDIR", str(target))
        data = write(tmp_path / "samples.csv", PAIRED_OK)
        code, out, err = run_cli(["estimate", "--input", str(data)], capsys)
        assert code == 0, err
        assert (target / "estimates.json").exists()

    def test_outdir_flag_beats_environment(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("HYBRIDSURVEY_OUTDIR", str(tmp_path / "ignored"))
        data = write(tmp_path / "samples.csv", PAIRED_OK)
        code, out, err = run_cli(
            ["estimate", "--input", str(data), "--outdir", str(tmp_path / "used")],
            capsys,
        )
        assert code == 0, err
        assert (tmp_path / "used" / "estimates.json").exists()
        assert not (tmp_path / "ignored").exists()


def make_pool_file(path, n=60, seed=42):
    y = hs.generate_population(0.3, 0.16, n, seed=seed)
    aux = hs.apply_annotator(y, AdditiveNoise(bias=0.05, sigma=0.047), seed=seed + 1)
    pool = PairedSampleSet(aux_values=tuple(aux), primary_values=tuple(y))
    return write_paired_csv(path, pool)


class TestSimulateCommand:
    def test_simulation_report_files(self, tmp_path, capsys):
        data = make_pool_file(tmp_path / "pool.csv")
        code, out, err = run_cli(
            [
                "simulate", "--input", str(data),
                "--budget", "103", "--budget", "330",
                "--cost-collect", "1", "--cost-primary", "10",
                "--replicates", "30", "--seed", "5",
                "--outdir", str(tmp_path / "out"),
            ],
            capsys,
        )
        assert code == 0, err
        assert "simulated 8 cells" in out
        csv_lines = (tmp_path / "out" / "simulation.csv").read_text().splitlines()
        assert csv_lines[0] == "design,budget,bias,mae,mse,se,replicates,dropped"
        assert len(csv_lines) == 9
        assert (tmp_path / "out" / "simulation.png").stat().st_size > 0

    def test_same_seed_is_byte_identical(self, tmp_path, capsys):
        data = make_pool_file(tmp_path / "pool.csv")
        argv = [
            "simulate", "--input", str(data), "--budget", "103",
            "--cost-collect", "1", "--cost-primary", "10",
            "--replicates", "25", "--seed", "9",
        ]
        assert main([*argv, "--outdir", str(tmp_path / "a")]) == 0
        assert main([*argv, "--outdir", str(tmp_path / "b")]) == 0
        capsys.readouterr()
        for name in ("simulation.csv", "simulation.png"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b, name

    def test_partial_pool_rejected(self, tmp_path, capsys):
        data = write(tmp_path / "partial.csv", PAIRED_OK)
        code, out, err = run_cli(
            [
                "simulate", "--input", str(data), "--budget", "50",
                "--cost-collect", "1", "--cost-primary", "10",
            ],
            capsys,
        )
        assert code == 1
        assert "fully primary-annotated" in err

    def test_missing_flags_listed(self, capsys):
        code, out, err = run_cli(["simulate"], capsys)
        assert code == 1
        assert "simulate requires --input, --budget" in err


def test_cli_module_entrypoint():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "hybridsurvey.cli"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
