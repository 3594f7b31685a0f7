"""End-to-end tests for the command-line harness."""

import json
import pathlib

import pytest
from click.testing import CliRunner

from askopt.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def read(path):
    return pathlib.Path(path).read_text(encoding="utf-8")


class TestRunCommand:
    def test_writes_csv_and_summary(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--problem", "branin", "--steps", "1", "--n0", "4",
            "--seed", "0", "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        csv_text = read(tmp_path / "results.csv")
        lines = csv_text.strip().split("\n")
        assert lines[0] == "seed,step,query_0,query_1,observation,best_so_far"
        assert len(lines) == 1 + 5  # 4 initial points + 1 step
        summary = json.loads(read(tmp_path / "summary.json"))
        assert summary["problem"] == "branin"
        assert summary["results"][0]["seed"] == 0
        assert summary["results"][0]["wall_ms"] > 0.0
        assert "wall" not in lines[0]

    def test_identical_invocations_write_identical_csv(self, runner, tmp_path):
        args = ["run", "--problem", "branin", "--steps", "2", "--n0", "4", "--seed", "5"]
        first_dir = tmp_path / "a"
        second_dir = tmp_path / "b"
        assert runner.invoke(main, args + ["--out", str(first_dir)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(second_dir)]).exit_code == 0
        assert read(first_dir / "results.csv") == read(second_dir / "results.csv")

    def test_seed_range_runs_every_seed(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--steps", "1", "--n0", "3", "--seeds", "0..2",
            "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        lines = read(tmp_path / "results.csv").strip().split("\n")
        assert len(lines) == 1 + 3 * 4
        seeds = [line.split(",")[0] for line in lines[1:]]
        assert seeds == ["0"] * 4 + ["1"] * 4 + ["2"] * 4

    def test_seed_comma_list(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--steps", "0", "--n0", "3", "--seeds", "4,2",
            "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        lines = read(tmp_path / "results.csv").strip().split("\n")
        seeds = sorted({line.split(",")[0] for line in lines[1:]})
        assert seeds == ["2", "4"]

    def test_zero_steps_writes_only_the_initial_design(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--steps", "0", "--n0", "5", "--out", str(tmp_path),
        ])
        assert result.exit_code == 0
        lines = read(tmp_path / "results.csv").strip().split("\n")
        assert len(lines) == 6
        assert {line.split(",")[1] for line in lines[1:]} == {"0"}

    @pytest.mark.parametrize(
        "args",
        [
            ["run", "--seeds", "abc"],
            ["run", "--seeds", "5..2"],
            ["run", "--problem", "nonesuch"],
            ["run", "--steps", "-1"],
            ["run", "--problem", "constrained-branin", "--acq", "ei"],
            ["run", "--rule", "trego", "--batch-size", "2"],
            ["run", "--seeds", "0..1", "--journal", "j.jsonl"],
        ],
    )
    def test_usage_errors_exit_2(self, runner, tmp_path, args):
        result = runner.invoke(main, args + ["--out", str(tmp_path)])
        assert result.exit_code == 2, result.output

    def test_journal_lines_hold_config_then_records(self, runner, tmp_path):
        journal = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "run", "--steps", "2", "--n0", "4", "--journal", str(journal),
            "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        lines = read(journal).strip().split("\n")
        assert len(lines) == 1 + 3
        header = json.loads(lines[0])
        assert header["kind"] == "run-config"
        assert header["problem"] == "branin"
        assert header["rule"]["acquisition"] == "ei"
        for line in lines[1:]:
            entry = json.loads(line)
            assert entry["kind"] == "record"
            assert entry["payload"]["schema_version"] == 1


class TestRegretCommand:
    def make_results(self, runner, tmp_path):
        out = tmp_path / "out"
        result = runner.invoke(main, [
            "run", "--problem", "branin", "--steps", "1", "--n0", "4",
            "--seeds", "0,1", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        return out / "results.csv"

    def test_reports_per_seed_curves(self, runner, tmp_path):
        csv_path = self.make_results(runner, tmp_path)
        result = runner.invoke(main, [
            "regret", "--csv", str(csv_path), "--problem", "branin",
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert [entry["seed"] for entry in report["per_seed"]] == [0, 1]
        for entry in report["per_seed"]:
            assert len(entry["regret"]) == 5
            assert entry["final_regret"] == entry["regret"][-1]
            assert entry["final_regret"] >= 0.0
            # best-so-far only improves
            curve = entry["regret"]
            assert all(b <= a for a, b in zip(curve, curve[1:]))

    def test_explicit_f_min_and_output_file(self, runner, tmp_path):
        csv_path = self.make_results(runner, tmp_path)
        out_path = tmp_path / "regret.json"
        result = runner.invoke(main, [
            "regret", "--csv", str(csv_path), "--f-min", "0.0",
            "--out", str(out_path),
        ])
        assert result.exit_code == 0, result.output
        report = json.loads(read(out_path))
        assert report["f_min"] == 0.0

    def test_needs_a_minimum_from_somewhere(self, runner, tmp_path):
        csv_path = self.make_results(runner, tmp_path)
        result = runner.invoke(main, ["regret", "--csv", str(csv_path)])
        assert result.exit_code == 2

    def test_problem_without_scalar_minimum_rejected(self, runner, tmp_path):
        csv_path = self.make_results(runner, tmp_path)
        result = runner.invoke(main, [
            "regret", "--csv", str(csv_path), "--problem", "vlmop2",
        ])
        assert result.exit_code == 2

    def test_csv_missing_columns_is_a_runtime_failure(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("alpha,beta\n1,2\n", encoding="utf-8")
        result = runner.invoke(main, [
            "regret", "--csv", str(bad), "--f-min", "0.0",
        ])
        assert result.exit_code == 3


class TestResumeCommand:
    def run_with_journal(self, runner, tmp_path, steps):
        out = tmp_path / "full"
        journal = tmp_path / "run.jsonl"
        result = runner.invoke(main, [
            "run", "--problem", "branin", "--steps", str(steps), "--n0", "4",
            "--seed", "2", "--journal", str(journal), "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        return journal, out / "results.csv"

    def test_resumed_run_matches_uninterrupted_bytes(self, runner, tmp_path):
        journal, full_csv = self.run_with_journal(runner, tmp_path, steps=4)
        reference = read(full_csv)

        # keep the config plus the records through step 2, as if killed mid-run
        lines = read(journal).strip().split("\n")
        truncated = tmp_path / "truncated.jsonl"
        truncated.write_text("\n".join(lines[:4]) + "\n", encoding="utf-8")

        resumed_out = tmp_path / "resumed"
        result = runner.invoke(main, [
            "resume", "--journal", str(truncated), "--steps", "2",
            "--out", str(resumed_out),
        ])
        assert result.exit_code == 0, result.output
        assert read(resumed_out / "results.csv") == reference

    def test_resume_tolerates_a_torn_final_line(self, runner, tmp_path):
        journal, _ = self.run_with_journal(runner, tmp_path, steps=2)
        torn = tmp_path / "torn.jsonl"
        torn.write_text(read(journal) + '{"kind": "rec', encoding="utf-8")
        result = runner.invoke(main, [
            "resume", "--journal", str(torn), "--steps", "1",
            "--out", str(tmp_path / "torn-out"),
        ])
        assert result.exit_code == 0, result.output

    def test_resume_writes_a_full_resumed_journal(self, runner, tmp_path):
        journal, _ = self.run_with_journal(runner, tmp_path, steps=2)
        result = runner.invoke(main, [
            "resume", "--journal", str(journal), "--steps", "1",
            "--out", str(tmp_path / "more"),
        ])
        assert result.exit_code == 0, result.output
        resumed = read(str(journal) + ".resumed").strip().split("\n")
        assert len(resumed) == 1 + 3 + 1  # config, three carried records, one new

    def test_corrupt_middle_line_fails_with_exit_3(self, runner, tmp_path):
        journal, _ = self.run_with_journal(runner, tmp_path, steps=2)
        lines = read(journal).strip().split("\n")
        lines[1] = '{"kind": "broken'
        broken = tmp_path / "broken.jsonl"
        broken.write_text("\n".join(lines) + "\n", encoding="utf-8")
        result = runner.invoke(main, [
            "resume", "--journal", str(broken), "--steps", "1",
            "--out", str(tmp_path / "broken-out"),
        ])
        assert result.exit_code == 3

    def test_journal_without_config_fails_with_exit_3(self, runner, tmp_path):
        journal, _ = self.run_with_journal(runner, tmp_path, steps=1)
        lines = read(journal).strip().split("\n")
        headless = tmp_path / "headless.jsonl"
        headless.write_text("\n".join(lines[1:]) + "\n", encoding="utf-8")
        result = runner.invoke(main, [
            "resume", "--journal", str(headless), "--steps", "1",
            "--out", str(tmp_path / "headless-out"),
        ])
        assert result.exit_code == 3


class TestTopLevel:
    def test_version_flag(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_help_lists_all_commands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for name in ("run", "regret", "resume", "serve"):
            assert name in result.output

    def test_serve_help_mentions_data_dir(self, runner):
        result = runner.invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        assert "ASKOPT_DATA_DIR" in result.output
