"""Command-line harness: seeded benchmark runs, regret reports, the HTTP
service, and crash recovery from run journals.

Exit codes: 0 success, 2 usage error, 3 runtime failure (journal retained).
"""

import json
import math
import pathlib
import sys

import click

from . import bench
from .errors import AskoptError
from .loop import AskTellSession, Record, drive, expected_tags
from .rules import ACQUISITION_NAMES, RULE_KINDS, RuleConfig

_JOURNAL_CONFIG = "run-config"
_JOURNAL_RECORD = "record"


class _JournalError(click.ClickException):
    exit_code = 3  # runtime failure, not a usage mistake


@click.group()
@click.version_option(package_name="askopt")
def main():
    """Benchmark harness and session service for the askopt toolkit."""


def _parse_seeds(seed, seeds):
    if seeds is None:
        return [seed]
    text = seeds.strip()
    try:
        if ".." in text:
            first, last = text.split("..", 1)
            first, last = int(first), int(last)
            if last < first:
                raise ValueError
            return list(range(first, last + 1))
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise click.UsageError(
            f'--seeds must be a range like "0..9" or a comma list, got {seeds!r}'
        )


def _build_config(problem, rule, acq, batch_size):
    if acq is None:
        acq = problem.acquisition
    try:
        config = RuleConfig(kind=rule, batch_size=batch_size, acquisition=acq)
    except AskoptError as exc:
        raise click.UsageError(str(exc))
    if set(expected_tags(config)) != set(problem.tags):
        raise click.UsageError(
            f"--acq {acq} works with tags {sorted(expected_tags(config))} but "
            f"problem {problem.name!r} produces {sorted(problem.tags)}"
        )
    return config


def _write_outputs(out_dir, problem, config, steps, results):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    summary_path = out / "summary.json"
    csv_path.write_text(bench.format_csv(problem, results), encoding="utf-8")
    summary = bench.summarize(problem, config, steps, results)
    summary_path.write_text(bench.summary_text(summary), encoding="utf-8")
    return csv_path, summary_path


class _JournalWriter:
    def __init__(self, path, header):
        self.path = pathlib.Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", encoding="utf-8")
        self._write(header)

    def _write(self, payload):
        self._handle.write(json.dumps(payload, sort_keys=True, separators=(",", ":")))
        self._handle.write("\n")
        self._handle.flush()

    def record(self, record):
        self._write({"kind": _JOURNAL_RECORD, "payload": record.to_json()})

    def close(self):
        self._handle.close()


@main.command(name="run")
@click.option("--problem", "problem_name", type=click.Choice(bench.PROBLEM_NAMES),
              default="branin", show_default=True)
@click.option("--rule", type=click.Choice(RULE_KINDS), default="ego", show_default=True)
@click.option("--acq", type=click.Choice(ACQUISITION_NAMES), default=None,
              help="Acquisition function; defaults to the problem's natural one.")
@click.option("--batch-size", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--steps", type=click.IntRange(min=0), default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seeds", type=str, default=None,
              help='Several seeds: a range "0..9" or a comma list. Overrides --seed.')
@click.option("--n0", type=click.IntRange(min=1), default=None,
              help="Initial design size; defaults to 2*D + 2.")
@click.option("--noise-sd", type=click.FloatRange(min=0.0), default=0.0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              show_default=True, help="Directory for results.csv and summary.json.")
@click.option("--journal", "journal_path", type=click.Path(dir_okay=False), default=None,
              help="Write every Record as a JSON line for later resume (single seed only).")
def run_command(problem_name, rule, acq, batch_size, steps, seed, seeds, n0,
                noise_sd, out_dir, journal_path):
    """Run a seeded benchmark experiment and write CSV + JSON results."""
    problem = bench.get_problem(problem_name, noise_sd=noise_sd)
    config = _build_config(problem, rule, acq, batch_size)
    seed_list = _parse_seeds(seed, seeds)
    if journal_path is not None and len(seed_list) != 1:
        raise click.UsageError("--journal supports exactly one seed")

    results = []
    failure = None
    for one_seed in seed_list:
        journal = None
        if journal_path is not None:
            journal = _JournalWriter(journal_path, {
                "kind": _JOURNAL_CONFIG,
                "problem": problem.name,
                "rule": config.to_json(),
                "n0": n0,
                "noise_sd": noise_sd,
                "seed": one_seed,
            })
        try:
            result = bench.run_experiment(
                problem, config, steps=steps, seed=one_seed,
                initial_design_size=n0,
                on_record=journal.record if journal else None,
            )
        except AskoptError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        finally:
            if journal is not None:
                journal.close()
        results.append(result)
        line = f"seed {one_seed}: {len(result.rows)} evaluations"
        if result.rows:
            line += f", best {result.rows[-1][-1]!r}"
        if result.error is not None:
            failure = result.error
            line += f", halted: {result.error}"
        click.echo(line)

    csv_path, summary_path = _write_outputs(out_dir, problem, config, steps, results)
    click.echo(f"wrote {csv_path} and {summary_path}")
    if failure is not None:
        click.echo(f"error: observer failed: {failure}", err=True)
        sys.exit(3)


@main.command(name="regret")
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="results.csv from a previous run.")
@click.option("--problem", "problem_name", type=click.Choice(bench.PROBLEM_NAMES),
              default=None, help="Problem whose known minimum to subtract.")
@click.option("--f-min", type=float, default=None,
              help="Explicit minimum; overrides --problem.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here instead of stdout.")
def regret_command(csv_path, problem_name, f_min, out_path):
    """Compute per-seed simple-regret curves from a results CSV."""
    if f_min is None:
        if problem_name is None:
            raise click.UsageError("pass --f-min or --problem")
        minimum = bench.get_problem(problem_name).minimum
        if minimum is None:
            raise click.UsageError(
                f"problem {problem_name!r} has no scalar minimum; pass --f-min"
            )
        f_min = minimum

    lines = pathlib.Path(csv_path).read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    try:
        seed_col = header.index("seed")
        best_col = header.index("best_so_far")
    except ValueError:
        click.echo("error: CSV is missing seed/best_so_far columns", err=True)
        sys.exit(3)
    curves = {}
    for line in lines[1:]:
        parts = line.split(",")
        seed_value = int(parts[seed_col])
        best = float(parts[best_col])
        value = best - f_min
        curves.setdefault(seed_value, []).append(value if math.isfinite(value) else None)
    report = {
        "f_min": f_min,
        "per_seed": [
            {
                "seed": s,
                "final_regret": curves[s][-1],
                "regret": curves[s],
            }
            for s in sorted(curves)
        ],
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        pathlib.Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")


def _load_journal(path):
    """Parse a run journal, tolerating a torn final line from a crash."""
    raw_lines = pathlib.Path(path).read_text(encoding="utf-8").split("\n")
    raw_lines = [line for line in raw_lines if line != ""]
    if not raw_lines:
        raise _JournalError("journal is empty")
    entries = []
    for index, line in enumerate(raw_lines):
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError:
            if index == len(raw_lines) - 1:
                break  # torn tail write, drop it
            raise _JournalError(f"journal line {index + 1} is corrupt")
    if not entries or entries[0].get("kind") != _JOURNAL_CONFIG:
        raise _JournalError("journal does not start with a run-config line")
    header = entries[0]
    records = []
    for entry in entries[1:]:
        if entry.get("kind") == _JOURNAL_RECORD:
            records.append(Record.from_json(entry["payload"]))
    return header, records


@main.command(name="resume")
@click.option("--journal", "journal_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--steps", type=click.IntRange(min=0), required=True,
              help="How many further optimization steps to run.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
def resume_command(journal_path, steps, out_dir):
    """Continue an interrupted run from its journal."""
    header, old_records = _load_journal(journal_path)
    problem = bench.get_problem(header["problem"], noise_sd=header.get("noise_sd", 0.0))
    config = RuleConfig.from_json(header["rule"])
    seed = header["seed"]
    n0 = header.get("n0")

    try:
        if old_records:
            session = AskTellSession.restore(
                old_records[-1], problem.space, config, initial_design_size=n0
            )
        else:
            session = AskTellSession(
                problem.space, config, seed=seed, initial_design_size=n0
            )
        iterations = steps if old_records else steps + 1
        journal = _JournalWriter(journal_path + ".resumed", header)
        for record in old_records:
            journal.record(record)
        try:
            outcome = drive(
                session, problem.observer(seed), iterations,
                on_record=journal.record,
            )
        finally:
            journal.close()
    except AskoptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)

    all_records = old_records + outcome.records
    result = bench.ExperimentResult(
        problem=problem.name,
        seed=seed,
        records=all_records,
        rows=bench.rows_from_records(problem, seed, all_records),
        wall_ms=0.0,
        error=outcome.error,
    )
    csv_path, summary_path = _write_outputs(out_dir, problem, config, steps, [result])
    click.echo(
        f"resumed {len(old_records)} recorded steps, ran {len(outcome.records)} more; "
        f"wrote {csv_path} and {summary_path}"
    )
    if outcome.error is not None:
        click.echo(f"error: observer failed: {outcome.error}", err=True)
        sys.exit(3)


@main.command(name="serve")
@click.option("--port", type=click.IntRange(min=1, max=65535), default=8033,
              show_default=True)
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False), default=None,
              envvar="ASKOPT_DATA_DIR",
              help="Journal directory; defaults to ./askopt-data (env ASKOPT_DATA_DIR).")
def serve_command(port, host, data_dir):
    """Serve the HTTP session API used by the dashboard."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir if data_dir is not None else "./askopt-data")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
