"""Synthetic benchmark problems, regret metrics, and the experiment harness.

The problems are the community-standard desk-scale test functions, fixed
here verbatim so results are reproducible from this file alone:

Branin (domain [-5, 10] x [0, 15]):
    f(x) = a*(x2 - b*x1^2 + c*x1 - r)^2 + s*(1 - t)*cos(x1) + s
    a = 1, b = 5.1/(4 pi^2), c = 5/pi, r = 6, s = 10, t = 1/(8 pi)
    minimum 0.39788735772973816 at (pi, 2.275), (-pi, 12.275),
    (9.42478, 2.475).

Hartmann-6 (domain [0, 1]^6): the standard 4-term exponential form
    f(x) = -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2)
    minimum -3.322368011391339 near
    (0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573).

VLMOP2 (domain [-2, 2]^2, two objectives):
    f1(x) = 1 - exp(-sum_i (x_i - 1/sqrt(2))^2)
    f2(x) = 1 - exp(-sum_i (x_i + 1/sqrt(2))^2)
    Pareto-optimal set: x1 = x2 in [-1/sqrt(2), 1/sqrt(2)].

Constrained Branin: the Branin objective with the centered-disk feasibility
    c(x) = (x1 - 2.5)^2 + (x2 - 7.5)^2 - 50 <= 0,
which keeps the (pi, 2.275) minimizer feasible and excludes the other two.
"""

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._seeding import derive_seed, rng_from
from .data import CONSTRAINT, OBJECTIVE, Dataset, TaggedDatasets
from .errors import ConfigError, ValidationError
from .loop import expected_tags, run
from .rules import RuleConfig
from .spaces import BoxSpace

__all__ = [
    "BenchmarkProblem",
    "PROBLEM_NAMES",
    "branin",
    "hartmann6",
    "vlmop2",
    "branin_disk_constraint",
    "get_problem",
    "simple_regret",
    "feasible_regret",
    "ExperimentResult",
    "run_experiment",
    "rows_from_records",
    "format_csv",
    "summarize",
    "BRANIN_MINIMUM",
    "HARTMANN6_MINIMUM",
]

_PI = math.pi

BRANIN_MINIMUM = 0.39788735772973816
HARTMANN6_MINIMUM = -3.322368011391339

_HARTMANN_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)


def branin(points):
    """Branin values, one per row."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x1 = points[:, 0]
    x2 = points[:, 1]
    b = 5.1 / (4.0 * _PI**2)
    c = 5.0 / _PI
    t = 1.0 / (8.0 * _PI)
    return (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0


def hartmann6(points):
    """Hartmann 6-dimensional values, one per row."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    diffs = points[:, None, :] - _HARTMANN_P[None, :, :]
    inner = np.einsum("ij,nij->ni", _HARTMANN_A, diffs**2)
    return -np.exp(-inner) @ _HARTMANN_ALPHA


def vlmop2(points):
    """VLMOP2 objective pair, shape (n, 2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    shift = 1.0 / math.sqrt(2.0)
    f1 = 1.0 - np.exp(-np.sum((points - shift) ** 2, axis=1))
    f2 = 1.0 - np.exp(-np.sum((points + shift) ** 2, axis=1))
    return np.stack([f1, f2], axis=1)


def branin_disk_constraint(points):
    """Disk feasibility values; feasible where the value is <= 0."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return (points[:, 0] - 2.5) ** 2 + (points[:, 1] - 7.5) ** 2 - 50.0


@dataclass(frozen=True)
class BenchmarkProblem:
    """A named objective with its domain and whatever optimum is known."""

    name: str
    space: BoxSpace
    tags: tuple
    evaluate: callable
    minimum: float = None
    noise_sd: float = 0.0
    acquisition: str = "ei"

    def observer(self, seed=0):
        """Observer callable for the loop; noise is seeded deterministically."""
        rng = rng_from(derive_seed(seed, 2)) if self.noise_sd > 0.0 else None

        def observe(points):
            outputs = self.evaluate(points)
            datasets = {}
            for tag in self.tags:
                column = np.asarray(outputs[tag], dtype=float).reshape(-1, 1)
                if rng is not None:
                    column = column + rng.normal(0.0, self.noise_sd, size=column.shape)
                datasets[tag] = Dataset(np.atleast_2d(points), column)
            return TaggedDatasets(datasets)

        return observe


def _branin_eval(points):
    return {OBJECTIVE: branin(points)}


def _hartmann6_eval(points):
    return {OBJECTIVE: hartmann6(points)}


def _vlmop2_eval(points):
    values = vlmop2(points)
    return {"OBJECTIVE_0": values[:, 0], "OBJECTIVE_1": values[:, 1]}


def _constrained_branin_eval(points):
    return {OBJECTIVE: branin(points), CONSTRAINT: branin_disk_constraint(points)}


_PROBLEMS = {
    "branin": dict(
        space=(np.array([-5.0, 0.0]), np.array([10.0, 15.0])),
        tags=(OBJECTIVE,),
        evaluate=_branin_eval,
        minimum=BRANIN_MINIMUM,
        acquisition="ei",
    ),
    "hartmann6": dict(
        space=(np.zeros(6), np.ones(6)),
        tags=(OBJECTIVE,),
        evaluate=_hartmann6_eval,
        minimum=HARTMANN6_MINIMUM,
        acquisition="ei",
    ),
    "vlmop2": dict(
        space=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])),
        tags=("OBJECTIVE_0", "OBJECTIVE_1"),
        evaluate=_vlmop2_eval,
        minimum=None,
        acquisition="ehvi",
    ),
    "constrained-branin": dict(
        space=(np.array([-5.0, 0.0]), np.array([10.0, 15.0])),
        tags=(OBJECTIVE, CONSTRAINT),
        evaluate=_constrained_branin_eval,
        minimum=BRANIN_MINIMUM,
        acquisition="cei",
    ),
}

PROBLEM_NAMES = tuple(sorted(_PROBLEMS))


def get_problem(name, noise_sd=0.0):
    if name not in _PROBLEMS:
        raise ConfigError(
            f"unknown problem {name!r}; available: {', '.join(PROBLEM_NAMES)}"
        )
    if noise_sd < 0.0:
        raise ValidationError("noise_sd must be non-negative", field="noise_sd")
    entry = _PROBLEMS[name]
    lower, upper = entry["space"]
    return BenchmarkProblem(
        name=name,
        space=BoxSpace(lower, upper),
        tags=entry["tags"],
        evaluate=entry["evaluate"],
        minimum=entry["minimum"],
        noise_sd=noise_sd,
        acquisition=entry["acquisition"],
    )


def simple_regret(records, minimum):
    """Best-so-far minus the true minimum, one entry per record."""
    values = []
    for record in records:
        best = record.best_objective()
        if best is None:
            raise ValidationError(
                "simple regret needs single-objective records", field="records"
            )
        values.append(best - minimum)
    return np.asarray(values, dtype=float)


def feasible_regret(records, minimum, threshold=0.0):
    """Best feasible objective so far minus the minimum; inf before feasibility."""
    values = []
    for record in records:
        datasets = record.datasets
        if OBJECTIVE not in datasets or CONSTRAINT not in datasets:
            raise ValidationError(
                "feasible regret needs objective and constraint data", field="records"
            )
        objective = datasets[OBJECTIVE].observations[:, 0]
        constraint = datasets[CONSTRAINT].observations[:, 0]
        feasible = objective[constraint <= threshold]
        best = float(feasible.min()) if feasible.size else math.inf
        values.append(best - minimum)
    return np.asarray(values, dtype=float)


@dataclass
class ExperimentResult:
    """One seeded run: its records, flattened CSV rows, and timing."""

    problem: str
    seed: int
    records: list
    rows: list
    wall_ms: float
    error: Exception = None

    @property
    def final_best(self):
        return self.rows[-1][-1] if self.rows else math.inf


def _running_best(problem, observations, threshold=0.0):
    """Per-row best-so-far column for the CSV; semantics depend on the problem."""
    if problem.tags == (OBJECTIVE,):
        return np.minimum.accumulate(observations[OBJECTIVE])
    if CONSTRAINT in problem.tags:
        best = []
        current = math.inf
        for objective, constraint in zip(observations[OBJECTIVE], observations[CONSTRAINT]):
            if constraint <= threshold and objective < current:
                current = float(objective)
            best.append(current)
        return np.asarray(best)
    # bi-objective: dominated hypervolume of the running front, reference (1, 1)
    from .acquisition import hypervolume, pareto_front

    reference = np.array([1.0, 1.0])
    stacked = np.stack([observations[tag] for tag in problem.tags], axis=1)
    best = []
    for n in range(1, stacked.shape[0] + 1):
        best.append(hypervolume(pareto_front(stacked[:n], reference)))
    return np.asarray(best)


def rows_from_records(problem, seed, records):
    """Flatten a record sequence into CSV rows: one row per evaluated point."""
    if not records:
        return []
    final = records[-1].datasets
    points = final[problem.tags[0]].query_points
    observations = {tag: final[tag].observations[:, 0] for tag in problem.tags}
    best = _running_best(problem, observations)
    boundaries = [0]
    for record in records:
        boundaries.append(record.datasets[problem.tags[0]].size)
    rows = []
    for step, (start, stop) in enumerate(zip(boundaries, boundaries[1:])):
        for i in range(start, stop):
            row = [seed, step]
            row.extend(points[i].tolist())
            row.extend(float(observations[tag][i]) for tag in problem.tags)
            row.append(float(best[i]))
            rows.append(row)
    return rows


def run_experiment(problem, config=None, steps=20, seed=0, initial_design_size=None,
                   on_record=None):
    """Drive the closed loop on ``problem`` and flatten the rows for the CSV."""
    if config is None:
        config = RuleConfig(acquisition=problem.acquisition)
    if set(expected_tags(config)) != set(problem.tags):
        raise ConfigError(
            f"rule works with tags {sorted(expected_tags(config))} but problem "
            f"{problem.name!r} produces {sorted(problem.tags)}"
        )
    started = time.perf_counter()
    result = run(
        problem.space,
        problem.observer(seed),
        config,
        steps=steps,
        seed=seed,
        initial_design_size=initial_design_size,
        on_record=on_record,
    )
    wall_ms = (time.perf_counter() - started) * 1e3
    rows = rows_from_records(problem, seed, result.records)
    return ExperimentResult(
        problem=problem.name,
        seed=seed,
        records=result.records,
        rows=rows,
        wall_ms=wall_ms,
        error=result.error,
    )


def csv_header(problem):
    columns = ["seed", "step"]
    columns.extend(f"query_{i}" for i in range(problem.space.dimension))
    if len(problem.tags) == 1:
        columns.append("observation")
    else:
        columns.extend(f"observation_{tag.lower()}" for tag in problem.tags)
    columns.append("best_so_far")
    return ",".join(columns)


def format_csv(problem, results):
    """Deterministic CSV text: shortest round-trippable decimals, seed order."""
    lines = [csv_header(problem)]
    for result in sorted(results, key=lambda r: r.seed):
        for row in result.rows:
            lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def summarize(problem, config, steps, results):
    """JSON-ready summary; timing lives here, never in the CSV."""
    per_seed = []
    for result in sorted(results, key=lambda r: r.seed):
        entry = {
            "seed": result.seed,
            "steps_completed": max(len(result.records) - 1, 0),
            "wall_ms": result.wall_ms,
            "error": None if result.error is None else str(result.error),
        }
        if result.rows:
            entry["best"] = result.rows[-1][-1]
            if problem.minimum is not None and math.isfinite(result.rows[-1][-1]):
                entry["regret"] = result.rows[-1][-1] - problem.minimum
        per_seed.append(entry)
    summary = {
        "problem": problem.name,
        "rule": config.kind,
        "acquisition": config.acquisition,
        "batch_size": config.batch_size,
        "steps": steps,
        "noise_sd": problem.noise_sd,
        "known_minimum": problem.minimum,
        "results": per_seed,
        "total_wall_ms": sum(r.wall_ms for r in results),
    }
    return summary


def summary_text(summary):
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
