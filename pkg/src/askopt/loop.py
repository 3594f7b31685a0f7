"""Ask-tell sessions, the closed optimization loop, and state persistence.

An AskTellSession never calls the objective: ask() recommends points, the
caller evaluates them however it likes, and tell() feeds the results back.
run() closes the loop with an observer callback and is definitionally the
same ask/observe/tell sequence, so both interfaces produce identical query
points for identical seeds.

Every step is snapshotted as a Record; records serialize to canonical JSON
and restore byte-exactly, which backs the CLI --resume flag and the service
journal.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._seeding import check_seed, derive_seed
from .data import OBJECTIVE, Dataset, TaggedDatasets
from .errors import ModelFitError, SerializationError, ValidationError
from .models import FitConfig, GPHyperparameters, GPModel, fit
from .rules import (
    RuleConfig,
    ego_step,
    initial_trust_region,
    thompson_step,
    trego_step,
    trego_update,
    TrustRegionState,
)

__all__ = [
    "SCHEMA_VERSION",
    "Record",
    "AskTellSession",
    "RunResult",
    "run",
    "drive",
    "expected_tags",
]

SCHEMA_VERSION = 1

# seed-derivation purposes, part of the persistent format
_PURPOSE_FIT = 0
_PURPOSE_RULE = 1


def expected_tags(config):
    """The dataset tags a session with this rule config works with."""
    if config.acquisition == "cei":
        return (OBJECTIVE, "CONSTRAINT")
    if config.acquisition == "ehvi":
        return ("OBJECTIVE_0", "OBJECTIVE_1")
    return (OBJECTIVE,)


@dataclass(frozen=True, eq=False)
class Record:
    """Snapshot of a session after a completed step: everything needed to resume."""

    datasets: TaggedDatasets
    model_params: dict
    rule_state: TrustRegionState
    pending_ask: np.ndarray
    step_index: int
    seed: int

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "step_index": self.step_index,
            "datasets": self.datasets.to_json(),
            "model_params": {tag: hp.to_json() for tag, hp in self.model_params.items()},
            "rule_state": None if self.rule_state is None else self.rule_state.to_json(),
            "pending_ask": None if self.pending_ask is None else self.pending_ask.tolist(),
        }

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict):
            raise ValidationError("record payload must be an object", field="record")
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SerializationError(
                f"unsupported record schema version {version!r}, expected {SCHEMA_VERSION}"
            )
        missing = {"seed", "step_index", "datasets", "model_params", "rule_state",
                   "pending_ask"} - set(payload)
        if missing:
            raise ValidationError(f"record missing fields: {sorted(missing)}", field="record")
        pending = payload["pending_ask"]
        rule_state = payload["rule_state"]
        return cls(
            datasets=TaggedDatasets.from_json(payload["datasets"]),
            model_params={
                tag: GPHyperparameters.from_json(hp)
                for tag, hp in payload["model_params"].items()
            },
            rule_state=None if rule_state is None else TrustRegionState.from_json(rule_state),
            pending_ask=None if pending is None else np.asarray(pending, dtype=float),
            step_index=int(payload["step_index"]),
            seed=int(payload["seed"]),
        )

    def serialize(self):
        """Canonical JSON bytes; identical records serialize identically."""
        return json.dumps(
            self.to_json(), sort_keys=True, separators=(",", ":"), allow_nan=False
        ).encode("utf-8")

    @classmethod
    def deserialize(cls, blob):
        if isinstance(blob, (bytes, bytearray)):
            blob = blob.decode("utf-8")
        try:
            payload = json.loads(blob)
        except json.JSONDecodeError as exc:
            raise SerializationError(
                f"malformed record payload: {exc.msg}", offset=exc.pos
            ) from exc
        return cls.from_json(payload)

    def __eq__(self, other):
        if not isinstance(other, Record):
            return NotImplemented
        return self.to_json() == other.to_json()

    def best_objective(self):
        """Minimum observed objective, or None before any single-objective data."""
        if OBJECTIVE in self.datasets and self.datasets[OBJECTIVE].size:
            return float(self.datasets[OBJECTIVE].observations[:, 0].min())
        return None


class AskTellSession:
    """The stateful half of the loop: recommends points, absorbs observations.

    Single-writer: interleave ask/tell/save from one thread at a time.
    """

    def __init__(self, space, config=None, seed=0, initial_design_size=None,
                 model_config=None):
        if config is None:
            config = RuleConfig()
        check_seed(seed)
        if initial_design_size is not None and initial_design_size < 1:
            raise ValidationError("initial design needs at least one point", field="n0")
        self.space = space
        self.config = config
        self.seed = seed
        self.initial_design_size = initial_design_size
        self.model_config = model_config if model_config is not None else FitConfig()
        self._datasets = None
        self._models = {}
        self._rule_state = None
        self._pending = None
        self._step_index = 0

    @property
    def tags(self):
        return expected_tags(self.config)

    @property
    def step_index(self):
        return self._step_index

    @property
    def datasets(self):
        return self._datasets

    @property
    def models(self):
        return dict(self._models)

    def _design_size(self):
        if self.initial_design_size is not None:
            return self.initial_design_size
        return 2 * self.space.dimension + 2

    def ask(self):
        """Recommend the next batch; repeated asks return the identical points."""
        if self._pending is not None:
            return self._pending.copy()
        if self._datasets is None:
            points = self.space.sample(self._design_size(), mode="quasirandom")
        else:
            rule_seed = derive_seed(self.seed, self._step_index, _PURPOSE_RULE)
            if self.config.kind in ("ego", "batch-penalized"):
                points = ego_step(
                    self.space, self._models, self._datasets, self.config, rule_seed
                )
            elif self.config.kind == "trego":
                points, _ = trego_step(
                    self.space,
                    self._models,
                    self._datasets,
                    self._rule_state,
                    self.config,
                    rule_seed,
                )
            else:  # thompson-discrete
                points = thompson_step(
                    self.space, self._models[OBJECTIVE], self.config, rule_seed
                )
        self._pending = points
        return points.copy()

    def _validate_tell(self, data):
        if not isinstance(data, TaggedDatasets):
            raise ValidationError("tell expects a TaggedDatasets", field="data")
        if set(data.tags()) != set(self.tags):
            raise ValidationError(
                f"tags {sorted(data.tags())} do not match session tags {sorted(self.tags)}",
                field="data",
            )
        reference = None
        for tag in self.tags:
            ds = data[tag]
            if ds.size < 1:
                raise ValidationError(f"tell for tag {tag!r} has no rows", field=tag)
            if ds.dimension != self.space.dimension:
                raise ValidationError(
                    f"tag {tag!r} has dimension {ds.dimension}, space has "
                    f"{self.space.dimension}",
                    field=tag,
                )
            if ds.outputs != 1:
                raise ValidationError(
                    f"tag {tag!r} must carry one output column", field=tag
                )
            if reference is None:
                reference = ds.query_points
            elif not np.array_equal(reference, ds.query_points):
                raise ValidationError(
                    "all tags must report the same query points", field=tag
                )
        for row in reference:
            if not self.space.contains(row):
                raise ValidationError(
                    "told query points must lie inside the search space", field="data"
                )
        if self._pending is not None and not np.array_equal(reference, self._pending):
            raise ValidationError(
                "told query points must match the pending ask exactly", field="data"
            )
        return reference

    def tell(self, data):
        """Absorb observations: append, refit, advance rule state, clear pending.

        All-or-nothing: any failure leaves the session exactly as it was. A
        fit failure raises an error carrying the last good Record.
        """
        self._validate_tell(data)
        if self._datasets is None:
            new_datasets = data
        else:
            new_datasets = self._datasets.append(
                data[self.tags[0]].query_points,
                {tag: data[tag].observations for tag in self.tags},
            )
        next_step = self._step_index + 1
        new_models = {}
        for tag_index, tag in enumerate(sorted(self.tags)):
            previous = self._models.get(tag)
            warm = previous.hyperparameters if previous is not None else None
            fit_seed = derive_seed(self.seed, next_step, _PURPOSE_FIT, tag_index)
            try:
                new_models[tag] = fit(
                    new_datasets[tag], self.model_config, seed=fit_seed, warm_start=warm
                )
            except ModelFitError as exc:
                raise ModelFitError(
                    f"refit failed for tag {tag!r}: {exc}", record=self.record()
                ) from exc
        new_state = self._rule_state
        if self.config.kind == "trego":
            _, best_point, best_value = new_datasets[OBJECTIVE].best_observation()
            if new_state is None:
                new_state = initial_trust_region(self.space, new_datasets[OBJECTIVE])
            else:
                new_state = trego_update(new_state, self.space, best_point, best_value)
        self._datasets = new_datasets
        self._models = new_models
        self._rule_state = new_state
        self._pending = None
        self._step_index = next_step

    def record(self):
        """Immutable snapshot of the current state."""
        datasets = self._datasets if self._datasets is not None else TaggedDatasets({})
        return Record(
            datasets=datasets,
            model_params={
                tag: model.hyperparameters for tag, model in self._models.items()
            },
            rule_state=self._rule_state,
            pending_ask=None if self._pending is None else self._pending.copy(),
            step_index=self._step_index,
            seed=self.seed,
        )

    def save(self):
        return self.record().serialize()

    @classmethod
    def restore(cls, blob, space, config=None, initial_design_size=None, model_config=None):
        """Rebuild a session from serialized bytes (or a Record).

        Models are reconstructed from the stored hyperparameters without
        refitting, so the restored session asks exactly what the saved one
        would have asked.
        """
        record = blob if isinstance(blob, Record) else Record.deserialize(blob)
        if config is None:
            config = RuleConfig()
        session = cls(
            space,
            config,
            seed=record.seed,
            initial_design_size=initial_design_size,
            model_config=model_config,
        )
        tags = expected_tags(config)
        if len(record.datasets):
            if set(record.datasets.tags()) != set(tags):
                raise ValidationError(
                    f"record tags {sorted(record.datasets.tags())} do not match the "
                    f"rule's tags {sorted(tags)}",
                    field="datasets",
                )
            for tag in tags:
                if tag not in record.model_params:
                    raise ValidationError(
                        f"record is missing model parameters for tag {tag!r}",
                        field="model_params",
                    )
            session._datasets = record.datasets
            session._models = {
                tag: GPModel(record.model_params[tag], record.datasets[tag])
                for tag in tags
            }
        if record.pending_ask is not None:
            pending = np.asarray(record.pending_ask, dtype=float)
            for row in pending:
                if not space.contains(row):
                    raise ValidationError(
                        "pending ask lies outside the search space", field="pending_ask"
                    )
            session._pending = pending
        session._rule_state = record.rule_state
        session._step_index = record.step_index
        return session


@dataclass
class RunResult:
    """Records from a closed-loop run, plus the observer error if one halted it."""

    records: list
    error: Exception = None

    @property
    def final(self):
        return self.records[-1] if self.records else None


def _check_observation(points, data, tags):
    if not isinstance(data, TaggedDatasets):
        raise ValidationError("observer must return a TaggedDatasets", field="observer")
    if set(data.tags()) != set(tags):
        raise ValidationError(
            f"observer returned tags {sorted(data.tags())}, expected {sorted(tags)}",
            field="observer",
        )
    for tag in tags:
        if data[tag].size != points.shape[0]:
            raise ValidationError(
                f"observer returned {data[tag].size} rows for tag {tag!r}, "
                f"expected {points.shape[0]}",
                field="observer",
            )


def drive(session, observer, iterations, target=None, on_record=None):
    """Run ``iterations`` ask/observe/tell rounds on an existing session.

    Returns the Records appended this call, one per completed round. If the
    observer raises, driving stops and the error rides along in the result:
    no observed data is lost. ``target`` stops early once the best objective
    reaches it; ``on_record`` is called with each new Record as it commits.
    """
    records = []
    for _ in range(iterations):
        points = session.ask()
        try:
            observed = observer(points)
        except Exception as exc:  # halt, keep everything observed so far
            return RunResult(records, exc)
        _check_observation(points, observed, session.tags)
        session.tell(observed)
        records.append(session.record())
        if on_record is not None:
            on_record(records[-1])
        best = records[-1].best_objective()
        if target is not None and best is not None and best <= target:
            break
    return RunResult(records, None)


def run(space, observer, config=None, steps=10, seed=0, initial_design_size=None,
        target=None, model_config=None, on_record=None):
    """Closed loop: initial design, then ``steps`` ask/observe/tell rounds.

    Returns a RunResult whose records list holds one Record after the initial
    design and one after each completed step (``steps + 1`` on a full run).
    If the observer raises, the loop stops and returns the records collected
    so far together with the error: no observed data is lost. ``target``
    stops early once the best objective reaches it.
    """
    if config is None:
        config = RuleConfig()
    if steps < 0:
        raise ValidationError("steps must be non-negative", field="steps")
    session = AskTellSession(
        space,
        config,
        seed=seed,
        initial_design_size=initial_design_size,
        model_config=model_config,
    )
    return drive(session, observer, steps + 1, target=target, on_record=on_record)
