"""Observation storage: datasets, tag-keyed collections, and serialization.

Minimization is the convention throughout the package; callers with a
maximization problem negate their observations. Datasets are immutable
values, so "mutation" means building a replacement.
"""

import json

import numpy as np

from .errors import DimensionMismatchError, SerializationError, ValidationError

__all__ = ["OBJECTIVE", "CONSTRAINT", "Dataset", "TaggedDatasets"]

OBJECTIVE = "OBJECTIVE"
CONSTRAINT = "CONSTRAINT"


def _as_matrix(values, what):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{what} must be a 2-d array, got ndim={arr.ndim}", field=what)
    return arr


def _check_finite(arr, what):
    finite = np.isfinite(arr)
    if not finite.all():
        row = int(np.nonzero(~finite.all(axis=1))[0][0])
        raise ValidationError(f"non-finite value in {what} at row {row}", field=what)


class Dataset:
    """Paired query points (N x D) and observations (N x E), all finite."""

    __slots__ = ("query_points", "observations")

    def __init__(self, query_points, observations):
        qp = _as_matrix(query_points, "query_points")
        obs = _as_matrix(observations, "observations")
        if qp.shape[0] != obs.shape[0]:
            raise ValidationError(
                f"row counts differ: {qp.shape[0]} query points vs "
                f"{obs.shape[0]} observations",
                field="observations",
            )
        _check_finite(qp, "query_points")
        _check_finite(obs, "observations")
        qp.setflags(write=False)
        obs.setflags(write=False)
        object.__setattr__(self, "query_points", qp)
        object.__setattr__(self, "observations", obs)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    @classmethod
    def empty(cls, dimension, outputs=1):
        return cls(np.empty((0, dimension)), np.empty((0, outputs)))

    @property
    def size(self):
        return self.query_points.shape[0]

    @property
    def dimension(self):
        return self.query_points.shape[1]

    @property
    def outputs(self):
        return self.observations.shape[1]

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.query_points, other.query_points) and np.array_equal(
            self.observations, other.observations
        )

    def __hash__(self):
        return hash((self.query_points.tobytes(), self.observations.tobytes()))

    def __repr__(self):
        return f"Dataset(n={self.size}, d={self.dimension}, e={self.outputs})"

    def append(self, new_points, new_obs):
        """Return a dataset with the new rows concatenated after the old."""
        pts = _as_matrix(new_points, "new_points")
        obs = _as_matrix(new_obs, "new_obs")
        if pts.shape[1] != self.dimension:
            raise DimensionMismatchError(self.dimension, pts.shape[1], "new_points columns")
        if obs.shape[1] != self.outputs:
            raise DimensionMismatchError(self.outputs, obs.shape[1], "new_obs columns")
        if pts.shape[0] != obs.shape[0]:
            raise ValidationError(
                f"row counts differ: {pts.shape[0]} points vs {obs.shape[0]} observations",
                field="new_obs",
            )
        return Dataset(
            np.concatenate([self.query_points, pts]),
            np.concatenate([self.observations, obs]),
        )

    def best_observation(self):
        """Index, query point, and value of the minimal observation.

        Ties go to the lowest index. Only defined for single-output data;
        multi-objective callers want a Pareto front, not a single best row.
        """
        if self.size == 0:
            raise ValidationError("best_observation needs at least one row", field="observations")
        if self.outputs != 1:
            raise ValidationError(
                f"best_observation needs exactly one output column, got {self.outputs}",
                field="observations",
            )
        index = int(np.argmin(self.observations[:, 0]))
        return index, self.query_points[index].copy(), float(self.observations[index, 0])

    def to_json(self):
        return {
            "d": self.dimension,
            "e": self.outputs,
            "n": self.size,
            "query_points": self.query_points.tolist(),
            "observations": self.observations.tolist(),
        }

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict):
            raise ValidationError("dataset payload must be an object", field="dataset")
        missing = {"d", "e", "n", "query_points", "observations"} - set(payload)
        if missing:
            raise ValidationError(
                f"dataset payload missing fields: {sorted(missing)}", field="dataset"
            )
        d, e, n = payload["d"], payload["e"], payload["n"]
        qp = payload["query_points"]
        obs = payload["observations"]
        if not (isinstance(qp, list) and isinstance(obs, list)):
            raise ValidationError("query_points and observations must be arrays", field="dataset")
        qp_arr = np.asarray(qp, dtype=float).reshape(len(qp), -1) if qp else np.empty((0, d))
        obs_arr = np.asarray(obs, dtype=float).reshape(len(obs), -1) if obs else np.empty((0, e))
        if qp_arr.shape != (n, d):
            raise ValidationError(
                f"query_points shape {qp_arr.shape} does not match declared ({n}, {d})",
                field="query_points",
            )
        if obs_arr.shape != (n, e):
            raise ValidationError(
                f"observations shape {obs_arr.shape} does not match declared ({n}, {e})",
                field="observations",
            )
        return cls(qp_arr, obs_arr)


class TaggedDatasets:
    """Immutable map from tag to Dataset; every entry shares one search dimension."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        if not isinstance(entries, dict):
            raise ValidationError("entries must be a dict of tag -> Dataset", field="entries")
        clean = {}
        dimension = None
        for tag, ds in entries.items():
            if not isinstance(tag, str) or not tag:
                raise ValidationError("tags must be non-empty strings", field="entries")
            if not isinstance(ds, Dataset):
                raise ValidationError(f"entry {tag!r} is not a Dataset", field=tag)
            if dimension is None:
                dimension = ds.dimension
            elif ds.dimension != dimension:
                raise DimensionMismatchError(dimension, ds.dimension, f"dataset {tag!r}")
            clean[tag] = ds
        object.__setattr__(self, "_entries", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TaggedDatasets is immutable")

    @classmethod
    def single(cls, dataset, tag=OBJECTIVE):
        return cls({tag: dataset})

    def tags(self):
        return list(self._entries)

    def __getitem__(self, tag):
        if tag not in self._entries:
            raise KeyError(tag)
        return self._entries[tag]

    def __contains__(self, tag):
        return tag in self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def items(self):
        return self._entries.items()

    def __eq__(self, other):
        if not isinstance(other, TaggedDatasets):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self):
        inner = ", ".join(f"{tag!r}: {ds!r}" for tag, ds in self._entries.items())
        return f"TaggedDatasets({{{inner}}})"

    def append(self, new_points, new_obs_by_tag):
        """Append the same query rows to every tagged dataset.

        ``new_obs_by_tag`` maps each existing tag to its observation rows.
        """
        if set(new_obs_by_tag) != set(self._entries):
            raise ValidationError(
                f"observation tags {sorted(new_obs_by_tag)} do not match "
                f"dataset tags {sorted(self._entries)}",
                field="new_obs_by_tag",
            )
        return TaggedDatasets(
            {tag: ds.append(new_points, new_obs_by_tag[tag]) for tag, ds in self._entries.items()}
        )

    def to_json(self):
        return {tag: ds.to_json() for tag, ds in self._entries.items()}

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict):
            raise ValidationError("tagged payload must be an object", field="datasets")
        return cls({tag: Dataset.from_json(ds) for tag, ds in payload.items()})


def serialize(tagged):
    """Canonical JSON bytes for a TaggedDatasets; stable across round trips."""
    return json.dumps(
        tagged.to_json(), sort_keys=True, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")


def deserialize(blob):
    if isinstance(blob, (bytes, bytearray)):
        blob = blob.decode("utf-8")
    try:
        payload = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise SerializationError(f"malformed dataset payload: {exc.msg}", offset=exc.pos) from exc
    return TaggedDatasets.from_json(payload)
