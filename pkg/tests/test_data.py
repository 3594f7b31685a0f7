import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as npst

from askopt.data import CONSTRAINT, OBJECTIVE, Dataset, TaggedDatasets, deserialize, serialize
from askopt.errors import DimensionMismatchError, SerializationError, ValidationError


def small_dataset():
    return Dataset(np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([[3.0], [1.0]]))


class TestDataset:
    def test_empty(self):
        ds = Dataset.empty(3)
        assert ds.size == 0
        assert ds.dimension == 3
        assert ds.outputs == 1

    def test_rejects_row_count_mismatch(self):
        with pytest.raises(ValidationError):
            Dataset(np.zeros((2, 1)), np.zeros((3, 1)))

    def test_rejects_nan_naming_row(self):
        points = np.zeros((3, 1))
        obs = np.array([[0.0], [np.nan], [0.0]])
        with pytest.raises(ValidationError, match="row 1"):
            Dataset(points, obs)

    def test_immutable(self):
        ds = small_dataset()
        with pytest.raises(ValueError):
            ds.observations[0, 0] = 9.0


class TestAppend:
    def test_appends_in_order(self):
        ds = small_dataset().append(np.array([[2.0, 2.0]]), np.array([[5.0]]))
        assert ds.size == 3
        assert np.array_equal(ds.query_points[-1], [2.0, 2.0])
        assert ds.observations[-1, 0] == 5.0

    def test_zero_rows_is_identity(self):
        ds = small_dataset()
        same = ds.append(np.empty((0, 2)), np.empty((0, 1)))
        assert np.array_equal(same.query_points, ds.query_points)
        assert np.array_equal(same.observations, ds.observations)

    def test_value_semantics(self):
        ds = small_dataset()
        ds.append(np.array([[2.0, 2.0]]), np.array([[5.0]]))
        assert ds.size == 2

    def test_nan_rejected_original_unchanged(self):
        ds = small_dataset()
        with pytest.raises(ValidationError):
            ds.append(np.array([[2.0, 2.0]]), np.array([[np.nan]]))
        assert ds.size == 2

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            small_dataset().append(np.array([[2.0]]), np.array([[5.0]]))

    @given(
        first=st.integers(0, 4),
        second=st.integers(0, 4),
    )
    def test_append_associative_in_effect(self, first, second):
        rng = np.random.default_rng(first * 5 + second)
        base = small_dataset()
        a_pts, a_obs = rng.normal(size=(first, 2)), rng.normal(size=(first, 1))
        b_pts, b_obs = rng.normal(size=(second, 2)), rng.normal(size=(second, 1))
        stepwise = base.append(a_pts, a_obs).append(b_pts, b_obs)
        merged = base.append(
            np.concatenate([a_pts, b_pts]), np.concatenate([a_obs, b_obs])
        )
        assert np.array_equal(stepwise.query_points, merged.query_points)
        assert np.array_equal(stepwise.observations, merged.observations)


class TestBestObservation:
    def test_minimal_row(self):
        ds = Dataset(np.arange(3.0).reshape(3, 1), np.array([[3.0], [1.0], [2.0]]))
        index, point, value = ds.best_observation()
        assert index == 1
        assert value == 1.0
        assert np.array_equal(point, [1.0])

    def test_tie_breaks_to_lowest_index(self):
        ds = Dataset(np.arange(2.0).reshape(2, 1), np.array([[1.0], [1.0]]))
        assert ds.best_observation()[0] == 0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            Dataset.empty(1).best_observation()

    def test_multioutput_rejected(self):
        ds = Dataset(np.zeros((1, 1)), np.zeros((1, 2)))
        with pytest.raises(ValidationError):
            ds.best_observation()

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(7)
        obs = rng.normal(size=(100, 1))
        ds = Dataset(rng.normal(size=(100, 2)), obs)
        index, _, value = ds.best_observation()
        expected = min(range(100), key=lambda i: obs[i, 0])
        assert index == expected
        assert value == obs[expected, 0]
        assert (value <= obs[:, 0]).all()


class TestTaggedDatasets:
    def test_same_dimension_enforced(self):
        with pytest.raises(DimensionMismatchError):
            TaggedDatasets({OBJECTIVE: Dataset.empty(2), CONSTRAINT: Dataset.empty(3)})

    def test_empty_tag_rejected(self):
        with pytest.raises(ValidationError):
            TaggedDatasets({"": Dataset.empty(1)})

    def test_single_helper(self):
        tagged = TaggedDatasets.single(small_dataset())
        assert list(tagged.tags()) == [OBJECTIVE]

    def test_append_requires_exact_tags(self):
        tagged = TaggedDatasets({OBJECTIVE: small_dataset(), CONSTRAINT: small_dataset()})
        with pytest.raises(ValidationError):
            tagged.append(np.zeros((1, 2)), {OBJECTIVE: np.zeros((1, 1))})


class TestSerialization:
    def test_empty_round_trip(self):
        empty = TaggedDatasets({})
        assert deserialize(serialize(empty)) == empty

    def test_two_tag_round_trip(self):
        rng = np.random.default_rng(0)
        tagged = TaggedDatasets({
            OBJECTIVE: Dataset(rng.normal(size=(5, 2)), rng.normal(size=(5, 1))),
            CONSTRAINT: Dataset(rng.normal(size=(5, 2)), rng.normal(size=(5, 1))),
        })
        assert deserialize(serialize(tagged)) == tagged

    def test_serialization_is_canonical(self):
        tagged = TaggedDatasets.single(small_dataset())
        assert serialize(tagged) == serialize(deserialize(serialize(tagged)))

    def test_dataset_json_fields(self):
        payload = small_dataset().to_json()
        assert payload["d"] == 2
        assert payload["e"] == 1
        assert payload["n"] == 2

    def test_mismatched_row_counts_rejected(self):
        payload = small_dataset().to_json()
        payload["observations"] = payload["observations"][:1]
        with pytest.raises(ValidationError):
            Dataset.from_json(payload)

    def test_malformed_payload_reports_offset(self):
        with pytest.raises(SerializationError) as err:
            deserialize(b'{"OBJECTIVE": nope}')
        assert err.value.offset == 14

    @given(
        points=npst.arrays(
            np.float64,
            npst.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=6),
            elements=st.floats(-1e12, 1e12, allow_nan=False, width=64),
        ),
        output_count=st.integers(1, 3),
    )
    def test_round_trip_is_identity(self, points, output_count):
        rng = np.random.default_rng(points.shape[0] + output_count)
        obs = rng.normal(size=(points.shape[0], output_count))
        tagged = TaggedDatasets({"T": Dataset(points, obs)})
        back = deserialize(serialize(tagged))
        assert np.array_equal(back["T"].query_points, points)
        assert np.array_equal(back["T"].observations, obs)
