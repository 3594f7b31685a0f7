import numpy as np
import pytest
from hypothesis import given, strategies as st

from askopt.errors import DimensionMismatchError, ValidationError
from askopt.spaces import BoxSpace


def unit_square():
    return BoxSpace(np.zeros(2), np.ones(2))


class TestConstruction:
    def test_dimension_and_widths(self):
        space = BoxSpace(np.array([-1.0, 0.0]), np.array([2.0, 5.0]))
        assert space.dimension == 2
        assert np.allclose(space.widths, [3.0, 5.0])

    def test_rejects_equal_bounds(self):
        with pytest.raises(ValidationError, match=r"lower\[1\]"):
            BoxSpace(np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValidationError):
            BoxSpace(np.array([2.0]), np.array([1.0]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            BoxSpace(np.zeros(2), np.ones(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            BoxSpace(np.array([0.0, -np.inf]), np.ones(2))

    def test_immutable(self):
        space = unit_square()
        with pytest.raises(ValueError):
            space.lower[0] = 5.0

    def test_equality_and_hash(self):
        assert unit_square() == unit_square()
        assert hash(unit_square()) == hash(unit_square())
        assert unit_square() != BoxSpace(np.zeros(2), np.full(2, 2.0))


class TestContains:
    def test_boundary_is_inside(self):
        assert unit_square().contains(np.array([0.0, 1.0]))

    def test_above_upper_is_outside(self):
        assert not unit_square().contains(np.array([0.5, 1.0001]))

    def test_lower_boundary_1d(self):
        space = BoxSpace(np.array([-2.0]), np.array([3.0]))
        assert space.contains(np.array([-2.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError) as err:
            unit_square().contains(np.array([0.5]))
        assert err.value.expected == 2
        assert err.value.got == 1


class TestSample:
    def test_empty_sample_shape(self):
        points = unit_square().sample(0)
        assert points.shape == (0, 2)

    def test_uniform_mean_near_center(self):
        # law of large numbers at fixed seed
        points = unit_square().sample(1000, mode="uniform", seed=0)
        means = points.mean(axis=0)
        assert (means > 0.45).all() and (means < 0.55).all()

    def test_all_rows_inside(self):
        space = BoxSpace(np.array([-3.0, 2.0]), np.array([-1.0, 7.0]))
        for mode in ("uniform", "quasirandom"):
            for row in space.sample(257, mode=mode, seed=3):
                assert space.contains(row)

    def test_deterministic(self):
        space = unit_square()
        assert np.array_equal(space.sample(50, seed=9), space.sample(50, seed=9))
        assert not np.array_equal(space.sample(50, seed=9), space.sample(50, seed=10))
        assert np.array_equal(
            space.sample(50, mode="quasirandom"), space.sample(50, mode="quasirandom")
        )

    def test_quasirandom_skips_origin(self):
        points = unit_square().sample(8, mode="quasirandom")
        assert not (points == 0.0).all(axis=1).any()

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            unit_square().sample(4, mode="sobolish")

    @staticmethod
    def _star_discrepancy(points):
        # brute force over an 8x8 grid of anchor boxes [0, a1] x [0, a2]
        anchors = (np.arange(1, 9)) / 8.0
        worst = 0.0
        for a1 in anchors:
            for a2 in anchors:
                covered = ((points[:, 0] <= a1) & (points[:, 1] <= a2)).mean()
                worst = max(worst, abs(covered - a1 * a2))
        return worst

    def test_quasirandom_beats_uniform_discrepancy(self):
        space = unit_square()
        quasi = self._star_discrepancy(space.sample(64, mode="quasirandom"))
        uniform = np.median(
            [
                self._star_discrepancy(space.sample(64, mode="uniform", seed=s))
                for s in range(100)
            ]
        )
        assert quasi < uniform


class TestShrinkToRegion:
    def test_interior_box(self):
        got = unit_square().shrink_to_region(np.array([0.5, 0.5]), np.array([0.1, 0.1]))
        assert np.allclose(got.lower, [0.4, 0.4])
        assert np.allclose(got.upper, [0.6, 0.6])

    def test_clipped_at_lower_bound(self):
        got = unit_square().shrink_to_region(np.array([0.05, 0.5]), np.array([0.1, 0.1]))
        assert np.allclose(got.lower, [0.0, 0.4])
        assert np.allclose(got.upper, [0.15, 0.6])

    def test_clip_to_full_space(self):
        got = unit_square().shrink_to_region(np.array([0.5, 0.5]), np.array([10.0, 10.0]))
        assert got == unit_square()

    def test_center_outside_rejected(self):
        with pytest.raises(ValidationError):
            unit_square().shrink_to_region(np.array([1.5, 0.5]), np.array([0.1, 0.1]))

    def test_nonpositive_halfwidths_rejected(self):
        with pytest.raises(ValidationError):
            unit_square().shrink_to_region(np.array([0.5, 0.5]), np.array([0.1, 0.0]))

    @given(
        center=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=2),
        halfwidths=st.lists(st.floats(1e-3, 5.0), min_size=2, max_size=2),
    )
    def test_result_is_subset(self, center, halfwidths):
        space = unit_square()
        region = space.shrink_to_region(np.array(center), np.array(halfwidths))
        assert (region.lower >= space.lower).all()
        assert (region.upper <= space.upper).all()
        assert (region.lower < region.upper).all()


class TestJson:
    def test_round_trip(self):
        space = BoxSpace(np.array([-1.5, 2.0]), np.array([0.5, 11.0]))
        assert BoxSpace.from_json(space.to_json()) == space

    def test_schema(self):
        payload = unit_square().to_json()
        assert payload == {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}
