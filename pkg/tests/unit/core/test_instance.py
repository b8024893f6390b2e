import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gems_select.core.exceptions import InstanceError
from gems_select.core.generators import make_linear_instance
from gems_select.core.instance import (
    directions,
    optimal_directions,
    spans_gap_directions,
    stratum,
    truncate,
)

small_vectors = st.lists(
    st.lists(st.integers(min_value=-3, max_value=3), min_size=3, max_size=3),
    min_size=1,
    max_size=6,
)

GRADED = make_linear_instance(np.eye(4), [1.0, 0.9, 0.5, 0.0], name="graded")


class TestTruncate:
    def test_keeps_leading_coordinates(self):
        assert truncate([1.0, 2.0, 3.0], 2).tolist() == [1.0, 2.0]

    def test_full_dimension_is_identity(self):
        assert truncate([1.0, 2.0, 3.0], 3).tolist() == [1.0, 2.0, 3.0]

    def test_truncates_every_row(self):
        assert truncate(np.eye(3), 1).shape == (3, 1)

    @pytest.mark.parametrize("d", [0, 4])
    def test_out_of_range(self, d):
        with pytest.raises(InstanceError):
            truncate([1.0, 2.0, 3.0], d)

    def test_returns_a_copy(self):
        x = np.array([1.0, 2.0, 3.0])
        truncate(x, 2)[0] = 9.0
        assert x[0] == 1.0


class TestDirections:
    def test_basis_pairs(self):
        assert directions(np.eye(3), 3).shape == (3, 3)

    def test_zero_differences_are_dropped(self):
        # e2 and e3 coincide after truncation to one coordinate
        Y = directions(np.eye(3), 1)
        assert Y.shape == (1, 1)
        assert abs(Y[0, 0]) == 1.0

    def test_single_target(self):
        assert directions([[1.0, 2.0]], 2).shape == (0, 2)

    def test_rejects_empty(self):
        with pytest.raises(InstanceError):
            directions(np.zeros((0, 2)), 1)

    @given(small_vectors, st.integers(min_value=1, max_value=3))
    @settings(max_examples=60, deadline=None)
    def test_deduplicated_up_to_sign(self, rows, d):
        S = np.asarray(rows, dtype=float)
        Y = directions(S, d)
        m = S.shape[0]
        assert Y.shape[0] <= m * (m - 1) // 2
        assert np.all(np.any(Y != 0.0, axis=1))
        for i in range(Y.shape[0]):
            for j in range(i + 1, Y.shape[0]):
                assert not np.allclose(Y[i], Y[j])
                assert not np.allclose(Y[i], -Y[j])


class TestStrata:
    def test_thresholds(self, basis3):
        assert stratum(basis3, 1) == (0, 1, 2)
        assert stratum(basis3, 2) == (0, 1)
        assert stratum(basis3, 3) == (0,)

    def test_rejects_k_below_one(self, basis3):
        with pytest.raises(InstanceError):
            stratum(basis3, 0)

    @given(st.integers(min_value=1, max_value=12))
    def test_nested_and_contain_best(self, k):
        inner, outer = set(stratum(GRADED, k + 1)), set(stratum(GRADED, k))
        assert inner <= outer
        assert GRADED.z_star in inner


class TestOptimalDirections:
    def test_rows_follow_target_order(self, basis3):
        Y = optimal_directions(basis3, 3)
        assert Y.tolist() == [[1.0, -1.0, 0.0], [1.0, 0.0, -1.0]]

    def test_basis_does_not_span(self, basis3):
        assert spans_gap_directions(basis3) is False
        assert spans_gap_directions(GRADED) is False

    def test_anchor_makes_directions_span(self):
        from gems_select.core.generators import make_hard_instance

        assert spans_gap_directions(make_hard_instance(3, 0.1, with_anchor=True)) is True
