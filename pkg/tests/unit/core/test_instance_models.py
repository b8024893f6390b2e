import json

import numpy as np
import pytest

from gems_select.core.exceptions import InstanceError
from gems_select.core.generators import (
    build_instance,
    make_hard_instance,
    make_linear_instance,
    make_misspecified_instance,
    make_random_linear_instance,
    make_random_misspecified_instance,
    make_unverifiable_instance,
)
from gems_select.core.models import Allocation, Design, DesignSolution, Instance


class TestInstanceValidation:
    def test_linear_instance_properties(self, basis3):
        assert basis3.ambient_dim == 3
        assert basis3.n_arms == basis3.n_targets == 3
        assert basis3.is_linear
        assert basis3.z_star == 0
        assert basis3.gaps.tolist() == [0.0, 0.5, 1.0]
        assert basis3.delta_min == 0.5
        assert basis3.intrinsic_dim == 2

    def test_arrays_are_read_only(self, basis3):
        with pytest.raises(ValueError):
            basis3.arms[0, 0] = 5.0

    def test_tied_best_target(self):
        with pytest.raises(InstanceError, match="not unique"):
            make_linear_instance(np.eye(2), [1.0, 1.0])

    def test_gap_above_two(self):
        with pytest.raises(InstanceError, match="gap"):
            make_linear_instance(np.eye(2), [3.0, 0.0])

    def test_arms_must_span(self):
        with pytest.raises(InstanceError, match="span"):
            make_linear_instance([[1.0, 0.0], [2.0, 0.0]], [1.0, 0.0])

    def test_shared_vector_needs_one_reward(self):
        with pytest.raises(InstanceError, match="different reward"):
            Instance(
                arms=np.eye(2),
                targets=[[1.0, 0.0]],
                arm_rewards=[1.0, 0.0],
                target_rewards=[0.5],
            )

    def test_intrinsic_dim_must_cover_theta(self):
        with pytest.raises(InstanceError, match="intrinsic_dim"):
            make_linear_instance(np.eye(3), [1.0, 0.0, 0.5], intrinsic_dim=2)

    def test_non_finite_rewards(self):
        with pytest.raises(InstanceError, match="non-finite"):
            make_misspecified_instance(np.eye(2), [1.0, float("nan")])

    def test_single_target_has_infinite_delta_min(self):
        inst = make_linear_instance(np.eye(2), [1.0, 0.0], targets=[[1.0, 0.0]])
        assert inst.delta_min == float("inf")
        assert inst.target_arm_index == (0,)


class TestInstanceSerialization:
    def test_linear_round_trip_through_json(self, basis3):
        data = json.loads(json.dumps(basis3.to_dict()))
        assert data["targets_are_arms"] is True
        restored = Instance.from_dict(data)
        assert np.array_equal(restored.arms, basis3.arms)
        assert np.array_equal(restored.true_theta, basis3.true_theta)
        assert restored.intrinsic_dim == basis3.intrinsic_dim

    def test_reward_table_without_theta(self):
        data = {"arms": [[1.0, 0.0], [0.0, 1.0]], "rewards": [1.0, 0.3]}
        inst = Instance.from_dict(data)
        assert not inst.is_linear
        assert inst.target_rewards.tolist() == [1.0, 0.3]

    def test_missing_rewards(self):
        with pytest.raises(InstanceError, match="rewards"):
            Instance.from_dict({"arms": [[1.0, 0.0], [0.0, 1.0]]})

    def test_dim_mismatch(self):
        with pytest.raises(InstanceError, match="dim"):
            Instance.from_dict({"arms": [[1.0, 0.0], [0.0, 1.0]], "dim": 3, "theta": [1, 0]})

    def test_target_without_reward(self):
        data = {
            "arms": [[1.0, 0.0], [0.0, 1.0]],
            "targets": [[1.0, 1.0]],
            "rewards": [1.0, 0.3],
        }
        with pytest.raises(InstanceError, match="target 0"):
            Instance.from_dict(data)


class TestGenerators:
    def test_hard_instance_layout(self, hard3):
        assert hard3.ambient_dim == 4
        assert hard3.n_arms == 4
        assert hard3.intrinsic_dim == 3
        assert hard3.z_star == 2
        assert hard3.delta_min == pytest.approx(0.1)

    def test_hard_instance_anchor(self):
        inst = make_hard_instance(3, 0.1, with_anchor=True)
        assert inst.n_arms == 5
        assert inst.arms[-1].tolist() == [0.0, 0.0, 0.0, 0.5]

    @pytest.mark.parametrize("d_star, eps", [(1, 0.1), (3, 0.0), (3, 0.6)])
    def test_hard_instance_rejects(self, d_star, eps):
        with pytest.raises(InstanceError):
            make_hard_instance(d_star, eps)

    def test_unverifiable_best_is_last_coordinate(self):
        inst = make_unverifiable_instance(4)
        assert inst.z_star == 3
        assert inst.intrinsic_dim == 4

    def test_misspecified_targets_must_be_arms(self):
        with pytest.raises(InstanceError, match="subset"):
            make_misspecified_instance(
                np.eye(2),
                [1.0, 0.0],
                targets=[[1.0, 1.0]],
                target_rewards=[0.5],
                require_targets_in_arms=True,
            )

    def test_random_linear_is_seeded(self):
        a = make_random_linear_instance(np.random.default_rng(7), 5, 3, 2)
        b = make_random_linear_instance(np.random.default_rng(7), 5, 3, 2)
        assert np.array_equal(a.arms, b.arms)
        assert a.intrinsic_dim == 2
        assert np.all(a.true_theta[2:] == 0.0)
        assert np.ptp(a.target_rewards) <= 2.0

    def test_random_misspecified_targets_are_arms(self):
        inst = make_random_misspecified_instance(np.random.default_rng(3), 4, 3)
        assert inst.targets_subset_of_arms()
        assert not inst.is_linear

    def test_build_from_generator_spec(self):
        inst = build_instance({"generator": "hard", "params": {"d_star": 2, "eps": 0.25}})
        assert inst.ambient_dim == 3

    def test_build_from_inline_data(self):
        inst = build_instance({"arms": [[1.0, 0.0], [0.0, 1.0]], "theta": [0.5, 1.0]})
        assert inst.z_star == 1

    def test_unknown_generator(self):
        with pytest.raises(InstanceError, match="Unknown instance generator"):
            build_instance({"generator": "nope"})

    def test_bad_generator_params(self):
        with pytest.raises(InstanceError, match="Bad parameters"):
            build_instance({"generator": "hard", "params": {"depth": 3}})


class TestDesignModels:
    def test_design_normalization_checked(self):
        with pytest.raises(InstanceError):
            Design(np.array([0.5, 0.6]))

    def test_design_support(self):
        assert Design(np.array([0.0, 0.25, 0.75])).support().tolist() == [1, 2]

    def test_solution_round_trip(self):
        solution = DesignSolution(Design.uniform(2), 4.0, 12, 0.001, 3.996)
        restored = DesignSolution.from_dict(solution.to_dict())
        assert restored.value == 4.0
        assert restored.lower_bound == 3.996
        assert restored.design.weights.tolist() == [0.5, 0.5]

    def test_allocation_total(self):
        allocation = Allocation(counts=(2, 0, 1))
        assert allocation.total == 3
        assert allocation.pulls() == [0, 0, 2]
        assert allocation.nonzero() == [0, 2]

    def test_allocation_total_mismatch(self):
        with pytest.raises(InstanceError):
            Allocation(counts=(1, 1), total=3)

    def test_allocation_negative(self):
        with pytest.raises(InstanceError):
            Allocation(counts=(-1, 2))
