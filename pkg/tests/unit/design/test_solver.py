import math

import numpy as np
import pytest

from gems_select.core.exceptions import InstanceError
from gems_select.core.generators import make_linear_instance
from gems_select.core.instance import directions, optimal_directions
from gems_select.core.models import Design
from gems_select.services.design.exceptions import SolverConvergenceError
from gems_select.services.design.solver import (
    SolverSettings,
    compute_iota,
    compute_iota_star,
    compute_rho,
    grid_search_design,
    rho_design,
    solve_design,
    strict_norms,
    weighted_norm_sq,
)

TOL = 1.1e-2


class TestWeightedNorm:
    def test_uniform_design(self, two_arm):
        assert weighted_norm_sq([1.0, 0.0], Design.uniform(2), two_arm.view(2)) == pytest.approx(
            2.0
        )

    def test_direction_outside_range(self, two_arm):
        design = Design(np.array([1.0, 0.0]))
        assert weighted_norm_sq([0.0, 1.0], design, two_arm.view(2)) == math.inf
        assert weighted_norm_sq([1.0, 0.0], design, two_arm.view(2)) == pytest.approx(1.0)

    def test_wrong_length(self, two_arm):
        with pytest.raises(InstanceError):
            weighted_norm_sq([1.0, 0.0, 0.0], Design.uniform(2), two_arm.view(2))

    def test_norm_is_non_negative(self, basis3):
        rng = np.random.default_rng(1)
        Y = rng.normal(size=(20, 3))
        A = basis3.view(3).gram(rng.dirichlet(np.ones(3)))
        assert np.all(strict_norms(Y, A) >= 0.0)

    def test_empty_direction_set(self):
        assert strict_norms(np.zeros((0, 2)), np.eye(2)).shape == (0,)


class TestSolveDesign:
    def test_pair_difference(self, two_arm):
        solution = solve_design(np.array([[1.0, -1.0]]), two_arm.view(2))
        assert solution.value == pytest.approx(4.0, rel=TOL)
        assert solution.design.weights == pytest.approx([0.5, 0.5], abs=0.05)

    def test_all_pairs_of_basis(self, basis3):
        Y = directions(basis3.targets, 3)
        assert solve_design(Y, basis3.view(3)).value == pytest.approx(6.0, rel=TOL)

    def test_certificate_brackets_value(self, hard3):
        solution = rho_design(hard3, 3)
        assert solution.lower_bound <= solution.value
        assert solution.relative_gap <= SolverSettings().tol
        assert solution.value <= solution.lower_bound * (1 + SolverSettings().tol) + 1e-12

    def test_empty_directions(self, two_arm):
        solution = solve_design(np.zeros((0, 2)), two_arm.view(2))
        assert solution.value == 0.0
        assert solution.design.weights.tolist() == [0.5, 0.5]

    def test_zero_rows_are_ignored(self, two_arm):
        Y = np.array([[0.0, 0.0], [1.0, -1.0]])
        assert solve_design(Y, two_arm.view(2)).value == pytest.approx(4.0, rel=TOL)

    def test_against_grid_search(self):
        inst = make_linear_instance(
            [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, -1.0]], [0.3, 0.8], name="four-arm"
        )
        Y = directions(inst.targets, 2)
        solved = solve_design(Y, inst.view(2))
        grid = grid_search_design(Y, inst.view(2))
        assert solved.value <= grid.value * (1 + TOL)
        assert solved.value >= solved.lower_bound

    def test_grid_search_arm_limit(self):
        arms = np.eye(2)[np.arange(8) % 2] + np.arange(8)[:, None] * 0.1
        inst = make_linear_instance(arms, [1.0, 0.0])
        with pytest.raises(InstanceError, match="at most 6"):
            grid_search_design(np.array([[1.0, 0.0]]), inst.view(2))

    def test_iteration_cap(self, hard3):
        settings = SolverSettings(tol=1e-9, max_iterations=1)
        with pytest.raises(SolverConvergenceError) as excinfo:
            rho_design(hard3, 3, settings=settings)
        assert excinfo.value.best is not None
        assert excinfo.value.best.value > 0

    def test_results_are_cached(self, two_arm):
        first = solve_design(np.array([[1.0, -1.0]]), two_arm.view(2))
        second = solve_design(np.array([[1.0, -1.0]]), two_arm.view(2))
        assert first is second


class TestComplexities:
    def test_two_arm_rho(self, two_arm):
        assert compute_rho(two_arm, 2) == pytest.approx(16.0, rel=TOL)

    def test_rho_with_eps_floor(self, two_arm):
        # max(0.5, 1) = 1 replaces the gap
        assert compute_rho(two_arm, 2, eps=1.0) == pytest.approx(4.0, rel=TOL)

    def test_rho_rejects_negative_eps(self, two_arm):
        with pytest.raises(InstanceError):
            compute_rho(two_arm, 2, eps=-0.1)

    def test_hard_instance_jump(self, hard3):
        rho_3 = compute_rho(hard3, 3)
        rho_4 = compute_rho(hard3, 4)
        assert rho_3 == pytest.approx(3.0 + 2.0 * math.sqrt(2.0), rel=TOL)
        assert rho_4 >= 400.0 * (1 - TOL)

    def test_iota_of_singleton(self, basis3):
        assert compute_iota([1], 2, basis3) == 0.0
        assert compute_iota([], 2, basis3) == 0.0

    def test_iota_of_pair(self, basis3):
        assert compute_iota([0, 1, 1], 2, basis3) == pytest.approx(4.0, rel=TOL)

    def test_iota_star_matches_optimal_directions(self, basis3):
        expected = solve_design(optimal_directions(basis3, 3), basis3.view(3)).value
        assert compute_iota_star(basis3, 3) == pytest.approx(expected)

    def test_iota_star_within_4d(self, hard3):
        for d in range(1, hard3.ambient_dim + 1):
            assert compute_iota_star(hard3, d) <= 4 * d * (1 + TOL)
