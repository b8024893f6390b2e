import math

import pytest

from gems_select.orchestration.bounds import (
    anytime_sample_bound,
    default_rounds,
    master_budget_error_bound,
    reference_bounds,
    subroutine_error_bound,
)
from gems_select.orchestration.exceptions import MissingIntrinsicDimError


class TestGuarantees:
    @pytest.mark.parametrize(
        "scale, rounds", [(0.5, 2), (0.1, 5), (2.0, 1), (math.inf, 1), (1.0, 1)]
    )
    def test_default_rounds(self, scale, rounds):
        assert default_rounds(scale) == rounds

    def test_subroutine_error_is_capped(self):
        assert subroutine_error_bound(0.0, 1, 2, 16.0, 640.0) == 1.0
        assert subroutine_error_bound(1e9, 1, 2, 0.0, 640.0) == 0.0

    def test_subroutine_error_decays(self):
        expected = 2 * 4 * math.exp(-1e5 / (640.0 * 2 * 16.0))
        assert subroutine_error_bound(1e5, 2, 2, 16.0, 640.0) == pytest.approx(expected)

    def test_master_budget_error(self):
        assert master_budget_error_bound(2.0, 0.5, 2, 16.0, 640.0) == 1.0
        small = master_budget_error_bound(1e6, 0.5, 2, 16.0, 640.0)
        assert 0.0 < small < 1e-3

    def test_sample_bound(self):
        base = anytime_sample_bound(0.5, 16.0, 32.0, 2, 0.1)
        assert base == pytest.approx(32.0 * 32.0 * math.log(40.0))
        assert anytime_sample_bound(0.5, 16.0, 32.0, 2, 0.1, eps=0.5) == pytest.approx(base + 4.0)


class TestReferenceBounds:
    def test_linear_instance(self, two_arm):
        ref = reference_bounds(two_arm, 0.1)
        assert ref.d_star == 2
        assert ref.rho == pytest.approx(16.0, rel=1.1e-2)
        assert ref.lb_fixed_conf == pytest.approx(22.834, rel=1.2e-2)
        assert ref.n == 2
        assert ref.subroutine_error is None
        assert not ref.misspecified

    def test_with_budget(self, two_arm):
        ref = reference_bounds(two_arm, 0.1, T=1e5)
        assert 0.0 < ref.subroutine_error < 0.1
        assert 0.0 < ref.master_budget_error <= 1.0

    def test_needs_intrinsic_dim(self, misspecified_two_arm):
        with pytest.raises(MissingIntrinsicDimError):
            reference_bounds(misspecified_two_arm, 0.1)

    def test_misspecified(self, misspecified_two_arm):
        ref = reference_bounds(misspecified_two_arm, 0.1, eps=0.1)
        assert ref.misspecified
        assert ref.d_star == 2
        # gap 0.7 exceeds eps
        assert ref.rho == pytest.approx(4.0 / 0.49, rel=1.1e-2)
        assert ref.n == 5
        assert set(ref.to_dict()) >= {"d_star", "rho", "sample_bound"}
