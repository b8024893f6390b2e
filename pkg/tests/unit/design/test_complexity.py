import math

import pytest

from gems_select.core.exceptions import InstanceError
from gems_select.services.design.complexity import (
    ComplexityReport,
    complexity_report,
    compute_rho_tilde,
    fixed_confidence_lower_bound,
    noninteractive_lower_bound,
)


class TestLowerBounds:
    def test_fixed_confidence(self):
        assert fixed_confidence_lower_bound(16.0, 0.1) == pytest.approx(22.834, abs=1e-3)

    def test_noninteractive(self):
        assert noninteractive_lower_bound(16.0, 0.1) == pytest.approx(8.0 * math.log(10.0))
        assert noninteractive_lower_bound(16.0, 0.1) == pytest.approx(18.42, abs=1e-2)


class TestRhoTilde:
    def test_linear_instance_matches_rho(self, two_arm):
        assert compute_rho_tilde(two_arm, 2, 0.0) == pytest.approx(16.0, rel=1.1e-2)

    def test_explicit_theta(self, two_arm):
        # surrogate gap 0.25 under the supplied fit
        value = compute_rho_tilde(two_arm, 2, 0.0, theta_d=[0.75, 1.0])
        assert value == pytest.approx(64.0, rel=1.1e-2)

    def test_non_positive_surrogate_gap(self, two_arm):
        assert compute_rho_tilde(two_arm, 2, 0.0, theta_d=[1.0, 0.5]) == math.inf

    def test_rejects_negative_eps(self, two_arm):
        with pytest.raises(InstanceError):
            compute_rho_tilde(two_arm, 2, -1.0)


class TestComplexityReport:
    def test_rows_cover_every_dimension(self, two_arm):
        report = complexity_report(two_arm, eps=0.0, delta=0.1)
        assert [r.d for r in report.rows] == [1, 2]
        assert report.row(2).rho_star == pytest.approx(16.0, rel=1.1e-2)
        assert report.row(1).rho_star == pytest.approx(4.0, rel=1.1e-2)
        assert report.row(2).lb_fixed_conf == pytest.approx(22.834, rel=1.2e-2)

    def test_eps_column(self, two_arm):
        report = complexity_report(two_arm, eps=1.0)
        assert report.row(2).rho_star_eps == pytest.approx(4.0, rel=1.1e-2)

    def test_no_lower_bounds_without_intrinsic_dim(self, misspecified_two_arm):
        report = complexity_report(misspecified_two_arm, eps=0.1)
        assert all(r.lb_fixed_conf is None for r in report.rows)
        assert report.intrinsic_dim is None

    def test_columns_match_rows(self, two_arm):
        row = complexity_report(two_arm).rows[0].to_dict()
        assert set(ComplexityReport.COLUMNS) == set(row)
