import pytest

from gems_select.core.exceptions import ConfigError
from gems_select.orchestration.validation import SUITES, SuiteOptions, SuiteResult, run_suite


class TestSuiteResult:
    def test_counts_checks_and_violations(self):
        result = SuiteResult("demo")
        result.check(True, case=0)
        result.check(False, case=1, value=2.0)
        assert result.checks == 2
        assert not result.passed
        assert result.to_dict()["violations"] == [{"case": 1, "value": 2.0}]


class TestSuites:
    def test_registry(self):
        assert set(SUITES) == {
            "design-oracle",
            "monotonicity",
            "rounding",
            "misspec-props",
            "pac-montecarlo",
        }

    def test_unknown_suite(self):
        with pytest.raises(ConfigError):
            run_suite("nope")

    def test_rounding(self):
        result = run_suite("rounding", SuiteOptions(seed=4, corpus_size=2))
        assert result.checks == 10
        assert result.passed, result.violations

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["design-oracle", "monotonicity", "misspec-props"])
    def test_property_suites(self, name):
        result = run_suite(name, SuiteOptions(seed=0, corpus_size=6))
        assert result.passed, result.violations

    @pytest.mark.montecarlo
    def test_pac_montecarlo(self):
        result = run_suite("pac-montecarlo", SuiteOptions(seed=0, trials=200, workers=4))
        assert result.passed, result.violations
