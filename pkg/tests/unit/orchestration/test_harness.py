import json

import pytest

from gems_select.orchestration.environment import NoiseSpec
from gems_select.orchestration.exceptions import HarnessError
from gems_select.orchestration.harness import (
    BatchConfig,
    run_batch,
    run_trial,
    run_trials,
    wilson_interval,
)
from gems_select.services.algorithms.models import AlgorithmParams

NO_NOISE = NoiseSpec(kind="none")


def oracle_batch(inst, **overrides):
    settings = dict(
        instance=inst,
        algorithm="oracle_static",
        params=AlgorithmParams(N=64),
        trials=5,
        seed=3,
        noise=NO_NOISE,
        workers=2,
    )
    settings.update(overrides)
    return BatchConfig(**settings)


class TestWilsonInterval:
    def test_no_errors(self):
        low, high = wilson_interval(0, 10)
        assert low == 0.0
        assert 0.0 < high < 0.35

    def test_symmetric_at_half(self):
        low, high = wilson_interval(5, 10)
        assert low + high == pytest.approx(1.0)

    def test_empty(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)


class TestBatchConfig:
    @pytest.mark.parametrize("field, value", [("trials", 0), ("seed", -1), ("workers", 0)])
    def test_validation(self, wide_two_arm, field, value):
        with pytest.raises(HarnessError):
            oracle_batch(wide_two_arm, **{field: value})


class TestRunBatch:
    def test_noise_free_oracle_never_errs(self, wide_two_arm):
        report = run_batch(oracle_batch(wide_two_arm))
        assert report.errors == 0
        assert report.error_rate == 0.0
        assert report.samples_mean == 64.0
        assert report.samples_quantiles == {"q10": 64.0, "q50": 64.0, "q90": 64.0}
        assert report.reference is not None
        assert report.reference.d_star == 2

    def test_seeded_batches_are_identical(self, two_arm):
        config = BatchConfig(
            instance=two_arm,
            algorithm="gems_c",
            params=AlgorithmParams(n=2, B=64.0),
            trials=6,
            seed=11,
            workers=1,
        )
        first = run_batch(config).to_dict()
        again = run_batch(config).to_dict()
        parallel = run_batch(BatchConfig(**{**config.__dict__, "workers": 3})).to_dict()
        assert first == again == parallel

    def test_trials_keep_their_order(self, two_arm):
        config = BatchConfig(
            instance=two_arm,
            algorithm="gems_c",
            params=AlgorithmParams(n=2, B=64.0),
            trials=4,
            seed=2,
            workers=4,
        )
        outcomes = run_trials(config)
        assert [o.trial for o in outcomes] == [0, 1, 2, 3]
        assert outcomes[2].record.to_dict() == run_trial(config, 2).record.to_dict()

    def test_algorithm_errors_become_failed_trials(self, wide_two_arm):
        config = oracle_batch(wide_two_arm, algorithm="gems_c", params=AlgorithmParams())
        report = run_batch(config)
        assert report.errors == 5
        assert report.error_rate == 1.0
        assert len(report.failures) == 5
        assert "ConfigError" in report.failures[0]["error"]

    def test_unknown_algorithm_is_not_a_trial_failure(self, wide_two_arm):
        from gems_select.core.exceptions import ConfigError

        with pytest.raises(ConfigError):
            run_batch(oracle_batch(wide_two_arm, algorithm="nope"))

    def test_anytime_first_correct(self, wide_two_arm):
        config = oracle_batch(
            wide_two_arm, algorithm="master_fc", params=AlgorithmParams(max_ell=6), trials=2
        )
        report = run_batch(config)
        assert report.errors == 0
        assert report.first_correct_mean is not None
        assert report.first_correct_missing == 0

    def test_trace_file(self, wide_two_arm, tmp_path):
        trace = tmp_path / "trace.jsonl"
        run_batch(oracle_batch(wide_two_arm, trials=2), trace_path=trace)
        lines = [json.loads(line) for line in trace.read_text().splitlines()]
        assert [line["trial"] for line in lines] == [0, 1]
        assert lines[0]["event"] == "iteration"
        assert lines[0]["subroutine"] == "oracle_static"

    def test_report_serializes_interval_bounds(self, wide_two_arm):
        data = run_batch(oracle_batch(wide_two_arm, with_reference=False)).to_dict()
        assert data["error_ci_low"] == 0.0
        assert data["reference"] is None
        assert data["noise"] == "none"
