import numpy as np
import pytest

from gems_select.orchestration.environment import Environment, NoiseSpec, stream_generator
from gems_select.orchestration.exceptions import HarnessError


class TestNoiseSpec:
    @pytest.mark.parametrize("text", ["gaussian_unit", "none", " none "])
    def test_named_kinds(self, text):
        assert str(NoiseSpec.parse(text)) == text.strip()

    def test_bounded(self):
        spec = NoiseSpec.parse("bounded:0.5")
        assert spec.kind == "bounded"
        assert spec.bound == 0.5
        assert str(spec) == "bounded:0.5"

    def test_wide_bound_warns(self, caplog):
        NoiseSpec.parse("bounded:2")
        assert "not 1-sub-Gaussian" in caplog.text

    @pytest.mark.parametrize("text", ["laplace", "bounded:", "bounded:abc", "bounded:-1"])
    def test_invalid(self, text):
        with pytest.raises(HarnessError):
            NoiseSpec.parse(text)


class TestStreams:
    def test_same_key_same_draws(self):
        a = stream_generator(5, 3, 0).random(4)
        b = stream_generator(5, 3, 0).random(4)
        assert np.array_equal(a, b)

    def test_keys_are_independent(self):
        base = stream_generator(5, 3, 0).random(4)
        assert not np.array_equal(base, stream_generator(5, 4, 0).random(4))
        assert not np.array_equal(base, stream_generator(5, 3, 1).random(4))
        assert not np.array_equal(base, stream_generator(6, 3, 0).random(4))

    def test_rejects_negative_seed(self):
        with pytest.raises(HarnessError):
            stream_generator(-1, 0, 0)


class TestEnvironment:
    def test_trial_draws_are_reproducible(self, two_arm):
        a = Environment(two_arm, NoiseSpec(), seed=1, trial=2)
        b = Environment(two_arm, NoiseSpec(), seed=1, trial=2)
        assert np.array_equal(a.sample(0, 5), b.sample(0, 5))

    def test_draws_depend_only_on_counter_position(self, two_arm):
        env = Environment(two_arm, NoiseSpec(), seed=1, trial=0)
        first = np.concatenate([env.sample(0, 2), env.sample(1, 3)])
        again = Environment(two_arm, NoiseSpec(), seed=1, trial=0)
        noise = again.noise_draws(5)
        expected = np.array([0.5, 0.5, 1.0, 1.0, 1.0]) + noise
        assert np.allclose(first, expected)

    def test_no_noise(self, two_arm):
        env = Environment(two_arm, NoiseSpec(kind="none"), seed=0, trial=0)
        assert env.sample(1, 3).tolist() == [1.0, 1.0, 1.0]
        assert env.pulls == 3

    def test_bounded_noise_range(self, two_arm):
        env = Environment(two_arm, NoiseSpec(kind="bounded", bound=0.25), seed=0, trial=0)
        draws = env.noise_draws(2000)
        assert np.all(np.abs(draws) <= 0.25)

    def test_gaussian_moments(self, two_arm):
        draws = Environment(two_arm, NoiseSpec(), seed=0, trial=0).noise_draws(20000)
        assert abs(draws.mean()) < 0.05
        assert draws.std() == pytest.approx(1.0, abs=0.05)
        assert np.all(np.isfinite(draws))

    def test_arm_out_of_range(self, two_arm):
        env = Environment(two_arm, NoiseSpec(), seed=0, trial=0)
        with pytest.raises(HarnessError):
            env.sample(2, 1)

    def test_algorithm_stream_is_separate(self, two_arm):
        env = Environment(two_arm, NoiseSpec(), seed=0, trial=0)
        before = env.algorithm_rng().random(3)
        env.sample(0, 10)
        assert np.array_equal(before, env.algorithm_rng().random(3))
