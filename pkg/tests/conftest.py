"""Global pytest fixtures"""

import numpy as np
import pytest

from gems_select.core.generators import (
    make_hard_instance,
    make_linear_instance,
    make_misspecified_instance,
)
from gems_select.services.algorithms.models import SamplingContext
from gems_select.services.design.solver import clear_design_cache


class ExactRewards:
    """Noise-free reward source that records every pull."""

    def __init__(self, instance):
        self.instance = instance
        self.pulled = []

    def sample(self, arm, count):
        self.pulled.extend([arm] * count)
        return np.full(count, self.instance.arm_rewards[arm])


@pytest.fixture(autouse=True)
def fresh_design_cache():
    """Solver results are memoized per process; start every test cold."""
    clear_design_cache()
    yield
    clear_design_cache()


@pytest.fixture
def exact_context():
    def make(instance, max_pulls=None, seed=0):
        source = ExactRewards(instance)
        return SamplingContext(source, rng=np.random.default_rng(seed), max_pulls=max_pulls)

    return make


@pytest.fixture
def two_arm():
    """e1, e2 with theta = (0.5, 1): z* = 1, gap 0.5, rho*_2 = 16."""
    return make_linear_instance(np.eye(2), [0.5, 1.0], name="two-arm")


@pytest.fixture
def wide_two_arm():
    """e1, e2 with theta = (0.25, 1): z* = 1, gap 0.75."""
    return make_linear_instance(np.eye(2), [0.25, 1.0], name="wide-two-arm")


@pytest.fixture
def basis3():
    """Canonical basis of R^3 with theta = (1, 0.5, 0)."""
    return make_linear_instance(np.eye(3), [1.0, 0.5, 0.0], name="basis3")


@pytest.fixture
def hard3():
    return make_hard_instance(3, 0.1)


@pytest.fixture
def misspecified_two_arm():
    """e1, e2 with rewards (1, 0.3): no linear fit on the first coordinate."""
    return make_misspecified_instance(np.eye(2), [1.0, 0.3], name="misspecified-two-arm")
