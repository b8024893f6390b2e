# gems_select/orchestration/environment.py
"""Noisy reward environments on counter-based random streams.

Trial ``t`` of a batch seeded with ``seed`` draws noise from Philox stream ``(t, 0)`` and gives the
algorithm its own stream ``(t, 1)``, so a trial's draws never depend on which other trials ran.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtri

from gems_select.core.models import Instance
from gems_select.orchestration.exceptions import HarnessError

logger = logging.getLogger(__name__)

NoiseKind = Literal["gaussian_unit", "none", "bounded"]

NOISE_STREAM = 0
ALGORITHM_STREAM = 1

_MANTISSA_BITS = 53


@dataclass(frozen=True)
class NoiseSpec:
    """Additive noise model: standard Gaussian, none, or uniform on [-b, b]."""

    kind: NoiseKind = "gaussian_unit"
    bound: float = 1.0

    @staticmethod
    def parse(text: str) -> "NoiseSpec":
        """Parse ``gaussian_unit``, ``none`` or ``bounded:<b>``."""
        text = text.strip()
        if text in ("gaussian_unit", "none"):
            return NoiseSpec(kind=text)  # type: ignore[arg-type]
        if text.startswith("bounded:"):
            try:
                bound = float(text.split(":", 1)[1])
            except ValueError as e:
                raise HarnessError(f"Invalid noise bound in {text!r}") from e
            if not bound > 0:
                raise HarnessError(f"Noise bound must be positive, got {bound}")
            if bound > 1:
                logger.warning(f"bounded:{bound} noise is not 1-sub-Gaussian")
            return NoiseSpec(kind="bounded", bound=bound)
        raise HarnessError(f"Unknown noise kind {text!r}; use gaussian_unit, none or bounded:<b>")

    def __str__(self) -> str:
        return f"bounded:{self.bound:g}" if self.kind == "bounded" else self.kind


def stream_generator(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Philox generator keyed by (seed, trial, stream)."""
    if seed < 0 or trial < 0:
        raise HarnessError(f"seed and trial must be non-negative, got {seed}, {trial}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(trial, stream))
    return np.random.Generator(np.random.Philox(sequence))


class Environment:
    """Reward source for one trial: h(x) plus noise from the trial's Philox stream.

    Gaussian draws go through the inverse normal CDF of 53-bit uniforms so the values depend
    only on the counter position in the stream.
    """

    def __init__(self, instance: Instance, noise: NoiseSpec, seed: int, trial: int):
        self.instance = instance
        self.noise = noise
        self.seed = seed
        self.trial = trial
        self._bits = stream_generator(seed, trial, NOISE_STREAM).bit_generator
        self.pulls = 0

    def _uniforms(self, count: int) -> np.ndarray:
        raw = self._bits.random_raw(count) >> np.uint64(64 - _MANTISSA_BITS)
        return (raw.astype(np.float64) + 0.5) / float(2**_MANTISSA_BITS)

    def noise_draws(self, count: int) -> np.ndarray:
        if self.noise.kind == "none":
            return np.zeros(count)
        u = self._uniforms(count)
        if self.noise.kind == "gaussian_unit":
            return ndtri(u)
        return self.noise.bound * (2.0 * u - 1.0)

    def sample(self, arm: int, count: int) -> np.ndarray:
        if not 0 <= arm < self.instance.n_arms:
            raise HarnessError(f"Arm index {arm} out of range")
        self.pulls += count
        return self.instance.arm_rewards[arm] + self.noise_draws(count)

    def algorithm_rng(self) -> np.random.Generator:
        return stream_generator(self.seed, self.trial, ALGORITHM_STREAM)
