# gems_select/services/algorithms/estimation.py
import logging
from typing import Sequence, Tuple

import numpy as np

from gems_select.config.defaults import PINV_RCOND, RANGE_TOL
from gems_select.core.models import Allocation, Instance
from gems_select.services.algorithms.models import SamplingContext
from gems_select.services.design.solver import strict_norms

logger = logging.getLogger(__name__)


def collect_observations(
    ctx: SamplingContext, inst: Instance, allocation: Allocation, d: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Pull the allocation in arm order and return (A, b) in the first ``d`` features."""
    A = np.zeros((d, d))
    b = np.zeros(d)
    for arm in allocation.nonzero():
        count = allocation.counts[arm]
        rewards = ctx.pull_many(arm, count)
        psi = inst.arms[arm, :d]
        A += count * np.outer(psi, psi)
        b += psi * float(np.sum(rewards))
    return A, b


def least_squares(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """theta = A^+ b; rank deficiency is logged, not raised."""
    if np.linalg.matrix_rank(A, hermitian=True) < A.shape[0]:
        logger.warning(f"Gram matrix is rank deficient (d={A.shape[0]}); using pseudo-inverse")
    return np.linalg.pinv(A, rcond=PINV_RCOND, hermitian=True) @ b


def _pair_differences(
    inst: Instance, active: Sequence[int], d: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows psi_d(z') - psi_d(z) for ordered pairs (z, z') of distinct active targets."""
    idx = np.asarray(active, dtype=int)
    psi = inst.targets[idx, :d]
    z, z_prime = np.meshgrid(np.arange(idx.size), np.arange(idx.size), indexing="ij")
    mask = z != z_prime
    diffs = psi[z_prime[mask]] - psi[z[mask]]
    return z[mask], z_prime[mask], diffs


def eliminate_by_confidence(
    inst: Instance,
    active: Sequence[int],
    d: int,
    theta: np.ndarray,
    A: np.ndarray,
    log_term: float,
) -> Tuple[int, ...]:
    """Drop z when <theta, psi(z') - psi(z)> >= ||psi(z') - psi(z)||_{A^-1} sqrt(2 log_term)."""
    z, _, diffs = _pair_differences(inst, active, d)
    nonzero = np.any(diffs != 0.0, axis=1)
    widths = np.sqrt(strict_norms(diffs, A, RANGE_TOL) * 2.0 * log_term)
    beaten = nonzero & (diffs @ theta >= widths)
    eliminated = set(z[beaten].tolist())
    return tuple(j for pos, j in enumerate(active) if pos not in eliminated)


def eliminate_by_threshold(
    inst: Instance, active: Sequence[int], d: int, theta: np.ndarray, threshold: float
) -> Tuple[int, ...]:
    """Drop z when some z' beats it by at least ``threshold`` under theta."""
    z, _, diffs = _pair_differences(inst, active, d)
    beaten = diffs @ theta >= threshold
    eliminated = set(z[beaten].tolist())
    return tuple(j for pos, j in enumerate(active) if pos not in eliminated)
