# gems_select/core/instance.py
"""Truncation, direction sets and strata over an :class:`Instance`."""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from gems_select.core.exceptions import InstanceError
from gems_select.core.models import Instance

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]

_DEDUP_DECIMALS = 12


def truncate(x: Union[np.ndarray, Sequence[float]], d: int) -> np.ndarray:
    """Return psi_d(x), the first ``d`` coordinates of ``x``.

    Raises:
        InstanceError: If ``d`` is outside [1, len(x)].
    """
    arr = np.asarray(x, dtype=np.float64)
    if not 1 <= d <= arr.shape[-1]:
        raise InstanceError(f"d={d} outside [1, {arr.shape[-1]}]")
    return arr[..., :d].copy()


def _sign_key(y: np.ndarray) -> Tuple[float, ...]:
    rounded = np.round(y, _DEDUP_DECIMALS) + 0.0
    nonzero = np.flatnonzero(rounded)
    if nonzero.size and rounded[nonzero[0]] < 0:
        rounded = -rounded + 0.0
    return tuple(rounded.tolist())


def directions(S: ArrayLike, d: int) -> np.ndarray:
    """All pairwise differences psi_d(z) - psi_d(z') over ``S``, deduplicated up to sign.

    Zero differences (targets that coincide after truncation) are dropped; the result is an
    ``(m, d)`` array with ``m <= |S|(|S|-1)/2`` and ``m = 0`` for a single target.
    """
    points = np.asarray(S, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 1:
        raise InstanceError("directions() needs a non-empty set of vectors")
    psi = truncate(points, d)

    seen = set()
    rows = []
    for i in range(psi.shape[0]):
        for j in range(i + 1, psi.shape[0]):
            y = psi[i] - psi[j]
            key = _sign_key(y)
            if not any(key) or key in seen:
                continue
            seen.add(key)
            rows.append(y)
    if not rows:
        return np.zeros((0, d))
    return np.vstack(rows)


def optimal_directions(inst: Instance, d: int) -> np.ndarray:
    """psi_d(z*) - psi_d(z) for every z != z*, in target order."""
    psi = truncate(inst.targets, d)
    others = [j for j in range(inst.n_targets) if j != inst.z_star]
    if not others:
        return np.zeros((0, d))
    return psi[inst.z_star] - psi[others]


def stratum(inst: Instance, k: int) -> Tuple[int, ...]:
    """Target indices of S_k = {z : gap_z < 4 * 2^-k}."""
    if k < 1:
        raise InstanceError(f"k must be >= 1, got {k}")
    threshold = 4.0 * 2.0 ** (-k)
    return tuple(int(j) for j in np.flatnonzero(inst.gaps < threshold))


def spans_gap_directions(inst: Instance) -> bool:
    """Whether {z* - z} spans R^D.

    Reported as a diagnostic only; algorithms run regardless.
    """
    diffs = optimal_directions(inst, inst.ambient_dim)
    spans = diffs.shape[0] > 0 and np.linalg.matrix_rank(diffs) == inst.ambient_dim
    if not spans:
        logger.debug(f"Instance '{inst.name}': gap directions do not span R^{inst.ambient_dim}")
    return bool(spans)
