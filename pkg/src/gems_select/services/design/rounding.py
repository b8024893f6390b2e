# gems_select/services/design/rounding.py
"""Integer rounding of continuous designs (efficient apportionment)."""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from gems_select.config.defaults import DEFAULT_ZETA, R_D_FORMULA, RANGE_TOL, SUPPORT_THRESHOLD
from gems_select.core.models import Allocation, Design, TruncatedView
from gems_select.services.design.exceptions import (
    RoundingError,
    RoundingGuaranteeError,
    RoundingPreconditionError,
)
from gems_select.services.design.solver import strict_norms

logger = logging.getLogger(__name__)

RdFormula = Literal["pukelsheim", "allen"]


@dataclass(frozen=True)
class RoundingSettings:
    """Parameters of the rounding step"""

    zeta: float = DEFAULT_ZETA
    formula: RdFormula = R_D_FORMULA  # type: ignore[assignment]
    support_threshold: float = SUPPORT_THRESHOLD


def r_d(d: int, zeta: float, formula: RdFormula = "pukelsheim") -> float:
    """Smallest number of pulls for which rounding loses at most a factor (1 + zeta).

    ``pukelsheim``: (d^2 + d + 2) / zeta. ``allen``: 180 d / zeta^2.
    """
    if zeta <= 0:
        raise RoundingError(f"zeta must be positive, got {zeta}")
    if d < 1:
        raise RoundingError(f"d must be >= 1, got {d}")
    if not 0.1 <= zeta <= 0.25:
        logger.debug(f"zeta={zeta} outside the usual [0.1, 0.25] range")
    if formula == "pukelsheim":
        return (d * d + d + 2) / zeta
    if formula == "allen":
        return 180.0 * d / zeta**2
    raise RoundingError(f"Unknown r_d formula '{formula}'")


def efficient_apportionment(weights: np.ndarray, N: int) -> np.ndarray:
    """Round ``N * weights`` to integers summing to ``N``.

    Starts from ceil((N - p/2) w_x) on the support of size p, then moves single pulls: add to
    argmin n_x / w_x while short, remove from argmax (n_x - 1) / w_x while over. Ties go to the
    lowest arm index.
    """
    w = np.asarray(weights, dtype=np.float64)
    support = np.flatnonzero(w > 0)
    counts = np.zeros(w.shape[0], dtype=np.int64)
    p = support.size
    counts[support] = np.ceil((N - p / 2.0) * w[support]).astype(np.int64)

    ws = w[support]
    while counts.sum() < N:
        j = support[int(np.argmin(counts[support] / ws))]
        counts[j] += 1
    while counts.sum() > N:
        j = support[int(np.argmax((counts[support] - 1) / ws))]
        counts[j] -= 1
    return counts


def reduce_support(weights: np.ndarray, arms: np.ndarray) -> np.ndarray:
    """Weights with the same sum_x w_x x x^T on at most d(d+1)/2 + 1 arms.

    Each step moves along a null vector of the support's moment columns (the upper triangle of
    x x^T plus a row of ones) until one weight reaches zero.
    """
    w = np.asarray(weights, dtype=np.float64).copy()
    X = np.asarray(arms, dtype=np.float64)
    d = X.shape[1]
    rows, cols = np.triu_indices(d)
    moments = np.vstack([X[:, rows].T * X[:, cols].T, np.ones(X.shape[0])])
    limit = moments.shape[0]
    support = np.flatnonzero(w > 0)
    while support.size > limit:
        _, _, vh = np.linalg.svd(moments[:, support])
        v = vh[-1]
        if not np.any(v > 0):
            v = -v
        positive = v > 0
        steps = w[support][positive] / v[positive]
        t = float(np.min(steps))
        w[support] -= t * v
        w[support[np.flatnonzero(positive)[int(np.argmin(steps))]]] = 0.0
        w[w < 1e-12 * w.max()] = 0.0
        support = np.flatnonzero(w > 0)
    return w / w.sum()


def _restrict_support(w: np.ndarray, threshold: float) -> np.ndarray:
    w = w.copy()
    small = (w > 0) & (w < threshold)
    if np.any(small):
        w[int(np.argmax(w))] += w[small].sum()
        w[small] = 0.0
    return w


def round_design(
    design: Design,
    N: int,
    view: TruncatedView,
    directions: np.ndarray,
    zeta: float = DEFAULT_ZETA,
    formula: RdFormula = "pukelsheim",
    settings: Optional[RoundingSettings] = None,
) -> Allocation:
    """Turn ``design`` into an allocation of ``N`` pulls.

    The result satisfies max_y ||y||^2_{(sum_i psi(x_i) psi(x_i)^T)^-1}
    <= (1 + zeta) max_y ||y||^2_{A_d(lambda)^-1} / N over ``directions``.

    Raises:
        RoundingPreconditionError: If N < r_d(d, zeta).
        RoundingGuaranteeError: If the allocation misses the guarantee.
    """
    threshold = settings.support_threshold if settings else SUPPORT_THRESHOLD
    floor = r_d(view.dim, zeta, formula)
    if N < floor:
        raise RoundingPreconditionError(
            f"N={N} is below the rounding floor r_{view.dim}={floor:.6g} (zeta={zeta})"
        )
    N = int(N)
    w = np.asarray(design.weights, dtype=np.float64)
    if w.shape[0] != view.source.n_arms:
        raise RoundingError(f"Design has {w.shape[0]} weights for {view.source.n_arms} arms")

    Y = np.asarray(directions, dtype=np.float64).reshape(-1, view.dim)
    continuous = float(np.max(strict_norms(Y, view.gram(w), RANGE_TOL))) if Y.shape[0] else 0.0
    if not np.isfinite(continuous):
        # directions outside the range of A_d(lambda): round a full-rank blend instead
        mix = zeta / 4.0
        w = (1.0 - mix) * w + mix / w.shape[0]
        logger.debug(f"Singular design blended with uniform at weight {mix}")
    else:
        w = _restrict_support(w, threshold)

    w = reduce_support(w, view.arms)

    counts = efficient_apportionment(w, N)
    allocation = Allocation(counts=tuple(int(c) for c in counts), total=N)

    if Y.shape[0] and np.isfinite(continuous):
        achieved = float(np.max(strict_norms(Y, view.gram(counts.astype(np.float64)), RANGE_TOL)))
        bound = (1.0 + zeta) * continuous / N
        if not achieved <= bound * (1.0 + 1e-9):
            raise RoundingGuaranteeError(
                f"Rounded allocation {allocation.counts} reaches {achieved:.6g} > bound "
                f"{bound:.6g} (N={N}, zeta={zeta})",
                achieved=achieved,
                bound=bound,
            )
    logger.debug(f"Rounded design to {allocation.counts} (N={N}, floor={floor:.4g})")
    return allocation
