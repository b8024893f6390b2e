# gems_select/services/algorithms/selection.py
import math
from typing import Callable, Optional

from scipy.optimize import brentq

_SNAP_TOL = 1e-9


def opt_dim(B: float, D_cap: int, g: Callable[[int], float]) -> Optional[int]:
    """Largest d in [1, D_cap] with g(d) <= B, or None.

    Every d is evaluated, so g need not be monotone.
    """
    if D_cap < 1:
        raise ValueError(f"D_cap must be >= 1, got {D_cap}")
    best = None
    for d in range(1, D_cap + 1):
        if g(d) <= B:
            best = d
    return best


def w_of(T: float) -> float:
    """Positive root p of p * 2^p = T.

    Roots within 1e-9 of an integer are snapped to it so that floor(w_of(8)) == 2.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    upper = max(1.0, math.log2(T) + 1.0)
    root = brentq(lambda p: p * 2.0**p - T, 0.0, upper, xtol=1e-12)
    nearest = round(root)
    if abs(root - nearest) < _SNAP_TOL:
        return float(nearest)
    return float(root)
