# gems_select/services/misspec/fit.py
import logging
from typing import Tuple

import numpy as np
from scipy.optimize import linprog

from gems_select.core.exceptions import InstanceError
from gems_select.core.models import Instance
from gems_select.services.misspec.exceptions import FitError

logger = logging.getLogger(__name__)

# LP residuals below this are reported as an exact fit
_EXACT_FIT_TOL = 1e-10


def _fit_points(inst: Instance, d: int) -> Tuple[np.ndarray, np.ndarray]:
    if not 1 <= d <= inst.ambient_dim:
        raise InstanceError(f"d={d} outside [1, {inst.ambient_dim}]")
    points = np.vstack([inst.arms, inst.targets])[:, :d]
    rewards = np.concatenate([inst.arm_rewards, inst.target_rewards])
    return points, rewards


def chebyshev_fit(inst: Instance, d: int) -> Tuple[np.ndarray, float]:
    """Best uniform linear fit of the rewards on the first ``d`` features.

    Solves min_{theta, t} t subject to |h(x) - <theta, psi_d(x)>| <= t over all arms and
    targets.

    Returns:
        ``(theta_d, gamma_tilde)``; theta_d is one optimizer (not unique in general) and
        gamma_tilde is the attained worst-case absolute residual.

    Raises:
        FitError: If the LP solver fails.
    """
    P, h = _fit_points(inst, d)
    m = P.shape[0]
    objective = np.concatenate([np.zeros(d), [1.0]])
    A_ub = np.vstack([np.hstack([-P, -np.ones((m, 1))]), np.hstack([P, -np.ones((m, 1))])])
    b_ub = np.concatenate([-h, h])
    bounds = [(None, None)] * d + [(0.0, None)]
    try:
        res = linprog(objective, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    except ValueError as e:
        raise FitError(f"Chebyshev fit at d={d} rejected: {e}") from e
    if not res.success:
        raise FitError(f"Chebyshev fit at d={d} failed: {res.message}")

    theta = np.asarray(res.x[:d], dtype=np.float64)
    gamma_tilde = float(np.max(np.abs(h - P @ theta)))
    if gamma_tilde < _EXACT_FIT_TOL:
        gamma_tilde = 0.0
    logger.debug(f"{inst.name}: gamma_tilde({d})={gamma_tilde:.6g}")
    return theta, gamma_tilde


def residuals(inst: Instance, d: int, theta_d: np.ndarray) -> np.ndarray:
    """eta_d(x) = h(x) - <theta_d, psi_d(x)> over the arms followed by the targets."""
    P, h = _fit_points(inst, d)
    return h - P @ np.asarray(theta_d, dtype=np.float64)
