# gems_select/core/generators.py
import logging
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from gems_select.config.defaults import MAX_GAP
from gems_select.core.exceptions import InstanceError
from gems_select.core.models import Instance, lookup_target_rewards, match_rows

logger = logging.getLogger(__name__)

_MAX_ATTEMPTS = 200


def make_linear_instance(
    arms: Any,
    theta: Any,
    targets: Any = None,
    intrinsic_dim: Optional[int] = None,
    name: str = "linear",
) -> Instance:
    """Exactly linear instance h(x) = <theta, x>; targets default to the arms."""
    X = np.asarray(arms, dtype=np.float64)
    Z = X if targets is None else np.asarray(targets, dtype=np.float64)
    theta_arr = np.asarray(theta, dtype=np.float64)
    return Instance(
        arms=X,
        targets=Z,
        arm_rewards=X @ theta_arr,
        target_rewards=Z @ theta_arr,
        true_theta=theta_arr,
        intrinsic_dim=intrinsic_dim,
        name=name,
    )


def make_hard_instance(d_star: int, eps: float, with_anchor: bool = False) -> Instance:
    """Instance whose complexity jumps between d* and d*+1.

    Arms are e_1..e_{d*} and (1-eps) e_{d*} + e_{d*+1} in R^{d*+1}, with h(x) = <x, e_{d*}>.
    ``with_anchor`` appends x_0 = e_D / 2 so the gap directions span R^D.

    Raises:
        InstanceError: If d_star < 2 or eps is outside (0, 1/2].
    """
    if d_star < 2:
        raise InstanceError(f"d_star must be >= 2, got {d_star}")
    if not 0.0 < eps <= 0.5:
        raise InstanceError(f"eps must lie in (0, 1/2], got {eps}")

    D = d_star + 1
    arms = [np.eye(D)[i] for i in range(d_star)]
    second = np.zeros(D)
    second[d_star - 1] = 1.0 - eps
    second[d_star] = 1.0
    arms.append(second)
    if with_anchor:
        anchor = np.zeros(D)
        anchor[D - 1] = 0.5
        arms.append(anchor)

    theta = np.zeros(D)
    theta[d_star - 1] = 1.0
    return make_linear_instance(
        np.vstack(arms), theta, intrinsic_dim=d_star, name=f"hard(d*={d_star},eps={eps})"
    )


def make_unverifiable_instance(D: int) -> Instance:
    """Canonical basis with theta = [1, 0, ..., 0, 2]; every truncation below D picks e_1."""
    if D < 2:
        raise InstanceError(f"D must be >= 2, got {D}")
    theta = np.zeros(D)
    theta[0] = 1.0
    theta[-1] = 2.0
    return make_linear_instance(np.eye(D), theta, intrinsic_dim=D, name=f"unverifiable(D={D})")


def make_misspecified_instance(
    arms: Any,
    rewards: Sequence[float],
    targets: Any = None,
    target_rewards: Optional[Sequence[float]] = None,
    require_targets_in_arms: bool = False,
    name: str = "misspecified",
) -> Instance:
    """Instance from an explicit reward table, no linear structure assumed.

    Target rewards are looked up from matching arms when not given.

    Raises:
        InstanceError: If the reward table misses an arm or target, or if
            ``require_targets_in_arms`` is set and a target is not a sampling arm.
    """
    X = np.asarray(arms, dtype=np.float64)
    h = np.asarray(rewards, dtype=np.float64)
    if X.ndim != 2 or h.shape != (X.shape[0],):
        raise InstanceError(f"Reward table covers {h.size} entries for {X.shape[0]} arms")
    Z = X if targets is None else np.asarray(targets, dtype=np.float64)
    if require_targets_in_arms and any(i < 0 for i in match_rows(Z, X)):
        raise InstanceError("Targets must be a subset of the arms")
    if target_rewards is None:
        hz = lookup_target_rewards(Z, X, h)
    else:
        hz = np.asarray(target_rewards, dtype=np.float64)
        if hz.shape != (Z.shape[0],):
            raise InstanceError(f"Target reward table covers {hz.size} of {Z.shape[0]} targets")
    return Instance(arms=X, targets=Z, arm_rewards=h, target_rewards=hz, name=name)


def _gap_ok(rewards: np.ndarray, min_gap: float) -> bool:
    ordered = np.sort(rewards)[::-1]
    return ordered.size < 2 or ordered[0] - ordered[1] >= min_gap


def make_random_linear_instance(
    rng: np.random.Generator,
    n_arms: int,
    D: int,
    d_star: int,
    min_gap: float = 0.05,
) -> Instance:
    """Random Gaussian arms with theta supported on the first ``d_star`` coordinates.

    Rewards are rescaled so the largest gap is uniform in [0.5, 2].
    """
    if not 1 <= d_star <= D or n_arms < D:
        raise InstanceError(f"Need 1 <= d_star <= D <= n_arms, got {d_star}, {D}, {n_arms}")
    for _ in range(_MAX_ATTEMPTS):
        X = rng.normal(size=(n_arms, D))
        if np.linalg.matrix_rank(X) < D:
            continue
        theta = np.zeros(D)
        theta[:d_star] = rng.normal(size=d_star)
        if abs(theta[d_star - 1]) < 0.3:
            continue
        spread = float(np.ptp(X @ theta))
        if spread <= 0:
            continue
        theta *= rng.uniform(0.5, MAX_GAP) / spread
        if not _gap_ok(X @ theta, min_gap):
            continue
        return make_linear_instance(X, theta, intrinsic_dim=d_star, name="random_linear")
    raise InstanceError("Could not draw a random linear instance with a unique best arm")


def make_random_misspecified_instance(
    rng: np.random.Generator,
    n_arms: int,
    D: int,
    scale: float = 0.05,
    min_gap: float = 0.05,
) -> Instance:
    """Random linear rewards plus uniform deviations of size ``scale``; targets are the arms."""
    for _ in range(_MAX_ATTEMPTS):
        X = rng.normal(size=(n_arms, D))
        if np.linalg.matrix_rank(X) < D:
            continue
        h = X @ rng.normal(size=D) + scale * rng.uniform(-1.0, 1.0, size=n_arms)
        spread = float(np.ptp(h))
        if spread <= 0:
            continue
        h = h * (rng.uniform(0.5, MAX_GAP) / spread)
        if not _gap_ok(h, min_gap):
            continue
        return make_misspecified_instance(X, h, name="random_misspecified")
    raise InstanceError("Could not draw a random misspecified instance with a unique best arm")


def _random_linear(seed: int = 0, n_arms: int = 4, D: int = 3, d_star: int = 2) -> Instance:
    return make_random_linear_instance(np.random.default_rng(seed), n_arms, D, d_star)


def _random_misspecified(
    seed: int = 0, n_arms: int = 4, D: int = 3, scale: float = 0.05
) -> Instance:
    return make_random_misspecified_instance(np.random.default_rng(seed), n_arms, D, scale)


GENERATORS: Dict[str, Callable[..., Instance]] = {
    "hard": make_hard_instance,
    "unverifiable": make_unverifiable_instance,
    "explicit": lambda **data: Instance.from_dict(data),
    "random_linear": _random_linear,
    "random_misspecified": _random_misspecified,
}


def build_instance(spec: Dict[str, Any]) -> Instance:
    """Build an instance from ``{"generator": name, "params": {...}}`` or inline instance data.

    Raises:
        InstanceError: Unknown generator or invalid parameters.
    """
    if "generator" not in spec:
        return Instance.from_dict(spec)
    name = spec["generator"]
    if name not in GENERATORS:
        raise InstanceError(f"Unknown instance generator '{name}'. Known: {sorted(GENERATORS)}")
    params = dict(spec.get("params", {}))
    try:
        inst = GENERATORS[name](**params)
    except TypeError as e:
        raise InstanceError(f"Bad parameters for generator '{name}': {e}") from e
    logger.debug(f"Built instance {inst.name} (D={inst.ambient_dim}, |Z|={inst.n_targets})")
    return inst
