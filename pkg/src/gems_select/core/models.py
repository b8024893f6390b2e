# gems_select/core/models.py
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from gems_select.config.defaults import GAP_TIE_TOL, LINEAR_TOL, MAX_GAP
from gems_select.core.exceptions import InstanceError


def _frozen_array(values: Any, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise InstanceError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InstanceError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def match_rows(rows: np.ndarray, reference: np.ndarray, tol: float = LINEAR_TOL) -> List[int]:
    """Index of the first reference row equal to each row (within ``tol``), or -1."""
    matches = []
    for row in rows:
        hits = np.flatnonzero(np.all(np.abs(reference - row) <= tol, axis=1))
        matches.append(int(hits[0]) if hits.size else -1)
    return matches


@dataclass(frozen=True, eq=False)
class Instance:
    """Transductive linear-bandit instance with an explicit reward table.

    ``arm_rewards[i]`` is h(x_i) for the sampling arms, ``target_rewards[j]`` is h(z_j) for the
    targets. ``true_theta`` is present iff the rewards are exactly linear.
    """

    arms: np.ndarray
    targets: np.ndarray
    arm_rewards: np.ndarray
    target_rewards: np.ndarray
    true_theta: Optional[np.ndarray] = None
    intrinsic_dim: Optional[int] = None
    name: str = "explicit"

    def __post_init__(self) -> None:
        arms = _frozen_array(self.arms, 2, "arms")
        targets = _frozen_array(self.targets, 2, "targets")
        arm_rewards = _frozen_array(self.arm_rewards, 1, "arm_rewards")
        target_rewards = _frozen_array(self.target_rewards, 1, "target_rewards")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "arm_rewards", arm_rewards)
        object.__setattr__(self, "target_rewards", target_rewards)

        n_arms, dim = arms.shape
        if n_arms == 0 or targets.shape[0] == 0:
            raise InstanceError("Instance needs at least one arm and one target")
        if targets.shape[1] != dim:
            raise InstanceError(f"Targets have dimension {targets.shape[1]}, arms have {dim}")
        if arm_rewards.shape[0] != n_arms:
            raise InstanceError("One reward per arm required")
        if target_rewards.shape[0] != targets.shape[0]:
            raise InstanceError("One reward per target required")
        if np.linalg.matrix_rank(arms) != dim:
            raise InstanceError(f"Arms do not span R^{dim}")

        best = float(np.max(target_rewards))
        if np.sum(target_rewards >= best - GAP_TIE_TOL) != 1:
            raise InstanceError("Best target is not unique")
        if best - float(np.min(target_rewards)) > MAX_GAP + LINEAR_TOL:
            raise InstanceError(f"Maximum gap exceeds {MAX_GAP}")

        # reward consistency for shared arm/target vectors
        for j, i in enumerate(match_rows(targets, arms)):
            if i >= 0 and abs(arm_rewards[i] - target_rewards[j]) > LINEAR_TOL:
                raise InstanceError(f"Target {j} equals arm {i} but carries a different reward")

        if self.true_theta is not None:
            theta = _frozen_array(self.true_theta, 1, "true_theta")
            if theta.shape[0] != dim:
                raise InstanceError(f"true_theta must have length {dim}")
            if np.max(np.abs(arms @ theta - arm_rewards)) > LINEAR_TOL or np.max(
                np.abs(targets @ theta - target_rewards)
            ) > LINEAR_TOL:
                raise InstanceError("Rewards are not linear in true_theta")
            nonzero = np.flatnonzero(theta)
            derived = int(nonzero[-1]) + 1 if nonzero.size else 1
            if self.intrinsic_dim is None:
                object.__setattr__(self, "intrinsic_dim", derived)
            elif not 1 <= self.intrinsic_dim <= dim or derived > self.intrinsic_dim:
                raise InstanceError(
                    f"true_theta has nonzero entries beyond intrinsic_dim={self.intrinsic_dim}"
                )
            object.__setattr__(self, "true_theta", theta)
        elif self.intrinsic_dim is not None and not 1 <= self.intrinsic_dim <= dim:
            raise InstanceError(f"intrinsic_dim must lie in [1, {dim}]")

    @property
    def ambient_dim(self) -> int:
        return int(self.arms.shape[1])

    @property
    def n_arms(self) -> int:
        return int(self.arms.shape[0])

    @property
    def n_targets(self) -> int:
        return int(self.targets.shape[0])

    @property
    def is_linear(self) -> bool:
        return self.true_theta is not None

    @cached_property
    def z_star(self) -> int:
        """Index of the best target."""
        return int(np.argmax(self.target_rewards))

    @cached_property
    def gaps(self) -> np.ndarray:
        gaps = self.target_rewards[self.z_star] - self.target_rewards
        gaps.setflags(write=False)
        return gaps

    @cached_property
    def delta_min(self) -> float:
        others = np.delete(self.gaps, self.z_star)
        return float(np.min(others)) if others.size else float("inf")

    @cached_property
    def target_arm_index(self) -> Tuple[int, ...]:
        """Arm index of each target, -1 where the target is not a sampling arm."""
        return tuple(match_rows(self.targets, self.arms))

    def targets_subset_of_arms(self) -> bool:
        return all(i >= 0 for i in self.target_arm_index)

    def reward_of(self, target: int) -> float:
        return float(self.target_rewards[target])

    def view(self, d: int) -> "TruncatedView":
        return TruncatedView(source=self, dim=d)

    def to_dict(self) -> dict:
        data: Dict[str, Any] = {
            "name": self.name,
            "dim": self.ambient_dim,
            "arms": self.arms.tolist(),
        }
        if self.targets_subset_of_arms() and self.n_targets == self.n_arms and np.array_equal(
            self.targets, self.arms
        ):
            data["targets_are_arms"] = True
        else:
            data["targets"] = self.targets.tolist()
        if self.true_theta is not None:
            data["theta"] = self.true_theta.tolist()
        else:
            data["rewards"] = self.arm_rewards.tolist()
            if "targets" in data:
                data["target_rewards"] = self.target_rewards.tolist()
        if self.intrinsic_dim is not None:
            data["intrinsic_dim"] = self.intrinsic_dim
        return data

    @staticmethod
    def from_dict(data: dict) -> "Instance":
        try:
            arms = np.asarray(data["arms"], dtype=np.float64)
        except KeyError as e:
            raise InstanceError("Instance data needs 'arms'") from e
        if arms.ndim != 2:
            raise InstanceError("'arms' must be a list of vectors")
        if "dim" in data and int(data["dim"]) != arms.shape[1]:
            raise InstanceError(f"'dim' is {data['dim']} but arms have {arms.shape[1]} coordinates")
        if data.get("targets_are_arms") or "targets" not in data:
            targets = arms
        else:
            targets = np.asarray(data["targets"], dtype=np.float64)

        theta = data.get("theta")
        if theta is not None:
            theta_arr = np.asarray(theta, dtype=np.float64)
            return Instance(
                arms=arms,
                targets=targets,
                arm_rewards=arms @ theta_arr,
                target_rewards=targets @ theta_arr,
                true_theta=theta_arr,
                intrinsic_dim=data.get("intrinsic_dim"),
                name=data.get("name", "explicit"),
            )
        if "rewards" not in data:
            raise InstanceError("Instance data needs 'rewards' or 'theta'")
        arm_rewards = np.asarray(data["rewards"], dtype=np.float64)
        target_rewards = data.get("target_rewards")
        if target_rewards is None:
            target_rewards = lookup_target_rewards(targets, arms, arm_rewards)
        return Instance(
            arms=arms,
            targets=targets,
            arm_rewards=arm_rewards,
            target_rewards=np.asarray(target_rewards, dtype=np.float64),
            intrinsic_dim=data.get("intrinsic_dim"),
            name=data.get("name", "explicit"),
        )


def lookup_target_rewards(
    targets: np.ndarray, arms: np.ndarray, arm_rewards: np.ndarray
) -> np.ndarray:
    """Target rewards copied from the matching arms.

    Raises:
        InstanceError: If a target is not among the arms or rewards are missing.
    """
    if arm_rewards.shape[0] != arms.shape[0]:
        raise InstanceError(f"Reward table covers {arm_rewards.shape[0]} of {arms.shape[0]} arms")
    rewards = []
    for j, i in enumerate(match_rows(np.asarray(targets), np.asarray(arms))):
        if i < 0:
            raise InstanceError(f"No reward given for target {j}")
        rewards.append(arm_rewards[i])
    return np.asarray(rewards, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class TruncatedView:
    """Instance seen through the prefix truncation psi_d."""

    source: Instance
    dim: int

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= self.source.ambient_dim:
            raise InstanceError(f"d={self.dim} outside [1, {self.source.ambient_dim}]")

    @property
    def arms(self) -> np.ndarray:
        return self.source.arms[:, : self.dim]

    @property
    def targets(self) -> np.ndarray:
        return self.source.targets[:, : self.dim]

    def gram(self, weights: np.ndarray) -> np.ndarray:
        """A_d(w) = sum_x w_x psi_d(x) psi_d(x)^T."""
        X = self.arms
        return X.T @ (np.asarray(weights, dtype=np.float64)[:, None] * X)


@dataclass(frozen=True, eq=False)
class Design:
    """Probability weights over the sampling arms"""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise InstanceError("Design weights must be a non-empty vector")
        if np.any(w < -1e-12) or abs(float(np.sum(w)) - 1.0) > 1e-9:
            raise InstanceError("Design weights must be non-negative and sum to 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @staticmethod
    def uniform(n_arms: int) -> "Design":
        return Design(np.full(n_arms, 1.0 / n_arms))

    def support(self, threshold: float = 0.0) -> np.ndarray:
        return np.flatnonzero(self.weights > threshold)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist()}

    @staticmethod
    def from_dict(data: dict) -> "Design":
        return Design(np.asarray(data["weights"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class DesignSolution:
    """Approximate solution of a min-max design problem.

    ``lower_bound`` is the dual certificate; ``relative_gap = (value - lower_bound) / value``.
    """

    design: Design
    value: float
    iterations: int
    relative_gap: float
    lower_bound: float = 0.0

    def to_dict(self) -> dict:
        return {
            "design": self.design.to_dict(),
            "value": self.value,
            "iterations": self.iterations,
            "relative_gap": self.relative_gap,
            "lower_bound": self.lower_bound,
        }

    @staticmethod
    def from_dict(data: dict) -> "DesignSolution":
        return DesignSolution(
            design=Design.from_dict(data["design"]),
            value=data["value"],
            iterations=data["iterations"],
            relative_gap=data["relative_gap"],
            lower_bound=data.get("lower_bound", 0.0),
        )


@dataclass(frozen=True)
class Allocation:
    """Integer pull counts over the sampling arms"""

    counts: Tuple[int, ...]
    total: int = field(default=-1)

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise InstanceError("Allocation counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        if self.total == -1:
            object.__setattr__(self, "total", sum(counts))
        elif sum(counts) != self.total:
            raise InstanceError(f"Allocation counts sum to {sum(counts)}, expected {self.total}")

    def pulls(self) -> List[int]:
        """Arm indices in pull order (ascending arm index, repeated by count)."""
        return [i for i, c in enumerate(self.counts) for _ in range(c)]

    def nonzero(self) -> Sequence[int]:
        return [i for i, c in enumerate(self.counts) if c > 0]

    def to_dict(self) -> dict:
        return {"counts": list(self.counts), "total": self.total}

    @staticmethod
    def from_dict(data: dict) -> "Allocation":
        return Allocation(counts=tuple(data["counts"]), total=data["total"])
