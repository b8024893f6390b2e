# gems_select/services/algorithms/models.py
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Protocol, Tuple

import numpy as np

from gems_select.config.defaults import DEFAULT_DELTA, DEFAULT_MAX_ELL, DEFAULT_ZETA, R_D_FORMULA
from gems_select.services.algorithms.exceptions import EnvironmentExhaustedError


class RewardSource(Protocol):
    """Anything that can draw noisy rewards for an arm"""

    def sample(self, arm: int, count: int) -> np.ndarray: ...


@dataclass(frozen=True)
class TraceEvent:
    """One line of the per-trial trace"""

    event: str  # iteration, recommendation, validation, aborted
    pulls_total: int
    subroutine: Optional[str] = None
    k: Optional[int] = None
    d_k: Optional[int] = None
    N_k: Optional[int] = None
    active_size: Optional[int] = None
    target: Optional[int] = None

    def to_dict(self) -> dict:
        return {key: value for key, value in asdict(self).items() if value is not None}


class SamplingContext:
    """Pull accounting between an algorithm and its reward source.

    ``pulls_used`` grows by exactly one per pull. ``rng`` serves the algorithm's own
    randomness (for example a random initial recommendation).
    """

    def __init__(
        self,
        source: RewardSource,
        rng: Optional[np.random.Generator] = None,
        max_pulls: Optional[int] = None,
    ):
        self.source = source
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.max_pulls = max_pulls
        self.pulls_used = 0
        self.last_dim: Optional[int] = None
        self.events: List[TraceEvent] = []

    def pull(self, arm: int) -> float:
        return float(self.pull_many(arm, 1)[0])

    def pull_many(self, arm: int, count: int) -> np.ndarray:
        if count <= 0:
            return np.zeros(0)
        if self.max_pulls is not None and self.pulls_used + count > self.max_pulls:
            raise EnvironmentExhaustedError(
                f"Pull cap {self.max_pulls} reached ({self.pulls_used} used, {count} requested)"
            )
        rewards = self.source.sample(arm, count)
        self.pulls_used += count
        return rewards

    def record(self, event: str, **fields: Any) -> None:
        self.events.append(TraceEvent(event=event, pulls_total=self.pulls_used, **fields))


@dataclass
class EliminationState:
    """State of an elimination subroutine after one round"""

    active: Tuple[int, ...]
    k: int
    d_k: int
    theta_hat: np.ndarray
    gram: np.ndarray
    response: np.ndarray


@dataclass(frozen=True)
class Recommendation:
    """Recommendation emitted by an anytime master after a subroutine returns"""

    target: int
    pulls_total: int
    source: str
    d_k: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    """Outcome of one algorithm run"""

    recommendation: Optional[int]
    samples_used: int
    first_correct_at: Optional[int] = None
    output_set: Optional[Tuple[int, ...]] = None
    emissions: List[Recommendation] = field(default_factory=list)
    trace: List[TraceEvent] = field(default_factory=list)

    def selected_dims(self) -> List[int]:
        return [e.d_k for e in self.trace if e.event == "iteration" and e.d_k is not None]

    def to_dict(self) -> dict:
        return {
            "recommendation": self.recommendation,
            "samples_used": self.samples_used,
            "first_correct_at": self.first_correct_at,
            "output_set": list(self.output_set) if self.output_set is not None else None,
            "emissions": [e.to_dict() for e in self.emissions],
            "trace": [e.to_dict() for e in self.trace],
        }


@dataclass(frozen=True)
class AlgorithmParams:
    """Parameters shared by the algorithms; each algorithm reads the ones it needs"""

    delta: float = DEFAULT_DELTA
    zeta: float = DEFAULT_ZETA
    n: Optional[int] = None
    B: Optional[float] = None
    T: Optional[float] = None
    eps: Optional[float] = None
    N: Optional[int] = None
    d: Optional[int] = None
    max_ell: int = DEFAULT_MAX_ELL
    dedup_candidates: bool = False
    r_d_formula: str = R_D_FORMULA

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "AlgorithmParams":
        return AlgorithmParams(**data)
