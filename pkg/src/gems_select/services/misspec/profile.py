# gems_select/services/misspec/profile.py
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from gems_select.config.defaults import DEFAULT_ZETA, GAMMA_N_MAX
from gems_select.core.instance import stratum
from gems_select.core.models import Instance
from gems_select.services.design.solver import SolverSettings, compute_iota
from gems_select.services.misspec.exceptions import EpsilonUnreachableError, MisspecError
from gems_select.services.misspec.fit import chebyshev_fit

logger = logging.getLogger(__name__)


def _round_condition(
    inst: Instance,
    d: int,
    k: int,
    zeta: float,
    gamma_tilde: float,
    settings: Optional[SolverSettings] = None,
) -> bool:
    """(2 + sqrt((1 + zeta) iota(Y(psi_d(S_k))))) * gamma_tilde <= 2^-k / 2."""
    threshold = 2.0 ** (-k) / 2.0
    if gamma_tilde == 0.0:
        return True
    if 2.0 * gamma_tilde > threshold:
        return False
    iota = compute_iota(stratum(inst, k), d, inst, settings)
    return (2.0 + math.sqrt((1.0 + zeta) * iota)) * gamma_tilde <= threshold


def compute_gamma(
    inst: Instance,
    d: int,
    zeta: float = DEFAULT_ZETA,
    n_max: int = GAMMA_N_MAX,
    gamma_tilde: Optional[float] = None,
    settings: Optional[SolverSettings] = None,
) -> float:
    """gamma(d) = min{2 * 2^-n : the round condition holds for every k <= n}, n <= n_max."""
    if gamma_tilde is None:
        _, gamma_tilde = chebyshev_fit(inst, d)
    n_best = 0
    for k in range(1, n_max + 1):
        if not _round_condition(inst, d, k, zeta, gamma_tilde, settings):
            break
        n_best = k
    return 2.0 * 2.0 ** (-n_best)


def gamma_upper_bound(gamma_tilde: float, d: int, zeta: float = DEFAULT_ZETA) -> float:
    """(16 + 16 sqrt((1 + zeta) d)) * gamma_tilde, an upper bound on gamma(d)."""
    return (16.0 + 16.0 * math.sqrt((1.0 + zeta) * d)) * gamma_tilde


def _suffix_start(gammas: Sequence[float], eps: float) -> Optional[int]:
    """Smallest d with gammas[d' - 1] <= eps for every d' >= d; None if gamma(D) > eps."""
    d_star = None
    for d in range(len(gammas), 0, -1):
        if gammas[d - 1] > eps:
            break
        d_star = d
    return d_star


def compute_d_star(
    inst: Instance,
    eps: float,
    zeta: float = DEFAULT_ZETA,
    settings: Optional[SolverSettings] = None,
) -> int:
    """d*(eps) = min{d : gamma(d') <= eps for all d' >= d}.

    Raises:
        EpsilonUnreachableError: If gamma(D) > eps.
    """
    if eps <= 0:
        raise MisspecError(f"eps must be positive, got {eps}")
    gammas = [
        compute_gamma(inst, d, zeta, settings=settings) for d in range(1, inst.ambient_dim + 1)
    ]
    if gammas[-1] > eps:
        raise EpsilonUnreachableError(
            f"eps={eps} unreachable at ambient dimension {inst.ambient_dim} "
            f"(gamma(D)={gammas[-1]:.6g})"
        )
    d_star = _suffix_start(gammas, eps)
    return d_star if d_star is not None else inst.ambient_dim


def check_round_number(
    inst: Instance,
    d: int,
    eps: float,
    zeta: float = DEFAULT_ZETA,
    settings: Optional[SolverSettings] = None,
) -> bool:
    """When gamma(d) <= eps, the round condition holds for every k <= ceil(log2(2 / eps)).

    Vacuously true when gamma(d) > eps.
    """
    _, gamma_tilde = chebyshev_fit(inst, d)
    if compute_gamma(inst, d, zeta, gamma_tilde=gamma_tilde, settings=settings) > eps:
        return True
    rounds = math.ceil(math.log2(2.0 / eps))
    return all(
        _round_condition(inst, d, k, zeta, gamma_tilde, settings) for k in range(1, rounds + 1)
    )


@dataclass(frozen=True)
class MisspecRow:
    d: int
    gamma_tilde: float
    theta_d: List[float]
    gamma: float
    bound_prop6: float

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "gamma_tilde": self.gamma_tilde,
            "theta_d": list(self.theta_d),
            "gamma": self.gamma,
            "bound_prop6": self.bound_prop6,
        }


@dataclass(frozen=True)
class MisspecProfile:
    """Misspecification levels across d and d*(eps) over an eps grid"""

    instance: str
    zeta: float
    rows: List[MisspecRow] = field(default_factory=list)
    d_star_of_eps: Dict[float, Optional[int]] = field(default_factory=dict)

    COLUMNS = ("d", "gamma_tilde", "gamma", "bound_prop6")

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "zeta": self.zeta,
            "rows": [r.to_dict() for r in self.rows],
            "d_star_of_eps": {str(e): d for e, d in self.d_star_of_eps.items()},
        }


def misspec_profile(
    inst: Instance,
    zeta: float = DEFAULT_ZETA,
    eps_grid: Sequence[float] = (),
    settings: Optional[SolverSettings] = None,
) -> MisspecProfile:
    """gamma_tilde, theta_d, gamma and its upper bound for d = 1..D."""
    rows = []
    for d in range(1, inst.ambient_dim + 1):
        theta_d, gamma_tilde = chebyshev_fit(inst, d)
        rows.append(
            MisspecRow(
                d=d,
                gamma_tilde=gamma_tilde,
                theta_d=theta_d.tolist(),
                gamma=compute_gamma(inst, d, zeta, gamma_tilde=gamma_tilde, settings=settings),
                bound_prop6=gamma_upper_bound(gamma_tilde, d, zeta),
            )
        )

    d_star_of_eps: Dict[float, Optional[int]] = {}
    gammas = [r.gamma for r in rows]
    for eps in eps_grid:
        d_star_of_eps[eps] = _suffix_start(gammas, eps)
    return MisspecProfile(instance=inst.name, zeta=zeta, rows=rows, d_star_of_eps=d_star_of_eps)
