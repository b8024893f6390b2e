# gems_select/services/algorithms/gems.py
"""Gap elimination with model selection: fixed-confidence, fixed-budget and misspecified rounds.

Each round picks the largest truncation d whose design cost fits the selection budget B, samples
a rounded optimal design over the active targets, fits least squares in R^d and eliminates.
"""

import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

from gems_select.core.instance import directions
from gems_select.core.models import Instance
from gems_select.services.algorithms.estimation import (
    collect_observations,
    eliminate_by_confidence,
    eliminate_by_threshold,
    least_squares,
)
from gems_select.services.algorithms.models import EliminationState, SamplingContext
from gems_select.services.algorithms.selection import opt_dim
from gems_select.services.design.rounding import RdFormula, r_d, round_design
from gems_select.services.design.solver import SolverSettings, compute_iota, solve_design

logger = logging.getLogger(__name__)

# 4^k overflows a float near k = 512
_MAX_SCALE_EXPONENT = 500


def _scaled(k: int, value: float) -> float:
    if value == 0.0:
        return 0.0
    if k > _MAX_SCALE_EXPONENT:
        return math.inf
    return 4.0**k * value


def _iota_lookup(
    inst: Instance, active: Sequence[int], settings: Optional[SolverSettings]
) -> Callable[[int], float]:
    cache: Dict[int, float] = {}

    def iota(d: int) -> float:
        if d not in cache:
            cache[d] = compute_iota(active, d, inst, settings)
        return cache[d]

    return iota


def _sample_round(
    ctx: SamplingContext,
    inst: Instance,
    active: Tuple[int, ...],
    k: int,
    d_k: int,
    N_k: int,
    zeta: float,
    formula: RdFormula,
    settings: Optional[SolverSettings],
) -> EliminationState:
    """Solve the design at d_k, pull N_k rounded samples and fit least squares."""
    view = inst.view(d_k)
    dirs = directions(inst.targets[list(active)], d_k)
    solution = solve_design(dirs, view, settings=settings)
    allocation = round_design(solution.design, N_k, view, dirs, zeta, formula)
    A, b = collect_observations(ctx, inst, allocation, d_k)
    ctx.last_dim = d_k
    return EliminationState(
        active=active, k=k, d_k=d_k, theta_hat=least_squares(A, b), gram=A, response=b
    )


def _confidence_rounds(
    ctx: SamplingContext,
    inst: Instance,
    delta: float,
    n: int,
    B: float,
    zeta: float,
    inflation: float,
    use_widths: bool,
    name: str,
    formula: RdFormula,
    settings: Optional[SolverSettings],
) -> Tuple[int, ...]:
    active = tuple(range(inst.n_targets))
    for k in range(1, n + 1):
        if len(active) == 1:
            break
        delta_k = delta / k**2
        iota = _iota_lookup(inst, active, settings)

        def g(d: int) -> float:
            floor = r_d(d, zeta, formula)
            if floor > B:
                return math.inf
            return max(_scaled(k, iota(d)), floor)

        d_k = opt_dim(B, inst.ambient_dim, g)
        if d_k is None:
            logger.debug(f"{name}: no dimension fits B={B} at k={k}; returning the active set")
            ctx.record("aborted", subroutine=name, k=k, active_size=len(active))
            return active

        log_term = math.log(len(active) ** 2 / delta_k)
        N_k = math.ceil(g(d_k) * inflation * (1.0 + zeta) * log_term)
        state = _sample_round(ctx, inst, active, k, d_k, N_k, zeta, formula, settings)
        if use_widths:
            survivors = eliminate_by_confidence(
                inst, active, d_k, state.theta_hat, state.gram, log_term
            )
        else:
            survivors = eliminate_by_threshold(inst, active, d_k, state.theta_hat, 2.0 ** (-k))
        ctx.record("iteration", subroutine=name, k=k, d_k=d_k, N_k=N_k, active_size=len(active))
        logger.debug(f"{name} k={k}: d_k={d_k}, N_k={N_k}, |S|={len(active)}->{len(survivors)}")
        active = survivors
    return active


def gems_c(
    ctx: SamplingContext,
    inst: Instance,
    delta: float,
    n: int,
    B: float,
    zeta: float,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> Tuple[int, ...]:
    """Fixed-confidence elimination; returns the surviving target indices.

    Returns the current active set unchanged (without pulls) when no dimension fits B.
    """
    if not 0.0 < delta < 1.0 or n < 1 or B <= 0:
        raise ValueError(f"gems_c needs delta in (0, 1), n >= 1, B > 0; got {delta}, {n}, {B}")
    return _confidence_rounds(
        ctx, inst, delta, n, B, zeta, 2.0, True, "gems_c", formula, settings
    )


def gems_m(
    ctx: SamplingContext,
    inst: Instance,
    delta: float,
    n: int,
    B: float,
    zeta: float,
    return_set: bool = False,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> Union[int, Tuple[int, ...]]:
    """Elimination robust to misspecification: 8 (1 + zeta) inflation, threshold 2^-k.

    Returns the first surviving target, or all survivors when ``return_set`` is set.
    """
    if not 0.0 < delta < 1.0 or n < 1 or B <= 0:
        raise ValueError(f"gems_m needs delta in (0, 1), n >= 1, B > 0; got {delta}, {n}, {B}")
    active = _confidence_rounds(
        ctx, inst, delta, n, B, zeta, 8.0, False, "gems_m", formula, settings
    )
    return active if return_set else active[0]


def gems_b(
    ctx: SamplingContext,
    inst: Instance,
    T: float,
    n: int,
    B: float,
    zeta: float,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> int:
    """Fixed-budget elimination with floor(T / n) pulls per round; returns one target.

    A failed configuration (no dimension fits) returns the first active target.
    """
    if n < 1 or B <= 0 or T <= 0:
        raise ValueError(f"gems_b needs T > 0, n >= 1, B > 0; got {T}, {n}, {B}")
    active = tuple(range(inst.n_targets))
    if len(active) == 1:
        return active[0]
    T_round = math.floor(T / n)
    D_tilde = opt_dim(T_round, inst.ambient_dim, lambda d: r_d(d, zeta, formula))
    if D_tilde is None:
        logger.debug(f"gems_b: per-round budget {T_round} below r_1; returning a default target")
        ctx.record("aborted", subroutine="gems_b", k=0, active_size=len(active))
        return active[0]

    for k in range(1, n + 1):
        if len(active) == 1:
            break
        iota = _iota_lookup(inst, active, settings)
        d_k = opt_dim(B, D_tilde, lambda d: _scaled(k, iota(d)))
        if d_k is None:
            ctx.record("aborted", subroutine="gems_b", k=k, active_size=len(active))
            return active[0]
        state = _sample_round(ctx, inst, active, k, d_k, T_round, zeta, formula, settings)
        survivors = eliminate_by_threshold(inst, active, d_k, state.theta_hat, 2.0 ** (-k))
        ctx.record(
            "iteration", subroutine="gems_b", k=k, d_k=d_k, N_k=T_round, active_size=len(active)
        )
        logger.debug(f"gems_b k={k}: d_k={d_k}, |S|={len(active)}->{len(survivors)}")
        active = survivors
    return active[0]
