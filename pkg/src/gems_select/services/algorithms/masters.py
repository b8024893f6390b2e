# gems_select/services/algorithms/masters.py
"""Doubling strategies over (selection budget, rounds) that call the elimination subroutines."""

import logging
import math
from typing import Iterator, List, Literal, Optional, Sequence

from gems_select.core.models import Instance
from gems_select.services.algorithms.exceptions import AlgorithmError, BudgetTooSmallError
from gems_select.services.algorithms.gems import gems_b, gems_c, gems_m
from gems_select.services.algorithms.models import Recommendation, SamplingContext
from gems_select.services.algorithms.selection import w_of
from gems_select.services.design.rounding import RdFormula
from gems_select.services.design.solver import SolverSettings

logger = logging.getLogger(__name__)


def _require_targets_in_arms(inst: Instance, name: str) -> None:
    if not inst.targets_subset_of_arms():
        raise AlgorithmError(f"{name} pulls targets directly; every target must be an arm")


def validate_candidates(
    ctx: SamplingContext, inst: Instance, candidates: Sequence[int], pulls: int
) -> int:
    """Pull every candidate slot ``pulls`` times and return the best empirical mean.

    Ties go to the lowest target index.
    """
    if not candidates:
        raise AlgorithmError("No candidates to validate")
    if pulls <= 0:
        logger.warning("Validation budget is zero; returning the first candidate")
        return candidates[0]
    means = []
    for target in candidates:
        arm = inst.target_arm_index[target]
        means.append((float(ctx.pull_many(arm, pulls).mean()), -int(target)))
    best_target = -max(means)[1]
    ctx.record("validation", active_size=len(candidates), N_k=pulls, target=best_target)
    return best_target


def master_fixed_confidence(
    ctx: SamplingContext,
    inst: Instance,
    delta: float,
    zeta: float,
    max_ell: int,
    subroutine: Literal["gems_c", "gems_m"] = "gems_c",
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> Iterator[Recommendation]:
    """Anytime fixed-confidence strategy; yields the recommendation after every subroutine call.

    Outer loop ell = 1..max_ell with delta_ell = delta / (2 ell^3); inner loop i = 1..ell runs the
    subroutine with B_i = 2^(ell - i) and n_i = 2^i, stopping at the first singleton output.
    """
    current = int(ctx.rng.integers(inst.n_targets))
    yield Recommendation(target=current, pulls_total=ctx.pulls_used, source="initial")
    for ell in range(1, max_ell + 1):
        delta_ell = delta / (2.0 * ell**3)
        for i in range(1, ell + 1):
            B, n = 2.0 ** (ell - i), 2**i
            if subroutine == "gems_c":
                survivors = gems_c(ctx, inst, delta_ell, n, B, zeta, formula, settings)
            else:
                survivors = gems_m(  # type: ignore[assignment]
                    ctx, inst, delta_ell, n, B, zeta, True, formula, settings
                )
            if len(survivors) == 1:
                current = survivors[0]
                ctx.record(
                    "recommendation", subroutine=subroutine, d_k=ctx.last_dim, target=current
                )
                yield Recommendation(current, ctx.pulls_used, subroutine, ctx.last_dim)
                break
            yield Recommendation(current, ctx.pulls_used, subroutine)
        logger.debug(f"ell={ell}: recommendation {current} after {ctx.pulls_used} pulls")


def master_fixed_budget(
    ctx: SamplingContext,
    inst: Instance,
    T: float,
    zeta: float,
    dedup_candidates: bool = False,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> int:
    """Fixed-budget selection then validation, using at most 2T pulls.

    Raises:
        BudgetTooSmallError: If floor(W(T)) = 0.
        AlgorithmError: If some target is not a sampling arm.
    """
    _require_targets_in_arms(inst, "master_fixed_budget")
    p = math.floor(w_of(T)) if T > 0 else 0
    if p == 0:
        raise BudgetTooSmallError(f"Budget T={T} is too small (floor(W(T)) = 0)")

    T_outer = T / p
    candidates: List[int] = []
    for i in range(1, p + 1):
        B = 2.0**i
        q = math.floor(w_of(T_outer / B))
        if q == 0:
            continue
        T_inner = T_outer / q
        for j in range(1, q + 1):
            candidates.append(gems_b(ctx, inst, T_inner, 2**j, B, zeta, formula, settings))
    if dedup_candidates:
        candidates = list(dict.fromkeys(candidates))
    if not candidates:
        logger.warning(f"No subroutine ran at T={T}; recommending target 0")
        return 0
    logger.debug(f"Pre-selection after {ctx.pulls_used} pulls: {candidates}")
    return validate_candidates(ctx, inst, candidates, math.floor(T / len(candidates)))


def master_misspecified(
    ctx: SamplingContext,
    inst: Instance,
    delta: float,
    eps: float,
    zeta: float,
    max_ell: int,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> Iterator[Recommendation]:
    """Anytime strategy for misspecified rewards; each ell ends with a validation round.

    delta_ell = delta / (4 ell^3); candidates from gems_m over B_i = 2^(ell - i), n_i = 2^i are
    each pulled ceil(8 log(2 / delta_ell) / eps^2) times.
    """
    _require_targets_in_arms(inst, "master_misspecified")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    current = int(ctx.rng.integers(inst.n_targets))
    yield Recommendation(target=current, pulls_total=ctx.pulls_used, source="initial")
    for ell in range(1, max_ell + 1):
        delta_ell = delta / (4.0 * ell**3)
        candidates: List[int] = []
        for i in range(1, ell + 1):
            B, n = 2.0 ** (ell - i), 2**i
            chosen = gems_m(ctx, inst, delta_ell, n, B, zeta, False, formula, settings)
            candidates.append(int(chosen))  # type: ignore[arg-type]
            yield Recommendation(current, ctx.pulls_used, "gems_m")
        pulls = math.ceil(8.0 * math.log(2.0 / delta_ell) / eps**2)
        current = validate_candidates(ctx, inst, candidates, pulls)
        yield Recommendation(current, ctx.pulls_used, "validation")
