# gems_select/orchestration/registry.py
"""Algorithms addressable by name, each with a runner and a success judge."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional

from gems_select.core.exceptions import ConfigError
from gems_select.core.instance import stratum
from gems_select.core.models import Instance
from gems_select.services.algorithms.baseline import oracle_static
from gems_select.services.algorithms.gems import gems_b, gems_c, gems_m
from gems_select.services.algorithms.masters import (
    master_fixed_budget,
    master_fixed_confidence,
    master_misspecified,
)
from gems_select.services.algorithms.models import (
    AlgorithmParams,
    Recommendation,
    RunRecord,
    SamplingContext,
)
from gems_select.services.design.solver import SolverSettings

logger = logging.getLogger(__name__)

Runner = Callable[[SamplingContext, Instance, AlgorithmParams, Optional[SolverSettings]], RunRecord]


def _need(params: AlgorithmParams, name: str, *fields: str) -> None:
    missing = [f for f in fields if getattr(params, f) is None]
    if missing:
        raise ConfigError(f"{name} needs parameter(s): {', '.join(missing)}")


def first_correct_at(
    emissions: List[Recommendation], is_correct: Callable[[int], bool]
) -> Optional[int]:
    """Pull count from which every later emission is correct, or None if the last one is wrong."""
    if not emissions or not is_correct(emissions[-1].target):
        return None
    start = 0
    for pos, emission in enumerate(emissions):
        if not is_correct(emission.target):
            start = pos + 1
    return emissions[start].pulls_total


def _drain(
    ctx: SamplingContext, stream: Iterator[Recommendation], is_correct: Callable[[int], bool]
) -> RunRecord:
    emissions = list(stream)
    return RunRecord(
        recommendation=emissions[-1].target if emissions else None,
        samples_used=ctx.pulls_used,
        first_correct_at=first_correct_at(emissions, is_correct),
        emissions=emissions,
        trace=list(ctx.events),
    )


def _run_gems_c(ctx, inst, params, settings) -> RunRecord:
    _need(params, "gems_c", "n", "B")
    out = gems_c(
        ctx, inst, params.delta, params.n, params.B, params.zeta, params.r_d_formula, settings
    )
    return RunRecord(
        recommendation=out[0] if len(out) == 1 else None,
        samples_used=ctx.pulls_used,
        output_set=out,
        trace=list(ctx.events),
    )


def _run_gems_m(ctx, inst, params, settings) -> RunRecord:
    _need(params, "gems_m", "n", "B")
    out = gems_m(
        ctx, inst, params.delta, params.n, params.B, params.zeta, True, params.r_d_formula, settings
    )
    return RunRecord(
        recommendation=out[0],  # type: ignore[index]
        samples_used=ctx.pulls_used,
        output_set=out,  # type: ignore[arg-type]
        trace=list(ctx.events),
    )


def _run_gems_b(ctx, inst, params, settings) -> RunRecord:
    _need(params, "gems_b", "T", "n", "B")
    target = gems_b(
        ctx, inst, params.T, params.n, params.B, params.zeta, params.r_d_formula, settings
    )
    return RunRecord(recommendation=target, samples_used=ctx.pulls_used, trace=list(ctx.events))


def _run_master_fc(ctx, inst, params, settings) -> RunRecord:
    stream = master_fixed_confidence(
        ctx, inst, params.delta, params.zeta, params.max_ell, "gems_c", params.r_d_formula, settings
    )
    return _drain(ctx, stream, lambda z: z == inst.z_star)


def _run_master_fc_mis_bai(ctx, inst, params, settings) -> RunRecord:
    stream = master_fixed_confidence(
        ctx, inst, params.delta, params.zeta, params.max_ell, "gems_m", params.r_d_formula, settings
    )
    return _drain(ctx, stream, lambda z: z == inst.z_star)


def _run_master_fb(ctx, inst, params, settings) -> RunRecord:
    _need(params, "master_fb", "T")
    target = master_fixed_budget(
        ctx, inst, params.T, params.zeta, params.dedup_candidates, params.r_d_formula, settings
    )
    return RunRecord(recommendation=target, samples_used=ctx.pulls_used, trace=list(ctx.events))


def _run_master_mis(ctx, inst, params, settings) -> RunRecord:
    _need(params, "master_mis", "eps")
    stream = master_misspecified(
        ctx,
        inst,
        params.delta,
        params.eps,
        params.zeta,
        params.max_ell,
        params.r_d_formula,
        settings,
    )
    tolerance = 2.0 * params.eps  # type: ignore[operator]
    return _drain(ctx, stream, lambda z: inst.gaps[z] <= tolerance)


def _run_oracle_static(ctx, inst, params, settings) -> RunRecord:
    _need(params, "oracle_static", "N")
    d = params.d if params.d is not None else inst.intrinsic_dim
    if d is None:
        raise ConfigError("oracle_static needs 'd' when the instance has no intrinsic_dim")
    target = oracle_static(ctx, inst, params.N, d, params.zeta, params.r_d_formula, settings)
    return RunRecord(recommendation=target, samples_used=ctx.pulls_used, trace=list(ctx.events))


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    runner: Runner
    # multiple of eps within which a recommendation counts as correct; 0 means exactly z*
    eps_factor: float = 0.0
    set_output: bool = False

    def tolerance(self, params: AlgorithmParams) -> float:
        if self.eps_factor and params.eps is not None:
            return self.eps_factor * params.eps
        return 0.0

    def succeeded(self, record: RunRecord, inst: Instance, params: AlgorithmParams) -> bool:
        """Whether the run's output meets the algorithm's guarantee on ``inst``.

        A set output succeeds when it keeps ``z*`` and every survivor has gap below
        ``2^(1 - n)``; without ``n`` only the singleton ``{z*}`` counts.
        """
        tol = self.tolerance(params)
        if self.set_output and tol == 0.0:
            survivors = record.output_set or ()
            if params.n is None:
                return survivors == (inst.z_star,)
            return inst.z_star in survivors and set(survivors) <= set(stratum(inst, params.n + 1))
        if record.recommendation is None:
            return False
        gap = float(inst.gaps[record.recommendation])
        return gap <= tol if tol > 0 else record.recommendation == inst.z_star


ALGORITHMS: Dict[str, AlgorithmSpec] = {
    "gems_c": AlgorithmSpec("gems_c", _run_gems_c, set_output=True),
    "gems_b": AlgorithmSpec("gems_b", _run_gems_b, eps_factor=1.0),
    "gems_m": AlgorithmSpec("gems_m", _run_gems_m, eps_factor=1.0),
    "master_fc": AlgorithmSpec("master_fc", _run_master_fc),
    "master_fc_mis_bai": AlgorithmSpec("master_fc_mis_bai", _run_master_fc_mis_bai),
    "master_fb": AlgorithmSpec("master_fb", _run_master_fb, eps_factor=2.0),
    "master_mis": AlgorithmSpec("master_mis", _run_master_mis, eps_factor=2.0),
    "oracle_static": AlgorithmSpec("oracle_static", _run_oracle_static),
}


def get_algorithm(name: str) -> AlgorithmSpec:
    try:
        return ALGORITHMS[name]
    except KeyError as e:
        known = ", ".join(sorted(ALGORITHMS))
        raise ConfigError(f"Unknown algorithm {name!r}; expected one of {known}") from e

