# gems_select/orchestration/harness.py
"""Seeded Monte Carlo batches of algorithm runs."""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from gems_select.config.defaults import DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_WORKERS
from gems_select.core.exceptions import GemsError
from gems_select.core.models import Instance
from gems_select.orchestration.bounds import ReferenceBounds, reference_bounds
from gems_select.orchestration.environment import Environment, NoiseSpec
from gems_select.orchestration.exceptions import HarnessError
from gems_select.orchestration.registry import get_algorithm
from gems_select.services.algorithms.models import AlgorithmParams, RunRecord, SamplingContext
from gems_select.services.design.solver import SolverSettings

logger = logging.getLogger(__name__)

QUANTILES = (0.1, 0.5, 0.9)


def wilson_interval(successes: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class BatchConfig:
    instance: Instance
    algorithm: str
    params: AlgorithmParams = field(default_factory=AlgorithmParams)
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    workers: int = DEFAULT_WORKERS
    max_pulls: Optional[int] = None
    with_reference: bool = True
    solver_settings: Optional[SolverSettings] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise HarnessError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise HarnessError(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise HarnessError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    success: bool
    record: Optional[RunRecord] = None
    failure: Optional[str] = None

    @property
    def samples_used(self) -> Optional[int]:
        return self.record.samples_used if self.record is not None else None


@dataclass
class BatchReport:
    """Aggregate of one batch; ``error_rate`` counts wrong outputs and failed trials."""

    algorithm: str
    instance: str
    noise: str
    trials: int
    seed: int
    errors: int
    error_rate: float
    error_ci: Tuple[float, float]
    samples_mean: float
    samples_quantiles: Dict[str, float]
    first_correct_mean: Optional[float] = None
    first_correct_missing: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    reference: Optional[ReferenceBounds] = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "instance": self.instance,
            "noise": self.noise,
            "trials": self.trials,
            "seed": self.seed,
            "errors": self.errors,
            "error_rate": self.error_rate,
            "error_ci_low": self.error_ci[0],
            "error_ci_high": self.error_ci[1],
            "samples_mean": self.samples_mean,
            "samples_quantiles": dict(self.samples_quantiles),
            "first_correct_mean": self.first_correct_mean,
            "first_correct_missing": self.first_correct_missing,
            "failures": list(self.failures),
            "reference": self.reference.to_dict() if self.reference is not None else None,
        }


def run_trial(config: BatchConfig, trial: int) -> TrialOutcome:
    """Run one trial on its own environment; algorithm errors become a failed outcome."""
    spec = get_algorithm(config.algorithm)
    env = Environment(config.instance, config.noise, config.seed, trial)
    ctx = SamplingContext(env, rng=env.algorithm_rng(), max_pulls=config.max_pulls)
    try:
        record = spec.runner(ctx, config.instance, config.params, config.solver_settings)
    except Exception as e:
        logger.warning(f"Trial {trial} of {config.algorithm} failed: {type(e).__name__}: {e}")
        return TrialOutcome(trial=trial, success=False, failure=f"{type(e).__name__}: {e}")
    if env.pulls != record.samples_used:
        raise HarnessError(
            f"Trial {trial}: environment saw {env.pulls} pulls, run reports {record.samples_used}"
        )
    return TrialOutcome(
        trial=trial,
        success=spec.succeeded(record, config.instance, config.params),
        record=record,
    )


def run_trials(config: BatchConfig) -> List[TrialOutcome]:
    """All trials of a batch in trial order, regardless of completion order."""
    get_algorithm(config.algorithm)
    if config.workers == 1:
        return [run_trial(config, t) for t in range(config.trials)]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda t: run_trial(config, t), range(config.trials)))


def _reference_for(config: BatchConfig) -> Optional[ReferenceBounds]:
    inst, params = config.instance, config.params
    eps = params.eps if not inst.is_linear else None
    if eps is None and inst.intrinsic_dim is None:
        return None
    try:
        return reference_bounds(
            inst,
            params.delta,
            T=params.T,
            eps=eps,
            zeta=params.zeta,
            n=params.n,
            formula=params.r_d_formula,  # type: ignore[arg-type]
            settings=config.solver_settings,
        )
    except GemsError as e:
        logger.warning(f"Reference bounds unavailable for {inst.name}: {e}")
        return None


def summarize(
    config: BatchConfig,
    outcomes: List[TrialOutcome],
    reference: Optional[ReferenceBounds] = None,
) -> BatchReport:
    errors = sum(1 for o in outcomes if not o.success)
    samples = np.array(
        [o.samples_used for o in outcomes if o.samples_used is not None], dtype=np.float64
    )
    if samples.size:
        samples_mean = float(samples.mean())
        quantiles = {f"q{int(q * 100)}": float(np.quantile(samples, q)) for q in QUANTILES}
    else:
        samples_mean = math.nan
        quantiles = {f"q{int(q * 100)}": math.nan for q in QUANTILES}

    anytime = [o.record for o in outcomes if o.record is not None and o.record.emissions]
    first_correct = [r.first_correct_at for r in anytime if r.first_correct_at is not None]
    return BatchReport(
        algorithm=config.algorithm,
        instance=config.instance.name,
        noise=str(config.noise),
        trials=len(outcomes),
        seed=config.seed,
        errors=errors,
        error_rate=errors / len(outcomes),
        error_ci=wilson_interval(errors, len(outcomes)),
        samples_mean=samples_mean,
        samples_quantiles=quantiles,
        first_correct_mean=float(np.mean(first_correct)) if first_correct else None,
        first_correct_missing=len(anytime) - len(first_correct),
        failures=[{"trial": o.trial, "error": o.failure} for o in outcomes if o.failure],
        reference=reference,
    )


def write_trace(outcomes: List[TrialOutcome], path: Path) -> None:
    """One JSON object per line: trial index plus the trace event fields."""
    with open(path, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            if outcome.record is None:
                continue
            for event in outcome.record.trace:
                line = {"trial": outcome.trial, **event.to_dict()}
                fh.write(json.dumps(line, sort_keys=True) + "\n")


def run_batch(config: BatchConfig, trace_path: Optional[Path] = None) -> BatchReport:
    """Run every trial, aggregate deterministically and optionally write the JSON-lines trace."""
    logger.info(
        f"Running {config.trials} trials of {config.algorithm} on {config.instance.name} "
        f"(seed={config.seed}, noise={config.noise}, workers={config.workers})"
    )
    outcomes = run_trials(config)
    reference = _reference_for(config) if config.with_reference else None
    report = summarize(config, outcomes, reference)
    if trace_path is not None:
        write_trace(outcomes, trace_path)
        logger.info(f"Trace written to {trace_path}")
    logger.info(
        f"{config.algorithm}: error_rate={report.error_rate:.4f} "
        f"CI=[{report.error_ci[0]:.4f}, {report.error_ci[1]:.4f}], "
        f"mean samples={report.samples_mean:.1f}"
    )
    return report
