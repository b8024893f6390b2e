# gems_select/utils/run_cli.py
import functools
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click

from gems_select.config.settings import DEBUG
from gems_select.core.exceptions import ConfigError, GemsError
from gems_select.core.instance import directions, optimal_directions
from gems_select.orchestration.harness import BatchConfig, BatchReport, run_batch
from gems_select.orchestration.validation import SUITES, SuiteOptions, run_suite
from gems_select.services.design.complexity import ComplexityReport, complexity_report
from gems_select.services.design.solver import rho_design, solve_design
from gems_select.services.misspec.profile import MisspecProfile, misspec_profile
from gems_select.storage.run_store import RunStore
from gems_select.utils.experiment import (
    ExperimentConfig,
    instance_spec,
    load_config,
    parse_instance_params,
)
from gems_select.utils.output import (
    FORMATS,
    dumps,
    error_object,
    get_version,
    provenance_header,
    write_report,
)

logger = logging.getLogger(__name__)

RUN_COLUMNS = (
    "algorithm",
    "instance",
    "noise",
    "trials",
    "seed",
    "errors",
    "error_rate",
    "error_ci_low",
    "error_ci_high",
    "samples_mean",
    "q10",
    "q50",
    "q90",
    "first_correct_mean",
    "first_correct_missing",
)
REFERENCE_COLUMNS = (
    "d_star",
    "rho",
    "lb_fixed_conf",
    "lb_noninteractive",
    "sample_bound",
    "subroutine_error",
    "master_budget_error",
)


def handle_errors(func: Callable) -> Callable:
    """Turn package errors into a JSON error object on stderr and exit code 1."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (GemsError, ValueError) as e:
            if DEBUG:
                logger.exception(f"{func.__name__} failed")
            else:
                logger.error(f"{func.__name__} failed: {e}")
            click.echo(dumps(error_object(e)), err=True)
            click.get_current_context().exit(1)

    return wrapper


def common_options(func: Callable) -> Callable:
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="JSON experiment config; flags override its values",
        ),
        click.option("--instance", help="Instance generator name (hard, unverifiable, ...)"),
        click.option(
            "--instance-param",
            multiple=True,
            help="Generator parameter as key=value (repeatable)",
        ),
        click.option(
            "--instance-file",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="JSON file with an inline instance",
        ),
        click.option("--seed", type=int, help="Master seed"),
        click.option("--zeta", type=float, help="Rounding approximation factor"),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory"),
        click.option(
            "--format",
            "fmt",
            type=click.Choice(FORMATS),
            default="both",
            show_default=True,
            help="Report format",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_config(
    config_path: Optional[Path],
    instance: Optional[str],
    instance_param: Tuple[str, ...],
    instance_file: Optional[Path],
    **overrides: Any,
) -> ExperimentConfig:
    config = load_config(config_path)
    spec = instance_spec(instance, parse_instance_params(instance_param), instance_file)
    if spec is not None:
        overrides["instance"] = spec
    return config.merged(overrides)


def _store(config: ExperimentConfig, kind: str, header: Dict[str, Any], body: Dict[str, Any]):
    store = RunStore(Path(config.out).resolve())
    try:
        store.save_report(kind, config.config_hash, body, header)
    finally:
        store.close()


def _echo_paths(paths: List[Path]) -> None:
    for path in paths:
        click.echo(str(path))


@click.group()
@click.version_option(version=get_version(), prog_name="gems-select")
def cli():
    """Model selection for pure-exploration linear bandits: complexities, designs, simulations."""
    pass


@cli.command()
@common_options
@click.option("--eps", type=float, help="Relaxation eps for rho*_d(eps) and rho~*_d(eps)")
@click.option("--delta", type=float, help="Confidence for the lower-bound columns")
@handle_errors
def complexity(config_path, instance, instance_param, instance_file, fmt, **overrides):
    """Complexity measures iota*_d, rho*_d and their eps variants for d = 1..D."""
    config = build_config(config_path, instance, instance_param, instance_file, **overrides)
    inst = config.build_instance()
    report = complexity_report(inst, eps=config.eps or 0.0, delta=config.delta, zeta=config.zeta)
    header = provenance_header(config.config_hash, config.seed, "complexity")
    body = report.to_dict()
    rows = [r.to_dict() for r in report.rows]
    paths = write_report(
        Path(config.out), "complexity", fmt, header, body, ComplexityReport.COLUMNS, rows
    )
    _store(config, "complexity", header, body)
    _echo_paths(paths)


@cli.command()
@common_options
@click.option("--dim", "d", type=int, required=True, help="Truncation dimension d")
@click.option(
    "--family",
    type=click.Choice(["all", "optimal", "rho"]),
    default="all",
    show_default=True,
    help="all pairwise directions, z* - z directions, or gap-scaled z* - z",
)
@click.option("--eps", type=float, help="eps for the gap-scaled family")
@handle_errors
def design(config_path, instance, instance_param, instance_file, fmt, d, family, **overrides):
    """Solve the min-max design at dimension d and print it."""
    config = build_config(config_path, instance, instance_param, instance_file, **overrides)
    inst = config.build_instance()
    view = inst.view(d)
    if family == "all":
        solution = solve_design(directions(inst.targets, d), view)
    elif family == "optimal":
        solution = solve_design(optimal_directions(inst, d), view)
    else:
        solution = rho_design(inst, d, config.eps or 0.0)

    header = provenance_header(config.config_hash, config.seed, "design")
    body = {"d": d, "family": family, **solution.to_dict()}
    rows = [{"arm": i, "weight": w} for i, w in enumerate(solution.design.weights)]
    paths = write_report(Path(config.out), "design", fmt, header, body, ("arm", "weight"), rows)
    click.echo(dumps(body))
    _echo_paths(paths)


@cli.command()
@common_options
@click.option("--eps-grid", type=float, multiple=True, help="eps values for d*(eps)")
@handle_errors
def misspec(config_path, instance, instance_param, instance_file, fmt, eps_grid, **overrides):
    """Misspecification profile: gamma_tilde(d), gamma(d), its upper bound and d*(eps)."""
    config = build_config(config_path, instance, instance_param, instance_file, **overrides)
    inst = config.build_instance()
    profile = misspec_profile(inst, zeta=config.zeta, eps_grid=eps_grid)
    header = provenance_header(config.config_hash, config.seed, "misspec")
    body = profile.to_dict()
    rows = [r.to_dict() for r in profile.rows]
    paths = write_report(
        Path(config.out), "misspec", fmt, header, body, MisspecProfile.COLUMNS, rows
    )
    _store(config, "misspec", header, body)
    _echo_paths(paths)


def _report_row(report: BatchReport) -> Dict[str, Any]:
    data = report.to_dict()
    row = {k: data[k] for k in RUN_COLUMNS if k in data}
    row.update(data["samples_quantiles"])
    if report.reference is not None:
        reference = report.reference.to_dict()
        row.update({f"ref_{k}": reference[k] for k in REFERENCE_COLUMNS})
    return row


@cli.command()
@common_options
@click.option("--algo", "algorithm", help="Algorithm name")
@click.option("--trials", type=int, help="Number of Monte Carlo trials")
@click.option("--workers", type=int, help="Concurrent trials")
@click.option("--noise", help="gaussian_unit, none or bounded:<b>")
@click.option("--trace", is_flag=True, default=None, help="Write per-trial trace JSON lines")
@click.option("--eps", type=float, help="Target accuracy for misspecified algorithms")
@click.option("--delta", type=float, help="Confidence parameter")
@click.option("--budget", type=float, help="Sample budget T")
@click.option("--rounds", type=int, help="Elimination rounds n for the subroutines")
@click.option("--selection-budget", type=float, help="Dimension-selection budget B")
@click.option("--pulls", type=int, help="Total pulls N for oracle_static")
@click.option("--dim", type=int, help="Truncation d for oracle_static")
@click.option("--max-ell", type=int, help="Outer iterations for the anytime masters")
@click.option("--dedup-candidates", is_flag=True, default=None, help="Deduplicate candidates")
@click.option("--r-d-formula", type=click.Choice(["pukelsheim", "allen"]), help="r_d formula")
@handle_errors
def run(
    config_path,
    instance,
    instance_param,
    instance_file,
    fmt,
    budget,
    rounds,
    selection_budget,
    pulls,
    dim,
    max_ell,
    **overrides,
):
    """Run a seeded Monte Carlo batch of one algorithm."""
    overrides["params"] = {
        "T": budget,
        "n": rounds,
        "B": selection_budget,
        "N": pulls,
        "d": dim,
        "max_ell": max_ell,
    }
    config = build_config(config_path, instance, instance_param, instance_file, **overrides)
    if not config.algorithm:
        raise ConfigError("No algorithm given; use --algo or the config")
    inst = config.build_instance()
    batch = BatchConfig(
        instance=inst,
        algorithm=config.algorithm,
        params=config.algorithm_params(),
        trials=config.trials,
        seed=config.seed,
        noise=config.noise_spec,
        workers=config.workers,
    )
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.jsonl" if config.trace else None
    report = run_batch(batch, trace_path)

    header = provenance_header(config.config_hash, config.seed, "run")
    body = {"config": config.to_dict(), "report": report.to_dict()}
    body["config"].pop("out")
    row = _report_row(report)
    columns = list(RUN_COLUMNS)
    if report.reference is not None:
        columns += [f"ref_{k}" for k in REFERENCE_COLUMNS]
    paths = write_report(out_dir, "report", fmt, header, body, columns, [row])
    _store(config, "run", header, body)
    _echo_paths(paths + ([trace_path] if trace_path else []))


@cli.command()
@click.argument("suite", type=click.Choice(list(SUITES)))
@click.option("--seed", type=int, default=0, show_default=True, help="Corpus seed")
@click.option("--trials", type=int, default=200, show_default=True, help="Monte Carlo trials")
@click.option("--zeta", type=float, default=0.25, show_default=True, help="Rounding factor")
@click.option("--corpus-size", type=int, default=20, show_default=True, help="Corpus size")
@click.option("--workers", type=int, default=1, show_default=True, help="Concurrent trials")
@handle_errors
def validate(suite, seed, trials, zeta, corpus_size, workers):
    """Run a property suite; exit 1 and report violations on stderr when any check fails."""
    options = SuiteOptions(
        seed=seed, trials=trials, zeta=zeta, corpus_size=corpus_size, workers=workers
    )
    result = run_suite(suite, options)
    click.echo(dumps(result.to_dict()))
    if not result.passed:
        click.echo(dumps({"suite": suite, "violations": result.violations}), err=True)
        click.get_current_context().exit(1)


def main():
    """Main entry point."""
    return cli()
