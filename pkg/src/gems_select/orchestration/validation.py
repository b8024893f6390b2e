# gems_select/orchestration/validation.py
"""Named property suites replayed numerically on generated corpora."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from gems_select.config.defaults import (
    CHEBYSHEV_RESIDUAL_TOL,
    DEFAULT_DELTA,
    DEFAULT_SEED,
    DEFAULT_ZETA,
)
from gems_select.core.exceptions import ConfigError
from gems_select.core.generators import (
    make_hard_instance,
    make_linear_instance,
    make_misspecified_instance,
    make_random_linear_instance,
    make_random_misspecified_instance,
)
from gems_select.core.instance import directions, optimal_directions, stratum
from gems_select.core.models import Design, Instance
from gems_select.orchestration.bounds import (
    anytime_sample_bound,
    default_rounds,
    reference_bounds,
)
from gems_select.orchestration.environment import NoiseSpec
from gems_select.orchestration.harness import BatchConfig, run_batch, run_trials
from gems_select.services.algorithms.models import AlgorithmParams
from gems_select.services.design.complexity import compute_rho_tilde
from gems_select.services.design.exceptions import RoundingError
from gems_select.services.design.rounding import r_d, round_design
from gems_select.services.design.solver import (
    SolverSettings,
    compute_iota,
    compute_iota_star,
    compute_rho,
    grid_search_design,
    solve_design,
    strict_norms,
)
from gems_select.services.misspec.fit import chebyshev_fit, residuals
from gems_select.services.misspec.profile import (
    check_round_number,
    compute_d_star,
    compute_gamma,
    gamma_upper_bound,
)

logger = logging.getLogger(__name__)

ORACLE_REL_TOL = 0.03
MONOTONE_SLACK = 0.05
# solver values are within (1 + 1e-2) of the infimum on either side of a comparison
SOLVER_SLACK = 1.02
MC_MARGIN = 0.05


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def check(self, ok: bool, **details: Any) -> None:
        self.checks += 1
        if not ok:
            self.violations.append(details)
            logger.warning(f"[{self.name}] violation: {details}")

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "violations": list(self.violations),
        }


@dataclass(frozen=True)
class SuiteOptions:
    seed: int = DEFAULT_SEED
    trials: int = 200
    zeta: float = DEFAULT_ZETA
    delta: float = DEFAULT_DELTA
    corpus_size: int = 20
    workers: int = 1
    settings: Optional[SolverSettings] = None


def _linear_corpus(rng: np.random.Generator, size: int, max_arms: int, max_dim: int):
    for _ in range(size):
        D = int(rng.integers(1, max_dim + 1))
        n_arms = int(rng.integers(max(D, 2), max_arms + 1))
        d_star = int(rng.integers(1, D + 1))
        yield make_random_linear_instance(rng, n_arms, D, d_star)


def design_oracle_suite(opts: SuiteOptions) -> SuiteResult:
    """Frank-Wolfe against the simplex grid, the 4d cap on iota, and the hard-instance gaps."""
    result = SuiteResult("design-oracle")
    rng = np.random.default_rng(opts.seed)
    for i, inst in enumerate(_linear_corpus(rng, opts.corpus_size, max_arms=4, max_dim=3)):
        d = int(rng.integers(1, inst.ambient_dim + 1))
        Y = directions(inst.targets, d)
        solved = solve_design(Y, inst.view(d), settings=opts.settings).value
        grid = grid_search_design(Y, inst.view(d)).value
        if grid == 0.0:
            result.check(solved == 0.0, case=i, d=d, solved=solved, grid=grid)
            continue
        rel = abs(solved - grid) / grid
        result.check(rel <= ORACLE_REL_TOL, case=i, d=d, solved=solved, grid=grid)
        iota = compute_iota(range(inst.n_targets), d, inst, opts.settings)
        result.check(iota <= 4 * d * SOLVER_SLACK, case=i, d=d, iota=iota, cap=4 * d)

    hard = make_hard_instance(3, 0.1)
    rho_3 = compute_rho(hard, 3, 0.0, opts.settings)
    rho_4 = compute_rho(hard, 4, 0.0, opts.settings)
    result.check(rho_3 <= 6.0 * (1 + ORACLE_REL_TOL), case="hard", d=3, rho=rho_3)
    result.check(rho_4 >= 25.0 * (1 - ORACLE_REL_TOL), case="hard", d=4, rho=rho_4)
    for d_star in (3, 11):
        hard = make_hard_instance(d_star, 0.1)
        low = compute_iota_star(hard, d_star, opts.settings)
        high = compute_iota_star(hard, d_star + 1, opts.settings)
        result.check(high <= 2.0 * low * SOLVER_SLACK, case=f"hard-{d_star}", low=low, high=high)
    return result


def monotonicity_suite(opts: SuiteOptions) -> SuiteResult:
    """rho*_d non-decreasing above d*, the stratified iota bound and the norm lower bound."""
    result = SuiteResult("monotonicity")
    rng = np.random.default_rng(opts.seed)
    for i, inst in enumerate(_linear_corpus(rng, opts.corpus_size, max_arms=6, max_dim=4)):
        d_star = inst.intrinsic_dim or 1
        rhos = {
            d: compute_rho(inst, d, 0.0, opts.settings)
            for d in range(d_star, inst.ambient_dim + 1)
        }
        for d1 in rhos:
            for d2 in rhos:
                if d1 <= d2:
                    ok = rhos[d1] <= rhos[d2] * (1 + MONOTONE_SLACK)
                    result.check(ok, case=i, d1=d1, d2=d2, rho1=rhos[d1], rho2=rhos[d2])

        rounds = math.ceil(math.log2(4.0 / inst.delta_min))
        for d, rho in rhos.items():
            worst = max(
                4.0**k * compute_iota(stratum(inst, k), d, inst, opts.settings)
                for k in range(1, rounds + 1)
            )
            result.check(worst <= 64.0 * rho * SOLVER_SLACK, case=i, d=d, stratified=worst, rho=rho)

        c1 = float(np.max(np.sum(inst.arms[:, :d_star] ** 2, axis=1)))
        c2 = float(np.min(np.sum(optimal_directions(inst, d_star) ** 2, axis=1)))
        floor = c2 / (c1 * inst.delta_min**2)
        rho_star = rhos[d_star]
        result.check(floor <= rho_star * SOLVER_SLACK, case=i, norm_floor=floor, rho=rho_star)
    return result


def rounding_suite(opts: SuiteOptions) -> SuiteResult:
    """Random designs on random 5-arm, d = 3 instances rounded to ceil(r_3) pulls."""
    result = SuiteResult("rounding")
    rng = np.random.default_rng(opts.seed)
    d = 3
    N = math.ceil(r_d(d, opts.zeta))
    for i in range(opts.corpus_size * 5):
        inst = make_random_linear_instance(rng, 5, d, d)
        view = inst.view(d)
        Y = directions(inst.targets, d)
        design = Design(rng.dirichlet(np.ones(inst.n_arms)))
        try:
            allocation = round_design(design, N, view, Y, opts.zeta)
        except RoundingError as e:
            result.check(False, case=i, error=str(e))
            continue
        continuous = float(np.max(strict_norms(Y, view.gram(design.weights))))
        counts = np.asarray(allocation.counts, dtype=np.float64)
        achieved = float(np.max(strict_norms(Y, view.gram(counts))))
        bound = (1 + opts.zeta) * continuous / N
        result.check(
            allocation.total == N and achieved <= bound * (1 + 1e-9),
            case=i,
            total=allocation.total,
            achieved=achieved,
            bound=bound,
        )
    return result


def misspec_props_suite(opts: SuiteOptions) -> SuiteResult:
    """Fit monotonicity, residual level, the gamma bound, rho vs rho_tilde and the round number."""
    result = SuiteResult("misspec-props")
    rng = np.random.default_rng(opts.seed)
    for i in range(max(1, opts.corpus_size // 2)):
        inst = make_random_misspecified_instance(rng, 4, 3)
        previous = math.inf
        for d in range(1, inst.ambient_dim + 1):
            theta_d, gamma_tilde = chebyshev_fit(inst, d)
            result.check(gamma_tilde <= previous + 1e-9, case=i, d=d, gamma_tilde=gamma_tilde)
            previous = gamma_tilde
            worst = float(np.max(np.abs(residuals(inst, d, theta_d))))
            result.check(
                abs(worst - gamma_tilde) <= CHEBYSHEV_RESIDUAL_TOL, case=i, d=d, residual=worst
            )

            gamma = compute_gamma(
                inst, d, opts.zeta, gamma_tilde=gamma_tilde, settings=opts.settings
            )
            bound = gamma_upper_bound(gamma_tilde, d, opts.zeta)
            # gamma bottoms out at 2 * 2^-n_max when gamma_tilde is zero
            result.check(gamma <= bound + 2.0**-58, case=i, d=d, gamma=gamma, bound=bound)

            eps = gamma_tilde + 0.05
            rho = compute_rho(inst, d, eps, opts.settings)
            rho_tilde = compute_rho_tilde(inst, d, eps, theta_d, opts.settings)
            result.check(
                rho <= 9.0 * rho_tilde * SOLVER_SLACK, case=i, d=d, rho=rho, rho_tilde=rho_tilde
            )
            for round_eps in (0.1, 0.25, 0.5):
                ok = check_round_number(inst, d, round_eps, opts.zeta, opts.settings)
                result.check(ok, case=i, d=d, eps=round_eps, round_number=ok)
    return result


def _pac_linear_instance() -> Instance:
    # z* = e2, Delta_min = 0.5, d* = 2
    return make_linear_instance(np.eye(3), [0.5, 1.0, 0.0], name="pac-basis")


def _pac_two_arm_instance() -> Instance:
    return make_linear_instance(np.eye(2), [0.5, 1.0], name="pac-two-arm")


def _pac_misspecified_instance() -> Instance:
    arms = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
    return make_misspecified_instance(arms, [-0.3, 0.72, 1.0], name="pac-misspecified")


def pac_montecarlo_suite(opts: SuiteOptions) -> SuiteResult:
    """Monte Carlo error rates and sample counts against the guarantees."""
    result = SuiteResult("pac-montecarlo")
    noise = NoiseSpec()

    def batch(inst: Instance, algorithm: str, params: AlgorithmParams) -> BatchConfig:
        return BatchConfig(
            instance=inst,
            algorithm=algorithm,
            params=params,
            trials=opts.trials,
            seed=opts.seed,
            noise=noise,
            workers=opts.workers,
            solver_settings=opts.settings,
        )

    for inst in (_pac_linear_instance(), _pac_two_arm_instance()):
        d_star = inst.intrinsic_dim or inst.ambient_dim
        rho = compute_rho(inst, d_star, 0.0, opts.settings)
        r_star = r_d(d_star, opts.zeta)
        n = default_rounds(inst.delta_min)

        # fixed-confidence subroutine with a well-chosen budget
        params = AlgorithmParams(delta=opts.delta, zeta=opts.zeta, n=n, B=max(64 * rho, r_star))
        report = run_batch(batch(inst, "gems_c", params))
        error = report.error_rate
        result.check(error <= opts.delta + MC_MARGIN, case=inst.name, algo="gems_c", error=error)

        # anytime master: first correct emission within the sample-count shape
        params = AlgorithmParams(delta=opts.delta, zeta=opts.zeta, max_ell=10)
        outcomes = run_trials(batch(inst, "master_fc", params))
        bound = anytime_sample_bound(inst.delta_min, rho, r_star, inst.n_targets, opts.delta)
        within = sum(
            1
            for o in outcomes
            if o.record is not None
            and o.record.first_correct_at is not None
            and o.record.first_correct_at <= bound
        )
        result.check(
            within >= 0.95 * len(outcomes),
            case=inst.name,
            algo="master_fc",
            within=within,
            bound=bound,
        )

        # fixed budget: error below the guarantee and non-increasing in T
        for algo in ("gems_b", "master_fb"):
            previous = None
            for T in (2.0**10, 2.0**12):
                params = AlgorithmParams(zeta=opts.zeta, n=n, B=96 * rho, T=T)
                report = run_batch(batch(inst, algo, params))
                ref = reference_bounds(
                    inst, opts.delta, T=T, zeta=opts.zeta, n=n, settings=opts.settings
                )
                guarantee = ref.subroutine_error if algo == "gems_b" else ref.master_budget_error
                result.check(
                    report.error_rate <= (guarantee or 1.0) + MC_MARGIN,
                    case=inst.name,
                    algo=algo,
                    T=T,
                    error=report.error_rate,
                    guarantee=guarantee,
                )
                if previous is not None:
                    result.check(
                        report.error_ci[0] <= previous.error_ci[1],
                        case=inst.name,
                        algo=algo,
                        T=T,
                        error=report.error_rate,
                        previous=previous.error_rate,
                    )
                previous = report

    # misspecified subroutine returns an eps-optimal arm
    inst = _pac_misspecified_instance()
    eps = 0.1
    d_eps = compute_d_star(inst, eps, opts.zeta, opts.settings)
    rho = compute_rho(inst, d_eps, eps, opts.settings)
    params = AlgorithmParams(
        delta=opts.delta,
        zeta=opts.zeta,
        eps=eps,
        n=default_rounds(eps),
        B=max(64 * rho, r_d(d_eps, opts.zeta)),
    )
    report = run_batch(batch(inst, "gems_m", params))
    error = report.error_rate
    result.check(error <= opts.delta + MC_MARGIN, case=inst.name, algo="gems_m", error=error)
    return result


SUITES: Dict[str, Callable[[SuiteOptions], SuiteResult]] = {
    "design-oracle": design_oracle_suite,
    "monotonicity": monotonicity_suite,
    "rounding": rounding_suite,
    "misspec-props": misspec_props_suite,
    "pac-montecarlo": pac_montecarlo_suite,
}


def run_suite(name: str, opts: Optional[SuiteOptions] = None) -> SuiteResult:
    if name not in SUITES:
        raise ConfigError(f"Unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    opts = opts or SuiteOptions()
    logger.info(f"Running suite {name} (seed={opts.seed})")
    result = SUITES[name](opts)
    logger.info(f"Suite {name}: {result.checks} checks, {len(result.violations)} violations")
    return result
