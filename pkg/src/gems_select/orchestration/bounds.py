# gems_select/orchestration/bounds.py
"""Reference values from the lower bounds and the error/sample-count guarantees.

Everything is evaluated at the oracle complexity rho*_{d*} (or rho*_{d*(eps)}(eps) when an eps is
given), so these are simulation-side numbers for comparing against Monte Carlo estimates.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

from gems_select.config.defaults import DEFAULT_ZETA
from gems_select.core.models import Instance
from gems_select.orchestration.exceptions import MissingIntrinsicDimError
from gems_select.services.design.complexity import (
    fixed_confidence_lower_bound,
    noninteractive_lower_bound,
)
from gems_select.services.design.rounding import RdFormula, r_d
from gems_select.services.design.solver import SolverSettings, compute_rho
from gems_select.services.misspec.profile import compute_d_star

logger = logging.getLogger(__name__)

SUBROUTINE_CONSTANT = 640.0
SUBROUTINE_CONSTANT_MISSPEC = 2560.0
SAMPLE_COUNT_CONSTANT = 32.0


def default_rounds(scale: float) -> int:
    """ceil(log2(2 / scale)): rounds after which survivors are within ``scale`` of the best."""
    if not math.isfinite(scale) or scale >= 2.0:
        return 1
    return max(1, math.ceil(math.log2(2.0 / scale)))


def subroutine_error_bound(T: float, n: int, n_targets: int, rho: float, constant: float) -> float:
    """n |Z|^2 exp(-T / (constant n rho)), capped at 1."""
    if rho == 0.0:
        return 0.0
    return min(1.0, n * n_targets**2 * math.exp(-T / (constant * n * rho)))


def master_budget_error_bound(
    T: float, scale: float, n_targets: int, rho: float, constant: float
) -> float:
    """Selection term plus validation term of the fixed-budget master, capped at 1.

    ``scale`` is Delta_min for exact identification and eps for the misspecified variant.
    """
    if T <= 2.0:
        return 1.0
    levels = math.log2(4.0 / scale)
    selection = 0.0
    if rho > 0.0:
        selection = levels * n_targets**2 * math.exp(-T / (constant * levels * rho))
    log_t_sq = math.log2(T) ** 2
    validation = 2.0 * log_t_sq * math.exp(-T * scale**2 / (8.0 * log_t_sq))
    return min(1.0, selection + validation)


def anytime_sample_bound(
    scale: float,
    rho: float,
    r_star: float,
    n_targets: int,
    delta: float,
    eps: Optional[float] = None,
    constant: float = SAMPLE_COUNT_CONSTANT,
) -> float:
    """C log2(1/scale) max{rho, r_d*} log(|Z|^2 / delta), plus 1/eps^2 with validation.

    The log2 factor is floored at 1 so instances with scale >= 1/2 get a positive bound.
    """
    levels = max(1.0, math.log2(1.0 / scale))
    bound = constant * levels * max(rho, r_star) * math.log(max(n_targets, 2) ** 2 / delta)
    if eps is not None:
        bound += 1.0 / eps**2
    return bound


@dataclass(frozen=True)
class ReferenceBounds:
    d_star: int
    rho: float
    delta: float
    zeta: float
    eps: Optional[float]
    T: Optional[float]
    n: int
    lb_fixed_conf: float
    lb_noninteractive: float
    sample_bound: float
    subroutine_error: Optional[float] = None
    master_budget_error: Optional[float] = None

    @property
    def misspecified(self) -> bool:
        return self.eps is not None

    def to_dict(self) -> dict:
        return asdict(self)


def reference_bounds(
    inst: Instance,
    delta: float,
    T: Optional[float] = None,
    eps: Optional[float] = None,
    zeta: float = DEFAULT_ZETA,
    n: Optional[int] = None,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> ReferenceBounds:
    """Evaluate the lower bounds and guarantees at the instance's computed complexity.

    Without ``eps`` the instance must carry its intrinsic dimension. With ``eps`` the dimension
    is d*(eps) and the misspecified constants apply.

    Raises:
        MissingIntrinsicDimError: If ``eps`` is None and the instance has no intrinsic_dim.
    """
    if eps is None:
        if inst.intrinsic_dim is None:
            raise MissingIntrinsicDimError(
                f"Instance {inst.name!r} has no intrinsic_dim; reference bounds need d*"
            )
        d_star = inst.intrinsic_dim
        rho = compute_rho(inst, d_star, 0.0, settings)
        scale = inst.delta_min
        constant = SUBROUTINE_CONSTANT
    else:
        d_star = compute_d_star(inst, eps, zeta, settings)
        rho = compute_rho(inst, d_star, eps, settings)
        scale = eps
        constant = SUBROUTINE_CONSTANT_MISSPEC

    rounds = n if n is not None else default_rounds(scale)
    subroutine_error = master_error = None
    if T is not None:
        subroutine_error = subroutine_error_bound(T, rounds, inst.n_targets, rho, constant)
        master_error = master_budget_error_bound(T, scale, inst.n_targets, rho, constant)

    bounds = ReferenceBounds(
        d_star=d_star,
        rho=rho,
        delta=delta,
        zeta=zeta,
        eps=eps,
        T=T,
        n=rounds,
        lb_fixed_conf=fixed_confidence_lower_bound(rho, delta),
        lb_noninteractive=noninteractive_lower_bound(rho, delta),
        sample_bound=anytime_sample_bound(
            scale, rho, r_d(d_star, zeta, formula), inst.n_targets, delta, eps
        ),
        subroutine_error=subroutine_error,
        master_budget_error=master_error,
    )
    logger.debug(f"Reference bounds for {inst.name}: {bounds}")
    return bounds
