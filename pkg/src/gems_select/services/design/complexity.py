# gems_select/services/design/complexity.py
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from gems_select.config.defaults import DEFAULT_DELTA, DEFAULT_ZETA
from gems_select.core.exceptions import InstanceError
from gems_select.core.instance import optimal_directions
from gems_select.core.models import Instance
from gems_select.services.design.solver import (
    SolverSettings,
    compute_iota_star,
    compute_rho,
    solve_design,
)
from gems_select.services.misspec.fit import chebyshev_fit

logger = logging.getLogger(__name__)


def fixed_confidence_lower_bound(rho: float, delta: float) -> float:
    """rho * log(1 / (2.4 delta)): expected samples of any delta-PAC algorithm."""
    return rho * math.log(1.0 / (2.4 * delta))


def noninteractive_lower_bound(rho: float, delta: float) -> float:
    """rho / 2 * log(1 / delta): below this many samples a static design errs w.p. >= delta."""
    return 0.5 * rho * math.log(1.0 / delta)


def compute_rho_tilde(
    inst: Instance,
    d: int,
    eps: float,
    theta_d: Optional[np.ndarray] = None,
    settings: Optional[SolverSettings] = None,
) -> float:
    """rho*_d(eps) with gaps replaced by <theta_d, psi_d(z*) - psi_d(z)> from the best linear fit.

    Returns +inf when some surrogate denominator max(gap, eps) is not positive.
    """
    if eps < 0:
        raise InstanceError(f"eps must be >= 0, got {eps}")
    if theta_d is None:
        theta_d, _ = chebyshev_fit(inst, d)
    Y = optimal_directions(inst, d)
    if Y.shape[0] == 0:
        return 0.0
    denominators = np.maximum(Y @ np.asarray(theta_d, dtype=np.float64), eps)
    if np.any(denominators <= 0):
        logger.warning(
            f"Surrogate gaps at d={d} are not positive for eps={eps}; rho_tilde is infinite"
        )
        return math.inf
    return solve_design(Y / denominators[:, None], inst.view(d), settings=settings).value


@dataclass(frozen=True)
class ComplexityRow:
    d: int
    iota_star: float
    rho_star: float
    rho_star_eps: float
    rho_tilde_eps: float
    lb_fixed_conf: Optional[float] = None
    lb_noninteractive: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ComplexityReport:
    """Complexity measures across truncation levels d = 1..D"""

    instance: str
    eps: float
    delta: float
    zeta: float
    intrinsic_dim: Optional[int]
    rows: List[ComplexityRow] = field(default_factory=list)

    COLUMNS = (
        "d",
        "iota_star",
        "rho_star",
        "rho_star_eps",
        "rho_tilde_eps",
        "lb_fixed_conf",
        "lb_noninteractive",
    )

    def row(self, d: int) -> ComplexityRow:
        return self.rows[d - 1]

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "eps": self.eps,
            "delta": self.delta,
            "zeta": self.zeta,
            "intrinsic_dim": self.intrinsic_dim,
            "rows": [r.to_dict() for r in self.rows],
        }


def complexity_report(
    inst: Instance,
    eps: float = 0.0,
    delta: float = DEFAULT_DELTA,
    zeta: float = DEFAULT_ZETA,
    settings: Optional[SolverSettings] = None,
) -> ComplexityReport:
    """Compute iota*_d, rho*_d, rho*_d(eps) and rho~*_d(eps) for every d.

    Lower-bound columns are filled only when the instance carries its intrinsic dimension.
    """
    lb_fc = lb_ni = None
    if inst.intrinsic_dim is not None:
        rho_d_star = compute_rho(inst, inst.intrinsic_dim, 0.0, settings)
        lb_fc = fixed_confidence_lower_bound(rho_d_star, delta)
        lb_ni = noninteractive_lower_bound(rho_d_star, delta)

    rows = []
    for d in range(1, inst.ambient_dim + 1):
        rows.append(
            ComplexityRow(
                d=d,
                iota_star=compute_iota_star(inst, d, settings),
                rho_star=compute_rho(inst, d, 0.0, settings),
                rho_star_eps=compute_rho(inst, d, eps, settings),
                rho_tilde_eps=compute_rho_tilde(inst, d, eps, settings=settings),
                lb_fixed_conf=lb_fc,
                lb_noninteractive=lb_ni,
            )
        )
        logger.info(f"{inst.name} d={d}: rho*={rows[-1].rho_star:.6g}")
    return ComplexityReport(
        instance=inst.name,
        eps=eps,
        delta=delta,
        zeta=zeta,
        intrinsic_dim=inst.intrinsic_dim,
        rows=rows,
    )
