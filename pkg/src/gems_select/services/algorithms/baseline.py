# gems_select/services/algorithms/baseline.py
import logging
from typing import Optional

import numpy as np

from gems_select.core.instance import optimal_directions
from gems_select.core.models import Allocation, Instance
from gems_select.services.algorithms.estimation import collect_observations, least_squares
from gems_select.services.algorithms.models import SamplingContext
from gems_select.services.design.rounding import RdFormula, round_design
from gems_select.services.design.solver import SolverSettings, rho_design

logger = logging.getLogger(__name__)


def least_squares_recommend(
    ctx: SamplingContext, inst: Instance, allocation: Allocation, d: int
) -> int:
    """Pull ``allocation``, fit theta in R^d and recommend argmax_z <theta, psi_d(z)>.

    Ties go to the lowest target index.
    """
    A, b = collect_observations(ctx, inst, allocation, d)
    theta = least_squares(A, b)
    scores = inst.targets[:, :d] @ theta
    return int(np.argmax(scores))


def oracle_static(
    ctx: SamplingContext,
    inst: Instance,
    N: int,
    d: int,
    zeta: float,
    formula: RdFormula = "pukelsheim",
    settings: Optional[SolverSettings] = None,
) -> int:
    """Non-interactive baseline: round the rho*_d design (built from the true gaps) to N pulls."""
    solution = rho_design(inst, d, 0.0, settings)
    others = [j for j in range(inst.n_targets) if j != inst.z_star]
    dirs = optimal_directions(inst, d)
    if dirs.shape[0]:
        dirs = dirs / inst.gaps[others][:, None]
    allocation = round_design(solution.design, N, inst.view(d), dirs, zeta, formula)
    ctx.last_dim = d
    ctx.record(
        "iteration", subroutine="oracle_static", k=1, d_k=d, N_k=N, active_size=inst.n_targets
    )
    return least_squares_recommend(ctx, inst, allocation, d)
