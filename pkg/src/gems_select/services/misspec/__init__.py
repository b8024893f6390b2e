from gems_select.services.misspec.fit import chebyshev_fit, residuals
from gems_select.services.misspec.profile import (
    MisspecProfile,
    check_round_number,
    compute_d_star,
    compute_gamma,
    gamma_upper_bound,
    misspec_profile,
)

__all__ = [
    "MisspecProfile",
    "chebyshev_fit",
    "check_round_number",
    "compute_d_star",
    "compute_gamma",
    "gamma_upper_bound",
    "misspec_profile",
    "residuals",
]
