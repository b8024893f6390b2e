# gems_select/config/defaults.py
DEFAULT_ZETA = 0.25
DEFAULT_DELTA = 0.1
DEFAULT_TRIALS = 200
DEFAULT_SEED = 0
DEFAULT_WORKERS = 4
DEFAULT_MAX_ELL = 8

# design solver
SOLVER_TOL = 1e-2
SOLVER_MAX_ITERATIONS = 10_000
SOLVER_CHECK_EVERY = 10  # iterations between dual-bound evaluations
SOLVER_POLISH_AFTER = 200  # Frank-Wolfe iterations before the SLSQP polish
SOLVER_RIDGE = 1e-10
RANGE_TOL = 1e-8  # relative residual for the range test
PINV_RCOND = 1e-12

# instances
GAP_TIE_TOL = 1e-9
MAX_GAP = 2.0
LINEAR_TOL = 1e-12

# rounding
SUPPORT_THRESHOLD = 1e-9
R_D_FORMULA = "pukelsheim"  # or "allen" for 180 d / zeta^2

# misspecification
GAMMA_N_MAX = 60
CHEBYSHEV_RESIDUAL_TOL = 1e-7
