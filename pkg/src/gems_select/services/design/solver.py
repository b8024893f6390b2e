# gems_select/services/design/solver.py
"""Min-max experimental design over the arm simplex.

The objective is f(w) = max_y ||y||^2_{A(w)^-1} with A(w) = sum_x w_x psi(x) psi(x)^T. Frank-Wolfe
runs on the maximizing direction; an SLSQP epigraph polish takes over when the iterates stall.
Every reported value carries a lower bound from the dual linear program

    max_mu  2 sum_y mu_y u_y^T y - max_x sum_y mu_y (u_y^T x)^2,   u_y = A(w)^-1 y,

which is valid for any w and tight at the optimum.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import Bounds, linprog, minimize, minimize_scalar

from gems_select.config.defaults import (
    PINV_RCOND,
    RANGE_TOL,
    SOLVER_CHECK_EVERY,
    SOLVER_MAX_ITERATIONS,
    SOLVER_POLISH_AFTER,
    SOLVER_RIDGE,
    SOLVER_TOL,
)
from gems_select.core.exceptions import InstanceError
from gems_select.core.instance import directions as direction_set
from gems_select.core.instance import optimal_directions
from gems_select.core.models import Design, DesignSolution, Instance, TruncatedView
from gems_select.services.design.exceptions import SolverConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    """Parameters of the min-max design solver"""

    tol: float = SOLVER_TOL
    max_iterations: int = SOLVER_MAX_ITERATIONS
    check_every: int = SOLVER_CHECK_EVERY
    polish_after: int = SOLVER_POLISH_AFTER
    ridge: float = SOLVER_RIDGE
    range_tol: float = RANGE_TOL
    line_search: bool = False


DEFAULT_SOLVER_SETTINGS = SolverSettings()


def strict_norms(Y: np.ndarray, A: np.ndarray, range_tol: float = RANGE_TOL) -> np.ndarray:
    """y^T A^+ y for each row of ``Y``; +inf where y leaves the range of A."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if Y.shape[0] == 0:
        return np.zeros(0)
    A_pinv = np.linalg.pinv(A, rcond=PINV_RCOND, hermitian=True)
    projected = Y @ (A @ A_pinv)
    residual = np.linalg.norm(Y - projected, axis=1)
    scale = np.linalg.norm(Y, axis=1)
    values = np.maximum(np.einsum("ij,jk,ik->i", Y, A_pinv, Y), 0.0)
    return np.where(residual <= range_tol * scale, values, np.inf)


def weighted_norm_sq(
    y: Sequence[float], design: Design, view: TruncatedView, range_tol: float = RANGE_TOL
) -> float:
    """||y||^2 in the metric A_d(lambda)^+, or +inf when y is outside the range of A_d(lambda)."""
    y_arr = np.asarray(y, dtype=np.float64)
    if y_arr.shape != (view.dim,):
        raise InstanceError(f"Direction has length {y_arr.size}, view has d={view.dim}")
    return float(strict_norms(y_arr[None, :], view.gram(design.weights), range_tol)[0])


class FrankWolfeDesignSolver:
    """Solves inf_w max_y ||y||^2_{A(w)^-1} for fixed arm features ``X`` and directions ``Y``."""

    def __init__(self, X: np.ndarray, Y: np.ndarray, settings: SolverSettings):
        self.X = X
        self.Y = Y
        self.settings = settings
        self.n_arms, self.dim = X.shape
        self._eye = np.eye(self.dim)

    def _gram(self, w: np.ndarray) -> np.ndarray:
        return self.X.T @ (w[:, None] * self.X)

    def _solve_dirs(
        self, w: np.ndarray, Y: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        Y = self.Y if Y is None else Y
        A = self._gram(w) + self.settings.ridge * self._eye
        U = np.linalg.solve(A, Y.T).T
        return U, np.einsum("ij,ij->i", U, Y)

    def _value(self, w: np.ndarray) -> float:
        return float(np.max(self._solve_dirs(w)[1]))

    def strict_value(self, w: np.ndarray) -> float:
        return float(np.max(strict_norms(self.Y, self._gram(w), self.settings.range_tol)))

    def lower_bound(self, w: np.ndarray) -> float:
        U, _ = self._solve_dirs(w)
        c = np.einsum("ij,ij->i", U, self.Y)
        G = (self.X @ U.T) ** 2  # (n_arms, n_dirs)
        m = self.Y.shape[0]
        objective = np.concatenate([-2.0 * c, [1.0]])
        A_ub = np.hstack([G, -np.ones((self.n_arms, 1))])
        A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
        bounds = [(0.0, None)] * m + [(None, None)]
        try:
            res = linprog(
                objective,
                A_ub=A_ub,
                b_ub=np.zeros(self.n_arms),
                A_eq=A_eq,
                b_eq=[1.0],
                bounds=bounds,
                method="highs",
            )
        except ValueError as e:
            logger.debug(f"Dual bound LP rejected its input: {e}")
            return 0.0
        if not res.success:
            logger.debug(f"Dual bound LP failed: {res.message}")
            return 0.0
        return max(float(-res.fun), 0.0)

    def _line_search(self, w: np.ndarray, s: int) -> float:
        vertex = np.zeros_like(w)
        vertex[s] = 1.0

        def along(g: float) -> float:
            return self._value((1.0 - g) * w + g * vertex)

        res = minimize_scalar(along, bounds=(0.0, 1.0 - 1e-9), method="bounded")
        return float(res.x)

    def polish(self, w0: np.ndarray, value0: float) -> Optional[np.ndarray]:
        """SLSQP on the epigraph form min t s.t. t >= v_y(w); returns None if it fails."""
        n = self.n_arms
        Ys = self.Y / np.sqrt(value0)

        def constraint(z: np.ndarray) -> np.ndarray:
            _, v = self._solve_dirs(z[:n], Ys)
            return z[n] - v

        def constraint_jac(z: np.ndarray) -> np.ndarray:
            U, _ = self._solve_dirs(z[:n], Ys)
            return np.hstack([(U @ self.X.T) ** 2, np.ones((Ys.shape[0], 1))])

        z0 = np.concatenate([w0, [1.0]])
        with np.errstate(all="ignore"):
            try:
                res = minimize(
                    lambda z: z[n],
                    z0,
                    jac=lambda z: np.concatenate([np.zeros(n), [1.0]]),
                    method="SLSQP",
                    bounds=Bounds(np.zeros(n + 1), np.concatenate([np.ones(n), [np.inf]])),
                    constraints=[
                        {"type": "ineq", "fun": constraint, "jac": constraint_jac},
                        {
                            "type": "eq",
                            "fun": lambda z: np.array([z[:n].sum() - 1.0]),
                            "jac": lambda z: np.concatenate([np.ones(n), [0.0]])[None, :],
                        },
                    ],
                    options={"maxiter": 500, "ftol": 1e-12},
                )
            except (ValueError, np.linalg.LinAlgError) as e:
                logger.debug(f"SLSQP polish raised: {e}")
                return None
        w = np.clip(res.x[:n], 0.0, None)
        if not np.all(np.isfinite(w)) or w.sum() <= 0:
            return None
        return w / w.sum()

    def sparsify(self, w: np.ndarray, ceiling: float) -> np.ndarray:
        """Zero out small weights while the value stays below ``ceiling``."""
        w = w.copy()
        for x in np.argsort(w):
            if w[x] == 0.0 or np.count_nonzero(w) <= 1:
                continue
            trial = w.copy()
            trial[x] = 0.0
            trial /= trial.sum()
            if self.strict_value(trial) <= ceiling:
                w = trial
        return w

    def solve(self) -> DesignSolution:
        s = self.settings
        target_gap = s.tol / 2.0
        w = np.full(self.n_arms, 1.0 / self.n_arms)
        best_w, best_value = w.copy(), np.inf
        lower = 0.0
        polished = False
        iterations = 0

        def gap() -> float:
            return (best_value - lower) / best_value if best_value > 0 else 0.0

        for t in range(1, s.max_iterations + 1):
            iterations = t
            U, v = self._solve_dirs(w)
            j = int(np.argmax(v))
            if v[j] < best_value:
                best_w, best_value = w.copy(), float(v[j])

            if t == 1 or t % s.check_every == 0:
                lower = max(lower, self.lower_bound(w))
                if gap() <= target_gap:
                    break

            if not polished and t >= s.polish_after:
                polished = True
                candidate = self.polish(best_w, best_value)
                if candidate is not None:
                    value = self._value(candidate)
                    if value < best_value:
                        best_w, best_value = candidate, value
                    lower = max(lower, self.lower_bound(candidate))
                    logger.debug(f"Polish at t={t}: value={best_value:.6g}, lower={lower:.6g}")
                    if gap() <= target_gap:
                        break
                    w = (1.0 - 1e-3) * candidate + 1e-3 / self.n_arms

            scores = (self.X @ U[j]) ** 2
            vertex = int(np.argmax(scores))
            step = self._line_search(w, vertex) if s.line_search else 2.0 / (t + 2.0)
            w = (1.0 - step) * w
            w[vertex] += step
        else:
            best = self._finish(best_w, lower, iterations)
            raise SolverConvergenceError(
                f"Design solver stopped after {s.max_iterations} iterations with relative gap "
                f"{best.relative_gap:.3g} > {s.tol}",
                best=best,
            )

        solution = self._finish(best_w, lower, iterations)
        logger.debug(
            f"Design solved: value={solution.value:.6g}, gap={solution.relative_gap:.2e}, "
            f"iterations={iterations}"
        )
        return solution

    def _finish(self, w: np.ndarray, lower: float, iterations: int) -> DesignSolution:
        if lower > 0:
            w = self.sparsify(w, lower * (1.0 + self.settings.tol))
        value = self.strict_value(w)
        if not np.isfinite(value):
            # full-rank blend keeps every direction in range
            mix = self.settings.tol / 4.0
            w = (1.0 - mix) * w + mix / self.n_arms
            value = self.strict_value(w)
        w = w / w.sum()
        relative_gap = (value - lower) / value if value > 0 else 0.0
        return DesignSolution(
            design=Design(w),
            value=value,
            iterations=iterations,
            relative_gap=max(relative_gap, 0.0),
            lower_bound=lower,
        )


@lru_cache(maxsize=8192)
def _solve_cached(
    arms_bytes: bytes,
    arms_shape: Tuple[int, int],
    dirs_bytes: bytes,
    dirs_shape: Tuple[int, int],
    settings: SolverSettings,
) -> DesignSolution:
    X = np.frombuffer(arms_bytes, dtype=np.float64).reshape(arms_shape)
    Y = np.frombuffer(dirs_bytes, dtype=np.float64).reshape(dirs_shape)
    return FrankWolfeDesignSolver(X, Y, settings).solve()


def clear_design_cache() -> None:
    _solve_cached.cache_clear()


def _nonzero_rows(Y: np.ndarray) -> np.ndarray:
    return Y[np.any(Y != 0.0, axis=1)]


def solve_design(
    directions: np.ndarray,
    view: TruncatedView,
    tol: Optional[float] = None,
    settings: Optional[SolverSettings] = None,
) -> DesignSolution:
    """Approximately solve inf_lambda max_y ||y||^2_{A_d(lambda)^-1}.

    Args:
        directions: ``(m, d)`` array of directions.
        view: Truncated instance supplying psi_d of the arms.
        tol: Relative accuracy; overrides ``settings.tol``.
        settings: Solver parameters.

    Returns:
        A DesignSolution whose value is within (1 + tol) of the infimum. Empty or all-zero
        direction sets give value 0 at the uniform design.

    Raises:
        SolverConvergenceError: If the tolerance is not certified within the iteration cap.
    """
    settings = settings or DEFAULT_SOLVER_SETTINGS
    if tol is not None:
        settings = replace(settings, tol=tol)
    Y = np.asarray(directions, dtype=np.float64).reshape(-1, view.dim)
    Y = np.ascontiguousarray(_nonzero_rows(Y))
    if Y.shape[0] == 0:
        return DesignSolution(Design.uniform(view.source.n_arms), 0.0, 0, 0.0, 0.0)
    X = np.ascontiguousarray(view.arms)
    return _solve_cached(X.tobytes(), X.shape, Y.tobytes(), Y.shape, settings)


def compute_iota(
    S: Sequence[int], d: int, inst: Instance, settings: Optional[SolverSettings] = None
) -> float:
    """iota(Y(psi_d(S))) for a collection ``S`` of target indices; 0 when |S| <= 1."""
    members = sorted(set(int(j) for j in S))
    if len(members) <= 1:
        return 0.0
    Y = direction_set(inst.targets[members], d)
    return solve_design(Y, inst.view(d), settings=settings).value


def compute_iota_star(inst: Instance, d: int, settings: Optional[SolverSettings] = None) -> float:
    """iota over the directions z* - z."""
    return solve_design(optimal_directions(inst, d), inst.view(d), settings=settings).value


def rho_design(
    inst: Instance, d: int, eps: float = 0.0, settings: Optional[SolverSettings] = None
) -> DesignSolution:
    """Design problem behind rho*_d(eps): directions (z* - z) / max(gap_z, eps)."""
    if eps < 0:
        raise InstanceError(f"eps must be >= 0, got {eps}")
    others = [j for j in range(inst.n_targets) if j != inst.z_star]
    Y = optimal_directions(inst, d)
    if Y.shape[0]:
        Y = Y / np.maximum(inst.gaps[others], eps)[:, None]
    return solve_design(Y, inst.view(d), settings=settings)


def compute_rho(
    inst: Instance, d: int, eps: float = 0.0, settings: Optional[SolverSettings] = None
) -> float:
    """rho*_d(eps); ``eps = 0`` gives rho*_d."""
    return rho_design(inst, d, eps, settings).value


def _simplex_grid(n_arms: int, steps: int) -> np.ndarray:
    bars = np.array(list(itertools.combinations(range(steps + n_arms - 1), n_arms - 1)), dtype=int)
    bars = bars.reshape(-1, n_arms - 1)
    padded = np.hstack(
        [np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), steps + n_arms - 1)]
    )
    return (np.diff(padded, axis=1) - 1) / steps


def grid_search_design(
    directions: np.ndarray, view: TruncatedView, resolution: float = 0.01, chunk: int = 50_000
) -> DesignSolution:
    """Brute-force min-max design over a simplex grid; feasible for a handful of arms only."""
    X = view.arms
    n = X.shape[0]
    if n > 6:
        raise InstanceError(f"Grid search supports at most 6 arms, got {n}")
    Y = _nonzero_rows(np.asarray(directions, dtype=np.float64).reshape(-1, view.dim))
    if Y.shape[0] == 0:
        return DesignSolution(Design.uniform(n), 0.0, 0, 0.0, 0.0)
    steps = int(round(1.0 / resolution))
    grid = _simplex_grid(n, steps) if n > 1 else np.ones((1, 1))

    best_value, best_w = np.inf, grid[0]
    scale = np.linalg.norm(Y, axis=1)
    for start in range(0, grid.shape[0], chunk):
        W = grid[start : start + chunk]
        A = np.einsum("gn,ni,nj->gij", W, X, X)
        A_pinv = np.linalg.pinv(A, rcond=PINV_RCOND, hermitian=True)
        P = A @ A_pinv
        residual = np.linalg.norm(Y[None, :, :] - np.einsum("mi,gij->gmj", Y, P), axis=2)
        values = np.einsum("mi,gij,mj->gm", Y, A_pinv, Y)
        values = np.where(residual <= RANGE_TOL * scale[None, :], values, np.inf)
        worst = values.max(axis=1)
        g = int(np.argmin(worst))
        if worst[g] < best_value:
            best_value, best_w = float(worst[g]), W[g]
    return DesignSolution(Design(best_w / best_w.sum()), best_value, grid.shape[0], 0.0, 0.0)
