"""Heavy-ball solver cores on the augmented state (x_curr, x_prev).

Two one-step update maps, both acting on pairs of consecutive iterates:

* gradient descent with momentum (``hbgd``):
      x_next = x_curr - gamma * grad f(x_curr) + beta * (x_curr - x_prev)
* proximal point with momentum (``hbppa``):
      x_next = prox_{gamma f}(x_curr + beta * (x_curr - x_prev))

plus the damped-Newton inner solver behind the proximal map, stepsize
validity gates, and full trajectory runs (``run``) that record per-step
diagnostics in a ``Trace``.

Stepsize gates: with the momentum weight beta and a curvature bound L,
convergence theory admits gamma in (0, 2*(1-beta)/L) for the gradient
variant (0 < beta < 1) and gamma in (0, 1/L) for the proximal variant
(0 < beta < 1/2). Configs carry ``enforce_bounds`` so sweeps can probe
beyond these ranges deliberately.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigRejected, NumericalFailure, ProxNonConvergence
from .lyapunov import lyapunov_value
from .objectives import Objective, eval_gradient, eval_hessian, eval_value

DIVERGENCE_LIMIT = 1e12


class Algorithm(enum.Enum):
    HBGD = "hbgd"
    HBPPA = "hbppa"


class Termination(enum.Enum):
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"


@dataclass(frozen=True, eq=False)
class AugmentedState:
    """Pair of consecutive iterates; the space the one-step maps act on.

    Every step sends (x_curr, x_prev) to (x_next, x_curr): the second block
    of the output always equals the first block of the input.
    """

    x_curr: np.ndarray
    x_prev: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_curr", np.asarray(self.x_curr, dtype=float))
        object.__setattr__(self, "x_prev", np.asarray(self.x_prev, dtype=float))
        if self.x_curr.shape != self.x_prev.shape or self.x_curr.ndim != 1:
            raise ValueError("x_curr and x_prev must be 1-d vectors of equal length")

    @property
    def dim(self) -> int:
        return self.x_curr.size


@dataclass(frozen=True)
class SolverConfig:
    algorithm: Algorithm
    gamma: float
    beta: float
    max_iters: int = 100_000
    grad_stop_tol: float = 1e-8
    prox_inner_tol: float = 1e-12
    prox_max_inner_iters: int = 100
    enforce_bounds: bool = True

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigRejected(f"stepsize gamma must be positive, got {self.gamma!r}")
        if self.beta < 0:
            raise ConfigRejected(f"momentum beta must be >= 0, got {self.beta!r}")
        if self.max_iters < 1:
            raise ConfigRejected("max_iters must be >= 1")
        if self.prox_inner_tol <= 0 or self.prox_max_inner_iters < 1:
            raise ConfigRejected("inner prox solver settings must be positive")


@dataclass(eq=False)
class Trace:
    """Full iterate history with per-step diagnostics.

    ``states[k]`` is the augmented state after k steps (``states[0]`` is the
    initial pair). The per-state series are aligned with ``states``:
    ``grad_norms[k]`` is ||grad f|| at ``states[k].x_curr``,
    ``displacements[k]`` is ||states[k].x_curr - states[k].x_prev||,
    ``lyapunov_values[k]`` the Lyapunov potential of ``states[k]``, and
    ``prox_inner_iters[k]`` the inner-solver iterations of the step that
    produced the state (always 0 for gradient steps and for ``states[0]``).
    """

    states: list[AugmentedState]
    grad_norms: list[float]
    lyapunov_values: list[float]
    displacements: list[float]
    prox_inner_iters: list[int]
    termination: Termination
    config: SolverConfig

    @property
    def iterations(self) -> int:
        """Number of recorded states, the initial one included."""
        return len(self.states)

    @property
    def final_point(self) -> np.ndarray:
        return self.states[-1].x_curr

    @property
    def final_grad_norm(self) -> float:
        return self.grad_norms[-1]


def valid_stepsize_range(algorithm: Algorithm, beta: float, L: float) -> tuple[float, float]:
    """Open interval of stepsizes admitted by the convergence theory.

    (0, 2*(1-beta)/L) for the gradient variant, (0, 1/L) for the proximal
    variant. Rejects curvature bounds L <= 0 and momentum weights outside
    the range each guarantee requires.
    """
    if L <= 0:
        raise ConfigRejected(f"curvature bound L must be positive, got {L!r}")
    if algorithm is Algorithm.HBGD:
        if not 0.0 < beta < 1.0:
            raise ConfigRejected(
                f"hbgd stepsize range requires 0 < beta < 1, got beta={beta!r}")
        return 0.0, 2.0 * (1.0 - beta) / L
    if not 0.0 < beta < 0.5:
        raise ConfigRejected(
            f"hbppa stepsize range requires 0 < beta < 1/2, got beta={beta!r}")
    return 0.0, 1.0 / L


def validate_config(cfg: SolverConfig, obj: Objective) -> None:
    """Reject configs outside the stepsize gates for this objective's bound."""
    lo, hi = valid_stepsize_range(cfg.algorithm, cfg.beta, obj.lipschitz_bound)
    if not lo < cfg.gamma < hi:
        formula = ("2*(1-beta)/L" if cfg.algorithm is Algorithm.HBGD else "1/L")
        raise ConfigRejected(
            f"gamma={cfg.gamma!r} outside the admitted range (0, {hi!r}) = "
            f"(0, {formula}) for {cfg.algorithm.value} with beta={cfg.beta!r}, "
            f"L={obj.lipschitz_bound!r} ({obj.name})")


def hbgd_step(obj: Objective, w: AugmentedState, gamma: float, beta: float) -> AugmentedState:
    """One gradient step with momentum.

    Returns (x_curr - gamma*grad f(x_curr) + beta*(x_curr - x_prev), x_curr).
    With beta = 0 this is exactly the plain gradient step.
    """
    if gamma <= 0 or beta < 0:
        raise ConfigRejected("hbgd_step needs gamma > 0 and beta >= 0")
    g = eval_gradient(obj, w.x_curr)
    x_next = w.x_curr - gamma * g + beta * (w.x_curr - w.x_prev)
    return AugmentedState(x_next, w.x_curr)


def prox_newton(obj: Objective, gamma: float, z, cfg: SolverConfig) -> tuple[np.ndarray, int]:
    """Damped Newton solve of min_y gamma*f(y) + 0.5*||y - z||^2.

    Starts at z; each step solves (gamma*hess f(y) + I) d = -r for the
    stationarity residual r = gamma*grad f(y) + y - z and backtracks on
    ||r||^2 as a safeguard (the Newton direction is a descent direction for
    it whenever the system matrix is positive definite, and unlike the
    subproblem value this merit has no rounding floor near the solution).
    Stops when ||r|| <= cfg.prox_inner_tol. Returns (y, newton iterations
    used). For gamma below 1/L the subproblem is strongly convex and the
    solve is globally safe; if positive definiteness is lost along the way
    the subproblem has no unique minimizer and ProxNonConvergence is raised.
    """
    z = np.asarray(z, dtype=float)
    y = z.copy()
    identity = np.eye(obj.dim)
    residual = gamma * eval_gradient(obj, y) + (y - z)
    merit = float(residual @ residual)
    for it in range(cfg.prox_max_inner_iters):
        if np.sqrt(merit) <= cfg.prox_inner_tol:
            return y, it
        H = gamma * eval_hessian(obj, y) + identity
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            raise ProxNonConvergence(
                f"{obj.name}: proximal subproblem is not positive definite at "
                f"the current inner iterate (gamma={gamma!r})") from None
        direction = np.linalg.solve(H, -residual)
        t = 1.0
        for _ in range(60):
            candidate = y + t * direction
            cand_residual = gamma * eval_gradient(obj, candidate) + (candidate - z)
            cand_merit = float(cand_residual @ cand_residual)
            if cand_merit <= (1.0 - 2e-4 * t) * merit:
                break
            t *= 0.5
        else:
            raise ProxNonConvergence(
                f"{obj.name}: prox line search failed (gamma={gamma!r})")
        y, residual, merit = candidate, cand_residual, cand_merit
    if np.sqrt(merit) <= cfg.prox_inner_tol:
        return y, cfg.prox_max_inner_iters
    raise ProxNonConvergence(
        f"{obj.name}: prox residual {float(np.sqrt(merit))!r} above "
        f"{cfg.prox_inner_tol!r} after {cfg.prox_max_inner_iters} Newton steps")


def _prox_counted(obj: Objective, gamma: float, z, cfg: SolverConfig,
                  force_numeric: bool = False) -> tuple[np.ndarray, int]:
    if gamma <= 0:
        raise ConfigRejected("prox needs gamma > 0")
    if cfg.enforce_bounds and gamma * obj.lipschitz_bound >= 1.0:
        raise ConfigRejected(
            f"prox requires gamma < 1/L; got gamma={gamma!r} with "
            f"L={obj.lipschitz_bound!r} ({obj.name})")
    if obj.prox_exact is not None and not force_numeric:
        return np.asarray(obj.prox_exact(gamma, np.asarray(z, dtype=float)),
                          dtype=float), 0
    return prox_newton(obj, gamma, z, cfg)


def prox(obj: Objective, gamma: float, z, cfg: SolverConfig,
         force_numeric: bool = False) -> np.ndarray:
    """Proximal map of gamma*f at z: argmin_y gamma*f(y) + 0.5*||y - z||^2.

    Uses the objective's closed form when available (``force_numeric`` runs
    the Newton solver regardless, e.g. for equivalence checks). The result
    satisfies the stationarity residual ||gamma*grad f(y) + y - z|| <=
    cfg.prox_inner_tol and never exceeds the subproblem value at the trial
    point z itself.
    """
    y, _ = _prox_counted(obj, gamma, z, cfg, force_numeric)
    return y


def _hbppa_step_counted(obj: Objective, w: AugmentedState, gamma: float,
                        beta: float, cfg: SolverConfig) -> tuple[AugmentedState, int]:
    z = w.x_curr + beta * (w.x_curr - w.x_prev)
    y, inner = _prox_counted(obj, gamma, z, cfg)
    return AugmentedState(y, w.x_curr), inner


def hbppa_step(obj: Objective, w: AugmentedState, gamma: float, beta: float,
               cfg: SolverConfig) -> AugmentedState:
    """One proximal-point step with momentum.

    Returns (prox_{gamma f}(x_curr + beta*(x_curr - x_prev)), x_curr). The
    first block satisfies gamma*grad f(x_next) + x_next - x_curr -
    beta*(x_curr - x_prev) = 0 to within cfg.prox_inner_tol.
    """
    if beta < 0:
        raise ConfigRejected("hbppa_step needs beta >= 0")
    state, _ = _hbppa_step_counted(obj, w, gamma, beta, cfg)
    return state


def _diverged(x: np.ndarray) -> bool:
    return bool(not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT)


def run(obj: Objective, w0: AugmentedState, cfg: SolverConfig) -> Trace:
    """Iterate the configured step map from w0 until a stopping rule fires.

    Stops with GradToleranceMet when the newest iterate's gradient norm is
    at most cfg.grad_stop_tol (checked before stepping, so a start at a
    critical point terminates with a single recorded state), with MaxIters
    after cfg.max_iters steps, and with Diverged when an iterate leaves the
    finite ball of radius 1e12 or a step fails numerically. Identical
    (obj, w0, cfg) always produce identical traces.
    """
    if w0.dim != obj.dim:
        raise ValueError(f"initial state has dimension {w0.dim}, "
                         f"{obj.name} expects {obj.dim}")
    if cfg.enforce_bounds:
        validate_config(cfg, obj)

    states = [w0]
    grad_norms: list[float] = []
    lyapunov_values: list[float] = []
    displacements: list[float] = []
    prox_inner_iters: list[int] = []

    def record(w: AugmentedState, inner: int) -> None:
        displacements.append(float(np.linalg.norm(w.x_curr - w.x_prev)))
        try:
            grad_norms.append(float(np.linalg.norm(eval_gradient(obj, w.x_curr))))
        except NumericalFailure:
            grad_norms.append(float("inf"))
        try:
            lyapunov_values.append(
                lyapunov_value(obj, w.x_curr, w.x_prev, cfg.gamma, cfg.beta))
        except NumericalFailure:
            lyapunov_values.append(float("inf"))
        prox_inner_iters.append(inner)

    record(w0, 0)
    termination: Optional[Termination] = None
    if _diverged(w0.x_curr) or not np.isfinite(grad_norms[-1]):
        termination = Termination.DIVERGED
    steps = 0
    while termination is None:
        if grad_norms[-1] <= cfg.grad_stop_tol:
            termination = Termination.GRAD_TOLERANCE_MET
            break
        if steps >= cfg.max_iters:
            termination = Termination.MAX_ITERS
            break
        current = states[-1]
        try:
            if cfg.algorithm is Algorithm.HBGD:
                nxt, inner = hbgd_step(obj, current, cfg.gamma, cfg.beta), 0
            else:
                nxt, inner = _hbppa_step_counted(obj, current, cfg.gamma,
                                                 cfg.beta, cfg)
        except (NumericalFailure, ProxNonConvergence):
            termination = Termination.DIVERGED
            break
        steps += 1
        states.append(nxt)
        record(nxt, inner)
        if _diverged(nxt.x_curr) or not np.isfinite(grad_norms[-1]):
            termination = Termination.DIVERGED
            break
    return Trace(states=states, grad_norms=grad_norms,
                 lyapunov_values=lyapunov_values, displacements=displacements,
                 prox_inner_iters=prox_inner_iters, termination=termination,
                 config=cfg)
