"""Randomized-initialization experiments: Monte Carlo terminal
classification, adversarial stable-slice probes, and stepsize sweeps.

Every random draw is a pure function of (experiment seed, trial index), so
reports are reproducible regardless of worker parallelism. Trials run on a
thread pool capped by the SADDLESCAPE_THREADS environment variable
(default: available cores); results are aggregated in trial order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigRejected
from .objectives import CriticalPointClass, Objective, get_objective
from .solvers import (Algorithm, AugmentedState, SolverConfig, Termination,
                      Trace, run, valid_stepsize_range)
from .stability import classify_critical_point

MATCH_RADIUS_DEFAULT = 1e-4

_MASK64 = (1 << 64) - 1


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial RNG seed: SplitMix64 finalizer of seed + (trial+1)*phi64.

    phi64 = 0x9E3779B97F4A7C15 is the 64-bit golden-ratio increment. The
    result depends only on (seed, trial), which keeps parallel trials
    independent and reproducible.
    """
    x = ((seed & _MASK64) + (trial + 1) * 0x9E3779B97F4A7C15) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte Carlo experiment description; the seed determines every draw."""

    objective_name: str
    solver: SolverConfig
    num_trials: int
    init_distribution: str = "uniform_box"  # or "gaussian_at_saddle"
    init_scale: float = 0.1
    independent_x1: bool = True
    seed: int = 0
    terminal_match_radius: float = MATCH_RADIUS_DEFAULT

    def __post_init__(self):
        if self.num_trials < 0:
            raise ConfigRejected("num_trials must be >= 0")
        if self.init_distribution not in ("uniform_box", "gaussian_at_saddle"):
            raise ConfigRejected(
                f"unknown init distribution {self.init_distribution!r}")
        if self.terminal_match_radius <= 0:
            raise ConfigRejected("terminal_match_radius must be positive")


@dataclass(frozen=True, eq=False)
class TrialResult:
    trial: int
    seed: int
    terminal_class: str  # class name, or the termination name when unresolved
    terminal_x: np.ndarray
    iterations: int
    final_grad_norm: float
    termination: str
    resolved: bool

    def as_dict(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "terminal_class": self.terminal_class,
            "terminal_x": [float(v) for v in self.terminal_x],
            "iterations": self.iterations,
            "final_grad_norm": float(self.final_grad_norm),
            "termination": self.termination,
            "resolved": self.resolved,
        }


@dataclass(eq=False)
class EscapeReport:
    trials: int
    class_counts: dict[str, int]
    unresolved: int
    escape_fraction: float
    per_trial: list[TrialResult]

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "class_counts": dict(self.class_counts),
            "unresolved": self.unresolved,
            "escape_fraction": float(self.escape_fraction),
            "per_trial": [t.as_dict() for t in self.per_trial],
        }


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SADDLESCAPE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigRejected(
                f"SADDLESCAPE_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def classify_terminal(obj: Objective, trace: Trace,
                      match_radius: float = MATCH_RADIUS_DEFAULT) -> tuple[str, bool]:
    """Name the terminal point's class, or the termination when unresolved.

    Converged terminals are matched against the known critical points within
    ``match_radius`` and re-classified by curvature at the matched point;
    unmatched terminals get a fresh Hessian classification at the final
    iterate itself.
    """
    if trace.termination is not Termination.GRAD_TOLERANCE_MET:
        return trace.termination.value, False
    x = trace.final_point
    for point, _ in obj.known_criticals:
        if float(np.linalg.norm(x - point)) <= match_radius:
            cls = classify_critical_point(obj, point)
            return cls.value, True
    cls = classify_critical_point(obj, x, grad_tol=trace.config.grad_stop_tol)
    return cls.value, True


def _draw(obj: Objective, rng: np.random.Generator, cfg: ExperimentConfig,
          saddle: Optional[np.ndarray]) -> np.ndarray:
    if cfg.init_distribution == "uniform_box":
        return obj.sample_uniform(rng)
    return saddle + cfg.init_scale * rng.standard_normal(obj.dim)


def _run_trial(obj: Objective, cfg: ExperimentConfig, trial: int,
               saddle: Optional[np.ndarray]) -> TrialResult:
    seed = trial_seed(cfg.seed, trial)
    rng = np.random.default_rng(seed)
    x0 = _draw(obj, rng, cfg, saddle)
    x1 = _draw(obj, rng, cfg, saddle) if cfg.independent_x1 else x0.copy()
    trace = run(obj, AugmentedState(x1, x0), cfg.solver)
    terminal_class, resolved = classify_terminal(obj, trace,
                                                 cfg.terminal_match_radius)
    return TrialResult(
        trial=trial,
        seed=seed,
        terminal_class=terminal_class,
        terminal_x=trace.final_point.copy(),
        iterations=trace.iterations,
        final_grad_norm=trace.final_grad_norm,
        termination=trace.termination.value,
        resolved=resolved,
    )


def run_monte_carlo(cfg: ExperimentConfig,
                    workers: Optional[int] = None) -> EscapeReport:
    """Run the configured trials and aggregate terminal classifications.

    The escape fraction is the share of trials NOT terminating at a strict
    saddle (1.0 by convention for zero trials). Unresolved trials (MaxIters
    or Diverged) are counted separately, never dropped.
    """
    obj = get_objective(cfg.objective_name)
    saddle = None
    if cfg.init_distribution == "gaussian_at_saddle":
        saddles = obj.strict_saddles()
        if not saddles:
            raise ConfigRejected(
                f"{obj.name} has no known strict saddle to center draws on")
        saddle = saddles[0]
    n = cfg.num_trials
    if n == 0:
        counts = {c.value: 0 for c in CriticalPointClass}
        return EscapeReport(trials=0, class_counts=counts, unresolved=0,
                            escape_fraction=1.0, per_trial=[])
    pool_size = min(resolve_workers(workers), n)
    if pool_size > 1:
        with ThreadPoolExecutor(max_workers=pool_size) as pool:
            results = list(pool.map(
                lambda i: _run_trial(obj, cfg, i, saddle), range(n)))
    else:
        results = [_run_trial(obj, cfg, i, saddle) for i in range(n)]
    counts = {c.value: 0 for c in CriticalPointClass}
    unresolved = 0
    for r in results:
        if r.resolved:
            counts[r.terminal_class] += 1
        else:
            unresolved += 1
    saddle_hits = counts[CriticalPointClass.STRICT_SADDLE.value]
    return EscapeReport(
        trials=n,
        class_counts=counts,
        unresolved=unresolved,
        escape_fraction=(n - saddle_hits) / n,
        per_trial=results,
    )


@dataclass(eq=False)
class ProbeReport:
    """Outcome of the stable-slice probe at a strict saddle.

    The on-slice leg is the positive control (the trajectory must reach the
    saddle, proving saddle convergence is detectable); the perturbed leg
    starts 'perturbation' off the slice along the unstable direction and
    must leave.
    """

    objective_name: str
    saddle: np.ndarray
    perturbation: float
    on_slice_start: np.ndarray
    on_slice_terminal: np.ndarray
    on_slice_class: str
    on_slice_termination: str
    perturbed_start: np.ndarray
    perturbed_terminal: np.ndarray
    perturbed_class: str
    perturbed_termination: str
    at_saddle_class: str
    escaped: bool

    def as_dict(self) -> dict:
        vec = lambda v: [float(x) for x in v]  # noqa: E731
        return {
            "objective_name": self.objective_name,
            "saddle": vec(self.saddle),
            "perturbation": float(self.perturbation),
            "on_slice_start": vec(self.on_slice_start),
            "on_slice_terminal": vec(self.on_slice_terminal),
            "on_slice_class": self.on_slice_class,
            "on_slice_termination": self.on_slice_termination,
            "perturbed_start": vec(self.perturbed_start),
            "perturbed_terminal": vec(self.perturbed_terminal),
            "perturbed_class": self.perturbed_class,
            "perturbed_termination": self.perturbed_termination,
            "at_saddle_class": self.at_saddle_class,
            "escaped": self.escaped,
        }


def stable_manifold_probe(objective_name: str, solver: SolverConfig,
                          perturbation: float = 1e-8,
                          match_radius: float = MATCH_RADIUS_DEFAULT) -> ProbeReport:
    """Probe a saddle's stable slice and its 1e-8 unstable perturbation.

    Rejects objectives without an analytic stable slice. Both legs start
    with zero momentum (x_prev = x_curr = start).
    """
    obj = get_objective(objective_name)
    if obj.saddle_probe is None:
        raise ConfigRejected(
            f"{obj.name} has no analytic stable slice to probe")
    probe = obj.saddle_probe

    def leg(start: np.ndarray) -> tuple[Trace, str]:
        trace = run(obj, AugmentedState(start.copy(), start.copy()), solver)
        cls, _ = classify_terminal(obj, trace, match_radius)
        return trace, cls

    on_trace, on_class = leg(probe.start)
    perturbed_start = probe.start + perturbation * probe.unstable_direction
    pert_trace, pert_class = leg(perturbed_start)
    _, saddle_class = leg(probe.saddle)
    return ProbeReport(
        objective_name=obj.name,
        saddle=probe.saddle.copy(),
        perturbation=perturbation,
        on_slice_start=probe.start.copy(),
        on_slice_terminal=on_trace.final_point.copy(),
        on_slice_class=on_class,
        on_slice_termination=on_trace.termination.value,
        perturbed_start=perturbed_start,
        perturbed_terminal=pert_trace.final_point.copy(),
        perturbed_class=pert_class,
        perturbed_termination=pert_trace.termination.value,
        at_saddle_class=saddle_class,
        escaped=pert_class != CriticalPointClass.STRICT_SADDLE.value,
    )


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    in_bounds: bool
    escape_fraction: float
    convergence_fraction: float
    mean_iterations: float

    def as_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "in_bounds": self.in_bounds,
            "escape_fraction": float(self.escape_fraction),
            "convergence_fraction": float(self.convergence_fraction),
            "mean_iterations": float(self.mean_iterations),
        }


def stepsize_sweep(objective_name: str, algorithm: Algorithm, beta: float,
                   gammas, trials_per_gamma: int, seed: int,
                   solver_template: Optional[SolverConfig] = None,
                   workers: Optional[int] = None) -> list[SweepRow]:
    """Reduced Monte Carlo per stepsize, divergences recorded rather than raised.

    Rows flag whether each gamma sits inside the admitted range for (beta,
    L). Runs are never bound-enforced here, so out-of-range probes produce
    Diverged/MaxIters trials instead of errors. The same seed is used for
    every gamma, so rows share initial draws.
    """
    obj = get_objective(objective_name)
    try:
        _, upper = valid_stepsize_range(algorithm, beta, obj.lipschitz_bound)
    except ConfigRejected:
        upper = None
    rows = []
    for gamma in gammas:
        if solver_template is not None:
            solver = replace(solver_template, algorithm=algorithm, gamma=gamma,
                             beta=beta, enforce_bounds=False)
        else:
            solver = SolverConfig(algorithm=algorithm, gamma=gamma, beta=beta,
                                  enforce_bounds=False)
        cfg = ExperimentConfig(objective_name=objective_name, solver=solver,
                               num_trials=trials_per_gamma, seed=seed)
        report = run_monte_carlo(cfg, workers=workers)
        converged = sum(
            1 for t in report.per_trial
            if t.termination == Termination.GRAD_TOLERANCE_MET.value)
        n = report.trials
        rows.append(SweepRow(
            gamma=float(gamma),
            in_bounds=bool(upper is not None and 0.0 < gamma < upper),
            escape_fraction=report.escape_fraction,
            convergence_fraction=(converged / n) if n else 1.0,
            mean_iterations=(sum(t.iterations for t in report.per_trial) / n)
            if n else 0.0,
        ))
    return rows
