"""Command-line front end.

Subcommands:
    run           single trajectory; writes trace.csv, report.json, manifest.json
    classify      stability report for a point (stdout JSON, optional files)
    escape        Monte Carlo escape experiment; JSON + CSV + manifest
    sweep         stepsize sweep; CSV + JSON + manifest
    corpus-check  built-in objective self-validation

Exit codes: 0 success (run: gradient tolerance met), 2 run hit the iteration
cap, 3 run diverged, 64 configuration rejected, 1 corpus-check failure.
All randomness derives from the --seed flag; rerunning a command with the
configuration echoed in its manifest reproduces every output byte for byte
(the manifest's duration field aside).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SaddlescapeError
from .experiments import (ExperimentConfig, run_monte_carlo, stable_manifold_probe,
                          stepsize_sweep, trial_seed)
from .lyapunov import displacement_summability, gradient_residual_bound, verify_descent
from .objectives import corpus_self_check, default_corpus, get_objective
from .solvers import Algorithm, AugmentedState, SolverConfig, Termination, run
from .stability import stability_report

_RUN_EXIT = {Termination.GRAD_TOLERANCE_MET: 0,
             Termination.MAX_ITERS: 2,
             Termination.DIVERGED: 3}


def _fmt(x) -> str:
    return repr(float(x))


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise SaddlescapeError(f"bad vector {text!r}: {exc}") from exc


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise SaddlescapeError(f"bad boolean {text!r}")


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SaddlescapeError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _pick(args_value, file_cfg: dict[str, str], key: str, cast, default):
    if args_value is not None:
        return args_value
    if key in file_cfg:
        return cast(file_cfg[key])
    return default


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_manifest(out_dir: Path, command: str, config: dict, seed,
                    outputs: list[str], duration: float) -> None:
    _write_json(out_dir / "manifest.json", {
        "tool": "saddlescape",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "outputs": outputs,
        "duration_seconds": duration,
    })


def _solver_config_dict(cfg: SolverConfig) -> dict:
    return {
        "algorithm": cfg.algorithm.value,
        "gamma": cfg.gamma,
        "beta": cfg.beta,
        "max_iters": cfg.max_iters,
        "grad_stop_tol": cfg.grad_stop_tol,
        "prox_inner_tol": cfg.prox_inner_tol,
        "prox_max_inner_iters": cfg.prox_max_inner_iters,
        "enforce_bounds": cfg.enforce_bounds,
    }


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", required=True,
                   help="objective name, e.g. double_well or quadratic_saddle:1,-1")
    p.add_argument("--algo", choices=["hbgd", "hbppa"], required=True)
    p.add_argument("--gamma", type=float, required=True, help="stepsize")
    p.add_argument("--beta", type=float, required=True, help="momentum weight")
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--prox-tol", type=float, default=1e-12)
    p.add_argument("--prox-max-inner", type=int, default=100)
    p.add_argument("--no-enforce-bounds", action="store_true",
                   help="allow stepsizes outside the admitted range")


def _solver_from_args(args) -> SolverConfig:
    return SolverConfig(
        algorithm=Algorithm(args.algo),
        gamma=args.gamma,
        beta=args.beta,
        max_iters=args.max_iters,
        grad_stop_tol=args.grad_tol,
        prox_inner_tol=args.prox_tol,
        prox_max_inner_iters=args.prox_max_inner,
        enforce_bounds=not args.no_enforce_bounds,
    )


def _write_trace_csv(path: Path, trace, dim: int) -> None:
    header = ["k"] + [f"x{i}" for i in range(dim)] + [
        "grad_norm", "lyapunov", "displacement"]
    lines = [",".join(header)]
    for k, state in enumerate(trace.states):
        row = [str(k + 1)]
        row.extend(_fmt(v) for v in state.x_curr)
        row.append(_fmt(trace.grad_norms[k]))
        row.append(_fmt(trace.lyapunov_values[k]))
        row.append(_fmt(trace.displacements[k]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    started = time.perf_counter()
    obj = get_objective(args.objective)
    solver = _solver_from_args(args)
    if solver.enforce_bounds:
        from .solvers import validate_config
        validate_config(solver, obj)
    if args.x0 is not None:
        x0 = _parse_vector(args.x0)
        x1 = _parse_vector(args.x1) if args.x1 is not None else x0.copy()
    else:
        if args.seed is None:
            raise SaddlescapeError("provide --x0 (and optionally --x1) or --seed")
        rng = np.random.default_rng(trial_seed(args.seed, 0))
        x0 = obj.sample_uniform(rng)
        x1 = x0.copy() if args.same_start else obj.sample_uniform(rng)
    if x0.size != obj.dim or x1.size != obj.dim:
        raise SaddlescapeError(
            f"{obj.name} expects {obj.dim}-dimensional start points")

    trace = run(obj, AugmentedState(x1, x0), solver)

    from .experiments import classify_terminal
    terminal_class, _ = classify_terminal(obj, trace)
    sums, plateaued = displacement_summability(trace)
    residual_checks = gradient_residual_bound(trace, solver.gamma, solver.beta)
    certificate = None
    if len(trace.states) >= 2:
        certificate = verify_descent(trace, obj, solver.gamma, solver.beta).as_dict()
    report = {
        "objective": obj.name,
        "algorithm": solver.algorithm.value,
        "gamma": solver.gamma,
        "beta": solver.beta,
        "termination": trace.termination.value,
        "iterations": trace.iterations,
        "final_point": [float(v) for v in trace.final_point],
        "final_grad_norm": float(trace.final_grad_norm),
        "terminal_class": terminal_class,
        "descent_certificate": certificate,
        "residual_bound": {
            "checked_steps": len(residual_checks),
            "all_true": all(residual_checks),
            "first_violation": next(
                (i + 1 for i, ok in enumerate(residual_checks) if not ok), None),
        },
        "summability": {
            "total_path_length": float(sums[-1]) if sums.size else 0.0,
            "plateaued": plateaued,
        },
    }

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trace_csv(out_dir / "trace.csv", trace, obj.dim)
    _write_json(out_dir / "report.json", report)
    config_echo = {
        "objective": args.objective,
        "x0": [float(v) for v in x0],
        "x1": [float(v) for v in x1],
        "solver": _solver_config_dict(solver),
    }
    _write_manifest(out_dir, "run", config_echo, args.seed,
                    ["trace.csv", "report.json"], time.perf_counter() - started)
    print(f"run: {trace.termination.value} after {trace.iterations} states, "
          f"final grad norm {_fmt(trace.final_grad_norm)}")
    return _RUN_EXIT[trace.termination]


def cmd_classify(args) -> int:
    started = time.perf_counter()
    obj = get_objective(args.objective)
    point = _parse_vector(args.point)
    solver = _solver_from_args(args) if args.algo == "hbppa" else None
    report = stability_report(obj, point, Algorithm(args.algo), args.gamma,
                              args.beta, cfg=solver)
    payload = report.as_dict()
    print(json.dumps(payload, indent=2))
    if args.out_dir is not None:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "stability_report.json", payload)
        config_echo = {
            "objective": args.objective,
            "point": [float(v) for v in point],
            "algorithm": args.algo,
            "gamma": args.gamma,
            "beta": args.beta,
        }
        _write_manifest(out_dir, "classify", config_echo, None,
                        ["stability_report.json"], time.perf_counter() - started)
    return 0


def _escape_report_csv(report, dim: int) -> str:
    header = ["trial", "seed", "terminal_class"]
    header += [f"terminal_x{i}" for i in range(dim)]
    header += ["iterations", "final_grad_norm"]
    lines = [",".join(header)]
    for t in report.per_trial:
        row = [str(t.trial), str(t.seed), t.terminal_class]
        row.extend(_fmt(v) for v in t.terminal_x)
        row.append(str(t.iterations))
        row.append(_fmt(t.final_grad_norm))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_escape(args) -> int:
    started = time.perf_counter()
    file_cfg = _load_config_file(args.config) if args.config else {}
    objective = _pick(args.objective, file_cfg, "objective", str, None)
    algo = _pick(args.algo, file_cfg, "algo", str, None)
    if objective is None or algo is None:
        raise SaddlescapeError("escape needs --objective and --algo "
                               "(flags or config file)")
    solver = SolverConfig(
        algorithm=Algorithm(algo),
        gamma=_pick(args.gamma, file_cfg, "gamma", float, None),
        beta=_pick(args.beta, file_cfg, "beta", float, None),
        max_iters=_pick(args.max_iters, file_cfg, "max_iters", int, 100_000),
        grad_stop_tol=_pick(args.grad_tol, file_cfg, "grad_tol", float, 1e-8),
        prox_inner_tol=_pick(args.prox_tol, file_cfg, "prox_tol", float, 1e-12),
        prox_max_inner_iters=_pick(args.prox_max_inner, file_cfg,
                                   "prox_max_inner", int, 100),
        enforce_bounds=(False if args.no_enforce_bounds
                        else _pick(None, file_cfg, "enforce_bounds",
                                   _parse_bool, True)),
    )
    independent_x1 = (False if args.same_start
                      else _pick(None, file_cfg, "independent_x1",
                                 _parse_bool, True))
    cfg = ExperimentConfig(
        objective_name=objective,
        solver=solver,
        num_trials=_pick(args.trials, file_cfg, "trials", int, 100),
        init_distribution=_pick(args.init, file_cfg, "init", str, "uniform_box"),
        init_scale=_pick(args.init_scale, file_cfg, "init_scale", float, 0.1),
        independent_x1=independent_x1,
        seed=_pick(args.seed, file_cfg, "seed", int, 0),
        terminal_match_radius=_pick(args.match_radius, file_cfg,
                                    "match_radius", float, 1e-4),
    )
    obj = get_objective(objective)
    report = run_monte_carlo(cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "escape_report.json", report.as_dict())
    (out_dir / "escape_trials.csv").write_text(_escape_report_csv(report, obj.dim))
    config_echo = {
        "objective": objective,
        "trials": cfg.num_trials,
        "init": cfg.init_distribution,
        "init_scale": cfg.init_scale,
        "independent_x1": cfg.independent_x1,
        "match_radius": cfg.terminal_match_radius,
        "solver": _solver_config_dict(solver),
    }
    _write_manifest(out_dir, "escape", config_echo, cfg.seed,
                    ["escape_report.json", "escape_trials.csv"],
                    time.perf_counter() - started)
    print(f"escape: {report.trials} trials, "
          f"saddle terminations {report.class_counts['StrictSaddle']}, "
          f"unresolved {report.unresolved}, "
          f"escape fraction {_fmt(report.escape_fraction)}")
    return 0


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    file_cfg = _load_config_file(args.config) if args.config else {}
    objective = _pick(args.objective, file_cfg, "objective", str, None)
    algo = _pick(args.algo, file_cfg, "algo", str, None)
    beta = _pick(args.beta, file_cfg, "beta", float, None)
    gammas_text = _pick(args.gammas, file_cfg, "gammas", str, None)
    if None in (objective, algo, beta, gammas_text):
        raise SaddlescapeError("sweep needs --objective, --algo, --beta and "
                               "--gammas (flags or config file)")
    gammas = [float(v) for v in gammas_text.split(",")]
    algorithm = Algorithm(algo)
    obj = get_objective(objective)
    if not args.no_enforce_bounds:
        from .solvers import valid_stepsize_range
        _, upper = valid_stepsize_range(algorithm, beta, obj.lipschitz_bound)
        bad = [g for g in gammas if not 0.0 < g < upper]
        if bad:
            raise SaddlescapeError(
                f"gammas {bad} outside the admitted range (0, {upper!r}) for "
                f"{algo} with beta={beta!r}, L={obj.lipschitz_bound!r}; pass "
                "--no-enforce-bounds to probe beyond it")
    template = SolverConfig(
        algorithm=algorithm, gamma=gammas[0], beta=beta,
        max_iters=_pick(args.max_iters, file_cfg, "max_iters", int, 100_000),
        grad_stop_tol=_pick(args.grad_tol, file_cfg, "grad_tol", float, 1e-8),
        prox_inner_tol=_pick(args.prox_tol, file_cfg, "prox_tol", float, 1e-12),
        enforce_bounds=False,
    )
    seed = _pick(args.seed, file_cfg, "seed", int, 0)
    trials = _pick(args.trials_per_gamma, file_cfg, "trials_per_gamma", int, 50)
    rows = stepsize_sweep(objective, algorithm, beta, gammas, trials, seed,
                          solver_template=template)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["gamma,in_bounds,escape_fraction,convergence_fraction,mean_iterations"]
    for row in rows:
        lines.append(",".join([
            _fmt(row.gamma), str(row.in_bounds).lower(),
            _fmt(row.escape_fraction), _fmt(row.convergence_fraction),
            _fmt(row.mean_iterations)]))
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    _write_json(out_dir / "sweep.json", {"rows": [r.as_dict() for r in rows]})
    config_echo = {
        "objective": objective,
        "algo": algo,
        "beta": beta,
        "gammas": gammas,
        "trials_per_gamma": trials,
        "max_iters": template.max_iters,
        "grad_tol": template.grad_stop_tol,
        "prox_tol": template.prox_inner_tol,
    }
    _write_manifest(out_dir, "sweep", config_echo, seed,
                    ["sweep.csv", "sweep.json"], time.perf_counter() - started)
    for row in rows:
        print(f"sweep gamma={_fmt(row.gamma)} in_bounds={row.in_bounds} "
              f"escape={_fmt(row.escape_fraction)} "
              f"converged={_fmt(row.convergence_fraction)} "
              f"mean_iters={_fmt(row.mean_iterations)}")
    return 0


def cmd_corpus_check(args) -> int:
    objectives = ([get_objective(args.objective)] if args.objective
                  else default_corpus())
    all_ok = True
    for obj in objectives:
        report = corpus_self_check(obj, points=args.points, seed=args.seed)
        status = "PASS" if report["ok"] else "FAIL"
        print(f"corpus-check {obj.name}: {status} "
              f"(grad_fd={report['max_gradient_fd_error']:.3e}, "
              f"hess_fd={report['max_hessian_fd_error']:.3e}, "
              f"lipschitz={report['lipschitz_estimate']!r}"
              f"{' ' + report['message'] if report['message'] else ''})")
        all_ok = all_ok and report["ok"]
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddlescape",
        description="Heavy-ball solvers with saddle-escape diagnostics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single trajectory")
    _add_solver_flags(p_run)
    p_run.add_argument("--x0", help="comma-separated start point")
    p_run.add_argument("--x1", help="second start point (defaults to x0)")
    p_run.add_argument("--seed", type=int, help="draw random starts instead")
    p_run.add_argument("--same-start", action="store_true",
                       help="with --seed, set x1 = x0 (zero initial momentum)")
    p_run.add_argument("--out-dir", default=".")
    p_run.set_defaults(func=cmd_run)

    p_cls = sub.add_parser("classify", help="stability report for a point")
    _add_solver_flags(p_cls)
    p_cls.add_argument("--point", required=True,
                       help="comma-separated point to classify")
    p_cls.add_argument("--out-dir", default=None)
    p_cls.set_defaults(func=cmd_classify)

    p_esc = sub.add_parser("escape", help="Monte Carlo escape experiment")
    p_esc.add_argument("--objective")
    p_esc.add_argument("--algo", choices=["hbgd", "hbppa"])
    p_esc.add_argument("--gamma", type=float)
    p_esc.add_argument("--beta", type=float)
    p_esc.add_argument("--trials", type=int)
    p_esc.add_argument("--seed", type=int)
    p_esc.add_argument("--init", choices=["uniform_box", "gaussian_at_saddle"])
    p_esc.add_argument("--init-scale", type=float)
    p_esc.add_argument("--same-start", action="store_true",
                       help="set x1 = x0 instead of independent draws")
    p_esc.add_argument("--match-radius", type=float)
    p_esc.add_argument("--max-iters", type=int)
    p_esc.add_argument("--grad-tol", type=float)
    p_esc.add_argument("--prox-tol", type=float)
    p_esc.add_argument("--prox-max-inner", type=int)
    p_esc.add_argument("--no-enforce-bounds", action="store_true")
    p_esc.add_argument("--config", help="key = value config file; flags override")
    p_esc.add_argument("--out-dir", default=".")
    p_esc.set_defaults(func=cmd_escape)

    p_swp = sub.add_parser("sweep", help="stepsize sweep")
    p_swp.add_argument("--objective")
    p_swp.add_argument("--algo", choices=["hbgd", "hbppa"])
    p_swp.add_argument("--beta", type=float)
    p_swp.add_argument("--gammas", help="comma-separated stepsizes")
    p_swp.add_argument("--trials-per-gamma", type=int)
    p_swp.add_argument("--seed", type=int)
    p_swp.add_argument("--max-iters", type=int)
    p_swp.add_argument("--grad-tol", type=float)
    p_swp.add_argument("--prox-tol", type=float)
    p_swp.add_argument("--no-enforce-bounds", action="store_true")
    p_swp.add_argument("--config", help="key = value config file; flags override")
    p_swp.add_argument("--out-dir", default=".")
    p_swp.set_defaults(func=cmd_sweep)

    p_chk = sub.add_parser("corpus-check",
                           help="validate built-in objectives")
    p_chk.add_argument("--objective", help="check a single objective by name")
    p_chk.add_argument("--points", type=int, default=100)
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.set_defaults(func=cmd_corpus_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SaddlescapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
