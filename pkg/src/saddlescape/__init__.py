"""Heavy-ball momentum solvers with saddle-escape analysis.

The package bundles: a small corpus of twice-differentiable test objectives
with analytic derivatives (``objectives``), the gradient and proximal-point
momentum update maps plus trajectory runs (``solvers``), linear stability
analysis of the update maps at critical points (``stability``), Lyapunov
descent and residual diagnostics (``lyapunov``), and a reproducible
Monte Carlo experiment harness (``experiments``) with a CLI front end
(``cli``).
"""

__version__ = "0.1.0"

from .errors import (ConfigRejected, CorpusInconsistency, NumericalFailure,
                     ProxNonConvergence, SaddlescapeError)
from .objectives import (CriticalPointClass, Objective, check_gradient_fd,
                         check_hessian_fd, corpus_self_check, default_corpus,
                         double_well, estimate_lipschitz, eval_gradient,
                         eval_hessian, eval_value, get_objective,
                         monkey_saddle, quadratic_saddle)
from .solvers import (Algorithm, AugmentedState, SolverConfig, Termination,
                      Trace, hbgd_step, hbppa_step, prox, prox_newton, run,
                      valid_stepsize_range, validate_config)
from .stability import (StabilityReport, Verdict, analytic_unstable_root_hbgd,
                        analytic_unstable_root_hbppa, classify_critical_point,
                        companion_jacobian_hbgd, companion_jacobian_hbppa,
                        dominant_eigenvalue, dominant_eigenvalue_info,
                        hessian_spectrum, stability_report)
from .lyapunov import (DescentCertificate, displacement_summability,
                       gradient_residual_bound, lyapunov_value, verify_descent)
from .experiments import (EscapeReport, ExperimentConfig, ProbeReport,
                          SweepRow, TrialResult, run_monte_carlo,
                          stable_manifold_probe, stepsize_sweep, trial_seed)

__all__ = [
    "__version__",
    "Algorithm", "AugmentedState", "ConfigRejected", "CorpusInconsistency",
    "CriticalPointClass", "DescentCertificate", "EscapeReport",
    "ExperimentConfig", "NumericalFailure", "Objective", "ProbeReport",
    "ProxNonConvergence", "SaddlescapeError", "SolverConfig",
    "StabilityReport", "SweepRow", "Termination", "Trace", "TrialResult",
    "Verdict",
    "analytic_unstable_root_hbgd", "analytic_unstable_root_hbppa",
    "check_gradient_fd", "check_hessian_fd", "classify_critical_point",
    "companion_jacobian_hbgd", "companion_jacobian_hbppa",
    "corpus_self_check", "default_corpus", "displacement_summability",
    "dominant_eigenvalue", "dominant_eigenvalue_info", "double_well",
    "estimate_lipschitz", "eval_gradient", "eval_hessian", "eval_value",
    "get_objective", "gradient_residual_bound", "hbgd_step", "hbppa_step",
    "hessian_spectrum", "lyapunov_value", "monkey_saddle", "prox",
    "prox_newton", "quadratic_saddle", "run", "run_monte_carlo",
    "stability_report", "stable_manifold_probe", "stepsize_sweep",
    "trial_seed", "valid_stepsize_range", "validate_config", "verify_descent",
]
