"""Critical-point classification and linear stability of the update maps.

Both solvers are one-step maps on the augmented state w = (x_curr, x_prev).
Their Jacobians are 2N x 2N block-companion matrices:

* gradient variant:  [[(1+beta)*I - gamma*hess f(x),  -beta*I], [I, 0]]
* proximal variant:  [[(1+beta)*A, -beta*A], [I, 0]] with
  A = (gamma*hess f(g) + I)^-1 evaluated at the inner-solver output g.

At a fixed point (x*, x*) over a strict saddle, the dominant eigenvalue is
real, exceeds one, and has a closed form from a scalar quadratic in the
extreme eigenvalue of the relevant block; a Jacobian eigenvalue of
magnitude above one (by more than ``verdict_tol``) certifies the fixed
point unstable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigRejected
from .linalg import (charpoly_coefficients, durand_kerner_roots, jacobi_spectrum,
                     power_iteration, real_roots_sturm)
from .objectives import (CURVATURE_TOL_DEFAULT, GRAD_TOL_DEFAULT, CriticalPointClass,
                         Objective, eval_gradient, eval_hessian)
from .solvers import Algorithm, SolverConfig, prox

VERDICT_TOL_DEFAULT = 1e-6


class Verdict(enum.Enum):
    UNSTABLE_FIXED_POINT = "UnstableFixedPoint"
    STABLE_OR_INCONCLUSIVE = "StableOrInconclusive"


def classify_critical_point(obj: Objective, x, grad_tol: float = GRAD_TOL_DEFAULT,
                            curvature_tol: float = CURVATURE_TOL_DEFAULT) -> CriticalPointClass:
    """Classify x by gradient norm and the smallest Hessian eigenvalue.

    NotCritical when ||grad f(x)|| > grad_tol; otherwise StrictSaddle /
    LocalMinCandidate / Degenerate according to the sign of the smallest
    Hessian eigenvalue against ``curvature_tol``.
    """
    if float(np.linalg.norm(eval_gradient(obj, x))) > grad_tol:
        return CriticalPointClass.NOT_CRITICAL
    spectrum = hessian_spectrum(eval_hessian(obj, x))
    smallest = float(spectrum[0])
    if smallest < -curvature_tol:
        return CriticalPointClass.STRICT_SADDLE
    if smallest > curvature_tol:
        return CriticalPointClass.LOCAL_MIN_CANDIDATE
    return CriticalPointClass.DEGENERATE


def hessian_spectrum(H) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi."""
    return jacobi_spectrum(H)


def companion_jacobian_hbgd(obj: Objective, x, gamma: float, beta: float) -> np.ndarray:
    """Jacobian of the gradient-momentum map at augmented state (x, x)."""
    H = eval_hessian(obj, x)
    n = obj.dim
    top_left = (1.0 + beta) * np.eye(n) - gamma * H
    return np.block([[top_left, -beta * np.eye(n)],
                     [np.eye(n), np.zeros((n, n))]])


def companion_jacobian_hbppa(obj: Objective, x, gamma: float, beta: float,
                             cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """Jacobian of the proximal-momentum map at augmented state (x, x).

    The point the Hessian is read at is the inner-solver output
    g = prox_{gamma f}(x) (the extrapolation vanishes when both blocks
    coincide); the resolvent block A solves (gamma*hess f(g) + I) A = I.
    Requires gamma < 1/L so that the system is positive definite.
    """
    if gamma * obj.lipschitz_bound >= 1.0:
        raise ConfigRejected(
            f"resolvent needs gamma < 1/L; got gamma={gamma!r}, "
            f"L={obj.lipschitz_bound!r} ({obj.name})")
    if cfg is None:
        cfg = SolverConfig(algorithm=Algorithm.HBPPA, gamma=gamma,
                           beta=max(beta, 0.0), enforce_bounds=False)
    g = prox(obj, gamma, np.asarray(x, dtype=float), cfg)
    n = obj.dim
    system = gamma * eval_hessian(obj, g) + np.eye(n)
    try:
        np.linalg.cholesky(system)
    except np.linalg.LinAlgError:
        raise ConfigRejected(
            f"{obj.name}: gamma*hess f + I is not positive definite at the "
            f"prox output (gamma={gamma!r})") from None
    A = np.linalg.solve(system, np.eye(n))
    return np.block([[(1.0 + beta) * A, -beta * A],
                     [np.eye(n), np.zeros((n, n))]])


def analytic_unstable_root_hbgd(lambda_max_A: float, beta: float) -> float:
    """Larger root of lambda + beta/lambda = lambda_max_A.

    Defined for 0 < beta < 1 and lambda_max_A > 1 + beta (the saddle case,
    where lambda_max_A = 1 + beta - gamma*lambda_min(hess) > 1 + beta for
    any gamma > 0). The discriminant then exceeds (1-beta)^2 >= 0, so the
    root is real, and it exceeds 1.
    """
    if not 0.0 < beta < 1.0:
        raise ConfigRejected(f"requires 0 < beta < 1, got {beta!r}")
    if lambda_max_A <= 1.0 + beta:
        raise ConfigRejected(
            f"requires lambda_max_A > 1 + beta; got {lambda_max_A!r} "
            f"with beta={beta!r}")
    return 0.5 * (lambda_max_A + np.sqrt(lambda_max_A ** 2 - 4.0 * beta))


def analytic_unstable_root_hbppa(lambda_max_A: float, beta: float) -> float:
    """Larger root of lambda^2 + (beta - (1+beta)*lambda) * lambda_max_A = 0.

    Defined for 0 < beta < 1/2 and lambda_max_A > 1 (resolvent extreme above
    one, the saddle case). The discriminant (1+beta)^2*m^2 - 4*beta*m equals
    4*beta*m*(m-1) + (1-beta)^2*m^2 >= 0, so both roots are real; the value
    of the quadratic at 1 is 1 - lambda_max_A < 0, so the larger root
    exceeds 1.
    """
    if not 0.0 < beta < 0.5:
        raise ConfigRejected(f"requires 0 < beta < 1/2, got {beta!r}")
    if lambda_max_A <= 1.0:
        raise ConfigRejected(f"requires lambda_max_A > 1, got {lambda_max_A!r}")
    m = lambda_max_A
    disc = (1.0 + beta) ** 2 * m * m - 4.0 * beta * m
    return 0.5 * ((1.0 + beta) * m + np.sqrt(disc))


@dataclass(frozen=True)
class DominantEigenvalue:
    magnitude: float
    converged: bool  # False: power iteration never settled; polynomial estimate


def dominant_eigenvalue_info(matrix, restarts: int = 8, max_iters: int = 10000,
                             tol: float = 1e-12) -> DominantEigenvalue:
    """Largest eigenvalue magnitude of a square matrix.

    Power iteration with seeded random restarts; convergence means the
    Rayleigh-quotient magnitude settled to ``tol``. When no restart settles
    (e.g. a complex dominant pair of equal magnitude) the magnitude is
    recovered from the characteristic polynomial's roots instead and the
    result is flagged not converged. For matrices of dimension <= 10 a
    converged power-iteration value is cross-checked against Sturm-sequence
    real-root bracketing of the characteristic polynomial.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    n = M.shape[0]
    if n == 0:
        return DominantEigenvalue(0.0, True)
    if n == 1:
        return DominantEigenvalue(abs(float(M[0, 0])), True)
    for seed in range(restarts):
        magnitude, converged = power_iteration(M, seed, max_iters, tol)
        if converged:
            if n <= 10:
                real_roots = real_roots_sturm(charpoly_coefficients(M))
                if real_roots.size:
                    candidate = float(np.max(np.abs(real_roots)))
                    if abs(candidate - magnitude) > 1e-8 * max(1.0, magnitude):
                        return DominantEigenvalue(max(candidate, magnitude), False)
            return DominantEigenvalue(magnitude, True)
    roots = durand_kerner_roots(charpoly_coefficients(M))
    estimate = float(np.max(np.abs(roots))) if roots.size else 0.0
    return DominantEigenvalue(estimate, False)


def dominant_eigenvalue(matrix, restarts: int = 8, max_iters: int = 10000,
                        tol: float = 1e-12) -> float:
    return dominant_eigenvalue_info(matrix, restarts, max_iters, tol).magnitude


@dataclass(eq=False)
class StabilityReport:
    """Stability verdict for a candidate fixed point of one update map.

    ``a_matrix_extreme`` is the extreme eigenvalue of the inner block
    ((1+beta)*I - gamma*hess for the gradient variant; the resolvent's
    largest eigenvalue 1/(1 + gamma*lambda_min(hess)) for the proximal
    variant). ``analytic_unstable_root`` is filled only at strict saddles
    with admissible parameters.
    """

    point: np.ndarray
    critical_class: CriticalPointClass
    hessian_spectrum: np.ndarray
    a_matrix_extreme: float
    companion_dominant: float
    analytic_unstable_root: Optional[float]
    verdict: Verdict
    jacobian_det_magnitude: float

    def as_dict(self) -> dict:
        return {
            "point": [float(v) for v in self.point],
            "critical_class": self.critical_class.value,
            "hessian_spectrum": [float(v) for v in self.hessian_spectrum],
            "a_matrix_extreme": float(self.a_matrix_extreme),
            "companion_dominant": float(self.companion_dominant),
            "analytic_unstable_root": (None if self.analytic_unstable_root is None
                                       else float(self.analytic_unstable_root)),
            "verdict": self.verdict.value,
            "jacobian_det_magnitude": float(self.jacobian_det_magnitude),
        }


def stability_report(obj: Objective, x, algorithm: Algorithm, gamma: float,
                     beta: float, cfg: Optional[SolverConfig] = None,
                     grad_tol: float = GRAD_TOL_DEFAULT,
                     curvature_tol: float = CURVATURE_TOL_DEFAULT,
                     verdict_tol: float = VERDICT_TOL_DEFAULT) -> StabilityReport:
    """Assemble the full stability report for a point.

    The verdict is UnstableFixedPoint exactly when the numerically computed
    dominant Jacobian eigenvalue magnitude exceeds 1 + verdict_tol;
    degenerate critical points therefore always come out
    StableOrInconclusive.
    """
    x = np.asarray(x, dtype=float)
    spectrum = hessian_spectrum(eval_hessian(obj, x))
    critical_class = classify_critical_point(obj, x, grad_tol, curvature_tol)
    if algorithm is Algorithm.HBGD:
        jacobian = companion_jacobian_hbgd(obj, x, gamma, beta)
        a_extreme = 1.0 + beta - gamma * float(spectrum[0])
        analytic_fn = analytic_unstable_root_hbgd
    else:
        jacobian = companion_jacobian_hbppa(obj, x, gamma, beta, cfg)
        a_extreme = 1.0 / (1.0 + gamma * float(spectrum[0]))
        analytic_fn = analytic_unstable_root_hbppa
    dominant = dominant_eigenvalue_info(jacobian)
    analytic_root = None
    if critical_class is CriticalPointClass.STRICT_SADDLE:
        try:
            analytic_root = float(analytic_fn(a_extreme, beta))
        except ConfigRejected:
            analytic_root = None
    verdict = (Verdict.UNSTABLE_FIXED_POINT
               if dominant.magnitude > 1.0 + verdict_tol
               else Verdict.STABLE_OR_INCONCLUSIVE)
    return StabilityReport(
        point=x,
        critical_class=critical_class,
        hessian_spectrum=spectrum,
        a_matrix_extreme=a_extreme,
        companion_dominant=dominant.magnitude,
        analytic_unstable_root=analytic_root,
        verdict=verdict,
        jacobian_det_magnitude=abs(float(np.linalg.det(jacobian))),
    )
