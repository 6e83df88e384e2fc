"""Trajectory diagnostics built on the momentum Lyapunov function.

The potential is H(x, y) = f(x) + (beta / (2*gamma)) * ||x - y||^2 on pairs
of consecutive iterates. Along proximal-point momentum trajectories with
0 < beta < 1/2 it decreases by at least nu * ||x_next - x_curr||^2 per step
with nu = (1 - 2*beta) / (2*gamma); the certificate below checks that
inequality step by step. For gradient-descent momentum traces the same
certificate is computed but flagged diagnostic-only, since the descent
guarantee is specific to the proximal variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .objectives import Objective, eval_value

if TYPE_CHECKING:  # pragma: no cover
    from .solvers import Trace


def lyapunov_value(obj: Objective, x, y, gamma: float, beta: float) -> float:
    """f(x) + (beta / (2*gamma)) * ||x - y||^2."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    coupling = beta / (2.0 * gamma) * float(np.dot(x - y, x - y))
    return eval_value(obj, x) + coupling


@dataclass
class DescentCertificate:
    """Per-step audit of the Lyapunov descent inequality.

    Step k (1-based, the transition into the k-th recorded state) is a
    violation iff H(w^{k+1}) + nu*||x^{k+1}-x^k||^2 > H(w^k) + cert_tol.
    ``diagnostic_only`` marks certificates computed for traces where the
    inequality is not guaranteed (gradient-descent momentum).
    """

    checked_steps: int
    violations: list[tuple[int, float]]
    max_violation: float
    nu: float
    cert_tol: float
    diagnostic_only: bool

    def as_dict(self) -> dict:
        return {
            "checked_steps": self.checked_steps,
            "violations": [[int(k), float(s)] for k, s in self.violations],
            "max_violation": float(self.max_violation),
            "nu": float(self.nu),
            "cert_tol": float(self.cert_tol),
            "diagnostic_only": self.diagnostic_only,
        }


def _trace_scale(trace: "Trace") -> float:
    scale = float(np.max(np.abs(trace.states[0].x_prev), initial=0.0))
    for w in trace.states:
        scale = max(scale, float(np.max(np.abs(w.x_curr), initial=0.0)))
    return scale


def verify_descent(trace: "Trace", obj: Objective, gamma: float, beta: float,
                   cert_tol: float | None = None) -> DescentCertificate:
    """Check the per-step descent inequality along a recorded trajectory.

    The Lyapunov values are recomputed from the stored states. When
    ``cert_tol`` is omitted it defaults to 10 * prox_inner_tol * (1 + scale)
    with scale the largest iterate magnitude, which absorbs the slack an
    inexact inner proximal solve can introduce.
    """
    from .solvers import Algorithm

    if len(trace.states) < 2:
        raise ValueError("descent check needs at least 2 recorded states")
    if cert_tol is None:
        cert_tol = 10.0 * trace.config.prox_inner_tol * (1.0 + _trace_scale(trace))
    nu = (1.0 - 2.0 * beta) / (2.0 * gamma)
    values = [lyapunov_value(obj, w.x_curr, w.x_prev, gamma, beta)
              for w in trace.states]
    violations: list[tuple[int, float]] = []
    for k in range(1, len(trace.states)):
        step = trace.states[k]
        disp = float(np.linalg.norm(step.x_curr - step.x_prev))
        slack = values[k] + nu * disp * disp - values[k - 1]
        if slack > cert_tol:
            violations.append((k, slack))
    max_violation = max((s for _, s in violations), default=0.0)
    return DescentCertificate(
        checked_steps=len(trace.states) - 1,
        violations=violations,
        max_violation=max_violation,
        nu=nu,
        cert_tol=cert_tol,
        diagnostic_only=trace.config.algorithm is Algorithm.HBGD,
    )


def gradient_residual_bound(trace: "Trace", gamma: float, beta: float) -> list[bool]:
    """Per-step check that the gradient norm is bounded by the displacements.

    For proximal-point traces the stationarity of the inner solve gives
    gamma*grad f(x^{k+1}) = x^k - x^{k+1} + beta*(x^k - x^{k-1}) up to the
    inner residual, so ||grad f(x^{k+1})|| is at most (||x^{k+1}-x^k|| +
    beta*||x^k-x^{k-1}||)/gamma plus 2*prox_inner_tol/gamma. Gradient-descent
    traces satisfy the same bound with the gradient taken at x^k, where the
    update rearranges exactly; only rounding slack is allowed there.
    """
    from .solvers import Algorithm

    if gamma <= 0:
        raise ValueError("gamma must be positive")
    n = len(trace.states)
    if n < 2:
        return []
    is_prox = trace.config.algorithm is Algorithm.HBPPA
    checks = []
    for k in range(1, n):
        bound = (trace.displacements[k] + beta * trace.displacements[k - 1]) / gamma
        if is_prox:
            grad_norm = trace.grad_norms[k]
            slack = 2.0 * trace.config.prox_inner_tol / gamma
        else:
            grad_norm = trace.grad_norms[k - 1]
            slack = 1e-10 * (1.0 + bound)
        checks.append(bool(grad_norm <= bound + slack))
    return checks


def displacement_summability(trace: "Trace") -> tuple[np.ndarray, bool]:
    """Cumulative path length and whether it has plateaued.

    Returns the partial sums S_k of the per-step displacements and True when
    the last 10% of steps contribute at most 1e-6 * S_final (vacuously true
    for single-entry traces).
    """
    sums = np.cumsum(np.asarray(trace.displacements, dtype=float))
    n = sums.size
    if n <= 1:
        return sums, True
    total = float(sums[-1])
    tail = max(1, n // 10)
    tail_contribution = total - float(sums[n - tail - 1])
    return sums, bool(tail_contribution <= 1e-6 * total)
