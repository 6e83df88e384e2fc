"""Twice-differentiable test objectives with analytic derivatives.

Each objective bundles value/gradient/Hessian callables, a certified bound
on the Hessian spectral norm over a declared box region, and its known
critical points. The built-in corpus:

* ``quadratic_saddle`` -- 0.5 * sum(a_i * x_i^2) for a configurable spectrum
  ``a``; exercises the linear theory exactly and has a closed-form proximal
  map.
* ``double_well``      -- 0.5*x^2 - 0.5*y^2 + 0.25*y^4; coercive polynomial
  with a strict saddle at the origin and minima at (0, +-1).
* ``monkey_saddle``    -- x^3 - 3*x*y^2; degenerate critical point at the
  origin, a negative control for classification.

Analytic derivatives are validated against central finite differences via
``check_gradient_fd`` / ``check_hessian_fd`` / ``corpus_self_check``.
Objectives are immutable and stateless, so evaluators are safe to call
concurrently.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigRejected, CorpusInconsistency, NumericalFailure, ProxNonConvergence
from .linalg import spectral_norm_symmetric

GRAD_TOL_DEFAULT = 1e-8
CURVATURE_TOL_DEFAULT = 1e-6
FD_STEP_DEFAULT = 1e-5


class CriticalPointClass(enum.Enum):
    """Classification of a point by gradient norm and extreme Hessian curvature."""

    LOCAL_MIN_CANDIDATE = "LocalMinCandidate"
    STRICT_SADDLE = "StrictSaddle"
    DEGENERATE = "Degenerate"
    NOT_CRITICAL = "NotCritical"


@dataclass(frozen=True, eq=False)
class SaddleProbeSpec:
    """Analytic description of a strict saddle's stable slice.

    ``start`` lies exactly on the stable slice, so the trajectory from it
    stays on the slice and converges to ``saddle``; ``unstable_direction``
    is a unit vector spanning an expanding direction at the saddle.
    """

    saddle: np.ndarray
    start: np.ndarray
    unstable_direction: np.ndarray


@dataclass(frozen=True, eq=False)
class Objective:
    """A C^2 objective on R^dim with certified curvature over ``region``.

    ``lipschitz_bound`` bounds the Hessian spectral norm over the box
    ``region = (lo, hi)``; initial points for experiments are drawn from
    that box. ``known_criticals`` lists analytic critical points with their
    expected classification. ``prox_exact``, when present, is a closed-form
    proximal map ``(gamma, z) -> argmin_x gamma*f(x) + 0.5*||x - z||^2``.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    region: tuple[np.ndarray, np.ndarray]
    known_criticals: tuple[tuple[np.ndarray, CriticalPointClass], ...]
    coercive: bool
    prox_exact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    saddle_probe: Optional[SaddleProbeSpec] = None

    def in_region(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        lo, hi = self.region
        return bool(np.all(x >= lo) and np.all(x <= hi))

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        lo, hi = self.region
        return rng.uniform(lo, hi)

    def strict_saddles(self) -> list[np.ndarray]:
        return [p for p, c in self.known_criticals
                if c is CriticalPointClass.STRICT_SADDLE]


def _check_dim(obj: Objective, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (obj.dim,):
        raise ValueError(f"{obj.name} expects vectors of length {obj.dim}, "
                         f"got shape {x.shape}")
    return x


def eval_value(obj: Objective, x) -> float:
    """f(x) with dimension and finiteness checks."""
    x = _check_dim(obj, x)
    v = float(obj.value(x))
    if not np.isfinite(v):
        raise NumericalFailure(f"{obj.name}: non-finite value at {x!r}")
    return v


def eval_gradient(obj: Objective, x) -> np.ndarray:
    """grad f(x) with dimension and finiteness checks."""
    x = _check_dim(obj, x)
    g = np.asarray(obj.gradient(x), dtype=float)
    if g.shape != (obj.dim,):
        raise ValueError(f"{obj.name}: gradient has shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericalFailure(f"{obj.name}: non-finite gradient at {x!r}")
    return g


def eval_hessian(obj: Objective, x) -> np.ndarray:
    """hess f(x) with dimension and finiteness checks."""
    x = _check_dim(obj, x)
    H = np.asarray(obj.hessian(x), dtype=float)
    if H.shape != (obj.dim, obj.dim):
        raise ValueError(f"{obj.name}: Hessian has shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise NumericalFailure(f"{obj.name}: non-finite Hessian at {x!r}")
    return H


def check_gradient_fd(obj: Objective, x, h: float = FD_STEP_DEFAULT) -> float:
    """Worst relative gap between the analytic gradient and central differences.

    Returns max_i |g_i - fd_i| / (1 + |g_i|) where fd is the two-point
    central difference of the value with step ``h``.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = _check_dim(obj, x)
    g = eval_gradient(obj, x)
    worst = 0.0
    for i in range(obj.dim):
        step = np.zeros(obj.dim)
        step[i] = h
        fd = (eval_value(obj, x + step) - eval_value(obj, x - step)) / (2.0 * h)
        worst = max(worst, abs(g[i] - fd) / (1.0 + abs(g[i])))
    return worst


def check_hessian_fd(obj: Objective, x, h: float = FD_STEP_DEFAULT) -> float:
    """Worst relative gap between the analytic Hessian and differenced gradients."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    x = _check_dim(obj, x)
    H = eval_hessian(obj, x)
    worst = 0.0
    for i in range(obj.dim):
        step = np.zeros(obj.dim)
        step[i] = h
        fd_col = (eval_gradient(obj, x + step) - eval_gradient(obj, x - step)) / (2.0 * h)
        for j in range(obj.dim):
            worst = max(worst, abs(H[j, i] - fd_col[j]) / (1.0 + abs(H[j, i])))
    return worst


def _region_corners(obj: Objective) -> list[np.ndarray]:
    if obj.dim > 12:
        return []
    lo, hi = obj.region
    return [np.array(c, dtype=float)
            for c in itertools.product(*zip(lo.tolist(), hi.tolist()))]


def estimate_lipschitz(obj: Objective, samples: int, seed: int = 0) -> float:
    """Largest sampled Hessian spectral norm over the region.

    The sample always includes the region's corner points (where box-extreme
    curvature lives for the built-in corpus) plus ``samples`` uniform draws.
    Raises CorpusInconsistency if the estimate exceeds the declared bound by
    more than a 1e-9 relative margin.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    points = _region_corners(obj)
    points.extend(obj.sample_uniform(rng) for _ in range(samples))
    worst = 0.0
    for p in points:
        worst = max(worst, spectral_norm_symmetric(eval_hessian(obj, p)))
    if worst > obj.lipschitz_bound * (1.0 + 1e-9):
        raise CorpusInconsistency(
            f"{obj.name}: sampled Hessian norm {worst!r} exceeds declared "
            f"bound {obj.lipschitz_bound!r}")
    return worst


def _format_spectrum(spectrum: np.ndarray) -> str:
    return ",".join(format(v, ".12g") for v in spectrum)


def quadratic_saddle(spectrum=(1.0, -1.0), half_width: float = 2.0) -> Objective:
    """0.5 * sum(a_i x_i^2) with diagonal Hessian spectrum ``a``.

    The origin is the only critical point: a strict saddle when some a_i < 0,
    a minimizer when all a_i > 0, degenerate when some a_i == 0. The proximal
    map is closed-form: per coordinate z_i / (1 + gamma a_i).
    """
    a = np.atleast_1d(np.asarray(spectrum, dtype=float))
    if a.size == 0:
        raise ConfigRejected("quadratic_saddle needs a nonempty spectrum")
    lipschitz = float(np.max(np.abs(a)))
    if lipschitz == 0.0:
        raise ConfigRejected("quadratic_saddle spectrum must not be all zero")
    dim = a.size
    origin = np.zeros(dim)
    if np.min(a) < 0.0:
        origin_class = CriticalPointClass.STRICT_SADDLE
    elif np.min(a) > 0.0:
        origin_class = CriticalPointClass.LOCAL_MIN_CANDIDATE
    else:
        origin_class = CriticalPointClass.DEGENERATE

    def prox_exact(gamma: float, z: np.ndarray) -> np.ndarray:
        denom = 1.0 + gamma * a
        if np.any(denom <= 0.0):
            raise ProxNonConvergence(
                "proximal subproblem is unbounded below: "
                f"1 + gamma*a_i = {np.min(denom)!r} <= 0")
        return np.asarray(z, dtype=float) / denom

    probe = None
    if origin_class is CriticalPointClass.STRICT_SADDLE:
        start = np.zeros(dim)
        positive = np.nonzero(a > 0.0)[0]
        if positive.size:
            start[positive[0]] = 0.7
        unstable = np.zeros(dim)
        unstable[int(np.argmin(a))] = 1.0
        probe = SaddleProbeSpec(saddle=origin, start=start,
                                unstable_direction=unstable)

    lo = np.full(dim, -half_width)
    hi = np.full(dim, half_width)
    return Objective(
        name=f"quadratic_saddle:{_format_spectrum(a)}",
        dim=dim,
        value=lambda x: 0.5 * float(a @ (x * x)),
        gradient=lambda x: a * x,
        hessian=lambda x: np.diag(a),
        lipschitz_bound=lipschitz,
        region=(lo, hi),
        known_criticals=((origin, origin_class),),
        coercive=bool(np.all(a > 0.0)),
        prox_exact=prox_exact,
        saddle_probe=probe,
    )


def double_well() -> Objective:
    """0.5*x^2 - 0.5*y^2 + 0.25*y^4 on [-2, 2]^2.

    Coercive polynomial. Critical points: strict saddle at the origin
    (Hessian diag(1, -1)) and minimizers at (0, +-1) (Hessian diag(1, 2)).
    Over the region the Hessian eigenvalues are 1 and 3y^2 - 1, so the
    spectral norm peaks at 11 on the boundary.
    """
    lo = np.array([-2.0, -2.0])
    hi = np.array([2.0, 2.0])
    criticals = (
        (np.array([0.0, 0.0]), CriticalPointClass.STRICT_SADDLE),
        (np.array([0.0, 1.0]), CriticalPointClass.LOCAL_MIN_CANDIDATE),
        (np.array([0.0, -1.0]), CriticalPointClass.LOCAL_MIN_CANDIDATE),
    )
    probe = SaddleProbeSpec(
        saddle=np.array([0.0, 0.0]),
        start=np.array([0.7, 0.0]),
        unstable_direction=np.array([0.0, 1.0]),
    )
    return Objective(
        name="double_well",
        dim=2,
        value=lambda x: 0.5 * x[0] ** 2 - 0.5 * x[1] ** 2 + 0.25 * x[1] ** 4,
        gradient=lambda x: np.array([x[0], -x[1] + x[1] ** 3]),
        hessian=lambda x: np.array([[1.0, 0.0], [0.0, 3.0 * x[1] ** 2 - 1.0]]),
        lipschitz_bound=11.0,
        region=(lo, hi),
        known_criticals=criticals,
        coercive=True,
        saddle_probe=probe,
    )


def monkey_saddle() -> Objective:
    """x^3 - 3*x*y^2 on [-1, 1]^2; degenerate critical point at the origin.

    The Hessian is 6*[[x, -y], [-y, -x]] with eigenvalues +-6*sqrt(x^2+y^2),
    so the spectral norm over the region is 6*sqrt(2). Not coercive.
    """
    lo = np.array([-1.0, -1.0])
    hi = np.array([1.0, 1.0])
    return Objective(
        name="monkey_saddle",
        dim=2,
        value=lambda x: x[0] ** 3 - 3.0 * x[0] * x[1] ** 2,
        gradient=lambda x: np.array([3.0 * x[0] ** 2 - 3.0 * x[1] ** 2,
                                     -6.0 * x[0] * x[1]]),
        hessian=lambda x: np.array([[6.0 * x[0], -6.0 * x[1]],
                                    [-6.0 * x[1], -6.0 * x[0]]]),
        lipschitz_bound=6.0 * float(np.sqrt(2.0)),
        region=(lo, hi),
        known_criticals=((np.array([0.0, 0.0]), CriticalPointClass.DEGENERATE),),
        coercive=False,
    )


def get_objective(name: str) -> Objective:
    """Resolve an objective by its CLI name.

    ``quadratic_saddle`` takes a comma-separated spectrum suffix, e.g.
    ``quadratic_saddle:1,-1`` (which is also the bare-name default).
    Unknown names raise ConfigRejected.
    """
    base, _, suffix = name.partition(":")
    base = base.strip()
    if base == "quadratic_saddle":
        if suffix.strip():
            try:
                spectrum = [float(v) for v in suffix.split(",")]
            except ValueError as exc:
                raise ConfigRejected(
                    f"bad quadratic_saddle spectrum {suffix!r}: {exc}") from exc
            return quadratic_saddle(spectrum)
        return quadratic_saddle()
    if suffix:
        raise ConfigRejected(f"objective {base!r} takes no parameter suffix")
    if base == "double_well":
        return double_well()
    if base == "monkey_saddle":
        return monkey_saddle()
    raise ConfigRejected(f"unknown objective {name!r}")


def default_corpus() -> list[Objective]:
    return [quadratic_saddle((1.0, -1.0)), double_well(), monkey_saddle()]


def corpus_self_check(obj: Objective, points: int = 100, seed: int = 0,
                      grad_rtol: float = 1e-5, hess_rtol: float = 1e-4,
                      fd_step: float = FD_STEP_DEFAULT) -> dict:
    """Validate an objective's declared guarantees at seeded random points.

    Checks, at ``points`` uniform draws from the region: gradient and Hessian
    against central finite differences, Hessian symmetry, and Hessian spectral
    norm against the Lipschitz bound. Also checks that every known critical
    point has gradient norm <= 1e-10. Returns a report dict with an ``ok``
    flag; never raises for a failed check.
    """
    rng = np.random.default_rng(seed)
    max_grad_fd = 0.0
    max_hess_fd = 0.0
    max_asymmetry = 0.0
    for _ in range(points):
        x = obj.sample_uniform(rng)
        max_grad_fd = max(max_grad_fd, check_gradient_fd(obj, x, fd_step))
        max_hess_fd = max(max_hess_fd, check_hessian_fd(obj, x, fd_step))
        H = eval_hessian(obj, x)
        max_asymmetry = max(max_asymmetry, float(np.max(np.abs(H - H.T))))
    criticals_max_grad = 0.0
    for point, _ in obj.known_criticals:
        criticals_max_grad = max(
            criticals_max_grad,
            float(np.linalg.norm(eval_gradient(obj, point))))
    lipschitz_estimate = None
    lipschitz_ok = True
    message = ""
    try:
        lipschitz_estimate = estimate_lipschitz(obj, samples=points, seed=seed)
    except CorpusInconsistency as exc:
        lipschitz_ok = False
        message = str(exc)
    ok = (max_grad_fd <= grad_rtol and max_hess_fd <= hess_rtol
          and max_asymmetry <= 1e-12 and criticals_max_grad <= 1e-10
          and lipschitz_ok)
    return {
        "name": obj.name,
        "points": points,
        "max_gradient_fd_error": max_grad_fd,
        "max_hessian_fd_error": max_hess_fd,
        "max_hessian_asymmetry": max_asymmetry,
        "criticals_max_grad_norm": criticals_max_grad,
        "lipschitz_estimate": lipschitz_estimate,
        "lipschitz_bound": obj.lipschitz_bound,
        "ok": ok,
        "message": message,
    }
