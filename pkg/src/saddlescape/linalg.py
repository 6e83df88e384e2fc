"""Small dense linear-algebra kernels for the stability diagnostics.

Everything here targets desk-scale matrices (dimension up to ~20): a cyclic
Jacobi eigensolver for symmetric matrices, power iteration for dominant
eigenvalue magnitudes of nonsymmetric matrices, and characteristic-polynomial
utilities (Faddeev-LeVerrier coefficients, Sturm-sequence real-root
bracketing, Durand-Kerner complex roots) used as independent cross-checks.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalFailure


def jacobi_spectrum(matrix, symmetry_tol: float = 1e-10,
                    off_tol_factor: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.

    Sweeps stop once every off-diagonal magnitude is at most
    ``off_tol_factor`` times the max-norm of the input. Returns eigenvalues
    sorted ascending. Raises ValueError if the input is not square or not
    symmetric to ``symmetry_tol``.
    """
    A = np.array(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        return np.empty(0)
    if np.max(np.abs(A - A.T)) > symmetry_tol:
        raise ValueError("matrix is not symmetric within tolerance "
                         f"{symmetry_tol:g}")
    A = 0.5 * (A + A.T)
    if n == 1:
        return A.diagonal().copy()
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return np.zeros(n)
    threshold = off_tol_factor * scale
    iu = np.triu_indices(n, k=1)
    for _ in range(max_sweeps):
        if float(np.max(np.abs(A[iu]))) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= threshold:
                    continue
                # plane rotation zeroing A[p, q] (symmetric Schur decomposition)
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cp = c * A[:, p] - s * A[:, q]
                cq = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = cp, cq
                rp = c * A[p, :] - s * A[q, :]
                rq = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rp, rq
                A[p, q] = A[q, p] = 0.0
    else:
        raise NumericalFailure("Jacobi iteration did not reach the "
                               f"off-diagonal threshold in {max_sweeps} sweeps")
    return np.sort(A.diagonal())


def spectral_norm_symmetric(matrix) -> float:
    """Largest eigenvalue magnitude of a symmetric matrix."""
    eigs = jacobi_spectrum(matrix)
    return float(np.max(np.abs(eigs))) if eigs.size else 0.0


def power_iteration(matrix, seed: int, max_iters: int = 10000,
                    tol: float = 1e-12) -> tuple[float, bool]:
    """One power-iteration run from a seeded random start.

    Returns ``(magnitude, converged)`` where ``magnitude`` is the magnitude
    of the last Rayleigh quotient and ``converged`` means two successive
    Rayleigh-quotient magnitudes differed by at most ``tol`` twice in a row.
    A complex dominant pair of equal magnitude never converges here.
    """
    M = np.asarray(matrix, dtype=float)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    magnitude = 0.0
    prev = None
    stable = 0
    for _ in range(max_iters):
        w = M @ v
        rayleigh = float(v @ w)
        magnitude = abs(rayleigh)
        if prev is not None and abs(magnitude - abs(prev)) <= tol:
            stable += 1
            if stable >= 2:
                return magnitude, True
        else:
            stable = 0
        prev = rayleigh
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # start vector fell into the kernel; nothing more to extract
            return 0.0, True
        if not np.isfinite(norm_w):
            return magnitude, False
        v = w / norm_w
    return magnitude, False


def charpoly_coefficients(matrix) -> np.ndarray:
    """Monic characteristic-polynomial coefficients, descending powers.

    Uses the Faddeev-LeVerrier recurrence; exact in exact arithmetic and
    adequate in double precision for the small matrices used here.
    """
    A = np.asarray(matrix, dtype=float)
    n = A.shape[0]
    coeffs = np.empty(n + 1)
    coeffs[0] = 1.0
    if n == 0:
        return coeffs
    Mk = A.copy()
    coeffs[1] = -np.trace(A)
    for k in range(2, n + 1):
        Mk = A @ (Mk + coeffs[k - 1] * np.eye(n))
        coeffs[k] = -np.trace(Mk) / k
    return coeffs


def durand_kerner_roots(coeffs, max_iters: int = 800, tol: float = 1e-14) -> np.ndarray:
    """All complex roots of a polynomial by Durand-Kerner iteration.

    ``coeffs`` are descending-power coefficients. Simple roots converge to
    near machine precision; roots of multiplicity m only to ~eps^(1/m),
    which is all their conditioning allows.
    """
    c = np.asarray(coeffs, dtype=complex)
    nonzero = np.nonzero(np.abs(c) > 0.0)[0]
    if nonzero.size == 0:
        raise ValueError("zero polynomial has no defined roots")
    c = c[nonzero[0]:]
    degree = c.size - 1
    if degree == 0:
        return np.empty(0, dtype=complex)
    c = c / c[0]
    z = (0.4 + 0.9j) ** np.arange(1, degree + 1)
    for _ in range(max_iters):
        pz = np.polyval(c, z)
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, 1.0)
        denom = np.prod(diffs, axis=1)
        denom[denom == 0] = 1e-300
        delta = pz / denom
        z = z - delta
        if np.max(np.abs(delta)) <= tol * (1.0 + np.max(np.abs(z))):
            break
    return z


def _trim_leading(p: np.ndarray, rel_tol: float = 0.0) -> np.ndarray:
    scale = float(np.max(np.abs(p))) if p.size else 0.0
    cut = rel_tol * scale
    idx = np.nonzero(np.abs(p) > cut)[0]
    if idx.size == 0:
        return np.zeros(1)
    return np.asarray(p[idx[0]:], dtype=float)


def sturm_chain(coeffs) -> list[np.ndarray]:
    """Sturm sequence of a real polynomial (descending coefficients).

    Each member is rescaled to unit max-norm, which preserves signs. The
    chain is truncated when a remainder is negligible (nontrivial gcd), in
    which case sign-change counts still count distinct real roots.
    """
    p0 = _trim_leading(np.asarray(coeffs, dtype=float))
    p0 = p0 / np.max(np.abs(p0))
    chain = [p0]
    if p0.size > 1:
        p1 = np.polyder(p0)
        chain.append(p1 / np.max(np.abs(p1)))
        while chain[-1].size > 1:
            _, rem = np.polydiv(chain[-2], chain[-1])
            rem = _trim_leading(np.asarray(rem, dtype=float), rel_tol=1e-12)
            m = float(np.max(np.abs(rem)))
            if m < 1e-13:
                break
            chain.append(-rem / m)
    return chain


def _sign_changes(chain: list[np.ndarray], t: float) -> int:
    signs = []
    for p in chain:
        v = float(np.polyval(p, t))
        if v > 1e-300:
            signs.append(1)
        elif v < -1e-300:
            signs.append(-1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def real_roots_sturm(coeffs, tol: float = 1e-13) -> np.ndarray:
    """Distinct real roots of a polynomial, by Sturm counts plus bisection.

    Roots are bracketed inside the Cauchy bound and each isolated root is
    bisected down to relative width ``tol``. Multiple roots are reported
    once. Returns roots sorted ascending.
    """
    p = _trim_leading(np.asarray(coeffs, dtype=float))
    if p.size <= 1:
        return np.empty(0)
    chain = sturm_chain(p)
    bound = 1.0 + float(np.max(np.abs(p[1:] / p[0]))) if p.size > 1 else 1.0
    lo = -bound - 0.4969871  # offsets keep endpoints away from exact roots
    hi = bound + 0.5030129
    count = lambda t: _sign_changes(chain, t)  # noqa: E731
    work = [(lo, hi, count(lo), count(hi))]
    roots = []
    while work:
        a, b, va, vb = work.pop()
        k = va - vb
        if k <= 0:
            continue
        if k == 1 or (b - a) <= tol * max(1.0, abs(a), abs(b)):
            x, y, vx = a, b, va
            while (y - x) > tol * max(1.0, abs(x), abs(y)):
                mid = 0.5 * (x + y)
                vm = count(mid)
                if vx - vm >= 1:
                    y = mid
                else:
                    x, vx = mid, vm
            roots.extend([0.5 * (x + y)] * k)
        else:
            mid = 0.5 * (a + b)
            vm = count(mid)
            work.append((a, mid, va, vm))
            work.append((mid, b, vm, vb))
    return np.sort(np.asarray(roots))
