import numpy as np
import pytest
from numpy.testing import assert_allclose

import saddlescape as ss
from saddlescape import Algorithm, ConfigRejected, ProxNonConvergence, Termination


def hbgd_cfg(gamma, beta, **kw):
    return ss.SolverConfig(Algorithm.HBGD, gamma=gamma, beta=beta, **kw)


def hbppa_cfg(gamma, beta, **kw):
    return ss.SolverConfig(Algorithm.HBPPA, gamma=gamma, beta=beta, **kw)


def simulate_scalar_hbgd(a, gamma, beta, x_prev, x_curr, obj):
    """Reference recurrence for f = 0.5*a*x^2, mirroring the step's operation order."""
    xp = np.array([x_prev])
    xc = np.array([x_curr])
    history = [(xc.copy(), xp.copy())]
    while True:
        g = a * xc
        xn = xc - gamma * g + beta * (xc - xp)
        xp, xc = xc, xn
        history.append((xc.copy(), xp.copy()))
        if abs(xc[0]) > 1e12 or np.linalg.norm(a * xc) <= 1e-8 or len(history) > 5000:
            return history


def test_hbgd_step_hand_value():
    q = ss.quadratic_saddle((1.0,))
    out = ss.hbgd_step(q, ss.AugmentedState([1.0], [2.0]), gamma=0.5, beta=0.25)
    # 1 - 0.5*1 + 0.25*(1 - 2) = 0.25
    assert out.x_curr[0] == 0.25
    assert out.x_prev[0] == 1.0


def test_hbgd_fixed_point_at_critical_point():
    q = ss.quadratic_saddle((1.0,))
    out = ss.hbgd_step(q, ss.AugmentedState([0.0], [0.0]), gamma=0.7, beta=0.3)
    assert out.x_curr[0] == 0.0 and out.x_prev[0] == 0.0


def test_hbgd_beta_zero_is_plain_gradient_step(corpus):
    rng = np.random.default_rng(4)
    for obj in corpus:
        for _ in range(10):
            x = obj.sample_uniform(rng)
            x_prev = obj.sample_uniform(rng)
            out = ss.hbgd_step(obj, ss.AugmentedState(x, x_prev), gamma=0.05, beta=0.0)
            plain = x - 0.05 * ss.eval_gradient(obj, x)
            assert np.array_equal(out.x_curr, plain)


def test_step_structure_preservation(corpus):
    rng = np.random.default_rng(5)
    for obj in corpus:
        gamma = 0.5 / obj.lipschitz_bound
        cfg = hbppa_cfg(gamma, 0.25, enforce_bounds=False)
        for _ in range(5):
            w = ss.AugmentedState(obj.sample_uniform(rng), obj.sample_uniform(rng))
            for out in (ss.hbgd_step(obj, w, gamma, 0.25),
                        ss.hbppa_step(obj, w, gamma, 0.25, cfg)):
                assert np.array_equal(out.x_prev, w.x_curr)


def test_prox_scalar_closed_form():
    q = ss.quadratic_saddle((1.0,))
    cfg = hbppa_cfg(0.5, 0.25)
    # argmin 0.5*gamma*y^2 + 0.5*(y-3)^2 = 3 / (1 + 0.5) = 2
    assert_allclose(ss.prox(q, 0.5, np.array([3.0]), cfg), [2.0], rtol=0, atol=1e-14)
    assert_allclose(ss.prox(q, 0.5, np.array([3.0]), cfg, force_numeric=True),
                    [2.0], rtol=0, atol=1e-10)


def test_prox_diagonal_example(quad_saddle):
    cfg = hbppa_cfg(0.5, 0.25)
    # per coordinate z_i / (1 + gamma*a_i) = (3/1.5, 1/0.5)
    out = ss.prox(quad_saddle, 0.5, np.array([3.0, 1.0]), cfg)
    assert_allclose(out, [2.0, 2.0], rtol=0, atol=1e-14)


def test_prox_critical_point_is_fixed(corpus):
    for obj in corpus:
        gamma = 0.5 / obj.lipschitz_bound
        cfg = hbppa_cfg(gamma, 0.25, enforce_bounds=False)
        for point, _ in obj.known_criticals:
            y, iters = ss.prox_newton(obj, gamma, point, cfg)
            assert iters == 0
            assert np.array_equal(y, point)


def test_prox_kkt_residual_and_comparison_inequality(double_well):
    cfg = hbppa_cfg(0.05, 0.25)
    rng = np.random.default_rng(6)
    for _ in range(25):
        z = double_well.sample_uniform(rng)
        y = ss.prox(double_well, 0.05, z, cfg)
        residual = 0.05 * ss.eval_gradient(double_well, y) + (y - z)
        assert np.linalg.norm(residual) <= cfg.prox_inner_tol
        # subproblem value at y cannot exceed the value at the trial point z
        at_y = 0.05 * ss.eval_value(double_well, y) + 0.5 * np.dot(y - z, y - z)
        at_z = 0.05 * ss.eval_value(double_well, z)
        assert at_y <= at_z + 1e-12


def test_prox_rejects_large_gamma_when_enforced(quad_saddle):
    cfg = hbppa_cfg(1.5, 0.25)  # gamma*L = 1.5 >= 1
    with pytest.raises(ConfigRejected):
        ss.prox(quad_saddle, 1.5, np.zeros(2), cfg)


def test_prox_nonconvex_subproblem_fails():
    q = ss.quadratic_saddle((-1.0,))
    cfg = hbppa_cfg(1.5, 0.25, enforce_bounds=False)
    with pytest.raises(ProxNonConvergence):
        ss.prox(q, 1.5, np.array([1.0]), cfg)
    with pytest.raises(ProxNonConvergence):
        ss.prox(q, 1.5, np.array([1.0]), cfg, force_numeric=True)


def test_hbppa_step_hand_value():
    q = ss.quadratic_saddle((1.0,))
    cfg = hbppa_cfg(0.5, 0.25)
    out = ss.hbppa_step(q, ss.AugmentedState([1.0], [2.0]), 0.5, 0.25, cfg)
    # extrapolate to 1 + 0.25*(1 - 2) = 0.75, then prox: 0.75/1.5 = 0.5
    assert_allclose(out.x_curr, [0.5], rtol=0, atol=1e-14)
    assert out.x_prev[0] == 1.0


def test_hbppa_beta_zero_is_plain_proximal_step():
    q = ss.quadratic_saddle((1.0,))
    cfg = hbppa_cfg(1.0, 0.0, enforce_bounds=False)  # gamma = 1/L needs bounds off
    out = ss.hbppa_step(q, ss.AugmentedState([3.0], [-5.0]), 1.0, 0.0, cfg)
    assert_allclose(out.x_curr, [1.5], rtol=0, atol=1e-14)


def test_hbppa_stationarity_identity(double_well):
    cfg = hbppa_cfg(0.05, 0.25)
    rng = np.random.default_rng(7)
    for _ in range(20):
        w = ss.AugmentedState(double_well.sample_uniform(rng),
                              double_well.sample_uniform(rng))
        out = ss.hbppa_step(double_well, w, 0.05, 0.25, cfg)
        identity = (0.05 * ss.eval_gradient(double_well, out.x_curr)
                    + out.x_curr - w.x_curr - 0.25 * (w.x_curr - w.x_prev))
        assert np.linalg.norm(identity) <= cfg.prox_inner_tol


def test_valid_stepsize_range_exact_values():
    assert ss.valid_stepsize_range(Algorithm.HBGD, 0.25, 2.0) == (0.0, 0.75)
    assert ss.valid_stepsize_range(Algorithm.HBPPA, 0.25, 2.0) == (0.0, 0.5)


def test_valid_stepsize_range_small_beta_limit():
    # upper bound approaches 2/L as beta -> 0+
    _, hi = ss.valid_stepsize_range(Algorithm.HBGD, 1e-9, 1.0)
    assert_allclose(hi, 2.0, rtol=1e-8)


@pytest.mark.parametrize("algorithm, beta", [
    (Algorithm.HBGD, 0.0), (Algorithm.HBGD, 1.0), (Algorithm.HBGD, -0.1),
    (Algorithm.HBPPA, 0.0), (Algorithm.HBPPA, 0.5), (Algorithm.HBPPA, 0.7),
])
def test_valid_stepsize_range_rejects_bad_beta(algorithm, beta):
    with pytest.raises(ConfigRejected):
        ss.valid_stepsize_range(algorithm, beta, 1.0)


def test_valid_stepsize_range_rejects_bad_L():
    with pytest.raises(ConfigRejected):
        ss.valid_stepsize_range(Algorithm.HBGD, 0.25, 0.0)


def test_run_rejects_out_of_bounds_configs(quad_saddle):
    w0 = ss.AugmentedState(np.array([0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(ConfigRejected):
        ss.run(quad_saddle, w0, hbgd_cfg(gamma=1.6, beta=0.25))  # > 2*0.75/1
    with pytest.raises(ConfigRejected):
        ss.run(quad_saddle, w0, hbppa_cfg(gamma=1.2, beta=0.25))  # > 1/1
    with pytest.raises(ConfigRejected):
        ss.run(quad_saddle, w0, hbgd_cfg(gamma=0.5, beta=0.0))  # beta gate


def test_run_accepts_in_bounds_configs(quad_saddle):
    w0 = ss.AugmentedState(np.array([0.5, 0.0]), np.array([0.5, 0.0]))
    trace = ss.run(quad_saddle, w0, hbgd_cfg(gamma=0.5, beta=0.25))
    assert trace.termination is Termination.GRAD_TOLERANCE_MET


def test_run_matches_scalar_recurrence_oracle():
    q = ss.quadratic_saddle((1.0,))
    cfg = hbgd_cfg(gamma=0.5, beta=0.25)
    trace = ss.run(q, ss.AugmentedState([1.0], [1.0]), cfg)
    assert trace.termination is Termination.GRAD_TOLERANCE_MET
    assert abs(trace.final_point[0]) <= 1e-8
    oracle = simulate_scalar_hbgd(1.0, 0.5, 0.25, 1.0, 1.0, q)
    assert len(oracle) == len(trace.states)
    for (xc, xp), state in zip(oracle, trace.states):
        assert np.array_equal(xc, state.x_curr)
        assert np.array_equal(xp, state.x_prev)


def test_run_critical_start_terminates_at_first_state(corpus):
    for obj in corpus:
        gamma = 0.5 / obj.lipschitz_bound
        for algo in Algorithm:
            cfg = ss.SolverConfig(algo, gamma=gamma, beta=0.25, enforce_bounds=False)
            for point, _ in obj.known_criticals:
                trace = ss.run(obj, ss.AugmentedState(point, point), cfg)
                assert trace.termination is Termination.GRAD_TOLERANCE_MET
                assert trace.iterations == 1


def test_run_divergence_matches_geometric_growth():
    # x_{k+1} = (1 - 2.2)x_k = -1.2 x_k grows as 1.2^k
    q = ss.quadratic_saddle((1.0,))
    cfg = hbgd_cfg(gamma=2.2, beta=0.0, enforce_bounds=False)
    trace = ss.run(q, ss.AugmentedState([1.0], [1.0]), cfg)
    assert trace.termination is Termination.DIVERGED
    for k, state in enumerate(trace.states):
        assert_allclose(abs(state.x_curr[0]), 1.2 ** k, rtol=1e-9)
    assert abs(trace.states[-1].x_curr[0]) > 1e12
    assert all(abs(s.x_curr[0]) <= 1e12 for s in trace.states[:-1])


def test_run_max_iters_termination(double_well):
    cfg = hbgd_cfg(gamma=0.01, beta=0.25, max_iters=5, enforce_bounds=False)
    trace = ss.run(double_well, ss.AugmentedState([2.0, 2.0], [2.0, 2.0]), cfg)
    assert trace.termination is Termination.MAX_ITERS
    assert len(trace.states) == 6  # initial state plus five steps


def test_run_series_lengths_agree(double_well):
    cfg = hbppa_cfg(gamma=0.05, beta=0.25)
    trace = ss.run(double_well, ss.AugmentedState([1.0, 0.5], [0.9, 0.4]), cfg)
    n = len(trace.states)
    assert len(trace.grad_norms) == n
    assert len(trace.lyapunov_values) == n
    assert len(trace.displacements) == n
    assert len(trace.prox_inner_iters) == n


def test_run_is_deterministic(double_well):
    cfg = hbppa_cfg(gamma=0.05, beta=0.25)
    w0 = ss.AugmentedState([1.3, -0.4], [1.1, -0.2])
    a = ss.run(double_well, w0, cfg)
    b = ss.run(double_well, w0, cfg)
    assert a.termination == b.termination
    assert a.grad_norms == b.grad_norms
    assert a.lyapunov_values == b.lyapunov_values
    assert a.displacements == b.displacements
    for wa, wb in zip(a.states, b.states):
        assert np.array_equal(wa.x_curr, wb.x_curr)


def test_run_lyapunov_series_matches_definition(double_well):
    cfg = hbgd_cfg(gamma=0.1, beta=0.25)
    trace = ss.run(double_well, ss.AugmentedState([1.0, 0.7], [0.8, 0.6]), cfg)
    for w, value in zip(trace.states, trace.lyapunov_values):
        assert_allclose(value, ss.lyapunov_value(double_well, w.x_curr, w.x_prev,
                                                 0.1, 0.25), rtol=1e-14)


def test_run_dimension_mismatch(double_well):
    cfg = hbgd_cfg(gamma=0.1, beta=0.25)
    with pytest.raises(ValueError):
        ss.run(double_well, ss.AugmentedState([1.0], [1.0]), cfg)


def test_solver_config_rejects_nonsense():
    with pytest.raises(ConfigRejected):
        ss.SolverConfig(Algorithm.HBGD, gamma=0.0, beta=0.25)
    with pytest.raises(ConfigRejected):
        ss.SolverConfig(Algorithm.HBGD, gamma=0.5, beta=-0.1)
    with pytest.raises(ConfigRejected):
        ss.SolverConfig(Algorithm.HBGD, gamma=0.5, beta=0.25, max_iters=0)


def test_augmented_state_validation():
    with pytest.raises(ValueError):
        ss.AugmentedState([1.0, 2.0], [1.0])
