import numpy as np
import pytest
from numpy.testing import assert_allclose

import saddlescape as ss
from saddlescape import Algorithm, Termination


def hbppa_run(obj, start, gamma=0.05, beta=0.25, **kw):
    cfg = ss.SolverConfig(Algorithm.HBPPA, gamma=gamma, beta=beta,
                          enforce_bounds=False, **kw)
    return ss.run(obj, ss.AugmentedState(start, start), cfg), cfg


def test_lyapunov_hand_value():
    q = ss.quadratic_saddle((1.0,))
    # 0.5*1 + (0.25 / (2*0.5)) * (1-3)^2 = 0.5 + 0.25*4 = 1.5
    assert ss.lyapunov_value(q, [1.0], [3.0], gamma=0.5, beta=0.25) == 1.5


def test_lyapunov_coupling_vanishes_when_equal(double_well):
    x = np.array([0.4, -0.9])
    assert ss.lyapunov_value(double_well, x, x, 0.3, 0.25) == \
        ss.eval_value(double_well, x)


def test_lyapunov_beta_zero_is_plain_value(double_well):
    x = np.array([0.4, -0.9])
    y = np.array([1.2, 0.3])
    assert ss.lyapunov_value(double_well, x, y, 0.3, 0.0) == \
        ss.eval_value(double_well, x)


def test_lyapunov_requires_positive_gamma(double_well):
    with pytest.raises(ValueError):
        ss.lyapunov_value(double_well, np.zeros(2), np.zeros(2), 0.0, 0.25)


def test_descent_certificate_clean_on_hbppa(double_well):
    trace, _ = hbppa_run(double_well, np.array([0.5, 0.3]), gamma=0.4)
    cert = ss.verify_descent(trace, double_well, 0.4, 0.25)
    assert cert.violations == []
    assert cert.max_violation == 0.0
    assert cert.nu == (1 - 2 * 0.25) / (2 * 0.4)
    assert cert.nu > 0
    assert not cert.diagnostic_only
    assert cert.checked_steps == len(trace.states) - 1


def test_descent_implies_monotone_lyapunov_series(double_well):
    trace, _ = hbppa_run(double_well, np.array([1.7, -1.3]), gamma=0.4)
    cert = ss.verify_descent(trace, double_well, 0.4, 0.25)
    diffs = np.diff(trace.lyapunov_values)
    assert np.all(diffs <= cert.cert_tol)


def test_descent_flags_corrupted_trace(double_well):
    trace, _ = hbppa_run(double_well, np.array([0.5, 0.3]), gamma=0.4)
    k = len(trace.states) // 2
    far = ss.AugmentedState(trace.states[k].x_curr + np.array([1.5, 1.5]),
                            trace.states[k].x_prev)
    trace.states[k] = far
    cert = ss.verify_descent(trace, double_well, 0.4, 0.25)
    assert len(cert.violations) >= 1
    assert cert.max_violation > 0


def test_descent_constant_trace_at_critical_point(double_well):
    # hand-built stationary trace: two identical states at a minimizer
    cfg = ss.SolverConfig(Algorithm.HBPPA, gamma=0.05, beta=0.25,
                          enforce_bounds=False)
    w = ss.AugmentedState(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    trace = ss.Trace(states=[w, w], grad_norms=[0.0, 0.0],
                     lyapunov_values=[-0.25, -0.25], displacements=[0.0, 0.0],
                     prox_inner_iters=[0, 0],
                     termination=Termination.GRAD_TOLERANCE_MET, config=cfg)
    cert = ss.verify_descent(trace, double_well, 0.05, 0.25)
    assert cert.violations == []


def test_descent_needs_two_states(double_well):
    trace, _ = hbppa_run(double_well, np.array([0.0, 1.0]))  # starts critical
    assert len(trace.states) == 1
    with pytest.raises(ValueError):
        ss.verify_descent(trace, double_well, 0.05, 0.25)


def test_descent_on_hbgd_is_diagnostic_only(double_well):
    cfg = ss.SolverConfig(Algorithm.HBGD, gamma=0.1, beta=0.25)
    trace = ss.run(double_well, ss.AugmentedState([1.0, 0.5], [1.0, 0.5]), cfg)
    cert = ss.verify_descent(trace, double_well, 0.1, 0.25)
    assert cert.diagnostic_only


def test_residual_bound_hbppa_all_true(double_well):
    trace, cfg = hbppa_run(double_well, np.array([1.5, -0.8]), gamma=0.4)
    checks = ss.gradient_residual_bound(trace, 0.4, 0.25)
    assert len(checks) == len(trace.states) - 1
    assert all(checks)


def test_residual_bound_hbgd_holds(double_well):
    cfg = ss.SolverConfig(Algorithm.HBGD, gamma=0.1, beta=0.25)
    trace = ss.run(double_well, ss.AugmentedState([1.5, -0.8], [1.4, -0.7]), cfg)
    assert all(ss.gradient_residual_bound(trace, 0.1, 0.25))


def test_residual_bound_stationary_trace(double_well):
    cfg = ss.SolverConfig(Algorithm.HBPPA, gamma=0.05, beta=0.25,
                          enforce_bounds=False)
    w = ss.AugmentedState(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    trace = ss.Trace(states=[w, w], grad_norms=[0.0, 0.0],
                     lyapunov_values=[-0.25, -0.25], displacements=[0.0, 0.0],
                     prox_inner_iters=[0, 0],
                     termination=Termination.GRAD_TOLERANCE_MET, config=cfg)
    assert ss.gradient_residual_bound(trace, 0.05, 0.25) == [True]


def test_residual_bound_single_state_is_empty(double_well):
    trace, _ = hbppa_run(double_well, np.array([0.0, 1.0]))
    assert ss.gradient_residual_bound(trace, 0.05, 0.25) == []


def test_summability_plateaus_on_converged_run(double_well):
    trace, _ = hbppa_run(double_well, np.array([1.1, -1.6]), gamma=0.4)
    assert trace.termination is Termination.GRAD_TOLERANCE_MET
    sums, plateaued = ss.displacement_summability(trace)
    assert plateaued
    assert sums.size == len(trace.states)
    assert np.all(np.diff(sums) >= 0)


def test_summability_single_entry_vacuous(double_well):
    trace, _ = hbppa_run(double_well, np.array([0.0, 1.0]))
    sums, plateaued = ss.displacement_summability(trace)
    assert sums.size == 1
    assert plateaued


def test_summability_false_on_divergence():
    q = ss.quadratic_saddle((1.0,))
    cfg = ss.SolverConfig(Algorithm.HBGD, gamma=2.2, beta=0.0,
                          enforce_bounds=False)
    trace = ss.run(q, ss.AugmentedState([1.0], [1.0]), cfg)
    assert trace.termination is Termination.DIVERGED
    _, plateaued = ss.displacement_summability(trace)
    assert not plateaued


def test_lyapunov_dominates_value_and_grows_on_rays(double_well):
    # H(x, y) >= f(x) pointwise, and H is coercive when f is
    rng = np.random.default_rng(10)
    for _ in range(25):
        x = double_well.sample_uniform(rng)
        y = double_well.sample_uniform(rng)
        assert ss.lyapunov_value(double_well, x, y, 0.4, 0.25) >= \
            ss.eval_value(double_well, x)
    direction = np.array([0.3, -1.0])
    radii = [1.0, 4.0, 16.0, 64.0]
    values = [ss.lyapunov_value(double_well, r * direction, -r * direction,
                                0.4, 0.25) for r in radii]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_lyapunov_limit_matches_terminal_value(double_well):
    trace, _ = hbppa_run(double_well, np.array([1.2, 0.9]), gamma=0.4)
    final_f = ss.eval_value(double_well, trace.final_point)
    # displacements vanish at the limit, so the coupling term does too
    assert abs(trace.lyapunov_values[-1] - final_f) <= 1e-12
