"""Contract tests for the integration/differentiation/root-finding module."""

import math

import numpy as np
import pytest

from toakit import quadrature as q
from toakit.errors import BudgetExceededError, NoZeroError, TailEstimateError


def test_constant_integral_exact():
    res = q.integrate_finite(lambda x: np.ones_like(x), 0.0, 1.0,
                             rel_tol=1e-12, abs_tol=1e-15)
    assert res.value == pytest.approx(1.0, abs=1e-15)
    assert res.evaluations >= 1


def test_truncated_gaussian_half_mass():
    f = lambda x: np.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)
    res = q.integrate_finite(f, -40.0, 0.0, rel_tol=1e-13, abs_tol=1e-14)
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_error_estimate_honest():
    f = lambda x: np.sin(3.0 * x) ** 2 + x
    res = q.integrate_finite(f, 0.0, 2.0, rel_tol=1e-11)
    exact = 1.0 - math.sin(6.0) * math.cos(6.0) / 6.0 + 2.0  # sin^2 avg + x^2/2
    assert res.value == pytest.approx(exact, rel=1e-10)


def test_linearity_spot_check():
    rng = np.random.default_rng(5)
    alpha, beta = rng.uniform(0.5, 2.0, 2)
    f = lambda x: x ** 3 - 2.0 * x
    g = lambda x: np.cos(x)
    combo = lambda x: alpha * f(x) + beta * g(x)
    a, b = -1.0, 2.0
    i_f = q.integrate_finite(f, a, b, rel_tol=1e-12).value
    i_g = q.integrate_finite(g, a, b, rel_tol=1e-12).value
    i_c = q.integrate_finite(combo, a, b, rel_tol=1e-12).value
    assert i_c == pytest.approx(alpha * i_f + beta * i_g, rel=1e-10, abs=1e-12)


def test_interval_additivity():
    f = lambda x: np.exp(-x) * np.sin(5 * x)
    i_ab = q.integrate_finite(f, 0.0, 1.0, rel_tol=1e-12).value
    i_bc = q.integrate_finite(f, 1.0, 3.0, rel_tol=1e-12).value
    i_ac = q.integrate_finite(f, 0.0, 3.0, rel_tol=1e-12).value
    assert i_ac == pytest.approx(i_ab + i_bc, rel=1e-10, abs=1e-13)


def test_break_points_help_kinked_integrand():
    f = lambda x: np.abs(np.sin(x))
    res = q.integrate_finite(f, 0.0, 2.0 * math.pi, rel_tol=1e-12,
                             break_points=[math.pi])
    assert res.value == pytest.approx(4.0, rel=1e-11)


def test_budget_exceeded_carries_best_estimate():
    f = lambda x: np.sin(1000.0 * x) ** 2 / np.sqrt(np.abs(x - 1.0 / 3.0) + 1e-9)
    with pytest.raises(BudgetExceededError) as exc:
        q.integrate_finite(f, 0.0, 1.0, rel_tol=1e-14, abs_tol=1e-300,
                           max_evals=1500)
    assert np.isfinite(exc.value.best_estimate)
    assert exc.value.abs_error is not None


def test_semi_infinite_exponential():
    res = q.integrate_semi_infinite(lambda s: np.exp(-s), 0.0, rel_tol=1e-12)
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_semi_infinite_gaussian_moment():
    res = q.integrate_semi_infinite(lambda s: s * np.exp(-s * s), 0.0,
                                    rel_tol=1e-12)
    assert res.value == pytest.approx(0.5, abs=1e-12)


def test_semi_infinite_no_decay_raises():
    with pytest.raises(TailEstimateError):
        q.integrate_semi_infinite(lambda s: np.ones_like(s) + s * 0, 0.0,
                                  rel_tol=1e-8, max_doublings=12)


def test_differentiate_polynomial():
    res = q.differentiate_time(lambda t: t * t, 3.0, 0.1)
    assert res.converged
    assert res.value == pytest.approx(6.0, abs=1e-9)


def test_differentiate_sin_at_zero():
    res = q.differentiate_time(math.sin, 0.0, 0.1)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_differentiate_flags_jump():
    step = lambda t: 0.0 if t < 0.5 else 1.0
    res = q.differentiate_time(step, 0.5, 0.1)
    assert not res.converged


def test_find_zero_linear():
    root = q.find_zero(lambda t: t - 1.0, (0.0, 2.0), tol=1e-12)
    assert root.classification == "sign_change"
    assert root.location == pytest.approx(1.0, abs=1e-10)
    assert root.bracket_width > 0


def test_find_zero_tangential():
    root = q.find_zero(lambda t: (t - 1.0) ** 2, (0.0, 2.0), tol=1e-9,
                       zero_threshold=1e-12)
    assert root.classification == "tangential_zero"
    assert root.location == pytest.approx(1.0, abs=1e-4)


def test_find_zero_none_raises():
    with pytest.raises(NoZeroError):
        q.find_zero(lambda t: t * t + 1.0, (0.0, 2.0))


def test_find_zero_result_smaller_than_endpoints():
    f = lambda t: np.cos(3.0 * t)
    root = q.find_zero(f, (0.0, 1.0), tol=1e-12)
    assert abs(f(np.array([root.location]))[0]) <= min(abs(f(np.array([0.0]))[0]),
                                                       abs(f(np.array([1.0]))[0]))


def test_scan_sign_changes():
    roots = q.scan_sign_changes(lambda t: np.sin(t), 0.5, 10.0,
                                points_per_decade=512)
    assert len(roots) == 3
    assert roots[0] == pytest.approx(math.pi, rel=1e-9)
    assert roots[2] == pytest.approx(3 * math.pi, rel=1e-9)


def test_scalar_only_callable_supported():
    res = q.integrate_finite(lambda x: math.exp(-x), 0.0, 1.0, rel_tol=1e-10)
    assert res.value == pytest.approx(1.0 - math.exp(-1.0), rel=1e-9)
