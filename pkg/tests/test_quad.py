import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_stack.errors import BracketError
from casimir_stack.quad import (QuadratureSpec, find_root_monotone, integrate_2d_semi_inf,
                                integrate_interval, integrate_semi_inf, trapezoid_reference)

Q = QuadratureSpec()


def _contract(est, quad=Q):
    assert est.error_estimate >= 0
    if est.converged:
        assert est.error_estimate <= max(quad.rel_tol * abs(est.value), quad.abs_tol)


def test_exponential_integrates_to_one():
    est = integrate_semi_inf(lambda x: np.exp(-x), Q)
    assert est.converged
    assert est.value == pytest.approx(1.0, rel=1e-8)
    _contract(est)


def test_bose_cubic_matches_zeta_closed_form():
    def f(x):
        with np.errstate(over="ignore"):
            return x ** 3 / np.expm1(2 * x)

    est = integrate_semi_inf(f, Q, scale=0.5)
    assert est.value == pytest.approx(np.pi ** 4 / 240, rel=1e-8)
    assert np.pi ** 4 / 240 == pytest.approx(0.4058712, abs=1e-7)
    _contract(est)


def test_zero_integrand_is_exactly_zero():
    est = integrate_semi_inf(lambda x: np.zeros_like(x), Q)
    assert est.value == 0.0
    assert est.converged


def test_separable_2d():
    est = integrate_2d_semi_inf(lambda x, y: np.exp(-x - y), Q)
    assert est.value == pytest.approx(1.0, rel=1e-8)


def test_vacuum_force_magnitude_2d():
    def f(q, w):
        Q2 = np.sqrt(q * q + w * w)
        with np.errstate(over="ignore"):
            return q * 2 * Q2 / np.expm1(2 * Q2)

    est = integrate_2d_semi_inf(f, Q, scale_x=0.5, scale_y=0.5)
    assert 2 / (2 * np.pi) ** 2 * est.value == pytest.approx(np.pi ** 2 / 240, rel=1e-8)


def test_gaussian_quarter_plane():
    est = integrate_2d_semi_inf(lambda x, y: np.exp(-x * x - y * y), Q)
    assert est.value == pytest.approx(np.pi / 4, rel=1e-8)


def test_finite_interval_with_breakpoints():
    est = integrate_interval(lambda x: np.abs(x - 0.3), 0.0, 1.0, Q, points=[0.3])
    assert est.value == pytest.approx(0.3 ** 2 / 2 + 0.7 ** 2 / 2, rel=1e-12)


def test_non_convergence_is_flagged():
    shallow = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_depth=4)
    est = integrate_semi_inf(lambda x: 1.0 / np.sqrt(np.abs(x - 1.0) + 1e-12) * np.exp(-x), shallow)
    assert not est.converged


@pytest.mark.parametrize("f, target, bracket, expected", [
    (lambda x: x, math.pi, (0.0, 10.0), math.pi),
    (lambda x: 0.19 * x, 1.0, (0.0, 10.0), 1 / 0.19),
    (np.exp, 2.0, (0.0, 2.0), math.log(2.0)),
])
def test_find_root_examples(f, target, bracket, expected):
    x = find_root_monotone(f, target, bracket)
    assert x == pytest.approx(expected, rel=1e-11)
    assert abs(f(x) - target) <= 1e-12 * max(1.0, abs(target))


def test_find_root_decreasing_and_vectorized():
    targets = np.array([0.5, 0.25, 0.1])
    x = find_root_monotone(lambda x: np.exp(-x), targets, (np.zeros(3), np.full(3, 10.0)))
    np.testing.assert_allclose(x, -np.log(targets), rtol=1e-11)


def test_bracket_error():
    with pytest.raises(BracketError):
        find_root_monotone(lambda x: x, 5.0, (0.0, 1.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(a, b):
    f = lambda x: np.exp(-x) * np.cos(x)
    g = lambda x: x * np.exp(-2 * x)
    combo = integrate_semi_inf(lambda x: a * f(x) + b * g(x), Q).value
    separate = a * integrate_semi_inf(f, Q).value + b * integrate_semi_inf(g, Q).value
    tol = 2 * max(Q.rel_tol * (abs(a) * 0.5 + abs(b) * 0.25), Q.abs_tol)
    assert abs(combo - separate) <= tol


@settings(max_examples=40, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 10))
def test_root_round_trip(target, slope):
    f = lambda x: slope * x + x ** 3
    x = find_root_monotone(f, target, (-10.0, 10.0))
    assert abs(f(x) - target) <= 1e-12 * max(1.0, abs(target))


@pytest.mark.parametrize("n_static", [0.19, 1.0, 1.81])
def test_adaptive_matches_trapezoid_reference(n_static):
    # Casimir-type integrand s^2 w / (e^{2 s} - 1) with w = s / n
    def f(s):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = s * s * (s / n_static) / np.expm1(2 * s)
        return np.where(s > 0, out, 0.0)

    est = integrate_semi_inf(f, Q, scale=0.5)
    ref, ref_err = trapezoid_reference(f, 40.0)
    assert abs(est.value - ref) <= 10 * (ref_err + est.error_estimate)
