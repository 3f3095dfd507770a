import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate as sci

from propfrac import kernels as K
from propfrac import oracles as O

ID, LOG = K.identity(), K.log()


# -- Gamma ---------------------------------------------------------------------

def test_gamma_examples():
    assert O.gamma_fn(1.0) == pytest.approx(1.0, rel=1e-15)
    assert O.gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)
    assert O.gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_gamma_accuracy_on_reference_range():
    xs = np.linspace(0.5, 20.0, 2001)
    err = max(abs(O.gamma_fn(x) / math.gamma(x) - 1) for x in xs)
    assert err <= 1e-13


def test_gamma_negative_arguments():
    for x in (-0.5, -1.5, -2.7, -7.3):
        assert O.gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0])
def test_gamma_poles(x):
    with pytest.raises(ValueError):
        O.gamma_fn(x)
    assert O.rgamma(x) == 0.0


def test_gamma_large_argument_does_not_overflow_early():
    assert O.gamma_fn(170.5) == pytest.approx(math.gamma(170.5), rel=1e-11)


@given(st.floats(min_value=0.5, max_value=30.0))
def test_gamma_recurrence(x):
    assert O.gamma_fn(x + 1) == pytest.approx(x * O.gamma_fn(x), rel=1e-12)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_gamma_reflection(x):
    lhs = O.gamma_fn(x) * O.gamma_fn(1 - x)
    # 1 - x is exact here; sin(pi x) computed from pi * x near x = 1 would cancel
    assert lhs == pytest.approx(math.pi / math.sin(math.pi * min(x, 1 - x)), rel=1e-11)


# -- closed forms ----------------------------------------------------------------

def test_left_integral_examples():
    assert O.cf_left_integral(0.5, 1, 1, ID, 0, 1) == pytest.approx(1 / math.gamma(1.5), rel=1e-14)
    for t in (0.5, 2.0, 3.3):
        assert O.cf_left_integral(1, 1, 1, ID, 0, t) == pytest.approx(t, rel=1e-14)
    want = math.gamma(2) / (math.gamma(2.3) * 0.5**0.3) * math.exp(-1)
    assert O.cf_left_integral(0.3, 2, 0.5, LOG, 1, math.e) == pytest.approx(want, rel=1e-13)


def test_left_integral_example_by_quadrature():
    # rho=0.5, g=log, beta=2 on (1, e)
    alpha, rho, t = 0.3, 0.5, math.e
    lam = (rho - 1) / rho

    # in s = log(tau) the kernel difference is 1 - s and the input is exp(lam s) s
    def in_s(s):
        return math.exp(lam * (1.0 - s)) * math.exp(lam * s) * s

    val, _ = sci.quad(in_s, 0, 1, weight="alg", wvar=(0, alpha - 1))
    brute = val / (rho**alpha * math.gamma(alpha))
    assert O.cf_left_integral(alpha, 2, rho, LOG, 1, t) == pytest.approx(brute, rel=1e-10)


def test_right_integral_mirror():
    assert O.cf_right_integral(0.5, 1, 1, ID, 1, 0) == pytest.approx(1 / math.gamma(1.5), rel=1e-14)
    assert O.cf_right_integral(1, 1, 1, ID, 3, 1) == pytest.approx(2.0, rel=1e-14)


def test_rl_examples():
    assert O.cf_left_rl_deriv(0.7, 0.7, 0.5, ID, 0, 1) == 0.0
    assert O.cf_left_rl_deriv(0.5, 2, 1, ID, 0, 1) == pytest.approx(1 / math.gamma(1.5), rel=1e-14)
    g = K.power(2.0)
    d = g(2.0) - g(1.0)
    lam = (0.7 - 1) / 0.7
    want = 0.7**1.2 * math.gamma(2.5) / math.gamma(1.3) * math.exp(lam * g(2.0)) * d**0.3
    assert O.cf_left_rl_deriv(1.2, 2.5, 0.7, g, 1, 2) == pytest.approx(want, rel=1e-12)
    assert O.cf_right_rl_deriv(1.0, 1.0, 1, ID, 2, 1) == 0.0


def test_rl_at_order_zero_is_the_input():
    rho, beta = 0.6, 2.4
    lam = (rho - 1) / rho
    t = 1.7
    f = math.exp(lam * LOG(t)) * (LOG(t) - LOG(1.0)) ** (beta - 1)
    assert O.cf_left_rl_deriv(0.0, beta, rho, LOG, 1.0, t) == pytest.approx(f, rel=1e-13)


def test_caputo_branches():
    assert O.cf_left_caputo(0.5, 1, 0.5, ID, 0, 1) == 0.0
    assert O.cf_left_caputo(1.5, 2, 0.5, ID, 0, 1) == 0.0
    assert O.cf_right_caputo(2.5, 3, 0.5, ID, 2, 1) == 0.0
    assert O.cf_left_caputo(0.5, 3, 1, ID, 0, 1) == pytest.approx(math.gamma(3) / math.gamma(2.5), rel=1e-14)
    with pytest.raises(ValueError):
        O.cf_left_caputo(1.5, 1.5, 1, ID, 0, 1)  # beta <= n and not an integer power
    with pytest.raises(ValueError):
        O.cf_left_caputo(0.0, 3, 1, ID, 0, 1)


@given(st.floats(min_value=0.05, max_value=3.9), st.floats(min_value=0.05, max_value=3.0),
       st.floats(min_value=0.1, max_value=1.0), st.floats(min_value=0.1, max_value=3.0))
def test_caputo_equals_rl_above_n(alpha, excess, rho, dt):
    beta = O.order_n(alpha) + excess
    for g, a in ((ID, 0.0), (LOG, 1.0)):
        t = a + dt
        assert O.cf_left_caputo(alpha, beta, rho, g, a, t) == O.cf_left_rl_deriv(alpha, beta, rho, g, a, t)
        assert O.cf_right_caputo(alpha, beta, rho, g, t, a) == O.cf_right_rl_deriv(alpha, beta, rho, g, t, a)


def test_classical_power_examples():
    assert O.cf_classical_rl_power(0, 1, 2) == pytest.approx(2.0, rel=1e-14)
    assert O.cf_classical_rl_power(1, 1, 2) == pytest.approx(2.0, rel=1e-14)
    brute, _ = sci.quad(lambda s: s**2, 0, 1, weight="alg", wvar=(0, -0.5))
    assert O.cf_classical_rl_power(2, 0.5, 1) == pytest.approx(brute / math.gamma(0.5), rel=1e-10)
    assert O.cf_classical_rl_power(2, 0.5, 1) == pytest.approx(math.gamma(3) / math.gamma(3.5), rel=1e-13)


@given(st.floats(min_value=-0.9, max_value=4.0), st.floats(min_value=0.05, max_value=4.0),
       st.floats(min_value=0.01, max_value=5.0))
def test_reduction_chain(p, alpha, t):
    got = O.cf_left_integral(alpha, p + 1, 1.0, ID, 0.0, t)
    assert got == pytest.approx(O.cf_classical_rl_power(p, alpha, t), rel=1e-13)


@given(st.floats(min_value=0.05, max_value=3.0), st.floats(min_value=0.05, max_value=3.0),
       st.floats(min_value=0.1, max_value=1.0))
def test_rl_undoes_integral_in_closed_form(alpha, beta, rho):
    # I^alpha maps the beta member to c times the beta+alpha member; D^alpha must map it back
    assume(beta + alpha < 6)
    t = 1.8
    c = O.gamma_fn(beta) / (O.gamma_fn(beta + alpha) * rho**alpha)
    f_beta = O.cf_left_rl_deriv(0.0, beta, rho, ID, 0.0, t)
    assert c * O.cf_left_rl_deriv(alpha, beta + alpha, rho, ID, 0.0, t) == pytest.approx(f_beta, rel=1e-12)
    assert O.cf_left_integral(alpha, beta, rho, ID, 0.0, t) == pytest.approx(
        c * O.cf_left_rl_deriv(0.0, beta + alpha, rho, ID, 0.0, t), rel=1e-12)


@pytest.mark.parametrize("kwargs", [
    dict(alpha=0.5, beta=1, rho=0.0),
    dict(alpha=0.5, beta=1, rho=1.5),
    dict(alpha=0.0, beta=1, rho=1.0),
    dict(alpha=0.5, beta=0.0, rho=1.0),
])
def test_integral_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        O.cf_left_integral(kwargs["alpha"], kwargs["beta"], kwargs["rho"], ID, 0, 1)


def test_oracle_case_dispatch():
    c = O.OracleCase("right-caputo", 0.5, 3.0, 1.0, ID, 2.0, 1.0)
    assert c.side == "right"
    assert c.expected() == pytest.approx(math.gamma(3) / math.gamma(2.5), rel=1e-14)
    assert "2.0" in c.input_expr()
