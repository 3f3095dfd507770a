import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sci

from propfrac import kernels as K
from propfrac import oracles as O
from propfrac.fracderiv import (
    StencilError, fd_weights, left_caputo, left_rl_deriv, numeric_jet, order_n, right_caputo, right_rl_deriv,
)
from propfrac.fracint import left_integral

ID, LOG = K.identity(), K.log()


def test_order_n():
    assert [order_n(a) for a in (0, 0.3, 1, 1.5, 2, 3.9)] == [1, 1, 2, 2, 3, 4]
    with pytest.raises(ValueError):
        order_n(4.0)


# -- finite-difference machinery --------------------------------------------------

def test_fd_weights_central():
    np.testing.assert_allclose(fd_weights([-1, 0, 1], 1), [-0.5, 0, 0.5], atol=1e-15)
    np.testing.assert_allclose(fd_weights([-1, 0, 1], 2), [1, -2, 1], atol=1e-14)
    np.testing.assert_allclose(fd_weights([0, 1, 2], 1), [-1.5, 2, -0.5], atol=1e-14)


@given(st.integers(min_value=1, max_value=4), st.data())
def test_fd_weights_exact_on_polynomials(k, data):
    m = data.draw(st.integers(min_value=k + 1, max_value=k + 3))
    offsets = np.arange(m) - data.draw(st.integers(min_value=0, max_value=m - 1))
    w = fd_weights(offsets, k)
    for p in range(m):
        expected = math.factorial(k) if p == k else 0.0
        assert np.dot(w, offsets.astype(float) ** p) == pytest.approx(expected, abs=1e-9)


def test_numeric_jet_matches_taylor():
    rich, _ = numeric_jet(np.exp, 0.3, 3, 1e-5)
    assert rich.value == pytest.approx(math.exp(0.3), rel=1e-15)
    np.testing.assert_allclose(rich.derivatives, [math.exp(0.3)] * 3, rtol=1e-6)


def test_numeric_jet_goes_one_sided_at_the_boundary():
    rich, _ = numeric_jet(np.sin, 1e-6, 2, 1e-3, lo=0.0, toward=1)
    np.testing.assert_allclose(rich.derivatives, [math.cos(1e-6), -math.sin(1e-6)], atol=1e-5)


def test_numeric_jet_no_room():
    with pytest.raises(StencilError):
        numeric_jet(np.sin, 1e-6, 2, 1e-3, lo=0.0, hi=2e-6, toward=1)


# -- RL type ----------------------------------------------------------------------

def test_left_rl_example():
    r = left_rl_deriv("x", ID, 0.5, 1.0, 0.0, 1.0)
    assert r.value == pytest.approx(1 / math.gamma(1.5), rel=1e-6)
    assert r.value == pytest.approx(1.1283791671, rel=1e-6)


@pytest.mark.parametrize("rho", [0.5, 1.0])
@pytest.mark.parametrize("f", ["cos(x)", "1 + x^2"])
def test_order_zero_is_identity(f, rho):
    from propfrac.expr import evaluate, parse
    for t in (0.7, 1.9):
        want = evaluate(parse(f), t)
        assert left_rl_deriv(f, ID, 0.0, rho, 0.0, t).value == pytest.approx(want, rel=1e-4)
        assert right_rl_deriv(f, ID, 0.0, rho, 2.5, t).value == pytest.approx(want, rel=1e-4)


@pytest.mark.parametrize("beta,alpha", [(2, 0.5), (2.7, 0.3), (3, 1.5)])
def test_right_rl_classical(beta, alpha):
    b, t = 2.0, 0.8
    got = right_rl_deriv(f"({b} - x)^{beta - 1}", ID, alpha, 1.0, b, t).value
    want = math.gamma(beta) / math.gamma(beta - alpha) * (b - t) ** (beta - 1 - alpha)
    assert got == pytest.approx(want, rel=1e-4)


def test_rl_power_kernel_example():
    g = K.power(2.0)
    f = O.left_input_expr(2.5, 0.7, g, 1.0)
    got = left_rl_deriv(f, g, 1.2, 0.7, 1.0, 2.0).value
    assert got == pytest.approx(O.cf_left_rl_deriv(1.2, 2.5, 0.7, g, 1.0, 2.0), rel=1e-4)


def test_rl_pole_branch_gives_zero():
    # beta = alpha: the closed form is 0 through 1/Gamma(0)
    f = O.left_input_expr(0.5, 1.0, ID, 0.0)
    assert abs(left_rl_deriv(f, ID, 0.5, 1.0, 0.0, 1.0).value) <= 1e-4


def test_rl_error_estimate_is_finite_and_small():
    r = left_rl_deriv("cos(x)", LOG, 0.5, 0.5, 1.0, 2.0)
    assert 0 <= r.error_estimate < 1e-4


def test_rl_near_anchor_uses_one_sided_stencil():
    f = O.left_input_expr(2.0, 1.0, ID, 0.0)
    t = 2e-5
    got = left_rl_deriv(f, ID, 0.5, 1.0, 0.0, t).value
    assert got == pytest.approx(O.cf_left_rl_deriv(0.5, 2.0, 1.0, ID, 0.0, t), rel=1e-3)


@pytest.mark.parametrize("kwargs", [
    dict(alpha=-0.1, rho=1.0, t=1.0),
    dict(alpha=0.5, rho=0.0, t=1.0),
    dict(alpha=0.5, rho=1.2, t=1.0),
    dict(alpha=0.5, rho=1.0, t=0.0),
    dict(alpha=4.5, rho=1.0, t=1.0),
])
def test_rl_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        left_rl_deriv("x", ID, kwargs["alpha"], kwargs["rho"], 0.0, kwargs["t"])


# -- Caputo type ------------------------------------------------------------------

def test_left_caputo_example():
    got = left_caputo("x^2", ID, 0.5, 1.0, 0.0, 1.0).value
    assert got == pytest.approx(1.5045055561, rel=1e-9)
    brute, _ = sci.quad(lambda s: 2 * s, 0, 1, weight="alg", wvar=(0, -0.5))
    assert got == pytest.approx(brute / math.gamma(0.5), rel=1e-9)


@pytest.mark.parametrize("alpha", [0.5, 1.5, 2.5])
def test_right_caputo_classical(alpha):
    b = 2.0
    n = order_n(alpha)
    t = np.array([0.2, 1.0, 1.7])
    got = right_caputo("(2 - x)^3", ID, alpha, 1.0, b, t).value
    want = math.gamma(4) / math.gamma(4 - alpha) * (b - t) ** (3 - alpha)
    assert n < 4
    np.testing.assert_allclose(got, want, rtol=1e-9)


def test_right_caputo_of_square():
    b, t = 2.0, np.array([0.5, 1.5])
    got = right_caputo("(2 - x)^2", ID, 0.5, 1.0, b, t).value
    np.testing.assert_allclose(got, math.gamma(3) / math.gamma(2.5) * (b - t) ** 1.5, rtol=1e-9)


@pytest.mark.parametrize("g,a", [(ID, 0.0), (LOG, 1.0), (K.power(2.0), 0.0)])
@pytest.mark.parametrize("alpha", [0.5, 1.5])
@pytest.mark.parametrize("rho", [0.4, 1.0])
def test_caputo_annihilates_low_powers(g, a, alpha, rho):
    n = order_n(alpha)
    t = np.linspace(a + 0.3, a + 1.5, 4)
    for k in range(n):
        f = O.left_input_expr(k + 1, rho, g, a)
        assert np.max(np.abs(left_caputo(f, g, alpha, rho, a, t).value)) <= 1e-8
        fr = O.right_input_expr(k + 1, rho, g, a + 2.0)
        assert np.max(np.abs(right_caputo(fr, g, alpha, rho, a + 2.0, t).value)) <= 1e-8


@pytest.mark.parametrize("g,a", [(ID, 0.0), (LOG, 1.0)])
@pytest.mark.parametrize("alpha,beta", [(0.3, 1.5), (0.5, 2.7), (1.5, 2.7), (1.5, 3.2)])
@pytest.mark.parametrize("rho", [0.5, 1.0])
def test_caputo_agrees_with_rl_above_n(g, a, alpha, beta, rho):
    f = O.left_input_expr(beta, rho, g, a)
    t = a + 0.9
    cap = left_caputo(f, g, alpha, rho, a, t).value
    rl = left_rl_deriv(f, g, alpha, rho, a, t).value
    assert cap == pytest.approx(rl, rel=1e-4)
    assert cap == pytest.approx(O.cf_left_caputo(alpha, beta, rho, g, a, t), rel=1e-7)


def test_caputo_rejects_order_zero():
    with pytest.raises(ValueError):
        left_caputo("x", ID, 0.0, 1.0, 0.0, 1.0)


# -- composition with the integral -------------------------------------------------

# stencil points a few ulps above the anchor cannot meet rel_tol; their weight in the result is negligible
@pytest.mark.filterwarnings("ignore::propfrac.fracint.ConvergenceWarning")
@pytest.mark.parametrize("alpha", [0.3, 1.5])
def test_rl_inverts_integral(alpha):
    a, t = 1.0, 2.2

    def F(s):
        return left_integral("cos(x)", LOG, alpha, 0.5, a, s).value

    got = left_rl_deriv(F, LOG, alpha, 0.5, a, t).value
    assert got == pytest.approx(math.cos(t), rel=1e-4)


def test_rl_reduces_integral_order():
    beta, alpha, a, t = 0.4, 1.1, 0.0, 1.3

    def F(s):
        return left_integral("cos(x)", ID, alpha, 1.0, a, s).value

    got = left_rl_deriv(F, ID, beta, 1.0, a, t).value
    want = left_integral("cos(x)", ID, alpha - beta, 1.0, a, t).value
    assert got == pytest.approx(want, rel=1e-4)
