import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from propfrac import kernels as K

from corpus import CUSTOM_KERNELS


def test_g_eval_examples():
    assert K.g_eval(K.identity(), 3.0) == 3.0
    assert K.g_eval(K.log(), 1.0) == 0.0
    assert K.g_eval(K.power(2), 3.0) == 4.5


def test_g_prime_examples():
    assert K.g_prime(K.identity(), 7.0) == 1.0
    assert K.g_prime(K.log(), 2.0) == 0.5
    assert K.g_prime(K.power(2), 3.0) == 3.0


def test_g_inverse_examples():
    assert K.g_inverse(K.log(), 0.0) == 1.0
    assert K.g_inverse(K.power(2), 4.5) == pytest.approx(3.0, rel=1e-15)
    root = K.g_inverse(K.custom("x + x^3"), 10.0)
    # bisection oracle, independent of the Newton iteration
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if mid + mid**3 < 10 else (lo, mid)
    assert abs(root - 0.5 * (lo + hi)) <= 1e-12


def test_shifted_power():
    k = K.shifted_power(3.0, 1.0)
    assert k(3.0) == pytest.approx(8 / 3)
    assert k.prime(3.0) == pytest.approx(4.0)
    assert k.inverse(8 / 3) == pytest.approx(3.0, rel=1e-15)


def test_domain_violations():
    with pytest.raises(K.KernelError):
        K.log()(-1.0)
    with pytest.raises(K.KernelError):
        K.power(2).prime(0.0)  # open domain for derivatives
    with pytest.raises(K.KernelError):
        K.shifted_power(2, 1.0)(0.5)
    with pytest.raises(K.KernelError):
        K.power(2).inverse(-1.0)


def test_mu_must_be_positive():
    with pytest.raises(K.KernelError):
        K.power(0.0)
    with pytest.raises(K.KernelError):
        K.shifted_power(-1.0, 0.0)


def test_nonpositive_derivative_detected():
    with pytest.raises(K.KernelError):
        K.custom("-x").prime(1.0)


@pytest.mark.parametrize("text, family", [
    ("identity", "identity"), ("log", "log"), ("power:2.5", "power"),
    ("shifted-power:2:1", "shifted-power"), ("expr:x + exp(x)", "custom"),
])
def test_parse_kernel(text, family):
    k = K.parse_kernel(text)
    assert k.family == family
    assert K.parse_kernel(k.spec) == k


@pytest.mark.parametrize("text", ["nope", "power", "power:a", "power:1:2", "log:3", "expr:x +"])
def test_parse_kernel_rejects(text):
    with pytest.raises(ValueError):
        K.parse_kernel(text)


def test_validate_kernel_examples():
    assert K.validate_kernel(K.identity(), (0.0, 10.0)).ok
    assert K.validate_kernel(K.log(), (0.1, 5.0)).ok
    report = K.validate_kernel(K.custom("sin(x)"), (0.0, 6.28))
    assert not report.ok
    assert report.t == pytest.approx(math.pi / 2, abs=0.01)
    assert report.gprime <= 0


def test_validate_kernel_outside_domain():
    report = K.validate_kernel(K.log(), (-1.0, 1.0))
    assert not report.ok and "domain" in report.message


BUILTINS = [(K.identity(), (-50.0, 50.0)), (K.log(), (1e-3, 1e3)), (K.power(0.5), (1e-3, 100.0)),
            (K.power(3.0), (1e-3, 100.0)), (K.shifted_power(2.0, -1.0), (-0.999, 50.0))]


@pytest.mark.parametrize("kernel, interval", BUILTINS, ids=lambda v: getattr(v, "spec", ""))
def test_builtin_roundtrip(kernel, interval):
    ts = np.random.default_rng(1).uniform(*interval, 100)
    np.testing.assert_allclose(kernel.inverse(kernel(ts)), ts, rtol=1e-11)


@pytest.mark.parametrize("source, domain, interval", CUSTOM_KERNELS)
def test_custom_roundtrip(source, domain, interval):
    k = K.custom(source, domain)
    ts = np.random.default_rng(2).uniform(*interval, 100)
    np.testing.assert_allclose(k.inverse(k(ts)), ts, rtol=1e-11, atol=1e-13)
    assert K.validate_kernel(k, interval).ok


def test_custom_inverse_outside_range():
    with pytest.raises(K.KernelError):
        K.custom("exp(x)").inverse(-1.0)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_unit_power_is_identity(t):
    assert K.power(1.0)(t) == t
    assert K.shifted_power(1.0, 0.0)(t) == t


@given(st.floats(min_value=-1e6, max_value=1e6))
def test_custom_inverse_scalar_property(s):
    k = K.custom("x + x^3")
    x = k.inverse(s)
    assert abs(k(x) - s) <= 1e-13 * max(1.0, abs(s)) * 4


def test_jet_of_builtin_matches_prime():
    for kernel, (lo, hi) in BUILTINS:
        t = 0.5 * (lo + hi)
        assert kernel.jet(t, 2).derivatives[0] == pytest.approx(kernel.prime(t), rel=1e-14)
