"""Closed-form reference values for the proportional operators.

All formulas are for the input family::

    left:   f(x) = exp(lam * g(x)) * (g(x) - g(a))**(beta - 1)
    right:  f(x) = exp(-lam * g(x)) * (g(b) - g(x))**(beta - 1)

with ``lam = (rho - 1) / rho``.  The Gamma function is computed here with a
Lanczos approximation so that the oracles do not share code with the
quadrature path, which uses :func:`math.gamma`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .kernels import KernelFunction

_LANCZOS_G = 7
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x`` (Lanczos, g=7, with reflection below 1/2)."""
    x = float(x)
    if _is_pole(x):
        raise ValueError(f"Gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], 1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z + 1/2) does not overflow before exp(-t) damps it
    half = t ** (0.5 * z + 0.25)
    return math.sqrt(2 * math.pi) * half * (half * math.exp(-t)) * acc


def rgamma(x: float) -> float:
    """1/Gamma(x), exactly 0 at the poles."""
    if _is_pole(x):
        return 0.0
    return 1.0 / gamma_fn(x)


def _lam(rho: float) -> float:
    return (rho - 1.0) / rho


def _check_rho(rho):
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")


def cf_left_integral(alpha, beta, rho, g: KernelFunction, a, t) -> float:
    """Left integral of order ``alpha`` of the left input family."""
    _check_rho(rho)
    if alpha <= 0 or beta <= 0 or not t > a:
        raise ValueError("need alpha > 0, beta > 0 and t > a")
    d = g(t) - g(a)
    return gamma_fn(beta) * rgamma(beta + alpha) / rho**alpha * math.exp(_lam(rho) * g(t)) * d ** (alpha + beta - 1)


def cf_right_integral(alpha, beta, rho, g: KernelFunction, b, t) -> float:
    _check_rho(rho)
    if alpha <= 0 or beta <= 0 or not t < b:
        raise ValueError("need alpha > 0, beta > 0 and t < b")
    d = g(b) - g(t)
    return gamma_fn(beta) * rgamma(beta + alpha) / rho**alpha * math.exp(-_lam(rho) * g(t)) * d ** (alpha + beta - 1)


def cf_left_rl_deriv(alpha, beta, rho, g: KernelFunction, a, t) -> float:
    """Riemann-Liouville type left derivative; 0 when ``beta - alpha`` is a pole of Gamma."""
    _check_rho(rho)
    if alpha < 0 or beta <= 0 or not t > a:
        raise ValueError("need alpha >= 0, beta > 0 and t > a")
    r = rgamma(beta - alpha)
    if r == 0.0:
        return 0.0
    d = g(t) - g(a)
    return rho**alpha * gamma_fn(beta) * r * math.exp(_lam(rho) * g(t)) * d ** (beta - 1 - alpha)


def cf_right_rl_deriv(alpha, beta, rho, g: KernelFunction, b, t) -> float:
    _check_rho(rho)
    if alpha < 0 or beta <= 0 or not t < b:
        raise ValueError("need alpha >= 0, beta > 0 and t < b")
    r = rgamma(beta - alpha)
    if r == 0.0:
        return 0.0
    d = g(b) - g(t)
    return rho**alpha * gamma_fn(beta) * r * math.exp(-_lam(rho) * g(t)) * d ** (beta - 1 - alpha)


def order_n(alpha: float) -> int:
    return math.floor(alpha) + 1


def _caputo_branch(alpha, beta) -> bool:
    """True for the zero branch (integer power below n), False for the formula branch."""
    if alpha <= 0:
        raise ValueError("Caputo order must be positive")
    n = order_n(alpha)
    k = beta - 1
    if float(k).is_integer() and 0 <= k <= n - 1:
        return True
    if beta > n:
        return False
    raise ValueError(f"beta={beta} is neither > n={n} nor an integer power k < n")


def cf_left_caputo(alpha, beta, rho, g: KernelFunction, a, t) -> float:
    """Caputo type left derivative of the left input family (``beta > n``), or 0 for ``beta = k + 1, k < n``."""
    if _caputo_branch(alpha, beta):
        return 0.0
    return cf_left_rl_deriv(alpha, beta, rho, g, a, t)


def cf_right_caputo(alpha, beta, rho, g: KernelFunction, b, t) -> float:
    if _caputo_branch(alpha, beta):
        return 0.0
    return cf_right_rl_deriv(alpha, beta, rho, g, b, t)


def cf_classical_rl_power(p, alpha, t) -> float:
    """Classical Riemann-Liouville integral of ``x**p`` from 0, evaluated at ``t``."""
    if p <= -1 or alpha <= 0 or t <= 0:
        raise ValueError("need p > -1, alpha > 0, t > 0")
    return gamma_fn(p + 1) * rgamma(p + 1 + alpha) * t ** (p + alpha)


# -- input functions as expression text ---------------------------------------

def _num(v: float) -> str:
    return repr(float(v))


def left_input_expr(beta, rho, g: KernelFunction, a) -> str:
    """Expression text for ``exp(lam g(x)) (g(x) - g(a))^(beta-1)``."""
    gx = _kernel_text(g)
    return f"exp({_num(_lam(rho))} * ({gx})) * (({gx}) - {_num(g(a))})^{_num(beta - 1)}"


def right_input_expr(beta, rho, g: KernelFunction, b) -> str:
    gx = _kernel_text(g)
    return f"exp({_num(-_lam(rho))} * ({gx})) * ({_num(g(b))} - ({gx}))^{_num(beta - 1)}"


def _kernel_text(g: KernelFunction) -> str:
    from .expr import to_string
    return to_string(g.ast)


@dataclass(frozen=True)
class OracleCase:
    """One parameter binding of a closed-form identity."""

    kind: str  # left-int, right-int, left-rl, right-rl, left-caputo, right-caputo
    alpha: float
    beta: float
    rho: float
    kernel: KernelFunction
    anchor: float
    t: float

    @property
    def side(self) -> str:
        return self.kind.split("-")[0]

    def input_expr(self) -> str:
        if self.side == "left":
            return left_input_expr(self.beta, self.rho, self.kernel, self.anchor)
        return right_input_expr(self.beta, self.rho, self.kernel, self.anchor)

    def expected(self) -> float:
        fn = {
            "left-int": cf_left_integral,
            "right-int": cf_right_integral,
            "left-rl": cf_left_rl_deriv,
            "right-rl": cf_right_rl_deriv,
            "left-caputo": cf_left_caputo,
            "right-caputo": cf_right_caputo,
        }[self.kind]
        return fn(self.alpha, self.beta, self.rho, self.kernel, self.anchor, self.t)
