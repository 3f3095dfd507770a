"""Local proportional derivative with respect to a kernel and its order-1 integral.

    D f(t)  = (1 - rho) f(t) + rho f'(t) / g'(t)
    (-)D f  = (1 - rho) f(t) - rho f'(t) / g'(t)     (used by right-sided operators)

``rho = 0`` gives the identity, ``rho = 1`` the derivative ``f'/g'``.  Iterates are
evaluated exactly by applying the operator to truncated Taylor jets.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import expr as ex
from .fracint import ConvergenceWarning, QuadConfig, QuadResult, as_integrand
from .jet import MAX_ORDER, Jet
from .kernels import KernelFunction

__all__ = [
    "prop_deriv", "prop_deriv_n", "prop_deriv_reverse", "prop_deriv_reverse_n",
    "apply_proportional", "prop_deriv_n_callable", "prop_integral_1",
]


def _check_rho(rho):
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must be in [0, 1], got {rho}")


def _ast(f):
    return ex.parse(f) if isinstance(f, str) else f


def apply_proportional(F: Jet, G: Jet, rho: float, n: int, reverse: bool = False):
    """Apply ``(1 - rho + rho/g' d/dt)^n`` (or the reversed sign) to a jet of ``f``.

    ``F`` and ``G`` are Taylor jets of f and g of order at least ``n``; the result
    is the order-0 value.
    """
    if F.order < n or G.order < n:
        raise ValueError(f"need jets of order >= {n}")
    gp = G.truncate(n).derivative()
    h = F.truncate(n)
    c = 1.0 - rho
    for _ in range(n):
        m = h.order - 1
        term = h.derivative() / gp.truncate(m)
        h = c * h.truncate(m) - rho * term if reverse else c * h.truncate(m) + rho * term
    return h.value


def prop_deriv(f, g: KernelFunction, rho: float, t):
    """``(1 - rho) f(t) + rho f'(t)/g'(t)``."""
    _check_rho(rho)
    jf = ex.eval_jet(_ast(f), t, 1)
    return (1.0 - rho) * jf.coeffs[0] + rho * (jf.coeffs[1] / g.prime(t))


def prop_deriv_reverse(f, g: KernelFunction, rho: float, t):
    _check_rho(rho)
    jf = ex.eval_jet(_ast(f), t, 1)
    return (1.0 - rho) * jf.coeffs[0] - rho * (jf.coeffs[1] / g.prime(t))


def _check_n(n):
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"iteration count must be in [1, {MAX_ORDER}], got {n}")


def prop_deriv_n(f, g: KernelFunction, rho: float, n: int, t):
    """n-fold iterate of :func:`prop_deriv`, exact via jets.  ``t`` may be an array."""
    _check_rho(rho)
    _check_n(n)
    g.prime(t)  # domain and monotonicity check
    return apply_proportional(ex.eval_jet(_ast(f), t, n), g.jet(t, n), rho, n)


def prop_deriv_reverse_n(f, g: KernelFunction, rho: float, n: int, t):
    _check_rho(rho)
    _check_n(n)
    g.prime(t)
    return apply_proportional(ex.eval_jet(_ast(f), t, n), g.jet(t, n), rho, n, reverse=True)


def prop_deriv_n_callable(f, g: KernelFunction, rho: float, n: int, reverse: bool = False):
    """Vectorized ``s -> D^n f(s)`` for use as a quadrature integrand."""
    ast = _ast(f)

    def fn(s):
        s = np.asarray(s, dtype=float)
        out = apply_proportional(ex.eval_jet(ast, s, n), g.jet(s, n), rho, n, reverse)
        return np.broadcast_to(out, s.shape)

    return fn


# -- order-1 integral ---------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_GL_LOW_NODES, _GL_LOW_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _panel(h, lo, hi, nodes, weights):
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return half * np.dot(weights, h(mid + half * nodes))


def prop_integral_1(f, g: KernelFunction, rho: float, a: float, t: float,
                    cfg: QuadConfig | None = None, max_panels: int = 2000) -> QuadResult:
    """``(1/rho) int_a^t exp(lam (g(t) - g(s))) f(s) g'(s) ds`` by adaptive Gauss-Legendre.

    Panels are bisected until a 20-point and a 10-point rule agree to the
    configured tolerance.
    """
    cfg = cfg or QuadConfig()
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    if t < a:
        raise ValueError("need a <= t")
    if t == a:
        return QuadResult(0.0, 0.0)
    fn = as_integrand(f)
    lam = (rho - 1.0) / rho
    gt = g(t)

    def h(s):
        return np.exp(lam * (gt - g(s))) * fn(s) * g.prime(s)

    stack = [(float(a), float(t))]
    err, panels = 0.0, 0
    accepted = []
    while stack:
        lo, hi = stack.pop()
        fine = _panel(h, lo, hi, _GL_NODES, _GL_WEIGHTS)
        coarse = _panel(h, lo, hi, _GL_LOW_NODES, _GL_LOW_WEIGHTS)
        diff = abs(fine - coarse)
        share = (hi - lo) / (t - a)
        panels += 1
        tol = max(cfg.rel_tol * abs(fine), cfg.abs_tol * share)
        if diff <= tol or panels >= max_panels or hi - lo <= 1e-12 * max(1.0, abs(t)):
            accepted.append(fine)
            err += diff
        else:
            m = 0.5 * (lo + hi)
            stack.extend([(m, hi), (lo, m)])
    if panels >= max_panels:
        warnings.warn(f"order-1 integral hit {max_panels} panels at t={t!r}", ConvergenceWarning, stacklevel=2)
    total = math.fsum(accepted)
    return QuadResult(total / rho, float(err) / rho)
