"""Riemann-Liouville type and Caputo type proportional fractional derivatives.

With ``n = floor(alpha) + 1``:

* RL type:      D^alpha f   = D^n ( I^(n - alpha) f )
* Caputo type:  C D^alpha f = I^(n - alpha) ( D^n f )

where ``D^n`` is the n-fold local proportional derivative (reversed sign for
right-sided operators).  The RL form differentiates a quadrature result, so
it uses finite differences with one Richardson step; the Caputo form only
needs ``D^n f`` at quadrature nodes, which the jets deliver exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .fracint import QuadConfig, QuadResult, integral_at_level, integrate, left_integral, right_integral
from .jet import MAX_ORDER, Jet
from .kernels import KernelFunction
from .propderiv import apply_proportional, prop_deriv_n_callable

__all__ = [
    "StencilError", "order_n", "fd_weights", "numeric_jet",
    "left_rl_deriv", "right_rl_deriv", "left_caputo", "right_caputo",
]


class StencilError(ValueError):
    """No finite-difference stencil fits inside the admissible interval."""


def order_n(alpha: float) -> int:
    n = math.floor(alpha) + 1
    if n > MAX_ORDER:
        raise ValueError(f"order {alpha} needs n = {n} > {MAX_ORDER} derivatives")
    return n


def fd_weights(offsets, k: int) -> np.ndarray:
    """Weights for the ``k``-th derivative at 0 from samples at ``offsets`` (Fornberg)."""
    x = np.asarray(offsets, dtype=float)
    m = len(x)
    c = np.zeros((m, k + 1))
    c1, c4 = 1.0, x[0]
    c[0, 0] = 1.0
    for i in range(1, m):
        mn = min(i, k)
        c2, c5 = 1.0, c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for s in range(mn, 0, -1):
                    c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, k]


def _stencil(k: int, t: float, h: float, lo: float, hi: float, toward: int):
    """Offsets (in units of h) and a step for the ``k``-th derivative, fitting in (lo, hi)
    at both ``h`` and ``2h``.  ``toward`` is the direction one-sided stencils extend in."""
    central = np.arange(k + 1) - k / 2.0
    reach = k / 2.0 * 2  # at step 2h
    room = min(t - lo, hi - t)
    if reach * h < 0.9 * room:
        return central, h
    h_shrunk = 0.9 * room / reach
    if h_shrunk >= h / 100:
        return central, h_shrunk
    one_sided = toward * np.arange(k + 2, dtype=float)
    room = (hi - t) if toward > 0 else (t - lo)
    reach = 2 * (k + 1)
    if reach * h < 0.9 * room:
        return one_sided, h
    raise StencilError(f"no difference stencil of step {h:g} fits around t={t!r} inside ({lo}, {hi})")


def numeric_jet(F, t: float, n: int, h: float, lo: float = -math.inf, hi: float = math.inf,
                toward: int = 1) -> tuple[Jet, Jet]:
    """Taylor jet of a vectorized ``F`` at ``t`` from finite differences.

    The ``k``-th derivative uses step ``h * 10**(k-1)`` and one Richardson
    extrapolation against step ``2h``.  Returns ``(extrapolated, plain)`` jets.
    All samples are taken in a single vectorized call.
    """
    plans = []
    points = [np.array([t])]
    for k in range(1, n + 1):
        offsets, hk = _stencil(k, t, h * 10.0 ** (k - 1), lo, hi, toward)
        plans.append((k, offsets, hk))
        points.append(t + offsets * hk)
        points.append(t + offsets * 2 * hk)
    values = np.asarray(F(np.concatenate(points)), dtype=float)
    f0 = float(values[0])
    pos = 1
    rich, plain = [f0], [f0]
    for k, offsets, hk in plans:
        m = len(offsets)
        w = fd_weights(offsets, k)
        d1 = np.dot(w, values[pos:pos + m]) / hk**k
        d2 = np.dot(w, values[pos + m:pos + 2 * m]) / (2 * hk) ** k
        pos += 2 * m
        rich.append((4.0 * d1 - d2) / 3.0 / math.factorial(k))
        plain.append(d1 / math.factorial(k))
    return Jet(rich), Jet(plain)


def _base_step(t: float) -> float:
    return max(1e-5, 1e-5 * abs(t))


def _rl(f, g: KernelFunction, alpha, rho, anchor, t, cfg, side):
    if not alpha >= 0:
        raise ValueError(f"RL order must be >= 0, got {alpha}")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    n = order_n(alpha)
    cfg = cfg or QuadConfig()
    t = float(t)
    if (side == "left" and not t > anchor) or (side == "right" and not t < anchor):
        raise ValueError(f"{side} RL derivative needs t strictly inside the anchor")
    nu = n - alpha
    _, qerr, _, level = integrate(f, g, nu, rho, anchor, np.array([t]), cfg, side)

    def F(s):
        return integral_at_level(f, g, nu, rho, anchor, s, level, cfg, side)

    klo, khi = g.domain
    if side == "left":
        lo, hi, toward = max(anchor, klo), khi, 1
    else:
        lo, hi, toward = klo, min(anchor, khi), -1
    rich, plain = numeric_jet(F, t, n, _base_step(t), lo, hi, toward)
    G = g.jet(t, n)
    reverse = side == "right"
    value = apply_proportional(rich, G, rho, n, reverse)
    coarse = apply_proportional(plain, G, rho, n, reverse)
    return QuadResult(float(value), float(abs(value - coarse) + qerr[0]))


def left_rl_deriv(f, g: KernelFunction, alpha: float, rho: float, a: float, t: float,
                  cfg: QuadConfig | None = None) -> QuadResult:
    """``D^n I^(n-alpha) f`` at ``t > a``; ``alpha = 0`` reproduces ``f``."""
    return _rl(f, g, alpha, rho, a, t, cfg, "left")


def right_rl_deriv(f, g: KernelFunction, alpha: float, rho: float, b: float, t: float,
                   cfg: QuadConfig | None = None) -> QuadResult:
    """Reversed ``D^n`` applied to the right integral ``I_b^(n-alpha) f``."""
    return _rl(f, g, alpha, rho, b, t, cfg, "right")


def _caputo_n(alpha, rho):
    if not alpha > 0:
        raise ValueError(f"Caputo order must be > 0, got {alpha}")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    return order_n(alpha)


def left_caputo(f, g: KernelFunction, alpha: float, rho: float, a: float, t,
                cfg: QuadConfig | None = None) -> QuadResult:
    """``I^(n-alpha) (D^n f)``; ``D^n f`` is exact at every node."""
    n = _caputo_n(alpha, rho)
    return left_integral(prop_deriv_n_callable(f, g, rho, n), g, n - alpha, rho, a, t, cfg)


def right_caputo(f, g: KernelFunction, alpha: float, rho: float, b: float, t,
                 cfg: QuadConfig | None = None) -> QuadResult:
    n = _caputo_n(alpha, rho)
    return right_integral(prop_deriv_n_callable(f, g, rho, n, reverse=True), g, n - alpha, rho, b, t, cfg)
