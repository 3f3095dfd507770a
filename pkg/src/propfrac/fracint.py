"""Left and right proportional fractional integrals with respect to a kernel ``g``.

The left integral of order ``alpha`` is

    I f(t) = 1/(rho^alpha Gamma(alpha)) * int_a^t exp(lam (g(t)-g(s))) (g(t)-g(s))^(alpha-1) f(s) g'(s) ds

with ``lam = (rho - 1)/rho``.  Substituting ``z = (g(t) - g(s)) / (g(t) - g(a))``
turns it into ``D^alpha/(rho^alpha Gamma(alpha)) int_0^1 z^(alpha-1) exp(lam D z) f(s(z)) dz``
with ``D = g(t) - g(a)``, so the kernel singularity at ``z = 0`` becomes a Jacobi
weight.  The interval is split at ``z = 1/2``:

* ``[0, 1/2]``: Gauss-Jacobi with weight ``z^(alpha-1)`` (Golub-Welsch),
* ``[1/2, 1]``: tanh-sinh in ``w = 1 - z``, which absorbs algebraic endpoint
  behaviour of ``f`` at the anchor (e.g. ``(g(s) - g(a))^(beta-1)``).

Both halves are refined together (Jacobi node count doubles, tanh-sinh step
halves) until successive values agree.  The right integral mirrors this with
``z = (g(s) - g(t)) / (g(b) - g(t))``.
"""

from __future__ import annotations

import csv
import io
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import expr as ex
from .kernels import KernelFunction

__all__ = [
    "QuadConfig", "QuadResult", "EvalTable", "ConvergenceWarning",
    "jacobi_nodes", "tanh_sinh_nodes", "left_integral", "right_integral",
    "as_integrand", "integral_at_level", "integrate",
]


class ConvergenceWarning(RuntimeWarning):
    """Quadrature refinement hit ``max_nodes`` before reaching tolerance."""


@dataclass(frozen=True)
class QuadConfig:
    base_nodes: int = 32
    max_nodes: int = 512
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12

    def __post_init__(self):
        if self.base_nodes < 4:
            raise ValueError("base_nodes must be >= 4")
        if self.max_nodes < self.base_nodes:
            raise ValueError("max_nodes must be >= base_nodes")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")

    @property
    def levels(self) -> int:
        """Number of refinement levels available (at least 2)."""
        return max(2, int(math.log2(self.max_nodes // self.base_nodes)) + 1)

    def jacobi_count(self, level: int) -> int:
        return min(self.base_nodes * 2**level, max(self.max_nodes, 2 * self.base_nodes))


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error_estimate: float | np.ndarray


# -- node tables --------------------------------------------------------------

_cache: dict = {}
_cache_lock = threading.Lock()


def _cached(key, build):
    try:
        return _cache[key]
    except KeyError:
        pass
    with _cache_lock:
        if key not in _cache:
            _cache[key] = build()
        return _cache[key]


def _golub_welsch(alpha: float, n: int):
    # monic recurrence for Jacobi (a, b) = (0, alpha - 1) on [-1, 1]
    a, b = 0.0, alpha - 1.0
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (a + b + 2)
    if n > 1:
        diag[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2))
    kk = k[1:]
    ss = s[1:]
    off2 = 4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (ss**2 * (ss + 1) * (ss - 1))
    x, v = eigh_tridiagonal(diag, np.sqrt(off2))
    z = 0.5 * (1 + x)
    # zeroth moment of z^(alpha-1) on [0, 1] is 1/alpha
    w = v[0, :] ** 2 / alpha
    return z, w


def jacobi_nodes(alpha: float, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on [0, 1] for the weight ``z^(alpha-1)``.

    Exact for ``int_0^1 z^(alpha-1) p(z) dz`` with ``deg p <= 2 n_nodes - 1``.
    Returned arrays are read-only and shared.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if n_nodes < 1:
        raise ValueError("need at least one node")

    def build():
        z, w = _golub_welsch(float(alpha), int(n_nodes))
        if not (np.all(np.isfinite(z)) and np.all(w > 0)):
            raise np.linalg.LinAlgError("Golub-Welsch eigen-solve failed")
        z.flags.writeable = False
        w.flags.writeable = False
        return z, w

    return _cached(("jacobi", float(alpha), int(n_nodes)), build)


TANH_SINH_UMAX = 6.0


def tanh_sinh_nodes(level: int):
    """tanh-sinh rule for ``int_0^(1/2) h(w) dw``.

    Returns ``(w, half_minus_w, weights)``; both ``w`` and ``1/2 - w`` are
    computed without cancellation so nodes near either end keep full precision.
    """

    def build():
        step = 0.5 / 2**level
        k = np.arange(-int(math.ceil(TANH_SINH_UMAX / step)), int(math.ceil(TANH_SINH_UMAX / step)) + 1)
        u = k * step
        s = 0.5 * math.pi * np.sinh(u)
        w = 0.5 / (1.0 + np.exp(2 * s))
        half_minus = 0.5 / (1.0 + np.exp(-2 * s))
        weight = step * 0.125 * math.pi * np.cosh(u) / np.cosh(s) ** 2
        keep = (w > 0) & (weight > 0)
        out = w[keep], half_minus[keep], weight[keep]
        for arr in out:
            arr.flags.writeable = False
        return out

    return _cached(("tanh-sinh", int(level)), build)


# -- integrands ---------------------------------------------------------------

def as_integrand(f) -> Callable[[np.ndarray], np.ndarray]:
    """Accept expression text, a parsed expression, or a vectorized callable."""
    if isinstance(f, str):
        f = ex.parse(f)
    if isinstance(f, (ex.Const, ex.Var, ex.Neg, ex.BinOp, ex.Call)):
        ast = f
        return lambda s: ex.evaluate(ast, np.asarray(s, dtype=float))
    if callable(f):
        return f
    raise TypeError(f"cannot integrate object of type {type(f).__name__}")


def _check_common(alpha, rho):
    if not alpha > 0:
        raise ValueError(f"integral order must be positive, got {alpha}")
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], got {rho}")


def integral_at_level(f, g: KernelFunction, alpha: float, rho: float, anchor: float,
                      t: np.ndarray, level: int, cfg: QuadConfig, side: str = "left") -> np.ndarray:
    """Fixed-resolution quadrature; smooth in ``t`` for a fixed ``level``."""
    fn = as_integrand(f)
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    live = t != anchor
    if not live.any():
        return out
    tl = t[live]
    lam = (rho - 1.0) / rho
    ga, gt = g(anchor), g(tl)
    if side == "left":
        delta = gt - ga
        sign = -1.0
    else:
        delta = ga - gt
        sign = 1.0
    if np.any(delta <= 0):
        raise ValueError(f"evaluation point on the wrong side of the anchor for a {side} integral")
    d = delta[:, None]

    # near the evaluation point: z in (0, 1/2) with Jacobi weight
    u, vw = jacobi_nodes(alpha, cfg.jacobi_count(level))
    z = 0.5 * u[None, :]
    tau = g.inverse(gt[:, None] + sign * d * z)
    part_a = 2.0**-alpha * np.sum(vw * np.exp(lam * d * z) * fn(tau), axis=1)

    # near the anchor: w = 1 - z in (0, 1/2)
    w, half_minus, tw = tanh_sinh_nodes(level)
    zb = 0.5 + half_minus

    def anchor_side(wv, dd, with_mask=False):
        # integrand in w, before the tanh-sinh weights; abscissae that round onto
        # the anchor are left at 0 and flagged
        tau_b = g.inverse(ga - sign * dd * wv)
        inside = (tau_b > anchor) if side == "left" else (tau_b < anchor)
        vals = np.zeros(tau_b.shape)
        if inside.any():
            vals[inside] = fn(tau_b[inside])
        zz = 1.0 - wv
        out = zz ** (alpha - 1.0) * np.exp(lam * dd * zz) * vals
        return (out, inside) if with_mask else out

    ww = np.broadcast_to(w, (len(tl), len(w)))
    hb, inside = anchor_side(ww, d, with_mask=True)
    if not inside.all():
        # w decreases along a row, so resolvable nodes form a prefix; repeat the last one
        last = np.maximum(inside.sum(axis=1) - 1, 0)
        hb = np.where(inside, hb, hb[np.arange(len(tl)), last][:, None])
    w_cut = _resolution_cutoff(g, anchor, ga, delta, side)
    below = ww < w_cut[:, None]
    if below.any():
        model = _power_law_model(anchor_side, w_cut, delta, ww)
        hb = np.where(below & ~np.isnan(model), model, hb)
    part_b = np.sum(tw * hb, axis=1)

    out[live] = delta**alpha / (rho**alpha * math.gamma(alpha)) * (part_a + part_b)
    return out


def _resolution_cutoff(g, anchor, ga, delta, side):
    """Distance from the anchor (in ``w``) below which nodes are replaced by a tail model.

    Below ``~eps * |anchor|`` in ``x`` (or ``~eps * |g(anchor)|`` in ``g``) the
    abscissae round onto the anchor, so integrand samples there are noise.
    The cutoff sits eight decades above that resolution limit.
    """
    eps = np.finfo(float).eps
    dx = eps * abs(anchor)
    dg = eps * abs(ga)
    if dx > 0:
        near = anchor + dx if side == "left" else anchor - dx
        if g.contains(near):
            dg = max(dg, abs(g(near) - ga))
    return np.minimum(1e-3, 1e8 * dg / delta)


def _power_law_model(h, w_cut, delta, w):
    """Replacement values for ``h`` below ``w_cut`` on rows where ``h`` is unbounded at 0.

    Fits ``h(w) ~ C w^gamma (1 + c w)`` from samples at ``w_cut``, ``w_cut/2`` and
    ``w_cut/4``.  Rows with ``gamma >= 0`` are bounded near the anchor, where the
    raw samples are accurate enough, so they are returned as NaN (keep raw).
    """
    live = w_cut > 0
    wc = np.where(live, w_cut, 1.0)
    h1, h2, h4 = h(wc, delta), h(0.5 * wc, delta), h(0.25 * wc, delta)
    same = (h1 * h2 > 0) & (h2 * h4 > 0)
    with np.errstate(all="ignore"):
        l1 = np.log2(np.abs(h1 / h2))
        l2 = np.log2(np.abs(h2 / h4))
    gamma = np.where(same, 2 * l2 - l1, 0.0)
    cw = np.where(same, 4 * math.log(2) * (l1 - l2), 0.0)
    # a large first-order term means the fit is outside its range; keep the power law only
    crude = np.abs(cw) > 0.5
    gamma = np.where(crude, l1, gamma)
    cw = np.where(crude, 0.0, cw)
    singular = live & same & (gamma < -0.05)
    if np.any(singular & (gamma <= -1)):
        raise ValueError("integrand is not integrable at the anchor endpoint")
    r = w / wc[:, None]
    with np.errstate(all="ignore"):
        model = h1[:, None] * r ** gamma[:, None] * (1 + cw[:, None] * r) / (1 + cw[:, None])
    return np.where(singular[:, None], model, np.nan)


def integrate(f, g, alpha, rho, anchor, t, cfg: QuadConfig | None = None, side: str = "left"):
    """Adaptive driver; returns ``(values, error_estimates, converged, level)`` arrays."""
    cfg = cfg or QuadConfig()
    _check_common(alpha, rho)
    t = np.asarray(t, dtype=float)
    prev = integral_at_level(f, g, alpha, rho, anchor, t, 0, cfg, side)
    err = np.full(t.shape, np.inf)
    ok = np.zeros(t.shape, dtype=bool)
    level = 0
    for level in range(1, cfg.levels):
        cur = integral_at_level(f, g, alpha, rho, anchor, t, level, cfg, side)
        err = np.abs(cur - prev)
        ok = err <= np.maximum(cfg.rel_tol * np.abs(cur), cfg.abs_tol)
        prev = cur
        if ok.all():
            break
    err = np.where(t == anchor, 0.0, err)
    return prev, err, ok | (t == anchor), level


def _public(f, g, alpha, rho, anchor, t, cfg, side):
    scalar = np.ndim(t) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if side == "left" and np.any(t_arr < anchor):
        raise ValueError("left integral needs t >= a")
    if side == "right" and np.any(t_arr > anchor):
        raise ValueError("right integral needs t <= b")
    val, err, ok, _ = integrate(f, g, alpha, rho, anchor, t_arr, cfg, side)
    if not ok.all():
        worst = t_arr[~ok][0]
        warnings.warn(f"{side} integral did not reach tolerance at t={worst!r}; "
                      f"returning best estimate", ConvergenceWarning, stacklevel=3)
    if scalar:
        return QuadResult(float(val[0]), float(err[0]))
    return QuadResult(val.reshape(np.shape(t)), err.reshape(np.shape(t)))


def left_integral(f, g: KernelFunction, alpha: float, rho: float, a: float, t, cfg: QuadConfig | None = None) -> QuadResult:
    """Left proportional fractional integral of ``f`` w.r.t. ``g`` anchored at ``a``.

    ``t`` may be a float or an array.  Returns ``(value, error_estimate)``; a
    :class:`ConvergenceWarning` is issued if refinement stalls at ``max_nodes``.
    """
    return _public(f, g, alpha, rho, a, t, cfg, "left")


def right_integral(f, g: KernelFunction, alpha: float, rho: float, b: float, t, cfg: QuadConfig | None = None) -> QuadResult:
    """Right proportional fractional integral ending at ``b``."""
    return _public(f, g, alpha, rho, b, t, cfg, "right")


# -- tabulated output ---------------------------------------------------------

@dataclass
class EvalTable:
    t: np.ndarray
    value: np.ndarray
    error_estimate: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.error_estimate = np.asarray(self.error_estimate, dtype=float)
        if not (self.t.shape == self.value.shape == self.error_estimate.shape):
            raise ValueError("column lengths differ")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("t must be strictly increasing")
        if np.any(self.error_estimate < 0):
            raise ValueError("error estimates must be non-negative")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "value", "error_estimate"])
        for row in zip(self.t, self.value, self.error_estimate):
            writer.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EvalTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["t", "value", "error_estimate"]:
            raise ValueError("not an evaluation table")
        data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, 3)
        return cls(data[:, 0], data[:, 1], data[:, 2])
