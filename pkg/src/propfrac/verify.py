"""Built-in verification suites: closed forms, algebraic laws and reductions.

Each suite yields :class:`CaseResult` rows, one per parameter binding and
evaluation point.  ``run_suite`` is what ``propfrac verify`` prints.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy import integrate as sci

from . import expr as ex
from . import kernels as K
from . import oracles as O
from .fracderiv import left_caputo, left_rl_deriv, order_n, right_caputo, right_rl_deriv
from .fracint import ConvergenceWarning, left_integral, right_integral

__all__ = ["CaseResult", "SUITES", "run_suite", "KERNEL_CASES", "kernel_case"]


@dataclass(frozen=True)
class CaseResult:
    suite: str
    params: str
    computed: float
    expected: float
    tol: float
    absolute: bool = False

    @property
    def error(self) -> float:
        diff = abs(self.computed - self.expected)
        if self.absolute:
            return diff
        return diff / abs(self.expected)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.computed) and self.error <= self.tol)

    def line(self) -> str:
        kind = "abs" if self.absolute else "rel"
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{self.suite}] {self.params}  computed={self.computed:.15g}  "
                f"expected={self.expected:.15g}  {kind}-err={self.error:.3e} (tol {self.tol:.0e})  {verdict}")


# kernel, left anchor a, right anchor b
KERNEL_CASES = {
    "identity": (K.identity(), 0.0, 2.0),
    "log": (K.log(), 1.0, 3.0),
    "power:2": (K.power(2.0), 0.0, 2.0),
    "shifted-power:2:1": (K.shifted_power(2.0, 1.0), 1.0, 3.0),
}


def kernel_case(name):
    return KERNEL_CASES[name]


def _interior(a, b, m):
    return np.linspace(a, b, m + 2)[1:-1]


def _result(suite, params, computed, expected, tol):
    # closed forms that vanish (Gamma pole) are compared absolutely
    return CaseResult(suite, params, float(computed), float(expected), tol, absolute=expected == 0.0)


def _sides(name):
    g, a, b = KERNEL_CASES[name]
    return [("left", g, a, a, b), ("right", g, b, a, b)]


# -- oracles ------------------------------------------------------------------

INT_GRID = dict(beta=(1.0, 1.5, 2.0, 2.7), alpha=(0.3, 0.5, 0.9, 1.5), rho=(0.4, 0.8, 1.0),
                kernel=("identity", "log", "power:2", "shifted-power:2:1"))
RL_GRID = dict(beta=(1.5, 2.0, 2.7), alpha=(0.3, 0.5, 1.5), rho=(0.5, 1.0), kernel=("identity", "log"))
CAPUTO_GRID = dict(beta=(1.5, 2.0, 2.7, 3.2, 4.0), alpha=(0.3, 0.5, 1.5, 2.5), rho=(0.4, 1.0),
                   kernel=("identity", "log", "power:2"))


def _grid(spec):
    keys = list(spec)
    for combo in itertools.product(*(spec[k] for k in keys)):
        yield dict(zip(keys, combo))


def integral_cases(tol=1e-7, points=5) -> Iterator[CaseResult]:
    for p in _grid(INT_GRID):
        for side, g, anchor, a, b in _sides(p["kernel"]):
            ts = _interior(a, b, points)
            case = O.OracleCase(f"{side}-int", p["alpha"], p["beta"], p["rho"], g, anchor, 0.0)
            op = left_integral if side == "left" else right_integral
            vals = op(case.input_expr(), g, p["alpha"], p["rho"], anchor, ts).value
            for t, v in zip(ts, vals):
                exp = O.OracleCase(case.kind, p["alpha"], p["beta"], p["rho"], g, anchor, float(t)).expected()
                label = f"{side}-int beta={p['beta']} alpha={p['alpha']} rho={p['rho']} g={p['kernel']} t={t:.4g}"
                yield _result("oracles", label, v, exp, tol)


def _pointwise(kind, grid, op_left, op_right, tol, points, accept=lambda p: True):
    for p in _grid(grid):
        if not accept(p):
            continue
        for side, g, anchor, a, b in _sides(p["kernel"]):
            case = O.OracleCase(f"{side}-{kind}", p["alpha"], p["beta"], p["rho"], g, anchor, 0.0)
            f = ex.parse(case.input_expr())
            op = op_left if side == "left" else op_right
            for t in _interior(a, b, points):
                t = float(t)
                v = op(f, g, p["alpha"], p["rho"], anchor, t).value
                exp = O.OracleCase(case.kind, p["alpha"], p["beta"], p["rho"], g, anchor, t).expected()
                label = f"{side}-{kind} beta={p['beta']} alpha={p['alpha']} rho={p['rho']} g={p['kernel']} t={t:.4g}"
                yield _result("oracles", label, v, exp, tol)


def rl_cases(tol=1e-4, points=5) -> Iterator[CaseResult]:
    yield from _pointwise("rl", RL_GRID, left_rl_deriv, right_rl_deriv, tol, points)


def caputo_cases(tol=1e-7, points=3) -> Iterator[CaseResult]:
    yield from _pointwise("caputo", CAPUTO_GRID, left_caputo, right_caputo, tol, points,
                          accept=lambda p: p["beta"] > order_n(p["alpha"]))


def oracle_suite(scale=1.0):
    yield from integral_cases(1e-7 * scale)
    yield from rl_cases(1e-4 * scale)
    yield from caputo_cases(1e-7 * scale)


# -- annihilation -------------------------------------------------------------

ANNIHILATION_GRID = dict(alpha=(0.5, 1.5), rho=(0.4, 1.0), kernel=("identity", "log", "power:2"))


def annihilation_suite(scale=1.0, points=3):
    tol = 1e-8 * scale
    for p in _grid(ANNIHILATION_GRID):
        n = order_n(p["alpha"])
        for k in range(n):
            for side, g, anchor, a, b in _sides(p["kernel"]):
                mk = O.left_input_expr if side == "left" else O.right_input_expr
                f = ex.parse(mk(k + 1.0, p["rho"], g, anchor))
                op = left_caputo if side == "left" else right_caputo
                for t in _interior(a, b, points):
                    v = op(f, g, p["alpha"], p["rho"], anchor, float(t)).value
                    label = f"{side}-caputo k={k} alpha={p['alpha']} rho={p['rho']} g={p['kernel']} t={t:.4g}"
                    yield CaseResult("annihilation", label, float(v), 0.0, tol, absolute=True)


# -- semigroup ----------------------------------------------------------------

SEMIGROUP_GRID = dict(orders=((0.3, 0.4), (0.5, 0.5), (1.2, 0.6)), rho=(0.5, 1.0),
                      kernel=("identity", "log", "power:2"), f=("1", "x", "cos(x)"))


def _nested(op, f, g, order, rho, anchor):
    # inner integrals near a power kernel's zero of g' converge slowly; the outer
    # comparison is what is being tested
    def inner(s):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            return op(f, g, order, rho, anchor, s).value
    return inner


def semigroup_suite(scale=1.0, points=10):
    for p in _grid(SEMIGROUP_GRID):
        al, be = p["orders"]
        for side, g, anchor, a, b in _sides(p["kernel"]):
            op = left_integral if side == "left" else right_integral
            ts = _interior(a, b, points)
            ab = op(_nested(op, p["f"], g, be, p["rho"], anchor), g, al, p["rho"], anchor, ts).value
            ba = op(_nested(op, p["f"], g, al, p["rho"], anchor), g, be, p["rho"], anchor, ts).value
            direct = op(p["f"], g, al + be, p["rho"], anchor, ts).value
            base = f"{side} alpha={al} beta={be} rho={p['rho']} g={p['kernel']} f={p['f']}"
            for t, x, y, z in zip(ts, ab, ba, direct):
                yield _result("semigroup", f"I^a I^b = I^(a+b) {base} t={t:.4g}", x, z, 1e-7 * scale)
                yield _result("semigroup", f"I^a I^b = I^b I^a {base} t={t:.4g}", x, y, 1e-8 * scale)


# -- inverse and order reduction ----------------------------------------------

INVERSE_GRID = dict(alpha=(0.3, 0.5, 1.5), rho=(0.5, 1.0), kernel=("identity", "log"), f=("1", "cos(x)"))
REDUCTION_GRID = dict(orders=((0.4, 1.1), (0.5, 0.8)), rho=(0.5, 1.0), kernel=("identity", "log"),
                      f=("1", "x", "cos(x)"))


def left_inverse_cases(tol=1e-4, points=10) -> Iterator[CaseResult]:
    for p in _grid(INVERSE_GRID):
        ast = ex.parse(p["f"])
        for side, g, anchor, a, b in _sides(p["kernel"]):
            op = left_integral if side == "left" else right_integral
            deriv = left_rl_deriv if side == "left" else right_rl_deriv
            inner = _nested(op, p["f"], g, p["alpha"], p["rho"], anchor)
            for t in _interior(a, b, points):
                t = float(t)
                v = deriv(inner, g, p["alpha"], p["rho"], anchor, t).value
                label = f"D^a I^a f = f {side} alpha={p['alpha']} rho={p['rho']} g={p['kernel']} f={p['f']} t={t:.4g}"
                yield _result("inverse", label, v, ex.evaluate(ast, t), tol)


def order_reduction_cases(tol=1e-4, points=5) -> Iterator[CaseResult]:
    for p in _grid(REDUCTION_GRID):
        be, al = p["orders"]
        for side, g, anchor, a, b in _sides(p["kernel"]):
            op = left_integral if side == "left" else right_integral
            deriv = left_rl_deriv if side == "left" else right_rl_deriv
            inner = _nested(op, p["f"], g, al, p["rho"], anchor)
            for t in _interior(a, b, points):
                t = float(t)
                v = deriv(inner, g, be, p["rho"], anchor, t).value
                r = op(p["f"], g, al - be, p["rho"], anchor, t).value
                label = f"D^b I^a f = I^(a-b) f {side} beta={be} alpha={al} rho={p['rho']} g={p['kernel']} f={p['f']} t={t:.4g}"
                yield _result("inverse", label, v, r, tol)


def inverse_suite(scale=1.0):
    yield from left_inverse_cases(1e-4 * scale)
    yield from order_reduction_cases(1e-4 * scale)


# -- reductions to classical operators ---------------------------------------

REDUCTION_KERNELS = ("identity", "log", "power:0.5", "power:2", "shifted-power:2:1")


def _reduction_kernel(name):
    if name in KERNEL_CASES:
        return KERNEL_CASES[name]
    g = K.parse_kernel(name)
    return g, 0.0, 2.0


def direct_left_integral(f: Callable[[float], float], g: K.KernelFunction, alpha, rho, a, t):
    """Left integral by QUADPACK with the algebraic weight ``(t - s)^(alpha-1)``.

    The remaining factor ``((g(t) - g(s)) / (t - s))^(alpha-1)`` is smooth, so
    this is an independent route to the same value.
    """
    gt = g(t)
    lam = (rho - 1.0) / rho

    def smooth(s):
        if s >= t:
            q = g.prime(t)
        else:
            q = (gt - g(s)) / (t - s)
        return q ** (alpha - 1.0) * math.exp(lam * (gt - g(s))) * f(s) * g.prime(s)

    val, _ = sci.quad(smooth, a, t, weight="alg", wvar=(0.0, alpha - 1.0), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / (rho**alpha * math.gamma(alpha))


def reductions_suite(scale=1.0, points=4):
    # rho = 1, g = identity, f = x^p: classical power rule
    ident = K.identity()
    for p_, alpha in itertools.product((0.0, 1.0, 2.0), (0.5, 1.5)):
        for t in _interior(0.0, 2.0, points):
            v = left_integral(f"x^{p_:g}", ident, alpha, 1.0, 0.0, float(t)).value
            label = f"classical RL x^{p_:g} alpha={alpha} t={t:.4g}"
            yield _result("reductions", label, v, O.cf_classical_rl_power(p_, alpha, float(t)), 1e-8 * scale)
    # every kernel: f = (g - g(a))^p is the power rule in the variable g
    for name in REDUCTION_KERNELS:
        g, a, b = _reduction_kernel(name)
        gtext = ex.to_string(g.ast)
        for p_, alpha in itertools.product((0.0, 1.0, 2.0), (0.5, 1.5)):
            f = f"(({gtext}) - {float(g(a))!r})^{p_:g}"
            for t in _interior(a, b, points):
                v = left_integral(f, g, alpha, 1.0, a, float(t)).value
                exp = O.cf_classical_rl_power(p_, alpha, float(g(t) - g(a)))
                label = f"power rule in g g={name} p={p_:g} alpha={alpha} t={t:.4g}"
                yield _result("reductions", label, v, exp, 1e-8 * scale)
    # Hadamard / Katugampola forms against direct quadrature of the substituted kernel
    for name, alpha, rho, fsrc in itertools.product(REDUCTION_KERNELS[1:], (0.5, 1.5), (1.0, 0.5), ("1", "cos(x)", "x^2")):
        g, a, b = _reduction_kernel(name)
        ast = ex.parse(fsrc)
        for t in _interior(a, b, points):
            t = float(t)
            v = left_integral(ast, g, alpha, rho, a, t).value
            d = direct_left_integral(lambda s: ex.evaluate(ast, s), g, alpha, rho, a, t)
            label = f"direct substitution g={name} alpha={alpha} rho={rho} f={fsrc} t={t:.4g}"
            yield _result("reductions", label, v, d, 1e-9 * scale)
    # unit exponents collapse to the identity kernel
    ts = np.linspace(0.1, 5.0, 25)
    for name in ("power:1", "shifted-power:1:0"):
        g = K.parse_kernel(name)
        dev = float(np.max(np.abs(g(ts) - ts) / ts))
        yield CaseResult("reductions", f"{name} equals identity (max over 25 t)", dev, 0.0, 1e-15 * scale, absolute=True)


SUITES: dict[str, Callable[..., Iterator[CaseResult]]] = {
    "oracles": oracle_suite,
    "semigroup": semigroup_suite,
    "inverse": inverse_suite,
    "reductions": reductions_suite,
    "annihilation": annihilation_suite,
}


def run_suite(name: str, scale: float = 1.0) -> Iterator[CaseResult]:
    """Run one suite (or ``all``) with every tolerance multiplied by ``scale``."""
    if name == "all":
        for fn in SUITES.values():
            yield from fn(scale)
        return
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    yield from SUITES[name](scale)
