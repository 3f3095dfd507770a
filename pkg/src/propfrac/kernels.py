"""Kernel functions ``g``: strictly increasing maps the operators are taken with respect to.

Built-in families have analytic derivative and inverse:

=================  ====================  ===============
family             g(t)                  domain
=================  ====================  ===============
identity           t                     all reals
log                ln t                  t > 0
power(mu)          t^mu / mu             t >= 0
shifted-power      (t - a)^mu / mu       t >= a
custom             parsed expression     user supplied
=================  ====================  ===============

``g(t) = t`` gives Riemann-Liouville operators, ``ln t`` Hadamard operators
and ``t^mu / mu`` Katugampola operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .jet import Jet

__all__ = [
    "KernelFunction", "KernelError", "KernelReport",
    "identity", "log", "power", "shifted_power", "custom", "parse_kernel",
    "g_eval", "g_prime", "g_inverse", "validate_kernel",
]


class KernelError(ValueError):
    """Domain violation, non-positive derivative or failed inversion."""


@dataclass(frozen=True)
class KernelReport:
    ok: bool
    t: float | None = None
    gprime: float | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class KernelFunction:
    family: str
    mu: float | None = None
    shift: float | None = None
    source: str | None = None
    domain: tuple[float, float] = (-math.inf, math.inf)
    closed_lo: bool = False  # g has a finite limit at the lower domain end
    ast: ex.ExprAst = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.family in ("power", "shifted-power") and not (self.mu is not None and self.mu > 0):
            raise KernelError(f"{self.family} kernel needs mu > 0, got {self.mu}")
        if self.ast is None:
            object.__setattr__(self, "ast", _builtin_ast(self))

    # -- descriptors --------------------------------------------------------
    @property
    def spec(self) -> str:
        """Canonical selection string, inverse of :func:`parse_kernel`."""
        if self.family == "power":
            return f"power:{self.mu!r}"
        if self.family == "shifted-power":
            return f"shifted-power:{self.mu!r}:{self.shift!r}"
        if self.family == "custom":
            return f"expr:{self.source}"
        return self.family

    def contains(self, t, closed: bool = False) -> bool:
        lo, hi = self.domain
        t = np.asarray(t, dtype=float)
        lower = (t >= lo) if (closed and self.closed_lo) else (t > lo)
        return bool(np.all(lower & (t < hi)))

    def _check(self, t, closed=False):
        if not self.contains(t, closed=closed):
            raise KernelError(f"{self.spec}: argument outside kernel domain {self.domain}")

    # -- evaluation ---------------------------------------------------------
    def __call__(self, t):
        self._check(t, closed=True)
        fam = self.family
        if fam == "identity":
            return t * 1.0
        if fam == "log":
            return np.log(t) if isinstance(t, np.ndarray) else math.log(t)
        if fam == "power":
            return np.power(t, self.mu) / self.mu
        if fam == "shifted-power":
            return np.power(t - self.shift, self.mu) / self.mu
        return ex.evaluate(self.ast, t)

    def prime(self, t):
        self._check(t)
        d = self._prime_raw(t)
        if not np.all(np.asarray(d) > 0):
            raise KernelError(f"{self.spec}: g' is not positive at some point; kernel is not strictly increasing")
        return d

    def _prime_raw(self, t):
        fam = self.family
        if fam == "identity":
            return np.ones_like(t, dtype=float) if isinstance(t, np.ndarray) else 1.0
        if fam == "log":
            return 1.0 / t
        if fam == "power":
            return np.power(t, self.mu - 1.0)
        if fam == "shifted-power":
            return np.power(t - self.shift, self.mu - 1.0)
        return ex.eval_jet(self.ast, t, 1).coeffs[1]

    def jet(self, t, order: int) -> Jet:
        """Taylor jet of g at ``t`` (needed for iterated proportional derivatives)."""
        self._check(t)
        return ex.eval_jet(self.ast, t, order)

    def inverse(self, s):
        fam = self.family
        s_arr = np.asarray(s, dtype=float)
        if fam == "identity":
            out = s_arr * 1.0
        elif fam == "log":
            out = np.exp(s_arr)
        elif fam in ("power", "shifted-power"):
            if np.any(s_arr < 0):
                raise KernelError(f"{self.spec}: {s} is outside the range of g")
            out = np.power(self.mu * s_arr, 1.0 / self.mu)
            if fam == "shifted-power":
                out = out + self.shift
        else:
            out = _newton_inverse(self, np.atleast_1d(s_arr)).reshape(s_arr.shape)
        return out if isinstance(s, np.ndarray) else float(out)


def _builtin_ast(k: KernelFunction):
    x = ex.Var()
    if k.family == "identity":
        return x
    if k.family == "log":
        return ex.Call("ln", (x,))
    if k.family == "power":
        return ex.BinOp("/", ex.BinOp("^", x, ex.Const(k.mu)), ex.Const(k.mu))
    if k.family == "shifted-power":
        base = ex.BinOp("-", x, ex.Const(k.shift))
        return ex.BinOp("/", ex.BinOp("^", base, ex.Const(k.mu)), ex.Const(k.mu))
    return ex.parse(k.source)


# -- constructors -------------------------------------------------------------

def identity() -> KernelFunction:
    return KernelFunction("identity")


def log() -> KernelFunction:
    return KernelFunction("log", domain=(0.0, math.inf))


def power(mu: float) -> KernelFunction:
    return KernelFunction("power", mu=float(mu), domain=(0.0, math.inf), closed_lo=True)


def shifted_power(mu: float, a: float) -> KernelFunction:
    return KernelFunction("shifted-power", mu=float(mu), shift=float(a), domain=(float(a), math.inf), closed_lo=True)


def custom(source: str, domain: tuple[float, float] = (-math.inf, math.inf)) -> KernelFunction:
    return KernelFunction("custom", source=source, domain=(float(domain[0]), float(domain[1])),
                          ast=ex.parse(source))


def parse_kernel(text: str) -> KernelFunction:
    """Parse ``identity``, ``log``, ``power:MU``, ``shifted-power:MU:A`` or ``expr:<expression>``."""
    text = text.strip()
    if text.startswith("expr:"):
        return custom(text[5:])
    name, *params = text.split(":")
    try:
        nums = [float(p) for p in params]
    except ValueError as err:
        raise KernelError(f"bad kernel parameters in {text!r}") from err
    if name == "identity" and not nums:
        return identity()
    if name == "log" and not nums:
        return log()
    if name == "power" and len(nums) == 1:
        return power(nums[0])
    if name == "shifted-power" and len(nums) == 2:
        return shifted_power(*nums)
    raise KernelError(f"unknown kernel selection {text!r}")


# -- inversion for custom kernels --------------------------------------------

def _midpoint(lo, hi):
    # geometric bisection on wide same-sign brackets
    alo, ahi = np.abs(lo), np.abs(hi)
    same = (np.sign(lo) == np.sign(hi)) & (lo != 0)
    wide = same & (np.maximum(alo, ahi) > 4 * np.minimum(alo, ahi))
    return np.where(wide, np.sign(hi) * np.sqrt(alo) * np.sqrt(ahi), 0.5 * lo + 0.5 * hi)


def _newton_inverse(k: KernelFunction, s: np.ndarray, max_iter: int = 100) -> np.ndarray:
    lo_dom, hi_dom = k.domain
    if math.isfinite(lo_dom) and math.isfinite(hi_dom):
        c = 0.5 * (lo_dom + hi_dom)
    elif math.isfinite(lo_dom):
        c = lo_dom + 1.0
    elif math.isfinite(hi_dom):
        c = hi_dom - 1.0
    else:
        c = 0.0

    def probe(k_step, side):
        if side < 0:
            if lo_dom == -math.inf:
                return c - 2.0 ** min(k_step - 1, 1023)
            return lo_dom + (c - lo_dom) * 2.0 ** (-k_step)
        if hi_dom == math.inf:
            return c + 2.0 ** min(k_step - 1, 1023)
        return hi_dom - (hi_dom - c) * 2.0 ** (-k_step)

    lo = np.full_like(s, c)
    hi = np.full_like(s, c)
    need_lo = ex.evaluate(k.ast, lo) > s
    need_hi = ex.evaluate(k.ast, hi) < s
    for k_step in range(1, 1100):
        if not (need_lo.any() or need_hi.any()):
            break
        if need_lo.any():
            lo[need_lo] = probe(k_step, -1)
            need_lo = ex.evaluate(k.ast, lo) > s
        if need_hi.any():
            hi[need_hi] = probe(k_step, +1)
            need_hi = ex.evaluate(k.ast, hi) < s
    if need_lo.any() or need_hi.any():
        raise KernelError(f"{k.spec}: value outside the range of g; cannot invert")

    tol = 1e-13 * np.maximum(1.0, np.abs(s))
    x = _midpoint(lo, hi)
    dx_old = np.full_like(s, np.inf)
    for _ in range(max_iter):
        jet = ex.eval_jet(k.ast, x, 1)
        r = jet.coeffs[0] - s
        gp = jet.coeffs[1]
        with np.errstate(all="ignore"):
            dx = r / gp
        small = np.abs(r) <= tol
        # converged once the residual is within tolerance and Newton has stalled
        done = small & (np.abs(dx) <= 4 * np.spacing(np.abs(x)) + 1e-300)
        done |= (hi - lo) <= 4 * np.spacing(np.maximum(np.abs(lo), np.abs(hi)))
        done |= r == 0
        if done.all():
            return x
        lo = np.where(r < 0, x, lo)
        hi = np.where(r > 0, x, hi)
        step = x - dx
        # bisect when Newton leaves the bracket or is not contracting fast enough
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi) | (np.abs(dx) > 0.5 * np.abs(dx_old))
        x_new = np.where(bad, _midpoint(lo, hi), step)
        dx_old = np.where(done, dx_old, np.abs(x_new - x))
        x = np.where(done, x, x_new)
    if small.all():
        return x
    raise KernelError(f"{k.spec}: Newton inversion did not converge in {max_iter} iterations")


# -- module level operations --------------------------------------------------

def g_eval(k: KernelFunction, t):
    return k(t)


def g_prime(k: KernelFunction, t):
    return k.prime(t)


def g_inverse(k: KernelFunction, s):
    return k.inverse(s)


def validate_kernel(k: KernelFunction, interval: tuple[float, float], n: int = 1001) -> KernelReport:
    """Sample g' at ``n`` Chebyshev points of ``interval`` and report the first non-positive value."""
    lo, hi = interval
    j = np.arange(n)
    pts = np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * j + 1) * np.pi / (2 * n)))
    if not k.contains(pts):
        return KernelReport(False, message=f"interval {interval} is not inside the kernel domain {k.domain}")
    try:
        d = np.asarray(k._prime_raw(pts), dtype=float)
    except ex.DomainError as err:
        return KernelReport(False, message=f"g' cannot be evaluated on {interval}: {err}")
    bad = np.flatnonzero(~(d > 0))
    if bad.size == 0:
        return KernelReport(True, message="ok")
    i = bad[0]
    return KernelReport(False, float(pts[i]), float(d[i]), f"g'({pts[i]:.6g}) = {d[i]:.3g} <= 0")
