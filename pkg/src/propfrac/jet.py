"""Truncated Taylor arithmetic for exact higher-order derivatives.

A :class:`Jet` holds the Taylor coefficients ``c_0 .. c_k`` of a function at
an evaluation point, so ``c_j = f^(j)(x) / j!``.  Coefficients may be floats or
numpy arrays of a common shape; the latter evaluates many points at once.

The order-0 coefficient of every operation is computed with exactly the same
floating point operation a plain scalar evaluation would use.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np

MAX_ORDER = 4

Number = Union[float, np.ndarray]


class DomainError(ValueError):
    """Raised when a function is evaluated outside its natural domain."""


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray)


def _any(cond) -> bool:
    return bool(np.any(cond)) if _is_array(cond) else bool(cond)


def _lib(v):
    return np if _is_array(v) else math


class Jet:
    """Truncated Taylor expansion ``c_0 + c_1 h + ... + c_k h^k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Number]):
        if len(coeffs) == 0:
            raise ValueError("a jet needs at least the value coefficient")
        self.coeffs = tuple(coeffs)

    # -- construction -------------------------------------------------------
    @classmethod
    def variable(cls, x: Number, order: int) -> "Jet":
        zero = np.zeros_like(x, dtype=float) if _is_array(x) else 0.0
        one = np.ones_like(x, dtype=float) if _is_array(x) else 1.0
        if order == 0:
            return cls((x,))
        return cls((x, one) + (zero,) * (order - 1))

    @classmethod
    def constant(cls, c: Number, order: int) -> "Jet":
        zero = np.zeros_like(c, dtype=float) if _is_array(c) else 0.0
        return cls((c,) + (zero,) * order)

    @classmethod
    def from_derivatives(cls, value: Number, derivatives: Sequence[Number]) -> "Jet":
        return cls((value,) + tuple(d / math.factorial(k) for k, d in enumerate(derivatives, 1)))

    # -- views --------------------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> Number:
        return self.coeffs[0]

    @property
    def derivatives(self) -> tuple:
        """Derivatives ``f'(x) .. f^(k)(x)``."""
        return tuple(c * math.factorial(k) for k, c in enumerate(self.coeffs) if k > 0)

    def derivative(self) -> "Jet":
        """Jet of ``f'``; loses one order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1])

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, derivatives={self.derivatives!r})"

    # -- helpers ------------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                n = min(self.order, other.order)
                raise ValueError(f"jet order mismatch ({self.order} vs {other.order}); truncate to {n}")
            return other
        return Jet.constant(other, self.order)

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(tuple(-c for c in self.coeffs))

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet((self.coeffs[0] + other,) + self.coeffs[1:])
        other = self._coerce(other)
        return Jet(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __radd__(self, other) -> "Jet":
        return Jet((other + self.coeffs[0],) + self.coeffs[1:])

    def __sub__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet((self.coeffs[0] - other,) + self.coeffs[1:])
        other = self._coerce(other)
        return Jet(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other) -> "Jet":
        return Jet((other - self.coeffs[0],) + tuple(-c for c in self.coeffs[1:]))

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(tuple(c * other for c in self.coeffs))
        other = self._coerce(other)
        u, v = self.coeffs, other.coeffs
        out = [u[0] * v[0]]
        for k in range(1, len(u)):
            s = u[0] * v[k]
            for j in range(1, k + 1):
                s = s + u[j] * v[k - j]
            out.append(s)
        return Jet(out)

    def __rmul__(self, other) -> "Jet":
        return Jet(tuple(other * c for c in self.coeffs))

    def __truediv__(self, other) -> "Jet":
        other = self._coerce(other)
        return _div(self, other)

    def __rtruediv__(self, other) -> "Jet":
        return _div(Jet.constant(other, self.order), self)

    # -- elementary functions -----------------------------------------------
    def exp(self) -> "Jet":
        u = self.coeffs
        w = [_lib(u[0]).exp(u[0])]
        for k in range(1, len(u)):
            s = sum(j * u[j] * w[k - j] for j in range(1, k + 1))
            w.append(s / k)
        return Jet(w)

    def log(self) -> "Jet":
        u = self.coeffs
        if _any(u[0] <= 0):
            raise DomainError("ln of a non-positive value")
        w = [_lib(u[0]).log(u[0])]
        for k in range(1, len(u)):
            s = sum(j * w[j] * u[k - j] for j in range(1, k))
            w.append((u[k] - s / k) / u[0])
        return Jet(w)

    def sincos(self) -> tuple["Jet", "Jet"]:
        u = self.coeffs
        lib = _lib(u[0])
        s, c = [lib.sin(u[0])], [lib.cos(u[0])]
        for k in range(1, len(u)):
            s.append(sum(j * u[j] * c[k - j] for j in range(1, k + 1)) / k)
            c.append(-sum(j * u[j] * s[k - j] for j in range(1, k + 1)) / k)
        return Jet(s), Jet(c)

    def sin(self) -> "Jet":
        return self.sincos()[0]

    def cos(self) -> "Jet":
        return self.sincos()[1]

    def sqrt(self) -> "Jet":
        u = self.coeffs
        if _any(u[0] < 0) or (self.order > 0 and _any(u[0] == 0)):
            raise DomainError("sqrt of a negative value (or derivative of sqrt at 0)")
        w = [_lib(u[0]).sqrt(u[0])]
        for k in range(1, len(u)):
            s = sum(w[j] * w[k - j] for j in range(1, k))
            w.append((u[k] - s) / (2 * w[0]))
        return Jet(w)

    def abs(self) -> "Jet":
        u0 = self.coeffs[0]
        if self.order > 0 and _any(u0 == 0):
            raise DomainError("abs is not differentiable at 0")
        if _is_array(u0):
            sgn = np.sign(u0)
            return Jet((np.abs(u0),) + tuple(sgn * c for c in self.coeffs[1:]))
        return self if u0 > 0 else Jet((abs(u0),) + tuple(-c for c in self.coeffs[1:]))

    def rpow(self, p: float) -> "Jet":
        """``self ** p`` for a real constant exponent; the base must be positive."""
        u = self.coeffs
        if _any(u[0] <= 0):
            raise DomainError("non-integer power of a non-positive base")
        w = [_lib(u[0]).pow(u[0], p) if not _is_array(u[0]) else np.power(u[0], p)]
        for k in range(1, len(u)):
            s = sum((p * j - (k - j)) * u[j] * w[k - j] for j in range(1, k + 1))
            w.append(s / (k * u[0]))
        return Jet(w)


def _div(u: Jet, v: Jet) -> Jet:
    if _any(v.coeffs[0] == 0):
        raise DomainError("division by zero")
    a, b = u.coeffs, v.coeffs
    w = [a[0] / b[0]]
    for k in range(1, len(a)):
        s = sum(b[j] * w[k - j] for j in range(1, k + 1))
        w.append((a[k] - s) / b[0])
    return Jet(w)
