"""Truncated power series arithmetic (Taylor-mode differentiation).

A :class:`PowerSeries` stores the coefficients ``c[0..order]`` of

    f(h) = c[0] + c[1]*h + c[2]*h**2 + ... + c[order]*h**order,

the Taylor expansion of some function about a fixed center, truncated at a
finite order.  Arithmetic on series propagates coefficients exactly (up to
roundoff), so evaluating a closed-form expression with a series argument
yields the expression's derivatives to arbitrary order without the
conditioning problems of repeated numeric differencing.

The elementary-function rules are the standard convolutional recurrences:
for ``g = F(f)`` one differentiates once, multiplies through by ``f`` where
needed and matches coefficients of ``h**(n-1)``.  All operations are
O(order^2).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["PowerSeries"]


class PowerSeries:
    """Dense truncated power series with float64 coefficients.

    Supports ``+ - * /``, integer ``**``, and the elementary functions
    needed by the expression language (sqrt, exp, log, sin, cos, tan).
    Mixed arithmetic with plain numbers treats the number as a constant
    series.  The order of a binary result is the smaller operand order.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d sequence")
        self.c = c

    @classmethod
    def constant(cls, value: float, order: int) -> "PowerSeries":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, center: float, order: int) -> "PowerSeries":
        """Series of the identity map ``h -> center + h``."""
        c = np.zeros(order + 1)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def __len__(self) -> int:
        return len(self.c)

    def __getitem__(self, i: int) -> float:
        return float(self.c[i])

    def __repr__(self) -> str:
        return f"PowerSeries({self.c.tolist()})"

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            n = min(self.order, other.order)
            return PowerSeries(self.c[: n + 1] + other.c[: n + 1])
        c = self.c.copy()
        c[0] += other
        return PowerSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PowerSeries) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PowerSeries):
            n = min(self.order, other.order)
            out = np.convolve(self.c[: n + 1], other.c[: n + 1])[: n + 1]
            return PowerSeries(out)
        return PowerSeries(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries(self.c / other)
        n = min(self.order, other.order)
        a, b = self.c, other.c
        if b[0] == 0.0:
            raise ZeroDivisionError("series division by a series with zero constant term")
        out = np.empty(n + 1)
        for k in range(n + 1):
            acc = a[k]
            for j in range(1, k + 1):
                acc -= b[j] * out[k - j]
            out[k] = acc / b[0]
        return PowerSeries(out)

    def __rtruediv__(self, other):
        return PowerSeries.constant(float(other), self.order) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, (int, np.integer)):
            raise TypeError("series exponent must be an integer")
        exponent = int(exponent)
        if exponent == 0:
            return PowerSeries.constant(1.0, self.order)
        base = self if exponent > 0 else 1.0 / self
        result = None
        e = abs(exponent)
        while e:
            if e & 1:
                result = base if result is None else result * base
            base = base * base
            e >>= 1
        return result

    # -- elementary functions ------------------------------------------------

    def sqrt(self) -> "PowerSeries":
        f = self.c
        if f[0] <= 0.0:
            raise ValueError("series sqrt needs a positive constant term")
        n = self.order
        g = np.empty(n + 1)
        g[0] = math.sqrt(f[0])
        for k in range(1, n + 1):
            acc = f[k] if k < len(f) else 0.0
            for j in range(1, k):
                acc -= g[j] * g[k - j]
            g[k] = acc / (2.0 * g[0])
        return PowerSeries(g)

    def exp(self) -> "PowerSeries":
        f = self.c
        n = self.order
        g = np.empty(n + 1)
        g[0] = math.exp(f[0])
        for k in range(1, n + 1):
            acc = 0.0
            for j in range(1, k + 1):
                acc += j * f[j] * g[k - j]
            g[k] = acc / k
        return PowerSeries(g)

    def log(self) -> "PowerSeries":
        f = self.c
        if f[0] <= 0.0:
            raise ValueError("series log needs a positive constant term")
        n = self.order
        g = np.empty(n + 1)
        g[0] = math.log(f[0])
        for k in range(1, n + 1):
            acc = k * f[k]
            for j in range(1, k):
                acc -= j * g[j] * f[k - j]
            g[k] = acc / (k * f[0])
        return PowerSeries(g)

    def _sincos(self) -> tuple["PowerSeries", "PowerSeries"]:
        f = self.c
        n = self.order
        s = np.empty(n + 1)
        c = np.empty(n + 1)
        s[0] = math.sin(f[0])
        c[0] = math.cos(f[0])
        for k in range(1, n + 1):
            sa = 0.0
            ca = 0.0
            for j in range(1, k + 1):
                sa += j * f[j] * c[k - j]
                ca += j * f[j] * s[k - j]
            s[k] = sa / k
            c[k] = -ca / k
        return PowerSeries(s), PowerSeries(c)

    def sin(self) -> "PowerSeries":
        return self._sincos()[0]

    def cos(self) -> "PowerSeries":
        return self._sincos()[1]

    def tan(self) -> "PowerSeries":
        s, c = self._sincos()
        return s / c

    # -- evaluation -----------------------------------------------------------

    def __call__(self, h: float) -> float:
        """Horner evaluation at offset ``h`` from the expansion center."""
        acc = 0.0
        for ck in self.c[::-1]:
            acc = acc * h + ck
        return acc

    def derivatives(self) -> np.ndarray:
        """Derivative values ``f^(k)(center) = k! * c[k]``."""
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fact
