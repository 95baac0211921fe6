"""Squared speed profiles with derivative access.

The reconstruction problem takes as data the squared norm U of the curve's
velocity.  A :class:`ClosedFormModulus` wraps an expression AST and serves
derivatives of any order through truncated power-series arithmetic; a
:class:`SampledModulus` wraps a grid with a cubic spline and serves at most
two exact derivative orders.  Values within roundoff of zero are clamped to
zero; anything more negative raises :class:`InvalidModulus`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, InvalidModulus, OrderUnavailable
from .expressions import (
    Add, Expression, Pow, differentiate, derivatives_at, parse_expression, to_callable,
)
from .parametrization import DepthFunction

__all__ = ["Jet", "ModulusModel", "ClosedFormModulus", "SampledModulus",
           "from_depth", "validate_modulus", "ModulusReport", "NEGATIVE_CLAMP"]

# values in [-NEGATIVE_CLAMP*scale, 0) count as roundoff and clamp to 0
NEGATIVE_CLAMP = 1e-12


@dataclass(frozen=True)
class Jet:
    """Derivative values ``[U, U', ..., U^(order)]`` at a fixed center."""

    center: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
            raise DomainError("jet coefficients must be finite and non-empty")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.coeffs[k])


class ModulusModel:
    """Common interface of the two profile representations."""

    domain: tuple[float, float]
    max_order: int | None  # None means unlimited (closed forms)

    def _check_domain(self, theta: float) -> None:
        lo, hi = self.domain
        if not (lo - 1e-12 <= theta <= hi + 1e-12):
            raise DomainError(f"angle {theta} outside domain [{lo}, {hi}]")

    def _clamp(self, u: float, theta: float) -> float:
        if u < 0.0:
            if u >= -NEGATIVE_CLAMP * self.scale:
                return 0.0
            raise InvalidModulus(f"profile is negative at theta={theta}: {u}")
        return u

    def value(self, theta: float) -> float:
        """U(theta), clamped at roundoff level and validated nonnegative."""
        self._check_domain(theta)
        return self._clamp(self._raw_value(theta), theta)

    def derivative(self, theta: float) -> float:
        self._check_domain(theta)
        return self._raw_derivative(theta)

    def jet(self, theta: float, order: int) -> Jet:
        """Derivative values up to ``order``; exact for closed forms."""
        self._check_domain(theta)
        if order < 0:
            raise DomainError("jet order must be nonnegative")
        if self.max_order is not None and order > self.max_order:
            raise OrderUnavailable(
                f"order {order} exceeds the exact capability ({self.max_order}) "
                "of this profile representation")
        coeffs = self._raw_jet(theta, order)
        coeffs[0] = self._clamp(coeffs[0], theta)
        return Jet(theta, coeffs)

    # hooks -----------------------------------------------------------------

    @property
    def scale(self) -> float:
        raise NotImplementedError

    def _raw_value(self, theta: float) -> float:
        raise NotImplementedError

    def _raw_derivative(self, theta: float) -> float:
        raise NotImplementedError

    def _raw_jet(self, theta: float, order: int) -> np.ndarray:
        raise NotImplementedError


class ClosedFormModulus(ModulusModel):
    """Profile given by an expression AST; derivatives to any order."""

    def __init__(self, expr: Expression | str, domain: tuple[float, float]):
        if isinstance(expr, str):
            expr = parse_expression(expr)
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise DomainError(f"empty domain [{lo}, {hi}]")
        self.expr = expr
        self.domain = (lo, hi)
        self.max_order = None
        self._fn = to_callable(expr)
        self._dfn = to_callable(differentiate(expr))
        sample = []
        for t in np.linspace(lo, hi, 129):
            try:
                v = self._fn(float(t))
            except Exception:
                continue
            if math.isfinite(v):
                sample.append(abs(v))
        self._scale = 1.0 + (max(sample) if sample else 0.0)

    @property
    def scale(self) -> float:
        return self._scale

    def _raw_value(self, theta: float) -> float:
        return self._fn(theta)

    def _raw_derivative(self, theta: float) -> float:
        return self._dfn(theta)

    def _raw_jet(self, theta: float, order: int) -> np.ndarray:
        return derivatives_at(self.expr, theta, order)


class SampledModulus(ModulusModel):
    """Profile sampled on a strictly increasing grid, cubic-spline smoothed."""

    def __init__(self, thetas, values):
        t = np.asarray(thetas, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.size < 4 or v.shape != t.shape:
            raise DomainError("sampled profile needs matching 1-d arrays with >= 4 points")
        if not np.all(np.diff(t) > 0):
            raise DomainError("sample grid must be strictly increasing")
        self.thetas = t
        self.values = v
        self.domain = (float(t[0]), float(t[-1]))
        self.max_order = 2
        finite = v[np.isfinite(v)]
        self._scale = 1.0 + (float(np.max(np.abs(finite))) if finite.size else 0.0)
        # the spline exists only for finite data; validation still works without it
        self._spline = CubicSpline(t, v) if finite.size == v.size else None

    @property
    def scale(self) -> float:
        return self._scale

    def _require_spline(self) -> CubicSpline:
        if self._spline is None:
            raise InvalidModulus("sampled profile contains non-finite values")
        return self._spline

    def _raw_value(self, theta: float) -> float:
        return float(self._require_spline()(theta))

    def _raw_derivative(self, theta: float) -> float:
        return float(self._require_spline()(theta, 1))

    def _raw_jet(self, theta: float, order: int) -> np.ndarray:
        s = self._require_spline()
        return np.array([float(s(theta, k)) for k in range(order + 1)])


def from_depth(rho: DepthFunction) -> ModulusModel:
    """Forward model: the squared speed of the polar parametrization.

    Closed-form depth composes symbolically (the result keeps unlimited
    derivative order); sampled depth differentiates by finite differences
    and yields a spline-backed profile with ``max_order`` 2.
    """
    if rho.closed_form:
        expr = Add(Pow(differentiate(rho.expr), 2), Pow(rho.expr, 2))
        return ClosedFormModulus(expr, rho.domain)
    dr = rho.grid_derivatives()
    u = dr * dr + rho.values * rho.values
    return SampledModulus(rho.grid, u)


@dataclass
class ModulusReport:
    """Admissibility findings for a profile; empty lists mean clean."""

    negative_thetas: list[float]
    nonfinite_thetas: list[float]
    grid_monotone: bool
    clean: bool


def validate_modulus(u: ModulusModel, samples: int = 1024) -> ModulusReport:
    """Scan for negative or non-finite values (report, never raises)."""
    lo, hi = u.domain
    negative: list[float] = []
    nonfinite: list[float] = []
    if isinstance(u, SampledModulus):
        grid_ok = bool(np.all(np.diff(u.thetas) > 0))
        for th, val in zip(u.thetas, u.values):
            if not math.isfinite(val):
                nonfinite.append(float(th))
            elif val < -NEGATIVE_CLAMP * u.scale:
                negative.append(float(th))
    else:
        grid_ok = True
        for th in np.linspace(lo, hi, samples):
            try:
                val = u._raw_value(float(th))
            except Exception:
                nonfinite.append(float(th))
                continue
            if not math.isfinite(val):
                nonfinite.append(float(th))
            elif val < -NEGATIVE_CLAMP * u.scale:
                negative.append(float(th))
    clean = grid_ok and not negative and not nonfinite
    return ModulusReport(negative, nonfinite, grid_ok, clean)
