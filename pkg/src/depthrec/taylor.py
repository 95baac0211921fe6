"""Analytic solution germs at critical initial conditions.

At a critical initial condition (depth equal to the bound, slope zero) the
branch ODE degenerates and Picard iteration is unavailable.  Instead the
solution jet is built order by order: differentiating the defining identity
``(rho')^2 + rho^2 = U`` n times and evaluating at the critical angle gives,
once the first derivative vanishes, a linear equation for the (n)th depth
derivative -- except at n = 2, where it is a quadratic

    2*(rho2^2 + rho0*rho2) = U2,

whose two roots seed (at most) two analytic branches.  The linear steps
share the pivot

    alpha_n = 2*(rho0 + n*rho2),

which vanishes exactly when rho2 = -rho0/n for an integer n >= 3; those are
the degenerate cases where the recursion stalls and a one-parameter family
of jets appears.

Derivative-vector convention: ``derivs[k]`` is the k-th derivative value,
not the monomial coefficient; the series coefficient is ``derivs[k]/k!``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    ComplexDiscriminant, DegenerateFamily, DomainError, OutsideRadiusWarning,
)
from .modulus import Jet, ModulusModel

__all__ = [
    "CriticalIC", "TaylorBranch", "BranchStatus", "LeibnizTerms", "BetaSignClass",
    "SafeRegionKind", "SafeRegionResult", "second_derivative_roots", "beta_sign_class",
    "leibniz_terms", "expand_branch", "check_safe_region", "eval_series",
    "estimate_radius", "recursion_residuals", "branches_at",
]

DEFAULT_ORDER = 20


@dataclass(frozen=True)
class CriticalIC:
    """Initial condition sitting on the depth bound with zero slope."""

    theta0: float
    rho0: float
    u_jet: Jet

    def __post_init__(self):
        if self.rho0 <= 0.0:
            raise DomainError("critical depth must be positive")
        tol = 1e-8 * (1.0 + self.rho0 ** 2)
        if abs(self.u_jet[0] - self.rho0 ** 2) > tol:
            raise DomainError(
                f"not on the bound: U={self.u_jet[0]} vs rho0^2={self.rho0 ** 2}")
        if self.u_jet.order >= 1 and abs(self.u_jet[1]) > tol:
            raise DomainError(f"profile slope {self.u_jet[1]} does not vanish here")

    @classmethod
    def from_modulus(cls, u: ModulusModel, theta0: float, order: int = DEFAULT_ORDER) -> "CriticalIC":
        """Build from a profile, requesting one jet order beyond ``order``
        (capped at the profile's exact capability for sampled data)."""
        jet_order = order + 1 if u.max_order is None else min(order + 1, u.max_order)
        jet = u.jet(theta0, jet_order)
        return cls(theta0, math.sqrt(max(jet[0], 0.0)), jet)


class BranchStatus(Enum):
    COMPLETE = "complete"
    DEGENERATE = "degenerate"
    CONSTANT_CIRCLE = "constant_circle"


@dataclass(frozen=True)
class TaylorBranch:
    """One analytic branch: the jet of a solution at a critical IC.

    ``free_index`` and ``consistency_residual`` are set only for degenerate
    branches: the recursion pivot vanished when solving for derivative
    ``free_index``, leaving it a free parameter; the residual measures
    whether the stalled equation is consistent (a genuine one-parameter
    family) or contradictory.
    """

    ic: CriticalIC
    beta: float
    derivs: np.ndarray
    status: BranchStatus
    free_index: int | None = None
    consistency_residual: float | None = None
    radius_estimate: float | None = None

    @property
    def order(self) -> int:
        return len(self.derivs) - 1


@dataclass(frozen=True)
class LeibnizTerms:
    """The two product-rule sums at iteration n (see module docstring)."""

    n: int
    x_n: float
    y_n: float


def second_derivative_roots(rho0: float, u2: float, tol: float | None = None) -> tuple[float, float]:
    """Both roots of the curvature quadratic, smaller first.

    The discriminant ``rho0^2 + 2*u2`` is clamped to zero when within
    tolerance (double root); genuinely negative discriminants raise
    :class:`ComplexDiscriminant`.
    """
    if rho0 <= 0.0:
        raise DomainError("depth must be positive")
    if tol is None:
        tol = 1e-12 * (1.0 + rho0 * rho0 + abs(u2))
    disc = rho0 * rho0 + 2.0 * u2
    if disc < -tol:
        raise ComplexDiscriminant(
            f"discriminant {disc} < 0: curvature {u2} below -depth^2/2")
    root = math.sqrt(max(disc, 0.0))
    b1 = (-rho0 - root) / 2.0
    b2 = (-rho0 + root) / 2.0
    return b1, b2


class BetaSignClass(Enum):
    """Sign pattern of the curvature-root pair, smaller root first."""

    MIXED = "negative_and_positive"
    NEGATIVE_AND_ZERO = "negative_and_zero"
    BOTH_NEGATIVE = "both_negative"
    DOUBLE_NEGATIVE = "double_root_negative"


def beta_sign_class(rho0: float, u2: float, tol: float | None = None) -> BetaSignClass:
    """Classify the root pair by sign, computed from the roots themselves.

    The smaller root is always strictly negative (it is at most -rho0/2),
    so the class is decided by the larger one.
    """
    b1, b2 = second_derivative_roots(rho0, u2, tol)
    if tol is None:
        tol = 1e-12 * (1.0 + rho0)
    if abs(b2 - b1) <= tol:
        return BetaSignClass.DOUBLE_NEGATIVE
    if b2 > tol:
        return BetaSignClass.MIXED
    if abs(b2) <= tol:
        return BetaSignClass.NEGATIVE_AND_ZERO
    return BetaSignClass.BOTH_NEGATIVE


def leibniz_terms(n: int, derivs) -> LeibnizTerms:
    """Product-rule sums of the derivative and depth squares at iteration n.

    Needs ``derivs`` filled through index n+1.  When the derivative vector
    comes from a solution jet, ``x_n + y_n`` equals the n-th profile
    derivative.
    """
    d = np.asarray(derivs, dtype=float)
    if len(d) < n + 2:
        raise DomainError(f"need derivatives through order {n + 1}, got {len(d) - 1}")
    x = 0.0
    y = 0.0
    for k in range(n + 1):
        c = math.comb(n, k)
        x += c * d[k + 1] * d[n - k + 1]
        y += c * d[k] * d[n - k]
    return LeibnizTerms(n, x, y)


def expand_branch(ic: CriticalIC, beta: float, order: int = DEFAULT_ORDER,
                  tol_deg: float | None = None) -> TaylorBranch:
    """Run the derivative recursion from one curvature root.

    Iteration i (for i >= 2) solves the differentiated identity of order
    i+1 for the (i+1)-th derivative with pivot ``2*(rho0 + (i+1)*beta)``.
    A vanishing pivot stops the recursion and marks the branch degenerate
    with the stalled derivative reported as the free parameter.
    """
    if ic.u_jet.order < order:
        raise DomainError(f"profile jet order {ic.u_jet.order} < requested order {order}")
    if tol_deg is None:
        tol_deg = 1e-9 * (1.0 + ic.rho0)

    # one zero pad slot so iteration n can touch index n+1 (its coefficient
    # is the vanishing first derivative, so the value never matters)
    work = np.zeros(order + 2)
    work[0] = ic.rho0
    work[2] = beta

    for n in range(3, order + 1):
        alpha = 2.0 * (ic.rho0 + n * beta)
        terms = leibniz_terms(n, work)
        rhs = ic.u_jet[n] - (terms.x_n + terms.y_n)
        if abs(alpha) < tol_deg:
            return TaylorBranch(
                ic=ic, beta=beta, derivs=work[:n].copy(),
                status=BranchStatus.DEGENERATE, free_index=n,
                consistency_residual=abs(rhs))
        work[n] = rhs / alpha

    derivs = work[: order + 1].copy()
    if np.all(np.abs(derivs[1:]) <= 1e-14 * (1.0 + ic.rho0)):
        return TaylorBranch(ic=ic, beta=beta, derivs=derivs,
                            status=BranchStatus.CONSTANT_CIRCLE,
                            radius_estimate=math.inf)
    branch = TaylorBranch(ic=ic, beta=beta, derivs=derivs, status=BranchStatus.COMPLETE)
    return TaylorBranch(ic=ic, beta=beta, derivs=derivs, status=BranchStatus.COMPLETE,
                        radius_estimate=estimate_radius(branch))


class SafeRegionKind(Enum):
    SAFE = "safe"
    DEGENERATE_AT = "degenerate_at"
    POTENTIALLY_DEGENERATE = "potentially_degenerate"


@dataclass(frozen=True)
class SafeRegionResult:
    kind: SafeRegionKind
    index: int | None = None


def check_safe_region(rho0: float, beta: float, tol: float | None = None,
                      i_max: int = 10_000) -> SafeRegionResult:
    """Decide whether the recursion pivot can ever vanish for this seed.

    Curvatures outside [-rho0/3, 0) are safe for every iteration.  Inside,
    the pivot vanishes exactly on the lattice ``beta = -rho0/(i+1)`` for
    integer i >= 2; the lattice is scanned up to ``i_max``.  Everything
    else inside the window is only potentially degenerate: floating point
    cannot certify that the ratio beta/rho0 avoids all rationals.
    """
    if rho0 <= 0.0:
        raise DomainError("depth must be positive")
    if tol is None:
        tol = 1e-9 * (1.0 + rho0)
    inside_window = -rho0 / 3.0 - tol <= beta < 0.0
    if not inside_window:
        return SafeRegionResult(SafeRegionKind.SAFE)
    i_near = int(round(-rho0 / beta)) - 1
    for i in (i_near - 1, i_near, i_near + 1):
        if 2 <= i <= i_max and abs(beta + rho0 / (i + 1)) <= tol:
            return SafeRegionResult(SafeRegionKind.DEGENERATE_AT, i)
    return SafeRegionResult(SafeRegionKind.POTENTIALLY_DEGENERATE)


def eval_series(branch: TaylorBranch, theta: float) -> tuple[float, float]:
    """Horner evaluation of the truncated branch series and its derivative.

    Warns (:class:`OutsideRadiusWarning`) when the offset exceeds the
    estimated convergence radius; refuses degenerate branches.
    """
    if branch.status is BranchStatus.DEGENERATE:
        raise DegenerateFamily(
            f"branch is degenerate at derivative {branch.free_index}; "
            "its series has a free parameter")
    h = theta - branch.ic.theta0
    r = branch.radius_estimate
    if r is not None and math.isfinite(r) and abs(h) > r:
        warnings.warn(f"offset {h} exceeds estimated convergence radius {r}",
                      OutsideRadiusWarning, stacklevel=2)
    val = 0.0
    n = branch.order
    for k in range(n, -1, -1):
        val = val * h + branch.derivs[k] / math.factorial(k)
    dval = 0.0
    for k in range(n, 0, -1):
        dval = dval * h + branch.derivs[k] / math.factorial(k - 1)
    return val, dval


def estimate_radius(branch: TaylorBranch) -> float | None:
    """Ratio-test estimate from the tail of the series coefficients.

    Returns +inf for constant jets and None when the tail is too short or
    too erratic to trust.
    """
    n = branch.order
    coeffs = np.array([abs(branch.derivs[k]) / math.factorial(k) for k in range(n + 1)])
    support = [k for k in range(1, n + 1) if coeffs[k] > 1e-300]
    if not support:
        return math.inf
    if len(support) < 3:
        return None
    estimates = []
    for i, j in zip(support, support[1:]):
        if coeffs[j] == 0.0:
            continue
        estimates.append((coeffs[i] / coeffs[j]) ** (1.0 / (j - i)))
    if len(estimates) < 2:
        return None
    tail = estimates[-5:]
    if max(tail) / max(min(tail), 1e-300) > 1e3:
        return None
    return float(np.median(tail))


def recursion_residuals(branch: TaylorBranch, scaled: bool = True) -> np.ndarray:
    """Identity defects |x_n + y_n - U_n| of the jet for n = 1 .. order-1.

    With ``scaled`` (the default) each defect is divided by one plus the
    total magnitude of the products entering the sums: the summands grow
    factorially with n while cancelling exactly, so the absolute defect of
    a correct jet is roundoff relative to that magnitude, not to 1.
    """
    d = branch.derivs
    n_max = branch.order - 1
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        terms = leibniz_terms(n, d)
        defect = abs(terms.x_n + terms.y_n - branch.ic.u_jet[n])
        if scaled:
            magnitude = sum(
                math.comb(n, k) * (abs(d[k + 1] * d[n - k + 1]) + abs(d[k] * d[n - k]))
                for k in range(n + 1))
            defect /= 1.0 + magnitude
        out[n - 1] = defect
    return out


def branches_at(ic: CriticalIC, order: int = DEFAULT_ORDER,
                tol_deg: float | None = None) -> list[TaylorBranch]:
    """All analytic branches through a critical IC (two, or one double root)."""
    b1, b2 = second_derivative_roots(ic.rho0, ic.u_jet[2])
    betas = [b1] if abs(b2 - b1) <= 1e-12 * (1.0 + ic.rho0) else [b1, b2]
    return [expand_branch(ic, b, order, tol_deg) for b in betas]
