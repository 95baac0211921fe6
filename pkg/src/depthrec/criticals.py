"""Maximal depth profile and critical points of the branch ODE.

The pointwise square root of the squared-speed profile upper-bounds every
admissible depth solution, and the places where its derivative vanishes are
exactly the points where solutions can touch it, merge, or split.  This
module locates those points (isolated roots of U', flat runs where U'
vanishes identically, and boundary roots) and classifies each as a
minimum, maximum or inflection of the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidModulus
from .modulus import Jet, ModulusModel

__all__ = ["CriticalKind", "CriticalPoint", "CriticalSet", "maximal_depth",
           "find_critical_points", "upper_bound_check", "UpperBoundReport"]


class CriticalKind(Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    INFLECTION = "inflection"


@dataclass(frozen=True)
class CriticalPoint:
    theta: float
    depth: float
    kind: CriticalKind
    u_jet: Jet
    boundary: bool = False


@dataclass
class CriticalSet:
    """Isolated critical points in increasing angle order.

    ``dense`` is set when the derivative vanishes identically on some
    sub-interval (autonomous stretches); such stretches are listed in
    ``dense_intervals`` and their interiors carry no isolated points.
    ``rejected`` collects critical angles that had to be discarded
    (currently: places where the profile itself vanishes, so no positive
    depth exists there).
    """

    points: list[CriticalPoint]
    dense: bool = False
    dense_intervals: list[tuple[float, float]] = field(default_factory=list)
    rejected: list[tuple[float, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def maximal_depth(u: ModulusModel, theta: float) -> float:
    """The depth bound sqrt(U) at one angle."""
    return math.sqrt(u.value(theta))


def _classify(u: ModulusModel, theta: float, tol_class: float) -> CriticalKind:
    j = u.jet(theta, 2)
    if j[2] > tol_class:
        return CriticalKind.MINIMUM
    if j[2] < -tol_class:
        return CriticalKind.MAXIMUM
    # curvature at roundoff level: look at the derivative's sign on both sides
    lo, hi = u.domain
    h = (hi - lo) * 1e-3
    left = u.derivative(max(lo, theta - h))
    right = u.derivative(min(hi, theta + h))
    if left > 0 >= right or (left > 0 and right < 0):
        return CriticalKind.MAXIMUM
    if left < 0 <= right or (left < 0 and right > 0):
        return CriticalKind.MINIMUM
    return CriticalKind.INFLECTION


def find_critical_points(u: ModulusModel, tol: float = 1e-12, grid: int = 2048,
                         tol_class: float | None = None) -> CriticalSet:
    """Locate and classify every critical point of the depth bound.

    A sign-change scan of U' over ``grid`` cells brackets the isolated
    roots, which are then polished to ``|theta - root| < tol``.  Runs where
    U' sits at roundoff level throughout mark dense (autonomous) stretches.
    Double roots of U' (no sign change) are caught by polishing the zeros
    of U'' and accepting them when U' is small there.  Domain endpoints
    with vanishing U' are admitted and flagged ``boundary``.
    """
    lo, hi = u.domain
    scale_d = 1.0 + u.scale / max(hi - lo, 1e-6)
    tol_flat = 1e-11 * scale_d
    tol_accept = 1e-8 * scale_d
    if tol_class is None:
        tol_class = 1e-9 * u.scale

    thetas = np.linspace(lo, hi, grid + 1)
    dvals = np.array([u.derivative(float(t)) for t in thetas])
    flat = np.abs(dvals) <= tol_flat

    # flat runs: long ones are dense stretches, short ones are root candidates
    # (an exact zero of U' landing on a grid point shows up as a 1-point run)
    dense_intervals: list[tuple[float, float]] = []
    short_runs: list[tuple[int, int]] = []
    run_start = None
    for i in range(len(flat) + 1):
        f = flat[i] if i < len(flat) else False
        if f and run_start is None:
            run_start = i
        elif not f and run_start is not None:
            if i - run_start >= 4:
                dense_intervals.append((float(thetas[run_start]), float(thetas[i - 1])))
            else:
                short_runs.append((run_start, i - 1))
            run_start = None

    def in_dense(th: float) -> bool:
        return any(a - 1e-12 <= th <= b + 1e-12 for a, b in dense_intervals)

    roots: list[float] = []

    # simple roots: sign changes between non-flat neighbours
    for i in range(grid):
        a, b = dvals[i], dvals[i + 1]
        if flat[i] or flat[i + 1]:
            continue
        if a * b < 0.0:
            root = brentq(u.derivative, float(thetas[i]), float(thetas[i + 1]), xtol=tol)
            roots.append(float(root))

    # short flat runs: polish against the nearest non-flat bracket if U'
    # changes sign across the run, otherwise keep the run midpoint
    for start, end in short_runs:
        a_idx, b_idx = max(start - 1, 0), min(end + 1, grid)
        a, b = dvals[a_idx], dvals[b_idx]
        if a * b < 0.0 and not flat[a_idx] and not flat[b_idx]:
            root = brentq(u.derivative, float(thetas[a_idx]), float(thetas[b_idx]), xtol=tol)
            roots.append(float(root))
        else:
            roots.append(float(thetas[(start + end) // 2]))

    # touch roots: local minima of |U'| that polish to a zero of U''
    absd = np.abs(dvals)
    touch_screen = 1e-5 * scale_d
    for i in range(1, grid):
        if flat[i] or absd[i] > touch_screen:
            continue
        if not (absd[i] <= absd[i - 1] and absd[i] <= absd[i + 1]):
            continue
        if dvals[i - 1] * dvals[i + 1] < 0.0:
            continue  # already found by the sign-change scan
        second = lambda th: u.jet(th, 2)[2]
        a, b = float(thetas[i - 1]), float(thetas[i + 1])
        try:
            if second(a) * second(b) < 0.0:
                cand = float(brentq(second, a, b, xtol=tol))
            else:
                cand = float(thetas[i])
        except Exception:
            continue
        if abs(u.derivative(cand)) <= tol_accept:
            roots.append(cand)

    # boundary roots
    boundary: list[float] = []
    if abs(dvals[0]) <= tol_accept and not in_dense(float(thetas[0])):
        boundary.append(float(thetas[0]))
    if abs(dvals[-1]) <= tol_accept and not in_dense(float(thetas[-1])):
        boundary.append(float(thetas[-1]))

    # de-duplicate and drop roots inside dense stretches
    merged: list[float] = []
    for r in sorted(roots):
        if in_dense(r):
            continue
        if merged and abs(r - merged[-1]) < max(10 * tol, 1e-10 * (hi - lo)):
            continue
        merged.append(r)

    points: list[CriticalPoint] = []
    rejected: list[tuple[float, str]] = []
    for th in sorted(set(merged) | set(boundary)):
        uval = u.value(th)
        if uval <= 1e-14 * u.scale:
            rejected.append((th, "profile vanishes here; no positive depth exists"))
            continue
        kind = _classify(u, th, tol_class)
        jet = u.jet(th, 2)
        is_boundary = th in boundary or th <= lo + 10 * tol or th >= hi - 10 * tol
        points.append(CriticalPoint(th, math.sqrt(uval), kind, jet, is_boundary))

    return CriticalSet(points=points, dense=bool(dense_intervals),
                       dense_intervals=dense_intervals, rejected=rejected)


@dataclass
class UpperBoundReport:
    """Nodewise comparison of a solution against the depth bound."""

    violations: list[tuple[float, float, float]]   # (theta, rho, bound)
    contacts: list[float]                          # near-equality angles
    ok: bool


def upper_bound_check(solution, u: ModulusModel, tol: float | None = None) -> UpperBoundReport:
    """Verify ``rho <= sqrt(U) + tol`` at every node of a solution.

    Accepts anything exposing ``thetas``/``rhos`` arrays (single pieces and
    stitched solutions both do).  Near-equality nodes are reported as
    contact candidates.
    """
    thetas = np.asarray(solution.thetas, dtype=float)
    rhos = np.asarray(solution.rhos, dtype=float)
    if tol is None:
        bound_max = max(math.sqrt(max(u.value(float(t)), 0.0)) for t in thetas[:: max(1, len(thetas) // 64)])
        tol = 1e-8 * (1.0 + bound_max)
    violations: list[tuple[float, float, float]] = []
    contacts: list[float] = []
    for th, r in zip(thetas, rhos):
        try:
            bound = math.sqrt(max(u.value(float(th)), 0.0))
        except InvalidModulus:
            violations.append((float(th), float(r), math.nan))
            continue
        if r > bound + tol:
            violations.append((float(th), float(r), bound))
        elif abs(r - bound) <= tol:
            contacts.append(float(th))
    return UpperBoundReport(violations, contacts, not violations)
