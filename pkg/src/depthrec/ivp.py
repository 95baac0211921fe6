"""Branch ODE integration from regular initial conditions.

The reconstruction identity splits into two explicit branches

    drho/dtheta = sign * sqrt(U(theta) - rho^2),

each Lipschitz away from the depth bound, so a regular initial condition
(depth strictly below the bound) launches exactly one monotone trajectory
per sign and direction.  Integration uses an embedded Dormand-Prince 5(4)
pair with the radicand clamped at zero; the bound itself is a contact
event (the field loses Lipschitz continuity there), detected by monitoring
``g = U - rho^2`` and localized by bisecting the last accepted step, after
which continuation is the business of :func:`continue_through_critical`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import NoContinuation, NotRegular, StepFailure
from .modulus import ModulusModel
from .taylor import (
    BranchStatus, CriticalIC, TaylorBranch, eval_series, expand_branch,
    second_derivative_roots,
)

__all__ = [
    "BranchSign", "RegularIC", "TerminationKind", "Termination", "SolutionPiece",
    "IntegrationOptions", "derivative_pair", "solve_regular", "residual",
    "continue_through_critical", "branch_to_piece", "bound_following_piece",
]

BranchSign = int  # +1 or -1


class TerminationKind(Enum):
    DOMAIN_END = "domain_end"
    CONTACT = "contact"
    FLOOR_CONTACT = "floor_contact"
    STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    theta: float
    detail: str = ""


@dataclass(frozen=True)
class RegularIC:
    theta0: float
    rho0: float

    def __post_init__(self):
        if self.rho0 <= 0.0:
            raise NotRegular(f"depth must be positive, got {self.rho0}")


@dataclass
class IntegrationOptions:
    """Tolerances and stepping knobs shared across the solver surface."""

    rtol: float = 1e-10
    atol: float = 1e-12
    h_max: float = 0.02
    interp_tol: float = 1e-6        # linear-interpolation error target between nodes
    tol_contact: float = 1e-10      # scaled by (1 + U) pointwise
    tol_floor: float = 1e-12
    tol_reg_factor: float = 10.0    # regularity margin in units of the contact tolerance
    series_radius: float = 0.05     # local-series handoff distance at critical points
    taylor_order: int = 20
    tol_bound_follow: float = 1e-9  # bound-following admissibility, scaled by profile
    handoff_factor: float = 1e-4    # switch to the local series when U - rho^2 dips below this (scaled)
    handoff_match_tol: float = 1e-6  # trajectory-to-branch distance accepted as "on branch"
    max_steps: int = 500_000


@dataclass
class SolutionPiece:
    """One monotone trajectory, nodes in increasing angle order.

    ``sign`` is the depth monotonicity along the walk direction: +1 pieces
    gain depth as integration proceeds, -1 pieces lose it.  For forward
    pieces this equals the sign of drho/dtheta; backward pieces mirror it
    (``ode_sign`` gives the drho/dtheta branch either way).  ``termination``
    describes the far end in the direction of integration (the smallest
    angle for backward pieces).  ``dense_contact`` marks bound-following
    pieces on autonomous stretches, which carry sign +1 by convention.
    """

    sign: BranchSign
    thetas: np.ndarray
    rhos: np.ndarray
    drhos: np.ndarray
    termination: Termination
    direction: str  # "forward" | "backward"
    dense_contact: bool = False
    _spline: object = field(default=None, repr=False, compare=False)

    @property
    def ode_sign(self) -> int:
        """Sign of drho/dtheta along this piece."""
        return self.sign if self.direction == "forward" else -self.sign

    @property
    def theta_start(self) -> float:
        return float(self.thetas[0])

    @property
    def theta_end(self) -> float:
        return float(self.thetas[-1])

    def interp(self, theta):
        """Piecewise-cubic interpolation of depth (Hermite on the nodes)."""
        if self._spline is None:
            if len(self.thetas) >= 2:
                self._spline = CubicHermiteSpline(self.thetas, self.rhos, self.drhos)
            else:
                rho0 = float(self.rhos[0])
                self._spline = lambda th: np.full_like(np.asarray(th, dtype=float), rho0)
        return self._spline(theta)


def derivative_pair(u: ModulusModel, ic: RegularIC,
                    opts: IntegrationOptions | None = None) -> tuple[float, float]:
    """The two admissible slopes (+alpha, -alpha) at a regular IC."""
    opts = opts or IntegrationOptions()
    alpha = _regular_alpha(u, ic, opts)
    return alpha, -alpha


def _regular_alpha(u: ModulusModel, ic: RegularIC, opts: IntegrationOptions) -> float:
    uval = u.value(ic.theta0)
    margin = uval - ic.rho0 * ic.rho0
    tol_reg = opts.tol_reg_factor * opts.tol_contact * (1.0 + uval)
    if margin <= tol_reg:
        raise NotRegular(
            f"IC ({ic.theta0}, {ic.rho0}) is not regular: U - rho^2 = {margin} <= {tol_reg}")
    return math.sqrt(margin)


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _hermite(t0, y0, f0, t1, y1, f1, t):
    """Cubic Hermite interpolant over one accepted step."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def solve_regular(u: ModulusModel, ic: RegularIC, sign: BranchSign,
                  direction: str = "forward",
                  opts: IntegrationOptions | None = None) -> SolutionPiece:
    """Integrate one explicit branch until the domain end or an event.

    ``sign`` follows the walk convention of :class:`SolutionPiece`: +1
    means depth grows along the integration direction.  Stops at the first
    of: domain end, contact with the depth bound (``U - rho^2`` down at
    the scaled contact tolerance), depth reaching the floor, or a step
    failure.  Emitted nodes are dense enough that linear interpolation
    between them stays within ``opts.interp_tol``.
    """
    opts = opts or IntegrationOptions()
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    _regular_alpha(u, ic, opts)

    lo, hi = u.domain
    t_end = hi if direction == "forward" else lo
    tdir = 1.0 if direction == "forward" else -1.0
    span = hi - lo
    ode_sign = sign if direction == "forward" else -sign

    uval_cache: dict[float, float] = {}

    def uval(t: float) -> float:
        v = uval_cache.get(t)
        if v is None:
            v = u.value(t)
            uval_cache[t] = v
        return v

    def ffield(t: float, y: float) -> float:
        return ode_sign * math.sqrt(max(uval(t) - y * y, 0.0))

    def gval(t: float, y: float) -> float:
        return uval(t) - y * y

    def contact_tol(t: float) -> float:
        return opts.tol_contact * (1.0 + abs(uval(t)))

    ts = [ic.theta0]
    ys = [ic.rho0]
    fs = [ffield(ic.theta0, ic.rho0)]
    termination: Termination | None = None

    t, y = ic.theta0, ic.rho0
    f_t = fs[0]
    h = min(opts.h_max, max(1e-6 * span, abs(t_end - t) * 0.01))
    rejects = 0
    steps = 0
    handoff_theta_tried = math.nan

    if abs(t_end - t) < 1e-15 * max(1.0, span):
        termination = Termination(TerminationKind.DOMAIN_END, t)

    while termination is None:
        steps += 1
        if steps > opts.max_steps:
            termination = Termination(TerminationKind.STEP_FAILURE, t,
                                      f"step budget {opts.max_steps} exhausted")
            break
        h = min(h, opts.h_max, abs(t_end - t))
        if h <= 1e-15 * max(1.0, abs(t)):
            # no room left to step: we are at the domain end
            termination = Termination(TerminationKind.DOMAIN_END, t)
            break
        ht = tdir * h

        k = [f_t]
        failed = False
        for i in range(1, 6):
            ti = t + _DP_C[i] * ht
            yi = y + ht * sum(a * kk for a, kk in zip(_DP_A[i], k))
            try:
                k.append(ffield(ti, yi))
            except Exception as exc:  # profile evaluation failed mid-stage
                failed = True
                fail_detail = str(exc)
                break
        if failed:
            h *= 0.5
            rejects += 1
            if rejects > 60:
                termination = Termination(TerminationKind.STEP_FAILURE, t, fail_detail)
            continue

        y5 = y + ht * sum(b * kk for b, kk in zip(_DP_B5, k))
        t_new = t + ht
        try:
            k6 = ffield(t_new, y5)
        except Exception as exc:
            h *= 0.5
            rejects += 1
            if rejects > 60:
                termination = Termination(TerminationKind.STEP_FAILURE, t, str(exc))
            continue
        y4 = y + ht * sum(b * kk for b, kk in zip(_DP_B4, k + [k6]))

        scale = opts.atol + opts.rtol * max(abs(y), abs(y5))
        err = abs(y5 - y4) / scale
        if err > 1.0:
            rejects += 1
            if rejects > 60:
                # persistent rejection happens only hard against the bound
                if gval(t, y) <= 10.0 * contact_tol(t):
                    termination = Termination(TerminationKind.CONTACT, t)
                else:
                    termination = Termination(TerminationKind.STEP_FAILURE, t,
                                              f"step size underflow at err={err:.3g}")
                break
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        rejects = 0

        # events on the accepted step, earliest first
        event: tuple[float, TerminationKind] | None = None
        if y5 <= opts.tol_floor:
            tau = _bisect_event(lambda tt: _hermite(t, y, f_t, t_new, y5, k6, tt) - opts.tol_floor,
                                t, t_new)
            event = (tau, TerminationKind.FLOOR_CONTACT)
        g_new = gval(t_new, y5)
        if g_new <= contact_tol(t_new):
            tau = _bisect_event(
                lambda tt: (gval(tt, _hermite(t, y, f_t, t_new, y5, k6, tt))
                            - contact_tol(tt)),
                t, t_new)
            if event is None or tdir * (event[0] - tau) > 0:
                event = (tau, TerminationKind.CONTACT)

        if event is not None:
            tau, kind = event
            y_tau = _hermite(t, y, f_t, t_new, y5, k6, tau)
            _emit_nodes(ts, ys, fs, t, y, f_t, tau, y_tau, ffield(tau, y_tau), ffield, opts)
            if kind is TerminationKind.CONTACT:
                # land the final node exactly on the bound at the critical
                # point (tangential contacts); transversal ones keep tau
                snap = _contact_node(u, tau, fs[-1], tdir, lo, hi)
                if snap is not None:
                    theta_c, rho_c = snap
                    if ode_sign * (rho_c - ys[-1]) >= -1e-13 and tdir * (theta_c - tau) >= 0.0:
                        ts.append(theta_c)
                        ys.append(rho_c)
                        fs.append(0.0)
                        tau = theta_c
            termination = Termination(kind, tau)
            break

        # near-contact series handoff: a trajectory riding tangentially into
        # the bound is exponentially ill-conditioned for stepping, so once
        # the margin is small we try to identify the analytic branch it sits
        # on and finish the approach with the local series
        if (g_new <= opts.handoff_factor * (1.0 + abs(uval(t_new)))
                and g_new < gval(t, y) and handoff_theta_tried != t_new):
            handoff_theta_tried = t_new
            snap = _series_handoff(u, t_new, y5, ode_sign, tdir, t_end, opts)
            if snap is not None:
                snap_ts, snap_ys, snap_fs, theta_c = snap
                _emit_nodes(ts, ys, fs, t, y, f_t, t_new, y5, k6, ffield, opts)
                ts.extend(snap_ts)
                ys.extend(snap_ys)
                fs.extend(snap_fs)
                termination = Termination(TerminationKind.CONTACT, theta_c)
                break

        _emit_nodes(ts, ys, fs, t, y, f_t, t_new, y5, k6, ffield, opts)
        t, y, f_t = t_new, y5, k6
        if abs(t - t_end) <= 1e-15 * max(1.0, abs(t_end)):
            termination = Termination(TerminationKind.DOMAIN_END, t)
            break
        h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))

    thetas = np.array(ts)
    rhos = np.array(ys)
    drhos = np.array(fs)
    if direction == "backward":
        thetas, rhos, drhos = thetas[::-1].copy(), rhos[::-1].copy(), drhos[::-1].copy()
    return SolutionPiece(sign=sign, thetas=thetas, rhos=rhos, drhos=drhos,
                         termination=termination, direction=direction)


def _contact_node(u: ModulusModel, tau: float, f_tau: float, tdir: float,
                  lo: float, hi: float) -> tuple[float, float] | None:
    """Exact bound node for a tangential contact detected at ``tau``.

    Prefers the nearby root of U' (Newton with the order-2 jet); on
    autonomous stretches extrapolates the touch point from the residual
    slope of the local cosine-type trajectory.  Returns None for
    transversal contacts, which have no critical point to land on.
    """
    try:
        dtau = u.derivative(tau)
        scale_d = 1.0 + u.scale
        if abs(dtau) <= 1e-9 * scale_d:
            # flat profile: rho = sqrt(U) cos(offset), slope determines offset
            bound = math.sqrt(max(u.value(tau), 0.0))
            if bound <= 0.0:
                return None
            offset = math.asin(min(1.0, abs(f_tau) / bound))
            theta_c = min(max(tau + tdir * offset, lo), hi)
            return theta_c, math.sqrt(max(u.value(theta_c), 0.0))
        theta_c = tau
        for _ in range(8):
            jet2 = u.jet(theta_c, 2)
            if abs(jet2[2]) < 1e-9 * u.scale:
                return None
            step = jet2[1] / jet2[2]
            theta_c -= step
            if abs(theta_c - tau) > 0.05 * max(1.0, hi - lo):
                return None
            if abs(step) < 1e-15:
                break
        if abs(u.derivative(theta_c)) > 1e-8 * scale_d:
            return None
        theta_c = min(max(theta_c, lo), hi)
        return theta_c, math.sqrt(max(u.value(theta_c), 0.0))
    except Exception:
        return None


def _series_handoff(u: ModulusModel, t: float, y: float, ode_sign: int,
                    tdir: float, t_end: float, opts: IntegrationOptions):
    """Finish a tangential approach with the local analytic series.

    Locates the critical point the trajectory is converging to (Newton on
    U'), expands both branches there, and if the current state sits on one
    of them (within ``handoff_match_tol``, and unambiguously so), returns
    replacement nodes from ``t`` to the exact contact.  Returns None when
    no unambiguous branch match exists (autonomous stretches, cone-interior
    trajectories, genuine pass-unders).
    """
    lo, hi = u.domain
    theta_c = t
    try:
        for _ in range(8):
            jet2 = u.jet(theta_c, 2)
            if abs(jet2[2]) < 1e-9 * u.scale:
                return None  # flat or inflection-like curvature: leave it to events
            step = jet2[1] / jet2[2]
            theta_c -= step
            if not (lo - 1e-12 <= theta_c <= hi + 1e-12) or abs(theta_c - t) > 2 * opts.series_radius:
                return None
            if abs(step) < 1e-14:
                break
        if abs(u.derivative(theta_c)) > 1e-8 * u.scale:
            return None
        theta_c = min(max(theta_c, lo), hi)
        if tdir * (theta_c - t) < 0.0:
            return None  # the critical point is behind the direction of travel
        ic = CriticalIC.from_modulus(u, theta_c, order=opts.taylor_order)
        b1, b2 = second_derivative_roots(ic.rho0, ic.u_jet[2])
    except Exception:
        return None

    side_app = +1 if t > theta_c else (-1 if t < theta_c else int(-tdir))
    order = min(opts.taylor_order, ic.u_jet.order)
    candidates = []
    for beta in {b1, b2}:
        branch = expand_branch(ic, beta, order=order)
        if branch.status is not BranchStatus.COMPLETE:
            continue
        if _half_branch_sign(branch, side_app) != ode_sign:
            continue
        val, _ = eval_series(branch, t)
        candidates.append((abs(val - y), branch))
    if not candidates:
        return None
    candidates.sort(key=lambda c: c[0])
    dist, branch = candidates[0]
    if dist > opts.handoff_match_tol * (1.0 + ic.rho0):
        return None
    if len(candidates) > 1 and dist > 0.25 * candidates[1][0]:
        return None  # too close to call between branches

    n_nodes = max(6, int(math.ceil(abs(theta_c - t) / math.sqrt(8.0 * opts.interp_tol))))
    taus = np.linspace(t, theta_c, n_nodes + 1)[1:]
    snap_ts: list[float] = []
    snap_ys: list[float] = []
    snap_fs: list[float] = []
    for tau in taus:
        val, dval = eval_series(branch, float(tau))
        snap_ts.append(float(tau))
        snap_ys.append(val)
        snap_fs.append(dval)
    snap_ys[-1] = ic.rho0
    snap_fs[-1] = 0.0
    return snap_ts, snap_ys, snap_fs, theta_c


def _bisect_event(pred, t_ok: float, t_hit: float, iters: int = 80) -> float:
    """First angle (from t_ok toward t_hit) where ``pred <= 0``."""
    if pred(t_ok) <= 0.0:
        return t_ok
    a, b = t_ok, t_hit
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if pred(mid) <= 0.0:
            b = mid
        else:
            a = mid
    return b


def _emit_nodes(ts, ys, fs, t0, y0, f0, t1, y1, f1, fjet, opts) -> None:
    """Append the step end plus interpolated interior nodes when the step
    is too wide for the linear-interpolation error target."""
    width = abs(t1 - t0)
    if width == 0.0:
        return
    curvature = abs(f1 - f0) / width
    h_lin = math.sqrt(8.0 * opts.interp_tol / max(curvature, 1e-9))
    n_sub = min(64, max(1, int(math.ceil(width / h_lin))))
    for j in range(1, n_sub):
        tau = t0 + (t1 - t0) * j / n_sub
        y_tau = _hermite(t0, y0, f0, t1, y1, f1, tau)
        ts.append(tau)
        ys.append(y_tau)
        fs.append(fjet(tau, y_tau))
    ts.append(t1)
    ys.append(y1)
    fs.append(f1)


def residual(piece: SolutionPiece, u: ModulusModel) -> float:
    """Largest defect of the reconstruction identity over the stored nodes."""
    worst = 0.0
    for th, r, dr in zip(piece.thetas, piece.rhos, piece.drhos):
        worst = max(worst, abs(dr * dr + r * r - u.value(float(th))))
    return worst


# ---------------------------------------------------------------------------
# Continuation through critical contacts
# ---------------------------------------------------------------------------

def _local_critical_ic(u: ModulusModel, theta_c: float,
                       opts: IntegrationOptions) -> CriticalIC:
    """Critical IC at (or polished near) a contact angle."""
    lo, hi = u.domain
    # polish against U' if a bracket exists; contacts land on critical points
    delta = min(1e-3 * (hi - lo), 1e-2)
    a = max(lo, theta_c - delta)
    b = min(hi, theta_c + delta)
    da, db = u.derivative(a), u.derivative(b)
    theta = theta_c
    if da * db < 0.0:
        from scipy.optimize import brentq
        theta = float(brentq(u.derivative, a, b, xtol=1e-14))
    return CriticalIC.from_modulus(u, theta, order=opts.taylor_order)


def _half_branch_sign(branch: TaylorBranch, side: int) -> int:
    """Monotonicity sign of a branch half (side=+1 ahead, -1 behind).

    The slope near the center is dominated by the first nonzero derivative
    of order >= 2; a constant branch returns 0.
    """
    tol = 1e-12 * (1.0 + branch.ic.rho0)
    for k in range(2, branch.order + 1):
        dk = branch.derivs[k]
        if abs(dk) > tol:
            s = 1.0 if dk > 0 else -1.0
            return int(s * (side ** (k - 1)))
    return 0


def branch_to_piece(u: ModulusModel, branch: TaylorBranch, side: int,
                    opts: IntegrationOptions | None = None,
                    stop_theta: float | None = None) -> SolutionPiece:
    """Materialize one half of an analytic branch as a solution piece.

    Evaluates the local series out to the handoff distance, then continues
    by integration.  ``side`` +1 extends toward larger angles.  A constant
    branch turns into a bound-following piece instead.
    """
    opts = opts or IntegrationOptions()
    theta_c = branch.ic.theta0
    lo, hi = u.domain
    limit = (hi if side > 0 else lo) if stop_theta is None else stop_theta
    if branch.status is BranchStatus.CONSTANT_CIRCLE:
        return bound_following_piece(u, theta_c, side, opts, stop_theta=limit)

    half_ode_sign = _half_branch_sign(branch, side)
    if half_ode_sign == 0:
        raise NoContinuation("branch has no monotone half here")
    direction = "forward" if side > 0 else "backward"
    walk_sign = half_ode_sign * side

    r = opts.series_radius
    if branch.radius_estimate is not None and math.isfinite(branch.radius_estimate):
        r = min(r, 0.5 * branch.radius_estimate)
    span_avail = abs(limit - theta_c)
    r = min(r, span_avail)
    if r <= 0.0:
        raise NoContinuation("no room to continue on this side of the contact")

    n_series = max(8, int(math.ceil(r / math.sqrt(8.0 * opts.interp_tol))))
    offsets = np.linspace(0.0, side * r, n_series + 1)
    ts = [theta_c + float(o) for o in offsets]
    vals = [eval_series(branch, tt) for tt in ts]
    ys = [v[0] for v in vals]
    fs = [v[1] for v in vals]

    theta_h, rho_h = ts[-1], ys[-1]
    reached_limit = abs(theta_h - limit) <= 1e-14 * max(1.0, abs(limit))
    if reached_limit:
        termination = Termination(TerminationKind.DOMAIN_END, theta_h)
        tail = None
    else:
        try:
            tail = solve_regular(u, RegularIC(theta_h, rho_h), walk_sign, direction, opts)
        except NotRegular:
            # the series leg still hugs the bound at the handoff point
            termination = Termination(TerminationKind.CONTACT, theta_h)
            tail = None
    if tail is not None:
        if stop_theta is not None:
            tail = _clip_piece(tail, stop_theta)
        if side > 0:
            ts.extend(tail.thetas[1:])
            ys.extend(tail.rhos[1:])
            fs.extend(tail.drhos[1:])
        else:
            ts = list(tail.thetas[:-1]) + ts[::-1]
            ys = list(tail.rhos[:-1]) + ys[::-1]
            fs = list(tail.drhos[:-1]) + fs[::-1]
        termination = tail.termination
    elif side < 0:
        ts, ys, fs = ts[::-1], ys[::-1], fs[::-1]

    return SolutionPiece(sign=walk_sign, thetas=np.array(ts), rhos=np.array(ys),
                         drhos=np.array(fs), termination=termination,
                         direction=direction)


def _clip_piece(piece: SolutionPiece, stop_theta: float) -> SolutionPiece:
    """Restrict a piece to angles on the near side of ``stop_theta``,
    ending on an interpolated node exactly at the cut."""
    thetas, rhos, drhos = piece.thetas, piece.rhos, piece.drhos
    if piece.direction == "forward":
        mask = thetas <= stop_theta + 1e-14
    else:
        mask = thetas >= stop_theta - 1e-14
    if mask.all():
        return piece
    rho_cut = float(piece.interp(stop_theta))
    drho_cut = float(np.interp(stop_theta, piece.thetas, piece.drhos))
    t_keep, r_keep, d_keep = thetas[mask], rhos[mask], drhos[mask]
    if piece.direction == "forward":
        t_new = np.append(t_keep, stop_theta)
        r_new = np.append(r_keep, rho_cut)
        d_new = np.append(d_keep, drho_cut)
    else:
        t_new = np.insert(t_keep, 0, stop_theta)
        r_new = np.insert(r_keep, 0, rho_cut)
        d_new = np.insert(d_keep, 0, drho_cut)
    term = Termination(TerminationKind.DOMAIN_END, stop_theta, "clipped")
    return SolutionPiece(sign=piece.sign, thetas=t_new, rhos=r_new, drhos=d_new,
                         termination=term, direction=piece.direction,
                         dense_contact=piece.dense_contact)


def bound_following_piece(u: ModulusModel, theta_c: float, side: int,
                          opts: IntegrationOptions | None = None,
                          stop_theta: float | None = None) -> SolutionPiece:
    """Constant-depth piece following the bound over an autonomous stretch.

    Admissible only while the profile stays flat (the bound solves the
    ODE exactly there).  Ends at the domain end or where flatness fails,
    the latter reported as a contact so continuation can chain further.
    """
    opts = opts or IntegrationOptions()
    lo, hi = u.domain
    limit = (hi if side > 0 else lo) if stop_theta is None else stop_theta
    rho0 = math.sqrt(u.value(theta_c))
    tol = opts.tol_bound_follow * u.scale

    def flat(th: float) -> bool:
        return abs(u.value(th) - rho0 * rho0) <= tol

    h = opts.h_max
    ts = [theta_c]
    t = theta_c
    ended_by_domain = True
    while (limit - t) * side > 1e-15:
        t_next = t + side * min(h, abs(limit - t))
        if not flat(t_next):
            cut = _bisect_event(lambda tt: (tol - abs(u.value(tt) - rho0 * rho0)),
                                t, t_next)
            ts.append(cut)
            ended_by_domain = False
            break
        ts.append(t_next)
        t = t_next

    thetas = np.array(ts if side > 0 else ts[::-1])
    rhos = np.array([math.sqrt(u.value(float(tt))) for tt in thetas])
    with np.errstate(all="ignore"):
        drhos = np.array([u.derivative(float(tt)) for tt in thetas]) / (2.0 * rhos)
    end_theta = float(ts[-1])
    kind = TerminationKind.DOMAIN_END if ended_by_domain else TerminationKind.CONTACT
    direction = "forward" if side > 0 else "backward"
    return SolutionPiece(sign=+1, thetas=thetas, rhos=rhos, drhos=drhos,
                         termination=Termination(kind, end_theta),
                         direction=direction, dense_contact=True)


def continuation_candidates(u: ModulusModel, theta_c: float, side: int,
                            opts: IntegrationOptions | None = None) -> list[tuple[int, TaylorBranch]]:
    """All (walk sign, branch) pairs that can continue past a contact.

    Each curvature root contributes the monotone half matching ``side``;
    a constant branch contributes the bound-following continuation with
    the conventional +1 sign.
    """
    opts = opts or IntegrationOptions()
    ic = _local_critical_ic(u, theta_c, opts)
    order = min(opts.taylor_order, ic.u_jet.order)  # sampled profiles stop at 2
    b1, b2 = second_derivative_roots(ic.rho0, ic.u_jet[2])
    betas = [b1] if abs(b2 - b1) <= 1e-12 * (1.0 + ic.rho0) else [b1, b2]
    out: list[tuple[int, TaylorBranch]] = []
    for beta in betas:
        branch = expand_branch(ic, beta, order=order)
        if branch.status is BranchStatus.DEGENERATE:
            continue
        if branch.status is BranchStatus.CONSTANT_CIRCLE:
            out.append((+1, branch))
            continue
        out.append((_half_branch_sign(branch, side) * side, branch))
    return out


def continue_through_critical(piece: SolutionPiece, u: ModulusModel,
                              choice: BranchSign,
                              opts: IntegrationOptions | None = None) -> SolutionPiece:
    """Continue a contact-terminated trajectory past the critical point.

    The continuation starts exactly on the bound with zero slope and picks,
    among the analytic halves whose monotonicity matches ``choice``, the one
    with the larger curvature root (the pointwise-dominant one).  Raises
    :class:`NoContinuation` when no half matches.
    """
    opts = opts or IntegrationOptions()
    if piece.termination.kind is not TerminationKind.CONTACT:
        raise NoContinuation("piece did not terminate at a contact")
    side = +1 if piece.direction == "forward" else -1
    theta_c = piece.termination.theta
    candidates = continuation_candidates(u, theta_c, side, opts)
    matching = [(s, b) for s, b in candidates if s == choice]
    if not matching:
        raise NoContinuation(
            f"no admissible continuation with sign {choice:+d} at theta={theta_c}")
    _, branch = max(matching, key=lambda sb: sb[1].beta)
    if branch.status is BranchStatus.CONSTANT_CIRCLE:
        return bound_following_piece(u, branch.ic.theta0, side, opts)
    return branch_to_piece(u, branch, side, opts)
