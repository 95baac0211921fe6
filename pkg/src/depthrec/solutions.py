"""Global solutions: enumeration, two-point chaining, maximality, cones.

Single pieces from the branch integrator stop at contacts; this module
stitches them into C1 solutions spanning the domain.  It enumerates the
finite tree of continuations from an initial condition, builds the unique
trajectory between consecutive critical points (launched from the
minimum-type end, where uniqueness holds), assembles the depth-maximal
solution that touches the bound at every critical point, and constructs
the bounding pair around maximum-type critical points together with the
squeezed non-analytic solutions inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .criticals import CriticalKind, CriticalPoint, CriticalSet, find_critical_points
from .errors import (
    NoContinuation, NoCriticalPoints, NoSolution, NotConeApex, NotRegular, OutsideCone,
)
from .ivp import (
    IntegrationOptions, RegularIC, SolutionPiece, Termination, TerminationKind,
    bound_following_piece, branch_to_piece, continuation_candidates,
    continue_through_critical, solve_regular, _clip_piece, _half_branch_sign,
)
from .modulus import ModulusModel
from .taylor import BranchStatus, CriticalIC, TaylorBranch

__all__ = [
    "JunctionKind", "Junction", "PiecewiseSolution", "ConvergenceCone",
    "stitch", "c1_check", "enumerate_branches", "solve_bvp_between_criticals",
    "maximal_solution", "build_cone", "sample_cone_solution",
]


class JunctionKind(Enum):
    START = "start"
    END = "end"
    CRITICAL_PASS = "critical_pass"
    BRANCH_SWITCH = "branch_switch"


@dataclass(frozen=True)
class Junction:
    theta: float
    kind: JunctionKind
    delta_rho: float = 0.0
    delta_drho: float = 0.0


@dataclass
class PiecewiseSolution:
    """An ordered chain of abutting pieces with junction bookkeeping."""

    pieces: list[SolutionPiece]
    junctions: list[Junction] = field(default_factory=list)
    c1: bool = True

    @property
    def theta_start(self) -> float:
        return self.pieces[0].theta_start

    @property
    def theta_end(self) -> float:
        return self.pieces[-1].theta_end

    @property
    def thetas(self) -> np.ndarray:
        parts = [self.pieces[0].thetas]
        parts.extend(p.thetas[1:] for p in self.pieces[1:])
        return np.concatenate(parts)

    @property
    def rhos(self) -> np.ndarray:
        parts = [self.pieces[0].rhos]
        parts.extend(p.rhos[1:] for p in self.pieces[1:])
        return np.concatenate(parts)

    @property
    def drhos(self) -> np.ndarray:
        parts = [self.pieces[0].drhos]
        parts.extend(p.drhos[1:] for p in self.pieces[1:])
        return np.concatenate(parts)

    def interp(self, theta):
        theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
        bounds = [p.theta_end for p in self.pieces[:-1]]
        idx = np.searchsorted(bounds, theta_arr, side="right")
        out = np.empty_like(theta_arr)
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if mask.any():
                out[mask] = p.interp(theta_arr[mask])
        return out if np.ndim(theta) else float(out[0])

    @property
    def sign_pattern(self) -> list[int]:
        return [p.sign for p in self.pieces]


def _end_state(piece: SolutionPiece, at_start: bool) -> tuple[float, float, float]:
    i = 0 if at_start else -1
    return float(piece.thetas[i]), float(piece.rhos[i]), float(piece.drhos[i])


def _end_curvature(piece: SolutionPiece, at_start: bool) -> float:
    """One-sided second-derivative estimate from the outermost nodes."""
    th, dr = piece.thetas, piece.drhos
    if len(th) < 3:
        return 0.0
    if at_start:
        span = th[2] - th[0]
        return float((dr[2] - dr[0]) / span) if span else 0.0
    span = th[-1] - th[-3]
    return float((dr[-1] - dr[-3]) / span) if span else 0.0


def _merge_adjacent(a: SolutionPiece, b: SolutionPiece) -> SolutionPiece:
    """Join two halves of one trajectory meeting at a shared node."""
    thetas = np.concatenate([a.thetas, b.thetas[1:]])
    rhos = np.concatenate([a.rhos, b.rhos[1:]])
    drhos = np.concatenate([a.drhos, b.drhos[1:]])
    return SolutionPiece(sign=b.ode_sign, thetas=thetas, rhos=rhos, drhos=drhos,
                         termination=b.termination, direction="forward",
                         dense_contact=a.dense_contact and b.dense_contact)


def stitch(pieces: list[SolutionPiece], slope_tol: float = 1e-6,
           abut_tol: float = 1e-6) -> PiecewiseSolution:
    """Order pieces by angle and classify the junctions between them.

    Interior junctions where both one-sided slopes vanish are critical
    junctions; they are labelled a critical pass when the one-sided
    curvature estimates agree (the chain continues the same analytic
    germ), and a branch switch otherwise.
    """
    parts = sorted((p for p in pieces if len(p.thetas) >= 2),
                   key=lambda p: p.theta_start)
    if not parts:
        raise NoSolution("nothing to stitch")
    junctions = [Junction(parts[0].theta_start, JunctionKind.START)]
    for left, right in zip(parts, parts[1:]):
        tl, rl, dl = _end_state(left, at_start=False)
        tr, rr, dr = _end_state(right, at_start=True)
        if abs(tl - tr) > abut_tol:
            raise NoSolution(f"pieces do not abut: gap [{tl}, {tr}]")
        d_rho = abs(rl - rr)
        d_slope = abs(dl - dr)
        if max(abs(dl), abs(dr)) <= slope_tol:
            kl = _end_curvature(left, at_start=False)
            kr = _end_curvature(right, at_start=True)
            same_germ = abs(kl - kr) <= max(0.05 * max(abs(kl), abs(kr)), 1e-3)
            kind = JunctionKind.CRITICAL_PASS if same_germ else JunctionKind.BRANCH_SWITCH
        else:
            kind = JunctionKind.BRANCH_SWITCH
        junctions.append(Junction(0.5 * (tl + tr), kind, d_rho, d_slope))
    junctions.append(Junction(parts[-1].theta_end, JunctionKind.END))
    sol = PiecewiseSolution(parts, junctions)
    c1_check(sol)
    return sol


@dataclass
class C1Report:
    junction_deltas: list[tuple[float, float, float]]  # (theta, |d rho|, |d rho'|)
    ok: bool


def c1_check(sol: PiecewiseSolution, tol: float = 1e-8) -> C1Report:
    """Per-junction value and slope gaps; updates the solution's c1 flag."""
    deltas = []
    ok = True
    for j in sol.junctions:
        if j.kind in (JunctionKind.START, JunctionKind.END):
            continue
        deltas.append((j.theta, j.delta_rho, j.delta_drho))
        if j.delta_rho > tol or j.delta_drho > tol:
            ok = False
    sol.c1 = ok
    return C1Report(deltas, ok)


# ---------------------------------------------------------------------------
# Enumeration from an initial condition
# ---------------------------------------------------------------------------

def _materialize(u: ModulusModel, branch: TaylorBranch, side: int,
                 opts: IntegrationOptions) -> SolutionPiece:
    if branch.status is BranchStatus.CONSTANT_CIRCLE:
        return bound_following_piece(u, branch.ic.theta0, side, opts)
    return branch_to_piece(u, branch, side, opts)


def _extend(u: ModulusModel, piece: SolutionPiece, side: int, budget: int,
            opts: IntegrationOptions) -> list[tuple[list[SolutionPiece], int]]:
    """All continuation paths from a piece, annotated with switches used."""
    if piece.termination.kind is not TerminationKind.CONTACT or budget <= 0:
        return [([piece], 0)]
    theta_c = piece.termination.theta
    lo, hi = u.domain
    room = (hi - theta_c) if side > 0 else (theta_c - lo)
    if room <= 1e-12:
        return [([piece], 0)]
    try:
        candidates = continuation_candidates(u, theta_c, side, opts)
    except Exception:
        return [([piece], 0)]
    paths: list[tuple[list[SolutionPiece], int]] = []
    for _walk_sign, branch in candidates:
        try:
            cont = _materialize(u, branch, side, opts)
        except (NoContinuation, NotRegular, NoSolution):
            continue
        for rest, used in _extend(u, cont, side, budget - 1, opts):
            paths.append(([piece] + rest, used + 1))
    if not paths:
        paths.append(([piece], 0))
    return paths


def _seed_paths(u: ModulusModel, ic: RegularIC, ode_sign: int, direction: str,
                max_switches: int, opts: IntegrationOptions
                ) -> list[tuple[list[SolutionPiece], int]]:
    side = +1 if direction == "forward" else -1
    walk_sign = ode_sign * side
    lo, hi = u.domain
    room = (hi - ic.theta0) if side > 0 else (ic.theta0 - lo)
    if room <= 1e-12:
        return [([], 0)]
    piece = solve_regular(u, ic, walk_sign, direction, opts)
    return _extend(u, piece, side, max_switches, opts)


def enumerate_branches(u: ModulusModel, ic: RegularIC | CriticalIC | None = None,
                       max_switches: int = 2,
                       opts: IntegrationOptions | None = None,
                       fan_size: int = 6, seed: int = 0) -> list[PiecewiseSolution]:
    """The finite tree of C1 solutions through an initial condition.

    A regular IC seeds one rising and one falling trajectory; each is
    extended through both domain directions, taking every admissible
    continuation at every contact, up to ``max_switches`` switches per
    solution.  Paths that exhaust their budget at a contact are kept
    truncated (their last piece still ends in a contact termination).

    With no IC, a deterministic fan of regular ICs is sampled for
    illustration; the full solution set is dense and not enumerable.
    """
    opts = opts or IntegrationOptions()
    if ic is None:
        rng = np.random.default_rng(seed)
        lo, hi = u.domain
        out: list[PiecewiseSolution] = []
        for _ in range(fan_size):
            th = float(rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)))
            bound = math.sqrt(max(u.value(th), 0.0))
            rho = float(rng.uniform(0.3, 0.9)) * bound
            try:
                out.extend(enumerate_branches(u, RegularIC(th, rho), max_switches=1,
                                              opts=opts))
            except (NotRegular, NoSolution):
                continue
        return out

    if isinstance(ic, CriticalIC):
        return _enumerate_from_critical(u, ic, max_switches, opts)

    solutions: list[PiecewiseSolution] = []
    for ode_sign in (+1, -1):
        lefts = _seed_paths(u, ic, ode_sign, "backward", max_switches, opts)
        rights = _seed_paths(u, ic, ode_sign, "forward", max_switches, opts)
        for lpieces, lused in lefts:
            for rpieces, rused in rights:
                if lused + rused > max_switches:
                    continue
                solutions.append(_assemble_two_sided(lpieces, rpieces))
    return solutions


def _assemble_two_sided(left_path: list[SolutionPiece],
                        right_path: list[SolutionPiece]) -> PiecewiseSolution:
    """Stitch a backward extension path and a forward one at the seed IC."""
    left = list(reversed(left_path))
    right = list(right_path)
    if left and right:
        seam_left, seam_right = left[-1], right[0]
        merged = _merge_adjacent(seam_left, seam_right)
        pieces = left[:-1] + [merged] + right[1:]
    else:
        pieces = left + right
    return stitch(pieces)


def _enumerate_from_critical(u: ModulusModel, ic: CriticalIC, max_switches: int,
                             opts: IntegrationOptions) -> list[PiecewiseSolution]:
    lo, hi = u.domain
    solutions: list[PiecewiseSolution] = []

    def side_paths(side: int) -> list[tuple[list[SolutionPiece], int]]:
        edge = lo if side < 0 else hi
        if abs(ic.theta0 - edge) <= 1e-12:
            return [([], 0)]
        paths: list[tuple[list[SolutionPiece], int]] = []
        for _s, branch in continuation_candidates(u, ic.theta0, side, opts):
            try:
                piece = _materialize(u, branch, side, opts)
            except (NoContinuation, NotRegular):
                continue
            paths.extend(_extend(u, piece, side, max_switches, opts))
        return paths or [([], 0)]

    for lpieces, lused in side_paths(-1):
        for rpieces, rused in side_paths(+1):
            if lused + rused > max_switches or not (lpieces or rpieces):
                continue
            solutions.append(stitch(list(reversed(lpieces)) + list(rpieces)))
    return solutions


# ---------------------------------------------------------------------------
# Two-point problem between consecutive critical points
# ---------------------------------------------------------------------------

def _pick_launch(left: CriticalPoint, right: CriticalPoint) -> tuple[CriticalPoint, CriticalPoint, int]:
    """Choose the endpoint carrying local uniqueness (minimum first)."""
    if left.kind is CriticalKind.MINIMUM:
        return left, right, +1
    if right.kind is CriticalKind.MINIMUM:
        return right, left, -1
    if left.kind is CriticalKind.INFLECTION:
        return left, right, +1
    if right.kind is CriticalKind.INFLECTION:
        return right, left, -1
    raise NoSolution("neither endpoint is minimum-type; the chain is ambiguous here")


def solve_bvp_between_criticals(u: ModulusModel, left: CriticalPoint,
                                right: CriticalPoint,
                                opts: IntegrationOptions | None = None,
                                tol_bvp: float = 1e-8) -> SolutionPiece:
    """The unique trajectory joining two consecutive critical points.

    Launched as the analytic branch at the minimum-type endpoint and
    integrated toward the other; the far end must land on the bound within
    ``tol_bvp`` (then it is snapped exactly), with a small shooting search
    on the handoff depth as a robustness net.
    """
    opts = opts or IntegrationOptions()
    if not left.theta < right.theta:
        raise NoSolution("empty interval between the critical points")

    # autonomous stretch: the bound itself joins the endpoints
    flat = all(abs(u.value(th) - left.depth ** 2) <= 1e-9 * u.scale
               for th in np.linspace(left.theta, right.theta, 17))
    if flat:
        piece = bound_following_piece(u, left.theta, +1, opts, stop_theta=right.theta)
        return piece

    launch, target, side = _pick_launch(left, right)
    ode_needed = int(math.copysign(1.0, (target.depth - launch.depth) * side))
    candidates = continuation_candidates(u, launch.theta, side, opts)
    matches = [b for s, b in candidates
               if b.status is BranchStatus.COMPLETE
               and _half_branch_sign(b, side) == ode_needed]
    if not matches:
        raise NoSolution(
            f"no branch leaves ({launch.theta}, {launch.depth}) toward the target")
    branch = max(matches, key=lambda b: b.beta)
    piece = branch_to_piece(u, branch, side, opts, stop_theta=target.theta)
    mismatch = _endpoint_mismatch(piece, target, side)
    if mismatch > tol_bvp:
        refined = _shoot(u, branch, side, target, opts, tol_bvp)
        if refined is None:
            raise NoSolution(
                f"trajectory misses the far critical point by {mismatch:.3e}")
        piece = refined
    return _snap_end(piece, target, side)


def _endpoint_mismatch(piece: SolutionPiece, target: CriticalPoint, side: int) -> float:
    th, rho, _ = _end_state(piece, at_start=(side < 0))
    if abs(th - target.theta) > 5e-3:
        return math.inf  # stalled or contacted far from the target
    return abs(rho - target.depth)


def _snap_end(piece: SolutionPiece, target: CriticalPoint, side: int) -> SolutionPiece:
    thetas = piece.thetas.copy()
    rhos = piece.rhos.copy()
    drhos = piece.drhos.copy()
    i = -1 if side > 0 else 0
    thetas[i] = target.theta
    rhos[i] = target.depth
    drhos[i] = 0.0
    term = Termination(TerminationKind.CONTACT, target.theta, "snapped to critical point")
    return SolutionPiece(sign=piece.sign, thetas=thetas, rhos=rhos, drhos=drhos,
                         termination=term, direction=piece.direction,
                         dense_contact=piece.dense_contact)


def _shoot(u: ModulusModel, branch: TaylorBranch, side: int, target: CriticalPoint,
           opts: IntegrationOptions, tol_bvp: float) -> SolutionPiece | None:
    """Bisection on the handoff depth to hit the far critical point."""
    from .taylor import eval_series

    theta_c = branch.ic.theta0
    r = min(opts.series_radius, abs(target.theta - theta_c) / 4)
    theta_h = theta_c + side * r
    rho_h, _ = eval_series(branch, theta_h)
    direction = "forward" if side > 0 else "backward"
    walk_sign = _half_branch_sign(branch, side) * side

    def end_value(delta: float) -> float:
        try:
            p = solve_regular(u, RegularIC(theta_h, rho_h + delta), walk_sign,
                              direction, opts)
        except NotRegular:
            return -math.inf
        p = _clip_piece(p, target.theta)
        _, rho_end, _ = _end_state(p, at_start=(side < 0))
        return rho_end

    scale = 1e-6 * (1.0 + branch.ic.rho0)
    best = None
    f0 = end_value(0.0) - target.depth
    lo_d, hi_d = -scale, 0.0
    if f0 > 0:
        lo_d, hi_d = 0.0, scale
    flo = end_value(lo_d) - target.depth
    fhi = end_value(hi_d) - target.depth
    if flo * fhi > 0:
        return None
    for _ in range(60):
        mid = 0.5 * (lo_d + hi_d)
        fm = end_value(mid) - target.depth
        if abs(fm) <= 0.1 * tol_bvp:
            best = mid
            break
        if flo * fm <= 0:
            hi_d, fhi = mid, fm
        else:
            lo_d, flo = mid, fm
        best = mid
    if best is None:
        return None
    try:
        p = solve_regular(u, RegularIC(theta_h, rho_h + best), walk_sign, direction, opts)
    except NotRegular:
        return None
    p = _clip_piece(p, target.theta)
    if abs(_end_state(p, at_start=(side < 0))[1] - target.depth) > tol_bvp:
        return None
    # re-attach the series leg down to the critical point
    lead = branch_to_piece(u, branch, side, opts, stop_theta=theta_h)
    lead = _clip_piece(lead, theta_h)
    if side > 0:
        return _merge_adjacent(lead, p)
    return _merge_adjacent(p, lead)


# ---------------------------------------------------------------------------
# The depth-maximal solution
# ---------------------------------------------------------------------------

def maximal_solution(u: ModulusModel, opts: IntegrationOptions | None = None,
                     critical_set: CriticalSet | None = None,
                     tol_bvp: float = 1e-8) -> PiecewiseSolution:
    """The unique solution dominating all others pointwise.

    Touches the bound at every critical point: chained from the unique
    two-point trajectories between consecutive critical points, extended
    over the outer intervals by the pointwise-dominant analytic branch
    leaving the outermost critical points.  On a fully autonomous profile
    the bound itself solves the equation and is returned directly.
    """
    opts = opts or IntegrationOptions()
    cs = critical_set if critical_set is not None else find_critical_points(u)
    lo, hi = u.domain

    if not cs.points:
        if cs.dense and cs.dense_intervals and (
                abs(cs.dense_intervals[0][0] - lo) < 1e-6
                and abs(cs.dense_intervals[-1][1] - hi) < 1e-6):
            piece = bound_following_piece(u, lo, +1, opts)
            return stitch([piece])
        raise NoCriticalPoints(
            "the profile has no critical points; the depth supremum is not attained")

    pieces: list[SolutionPiece] = []
    pts = cs.points
    for a, b in zip(pts, pts[1:]):
        pieces.append(solve_bvp_between_criticals(u, a, b, opts, tol_bvp))

    if pts[0].theta > lo + 1e-9:
        pieces.insert(0, _dominant_extension(u, pts[0], -1, opts))
    if pts[-1].theta < hi - 1e-9:
        pieces.append(_dominant_extension(u, pts[-1], +1, opts))

    return stitch(pieces)


def _dominant_extension(u: ModulusModel, cp: CriticalPoint, side: int,
                        opts: IntegrationOptions) -> SolutionPiece:
    """The pointwise-largest branch leaving the outermost critical point.

    Near the contact each branch sits at depth + beta/2 * offset^2, and
    same-family trajectories cannot cross, so the larger curvature root
    dominates globally on the outer interval.
    """
    candidates = continuation_candidates(u, cp.theta, side, opts)
    if not candidates:
        raise NoSolution(f"no branch leaves the outer critical point at {cp.theta}")
    branch = max((b for _s, b in candidates), key=lambda b: b.beta)
    return _materialize(u, branch, side, opts)


# ---------------------------------------------------------------------------
# Convergence cones
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceCone:
    """Region between the two bounding solutions at a maximum-type apex."""

    apex_theta: float
    apex_depth: float
    upper: PiecewiseSolution
    lower: PiecewiseSolution
    domain: tuple[float, float]
    side: int = +1

    def contains(self, theta: float, rho: float, margin: float = 0.0) -> bool:
        a, b = self.domain
        if not (min(a, b) < theta <= max(a, b)):
            return False
        return (float(self.lower.interp(theta)) + margin < rho
                < float(self.upper.interp(theta)) - margin)


def build_cone(u: ModulusModel, apex: CriticalPoint | CriticalIC,
               opts: IntegrationOptions | None = None,
               side: int | None = None) -> ConvergenceCone:
    """Bounding solution pair around a maximum-type critical point.

    Requires both curvature roots nonpositive (otherwise the minimum-type
    uniqueness applies and there is no cone): each root's branch is grown
    outward on ``side`` and the pointwise-larger one becomes the upper
    bound.
    """
    opts = opts or IntegrationOptions()
    if isinstance(apex, CriticalIC):
        theta_c, depth = apex.theta0, apex.rho0
    else:
        theta_c, depth = apex.theta, apex.depth
    lo, hi = u.domain
    if side is None:
        side = -1 if abs(theta_c - hi) < 1e-9 else +1

    from .taylor import second_derivative_roots
    ic = CriticalIC.from_modulus(u, theta_c, order=opts.taylor_order)
    b1, b2 = second_derivative_roots(ic.rho0, ic.u_jet[2])
    tol = 1e-9 * (1.0 + ic.rho0)
    if b2 > tol:
        raise NotConeApex(
            f"curvature roots ({b1:.4g}, {b2:.4g}) are not both nonpositive; "
            "this is a minimum-type point with a unique touching solution")

    candidates = continuation_candidates(u, theta_c, side, opts)
    grown: list[tuple[float, PiecewiseSolution]] = []
    for _s, branch in candidates:
        piece = _materialize(u, branch, side, opts)
        grown.append((branch.beta, stitch([piece])))
    if len(grown) < 2:
        raise NotConeApex("the apex does not carry two distinct branches")
    grown.sort(key=lambda g: g[0])
    lower, upper = grown[0][1], grown[-1][1]
    end = upper.theta_end if side > 0 else upper.theta_start
    other_end = lower.theta_end if side > 0 else lower.theta_start
    reach = min(end, other_end) if side > 0 else max(end, other_end)
    return ConvergenceCone(theta_c, depth, upper, lower,
                           (theta_c, reach) if side > 0 else (reach, theta_c),
                           side=side)


def sample_cone_solution(cone: ConvergenceCone, u: ModulusModel, ic: RegularIC,
                         opts: IntegrationOptions | None = None) -> PiecewiseSolution:
    """The squeezed solution through a strictly interior cone point.

    Integrates the falling family both ways from the IC: toward the apex
    the trajectory is pinched between the bounding pair and reaches the
    apex depth (following the bound across any autonomous stretch), away
    from it the trajectory keeps falling to the domain end or the floor.
    """
    opts = opts or IntegrationOptions()
    margin = 1e-9 * (1.0 + cone.apex_depth)
    if not cone.contains(ic.theta0, ic.rho0, margin=margin):
        raise OutsideCone(
            f"({ic.theta0}, {ic.rho0}) is not strictly inside the cone")
    toward_apex = "backward" if cone.side > 0 else "forward"
    away = "forward" if cone.side > 0 else "backward"
    walk_toward = +1  # depth grows walking toward the apex
    inward = solve_regular(u, ic, walk_toward, toward_apex, opts)
    outward = solve_regular(u, ic, -1, away, opts)
    # the two runs are halves of one falling trajectory through the IC
    if cone.side > 0:
        pieces = [_merge_adjacent(inward, outward)]
    else:
        pieces = [_merge_adjacent(outward, inward)]
    tip = inward
    guard = 0
    while (tip.termination.kind is TerminationKind.CONTACT and guard < 8):
        theta_c = tip.termination.theta
        room = (theta_c - u.domain[0]) if cone.side > 0 else (u.domain[1] - theta_c)
        if room <= 1e-9:
            break
        try:
            tip = continue_through_critical(tip, u, choice=+1, opts=opts)
        except NoContinuation:
            break
        pieces.append(tip)
        guard += 1
    return stitch(pieces)
