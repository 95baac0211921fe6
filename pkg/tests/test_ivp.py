"""Branch ODE integration: two-branch launches, events, continuations.

Closed-form oracles come from separating the autonomous equation: with
U = 1, the rising branch through (0, 1/2) is sin(theta + pi/6) and the
falling branch is cos(theta + pi/3).
"""

import math

import numpy as np
import pytest

from depthrec.errors import NoContinuation, NotRegular
from depthrec.ivp import (
    IntegrationOptions, RegularIC, SolutionPiece, Termination, TerminationKind,
    branch_to_piece, continue_through_critical, derivative_pair, residual,
    solve_regular,
)
from depthrec.modulus import ClosedFormModulus, from_depth
from depthrec.parametrization import DepthFunction
from depthrec.taylor import CriticalIC, expand_branch
import depthrec.taylor as taylor_mod

UNIT = ClosedFormModulus("1", (0.0, math.pi / 2))
LINE = ClosedFormModulus("25/cos(theta)^4", (-1.2, 1.2))


def max_error(piece, truth):
    return max(abs(r - truth(float(th))) for th, r in zip(piece.thetas, piece.rhos))


# -- slopes at regular ICs -----------------------------------------------------

def test_derivative_pair_unit_profile():
    plus, minus = derivative_pair(UNIT, RegularIC(0.0, 0.5))
    assert plus == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert minus == -plus


def test_derivative_pair_critical_ic_rejected():
    with pytest.raises(NotRegular):
        derivative_pair(UNIT, RegularIC(0.0, 1.0))


def test_derivative_pair_line_profile():
    want = math.sqrt(25.0 / math.cos(0.2) ** 4 - 25.0)
    plus, minus = derivative_pair(LINE, RegularIC(0.2, 5.0))
    assert plus == pytest.approx(want, rel=1e-14)
    assert minus == pytest.approx(-want, rel=1e-14)


# -- regular solves --------------------------------------------------------------

def test_rising_branch_hits_bound():
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward")
    assert piece.termination.kind is TerminationKind.CONTACT
    assert piece.termination.theta == pytest.approx(math.pi / 3, abs=5e-5)
    assert max_error(piece, lambda th: math.sin(th + math.pi / 6)) < 1e-8


def test_falling_branch_hits_floor():
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), -1, "forward")
    assert piece.termination.kind is TerminationKind.FLOOR_CONTACT
    assert piece.termination.theta == pytest.approx(math.pi / 6, abs=1e-6)
    assert max_error(piece, lambda th: math.cos(th + math.pi / 3)) < 1e-8


def test_line_roundtrip_backward():
    th0 = 0.3
    ic = RegularIC(th0, 5.0 / math.cos(th0))
    piece = solve_regular(LINE, ic, -1, "backward")
    assert piece.termination.kind is TerminationKind.CONTACT
    assert abs(piece.termination.theta) < 2e-4
    assert max_error(piece, lambda th: 5.0 / math.cos(th)) < 1e-6


def test_no_critical_profile_reaches_domain_end():
    u = ClosedFormModulus("2 + theta", (0.0, 1.0))
    for sign in (+1, -1):
        piece = solve_regular(u, RegularIC(0.5, 0.8), sign, "forward")
        assert piece.termination.kind is TerminationKind.DOMAIN_END
        assert piece.theta_end == pytest.approx(1.0)


def test_monotonicity_of_pieces():
    # walk-sign convention: depth is monotone along the integration
    # direction, so in ascending angle the slope sign is ode_sign
    u = ClosedFormModulus("2 + sin(2*theta)/2", (0.0, 3.0))
    for sign in (+1, -1):
        for direction in ("forward", "backward"):
            piece = solve_regular(u, RegularIC(1.5, 1.0), sign, direction)
            diffs = np.diff(piece.rhos)
            assert np.all(piece.ode_sign * diffs >= -1e-12)


def test_nodes_sorted_ascending_both_directions():
    piece_f = solve_regular(UNIT, RegularIC(0.3, 0.5), +1, "forward")
    piece_b = solve_regular(UNIT, RegularIC(0.3, 0.5), +1, "backward")
    assert np.all(np.diff(piece_f.thetas) > 0)
    assert np.all(np.diff(piece_b.thetas) > 0)
    assert piece_b.theta_start == pytest.approx(0.0)
    # a +1 backward piece gains depth walking backward, so it is
    # non-increasing in ascending angle
    assert np.all(np.diff(piece_b.rhos) <= 1e-12)


def test_non_crossing_same_sign():
    u = ClosedFormModulus("2 + sin(2*theta)/2", (0.0, 2.0))
    lo_piece = solve_regular(u, RegularIC(0.5, 0.7), +1, "forward")
    hi_piece = solve_regular(u, RegularIC(0.5, 0.9), +1, "forward")
    t_hi = min(lo_piece.theta_end, hi_piece.theta_end)
    common = np.linspace(0.5, t_hi, 200)
    gap = hi_piece.interp(common) - lo_piece.interp(common)
    assert np.all(gap > 0)


def test_interp_density_supports_linear_interpolation():
    opts = IntegrationOptions(interp_tol=1e-8)
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward", opts)
    mids = (piece.thetas[:-1] + piece.thetas[1:]) / 2
    lin = (piece.rhos[:-1] + piece.rhos[1:]) / 2
    truth = np.sin(mids + math.pi / 6)
    assert np.max(np.abs(lin - truth)) < 1e-7


# -- residuals --------------------------------------------------------------------

def test_residual_exact_piece():
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward")
    assert residual(piece, UNIT) <= 1e-10


def test_residual_constant_solution():
    th = np.linspace(0.0, 1.0, 50)
    piece = SolutionPiece(sign=+1, thetas=th, rhos=np.ones_like(th),
                          drhos=np.zeros_like(th),
                          termination=Termination(TerminationKind.DOMAIN_END, 1.0),
                          direction="forward")
    assert residual(piece, UNIT) == 0.0


def test_residual_detects_perturbation():
    th = np.linspace(0.0, 1.2, 100)
    rho = np.sin(th + math.pi / 6) + 1e-3
    drho = np.cos(th + math.pi / 6)
    piece = SolutionPiece(sign=+1, thetas=th, rhos=rho, drhos=drho,
                          termination=Termination(TerminationKind.DOMAIN_END, 1.2),
                          direction="forward")
    assert residual(piece, UNIT) > 1e-4


# -- continuation through contacts ---------------------------------------------------

def test_continue_falling_after_contact():
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward")
    cont = continue_through_critical(piece, UNIT, choice=-1)
    assert cont.sign == -1
    theta_c = piece.termination.theta
    assert max_error(cont, lambda th: math.cos(th - theta_c)) < 1e-7
    assert cont.theta_end == pytest.approx(math.pi / 2)


def test_continue_constant_after_contact():
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward")
    cont = continue_through_critical(piece, UNIT, choice=+1)
    assert cont.dense_contact
    assert np.allclose(cont.rhos, 1.0, atol=1e-12)
    assert cont.theta_end == pytest.approx(math.pi / 2)


def test_continue_line_mirror_backward():
    ic = RegularIC(0.3, 5.0 / math.cos(0.3))
    piece = solve_regular(LINE, ic, -1, "backward")
    mirror = continue_through_critical(piece, LINE, choice=+1)
    # past the tangency the depth climbs again along the mirrored line
    assert mirror.sign == +1
    rel = max(abs(r - 5.0 / math.cos(float(th))) / (5.0 / math.cos(float(th)))
              for th, r in zip(mirror.thetas, mirror.rhos))
    assert rel < 5e-7
    assert mirror.theta_start == pytest.approx(-1.2, abs=1e-9)


def test_continue_line_other_branch_backward():
    ic = RegularIC(0.3, 5.0 / math.cos(0.3))
    piece = solve_regular(LINE, ic, -1, "backward")
    other = continue_through_critical(piece, LINE, choice=-1)
    assert other.sign == -1
    # this branch keeps losing depth along the walk (in increasing-angle
    # terms it rises toward the tangency depth 5)
    assert np.all(np.diff(other.rhos) >= -1e-12)
    assert residual(other, LINE) < 1e-8 * (1 + 25.0)


def test_continue_requires_contact_termination():
    piece = solve_regular(ClosedFormModulus("2 + theta", (0.0, 1.0)),
                          RegularIC(0.5, 0.8), +1, "forward")
    with pytest.raises(NoContinuation):
        continue_through_critical(piece, ClosedFormModulus("2 + theta", (0.0, 1.0)), -1)


def test_no_rising_continuation_at_maximum():
    # unit profile: curvature roots are {-1, 0}; a strictly rising
    # continuation does not exist, only falling or bound-following
    piece = solve_regular(UNIT, RegularIC(0.0, 0.5), +1, "forward")
    cont = continue_through_critical(piece, UNIT, choice=+1)
    assert cont.dense_contact  # the +1 choice is the bound-following piece


# -- series/integration matching ------------------------------------------------------

def test_branch_to_piece_matches_series():
    ic = CriticalIC.from_modulus(UNIT, 0.0, order=16)
    branch = expand_branch(ic, -1.0, order=16)
    piece = branch_to_piece(UNIT, branch, side=+1)
    assert max_error(piece, math.cos) < 1e-7
    # overlap agreement between the local series and the integrated tail
    for th in np.linspace(0.01, 0.3, 15):
        series_val, _ = taylor_mod.eval_series(branch, float(th))
        assert abs(float(piece.interp(th)) - series_val) < 1e-7


def test_roundtrip_smooth_depth():
    rho_true = DepthFunction.from_text("2 + sin(theta)/4", (0.2, 1.2))
    u = from_depth(rho_true)
    th0 = 0.7
    ic = RegularIC(th0, rho_true.value(th0))
    sign = +1 if rho_true.derivative(th0) > 0 else -1
    fwd = solve_regular(u, ic, sign, "forward")
    back = solve_regular(u, ic, -sign, "backward")
    assert max_error(fwd, rho_true.value) < 1e-6
    assert max_error(back, rho_true.value) < 1e-6
