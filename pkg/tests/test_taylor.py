"""Analytic branch construction at critical initial conditions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depthrec.errors import ComplexDiscriminant, DegenerateFamily
from depthrec.modulus import ClosedFormModulus, Jet
from depthrec.taylor import (
    BetaSignClass, BranchStatus, CriticalIC, SafeRegionKind,
    beta_sign_class, branches_at, check_safe_region, estimate_radius,
    eval_series, expand_branch, leibniz_terms, recursion_residuals,
    second_derivative_roots,
)


def constant_ic(rho0: float, order: int = 14) -> CriticalIC:
    """Critical IC for the constant profile U = rho0^2."""
    jet = np.zeros(order + 2)
    jet[0] = rho0 * rho0
    return CriticalIC(0.0, rho0, Jet(0.0, jet))


PAR_RHO0 = math.pi / 4
PAR_U2 = -math.pi ** 2 / 64
PAR_BETA_SMALL = -(math.pi / 8) * (1 + 1 / math.sqrt(2))
PAR_BETA_LARGE = -(math.pi / 8) * (1 - 1 / math.sqrt(2))


# -- curvature quadratic ------------------------------------------------------

def test_roots_unit_constant_profile():
    b1, b2 = second_derivative_roots(1.0, 0.0)
    assert (b1, b2) == (-1.0, 0.0)


def test_roots_parabola_frozen_values():
    b1, b2 = second_derivative_roots(PAR_RHO0, PAR_U2)
    assert b1 == pytest.approx(PAR_BETA_SMALL, abs=1e-12)
    assert b2 == pytest.approx(PAR_BETA_LARGE, abs=1e-12)
    assert b1 < 0 and b2 < 0


def test_roots_complex_discriminant():
    with pytest.raises(ComplexDiscriminant):
        second_derivative_roots(1.0, -1.0)


def test_roots_double_root_clamped():
    b1, b2 = second_derivative_roots(1.0, -0.5)  # disc exactly 0
    assert b1 == b2 == -0.5


@settings(max_examples=100, deadline=None)
@given(rho0=st.floats(min_value=0.1, max_value=10.0),
       u2_scale=st.floats(min_value=-0.499, max_value=4.0))
def test_root_property(rho0, u2_scale):
    # each root satisfies the quadratic to 1e-12 (relative to scale)
    u2 = u2_scale * rho0 * rho0
    for beta in second_derivative_roots(rho0, u2):
        assert abs(2.0 * (beta * beta + rho0 * beta) - u2) < 1e-12 * (1 + rho0 ** 2 + abs(u2))


def test_beta_sign_classes():
    assert beta_sign_class(1.0, 1.0) is BetaSignClass.MIXED
    assert beta_sign_class(1.0, 0.0) is BetaSignClass.NEGATIVE_AND_ZERO
    assert beta_sign_class(PAR_RHO0, PAR_U2) is BetaSignClass.BOTH_NEGATIVE
    assert beta_sign_class(1.0, -0.5) is BetaSignClass.DOUBLE_NEGATIVE


# -- product-rule sums ---------------------------------------------------------

def test_leibniz_n2_cosine_jet():
    lt = leibniz_terms(2, [1.0, 0.0, -1.0, 0.0, 1.0])
    assert lt.x_n == 2.0       # 2*rho1*rho3 + 2*rho2^2
    assert lt.y_n == -2.0      # 2*rho0*rho2 + 2*rho1^2
    assert lt.x_n + lt.y_n == 0.0  # U2 for the unit profile


def test_leibniz_n1_vanishes_at_critical():
    lt = leibniz_terms(1, [2.0, 0.0, 5.0])
    assert lt.x_n == 0.0
    assert lt.y_n == 0.0


def test_leibniz_constant_circle():
    lt = leibniz_terms(4, [3.0, 0, 0, 0, 0, 0])
    assert lt.x_n == 0.0 and lt.y_n == 0.0


# -- recursion ------------------------------------------------------------------

def test_expand_cosine_branch():
    branch = expand_branch(constant_ic(1.0), beta=-1.0, order=8)
    np.testing.assert_allclose(branch.derivs, [1, 0, -1, 0, 1, 0, -1, 0, 1],
                               atol=1e-14)
    assert branch.status is BranchStatus.COMPLETE


def test_expand_constant_branch():
    branch = expand_branch(constant_ic(1.0), beta=0.0, order=8)
    np.testing.assert_allclose(branch.derivs, [1] + [0] * 8, atol=1e-15)
    assert branch.status is BranchStatus.CONSTANT_CIRCLE
    assert branch.radius_estimate == math.inf


def test_expand_degenerate_lattice_point():
    # beta = -rho0/3 kills the pivot when solving the 3rd derivative
    branch = expand_branch(constant_ic(3.0), beta=-1.0, order=10)
    assert branch.status is BranchStatus.DEGENERATE
    assert branch.free_index == 3


def test_expand_scaled_cosine():
    # constant profile U = R^2: the falling branch is R*cos offset
    R = 2.5
    branch = expand_branch(constant_ic(R), beta=-R, order=10)
    expected = [R, 0, -R, 0, R, 0, -R, 0, R, 0, -R]
    np.testing.assert_allclose(branch.derivs, expected, atol=1e-12)


def test_recursion_residuals_cosine():
    branch = expand_branch(constant_ic(1.0), beta=-1.0, order=14)
    assert recursion_residuals(branch).max() < 1e-12


def test_parabola_branches_via_modulus():
    u = ClosedFormModulus("pi^2/16 - pi^2/128*theta^2", (0.0, 2.0))
    ic = CriticalIC.from_modulus(u, 0.0, order=16)
    branches = branches_at(ic, order=16)
    assert len(branches) == 2
    assert branches[0].beta == pytest.approx(PAR_BETA_SMALL, abs=1e-12)
    assert branches[1].beta == pytest.approx(PAR_BETA_LARGE, abs=1e-12)
    for b in branches:
        assert b.status is BranchStatus.COMPLETE
        assert recursion_residuals(b).max() < 1e-9


def test_alpha_never_returns_to_zero():
    # the pivot is affine in the iteration index, so it vanishes at most once
    rng = np.random.default_rng(5)
    for _ in range(50):
        rho0 = rng.uniform(0.2, 5.0)
        beta = rng.uniform(-2.0, 2.0)
        tol = 1e-9 * (1 + rho0)
        small = [n for n in range(3, 200) if abs(2 * (rho0 + n * beta)) < tol]
        assert len(small) <= 1


# -- safe region ----------------------------------------------------------------

def test_safe_region_examples():
    assert check_safe_region(1.0, -1.0).kind is SafeRegionKind.SAFE
    assert check_safe_region(1.0, 0.0).kind is SafeRegionKind.SAFE
    res = check_safe_region(1.0, -0.25)
    assert res.kind is SafeRegionKind.DEGENERATE_AT
    assert res.index == 3


def test_safe_region_lattice_sweep():
    for i in range(2, 11):
        res = check_safe_region(2.0, -2.0 / (i + 1))
        assert res.kind is SafeRegionKind.DEGENERATE_AT
        assert res.index == i


def test_safe_region_off_lattice():
    res = check_safe_region(1.0, -0.22)  # inside the window, not on the lattice
    assert res.kind is SafeRegionKind.POTENTIALLY_DEGENERATE


# -- series evaluation ------------------------------------------------------------

def test_eval_series_cosine():
    branch = expand_branch(constant_ic(1.0), beta=-1.0, order=12)
    val, dval = eval_series(branch, 0.1)
    assert val == pytest.approx(math.cos(0.1), abs=1e-12)
    assert dval == pytest.approx(-math.sin(0.1), abs=1e-12)


def test_eval_series_constant():
    branch = expand_branch(constant_ic(2.0), beta=0.0, order=8)
    assert eval_series(branch, 0.7) == (2.0, 0.0)


def test_eval_series_degenerate_refused():
    branch = expand_branch(constant_ic(3.0), beta=-1.0, order=8)
    with pytest.raises(DegenerateFamily):
        eval_series(branch, 0.1)


def test_eval_series_parabola_residual():
    u = ClosedFormModulus("pi^2/16 - pi^2/128*theta^2", (0.0, 2.0))
    ic = CriticalIC.from_modulus(u, 0.0, order=20)
    branch = branches_at(ic, order=20)[1]  # larger curvature root
    val, dval = eval_series(branch, 0.05)
    assert val < math.pi / 4
    assert abs(dval ** 2 + val ** 2 - u.value(0.05)) < 1e-8


# -- radius estimation -------------------------------------------------------------

def test_radius_cosine_is_large():
    branch = expand_branch(constant_ic(1.0), beta=-1.0, order=12)
    assert branch.radius_estimate is not None
    assert branch.radius_estimate >= 1.0


def test_radius_geometric_jet():
    r = 0.4
    order = 12
    derivs = np.array([math.factorial(i) * r ** i for i in range(order + 1)])
    jet = np.zeros(order + 2)
    jet[0] = 1.0
    branch_like = expand_branch(constant_ic(1.0), beta=-1.0, order=order)
    synthetic = type(branch_like)(ic=branch_like.ic, beta=0.0, derivs=derivs,
                                  status=BranchStatus.COMPLETE)
    est = estimate_radius(synthetic)
    assert est == pytest.approx(1.0 / r, rel=0.2)
