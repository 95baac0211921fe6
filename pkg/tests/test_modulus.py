"""Squared-speed profiles: evaluation, jets, forward model, validation."""

import math

import numpy as np
import pytest
import sympy as sp

from depthrec.errors import InvalidModulus, OrderUnavailable, DomainError
from depthrec.modulus import (
    ClosedFormModulus, SampledModulus, from_depth, validate_modulus,
)
from depthrec.parametrization import DepthFunction

THETA = sp.Symbol("theta")


def test_eval_constant():
    u = ClosedFormModulus("1", (0.0, 1.5))
    assert u.value(0.3) == 1.0


def test_eval_parabola_at_zero():
    u = ClosedFormModulus("pi^2/16 - pi^2/128*theta^2", (0.0, 2.0))
    assert u.value(0.0) == pytest.approx(math.pi ** 2 / 16, rel=1e-15)


def test_eval_line_profile():
    # forward-model oracle: depth 5/cos gives 25/cos^4
    u = ClosedFormModulus("25/cos(theta)^4", (-1.0, 1.0))
    assert u.value(0.0) == pytest.approx(25.0)


def test_eval_out_of_domain():
    u = ClosedFormModulus("1", (0.0, 1.0))
    with pytest.raises(DomainError):
        u.value(2.0)


def test_eval_negative_raises():
    u = ClosedFormModulus("theta - 1", (0.0, 2.0))
    with pytest.raises(InvalidModulus):
        u.value(0.2)


def test_eval_tiny_negative_clamps():
    u = ClosedFormModulus("0 - 1/1000000000000000", (0.0, 1.0))  # -1e-15
    assert u.value(0.5) == 0.0


def test_jet_constant():
    u = ClosedFormModulus("1", (0.0, 1.0))
    np.testing.assert_allclose(u.jet(0.0, 4).coeffs, [1, 0, 0, 0, 0])


def test_jet_parabola():
    u = ClosedFormModulus("pi^2/16 - pi^2/128*theta^2", (0.0, 2.0))
    j = u.jet(0.0, 2)
    np.testing.assert_allclose(j.coeffs, [math.pi ** 2 / 16, 0.0, -math.pi ** 2 / 64],
                               atol=1e-15)


def test_jet_line_profile():
    u = ClosedFormModulus("25/cos(theta)^4", (-1.0, 1.0))
    np.testing.assert_allclose(u.jet(0.0, 2).coeffs, [25.0, 0.0, 100.0], atol=1e-12)


def test_jet_order_zero_equals_eval():
    u = ClosedFormModulus("2 + sin(theta)", (0.0, 3.0))
    for th in (0.1, 1.0, 2.7):
        assert u.jet(th, 0)[0] == u.value(th)


def test_jet_matches_finite_differences():
    u = ClosedFormModulus("2 + sin(2*theta) + cos(theta)^2", (0.0, 3.0))
    h = 1e-4
    for th in (0.5, 1.2, 2.0):
        j = u.jet(th, 3)
        d1 = (u.value(th + h) - u.value(th - h)) / (2 * h)
        d2 = (u.value(th + h) - 2 * u.value(th) + u.value(th - h)) / h ** 2
        d3 = (u.value(th + 2 * h) - 2 * u.value(th + h)
              + 2 * u.value(th - h) - u.value(th - 2 * h)) / (2 * h ** 3)
        assert d1 == pytest.approx(j[1], rel=1e-6, abs=1e-6)
        assert d2 == pytest.approx(j[2], rel=1e-6, abs=1e-5)
        assert d3 == pytest.approx(j[3], rel=1e-4, abs=1e-3)


def test_sampled_jet_order_limit():
    th = np.linspace(0.0, 1.0, 64)
    u = SampledModulus(th, 1.0 + th * th)
    u.jet(0.5, 2)
    with pytest.raises(OrderUnavailable):
        u.jet(0.5, 3)


def test_from_depth_circle():
    rho = DepthFunction.from_text("3", (0.0, math.pi))
    u = from_depth(rho)
    for th in (0.1, 1.5, 3.0):
        assert u.value(th) == pytest.approx(9.0, rel=1e-14)


def test_from_depth_cosine_is_unit():
    rho = DepthFunction.from_text("cos(theta)", (0.0, 1.5))
    u = from_depth(rho)
    for th in np.linspace(0.0, 1.5, 23):
        assert u.value(float(th)) == pytest.approx(1.0, rel=1e-13)


def test_from_depth_line():
    rho = DepthFunction.from_text("5/cos(theta)", (0.0, 1.4))
    u = from_depth(rho)
    for th in np.linspace(0.0, 1.3, 17):
        want = 25.0 / math.cos(float(th)) ** 4
        assert u.value(float(th)) == pytest.approx(want, rel=1e-12)


def test_from_depth_random_closed_forms():
    # spec invariant: eval(from_depth(rho)) == rho'^2 + rho^2 to 1e-12
    rng = np.random.default_rng(11)
    texts = [
        "2 + sin(theta)/2",
        "1 + theta^2/8 + cos(3*theta)/10",
        "3 - cos(2*theta)/3 + sin(theta)/5",
        "exp(theta/4) + 1",
    ]
    for text in texts:
        rho = DepthFunction.from_text(text, (0.1, 1.4))
        u = from_depth(rho)
        expr = sp.sympify(text.replace("^", "**"), locals={"theta": THETA})
        oracle = sp.lambdify(THETA, sp.diff(expr, THETA) ** 2 + expr ** 2, "math")
        for th in rng.uniform(0.1, 1.4, 100):
            assert u.value(float(th)) == pytest.approx(oracle(float(th)),
                                                       rel=1e-12, abs=1e-12)


def test_from_depth_sampled_grid():
    th = np.linspace(0.1, 1.4, 800)
    rho = DepthFunction.from_samples(th, np.cos(th))
    u = from_depth(rho)
    assert u.max_order == 2
    for t in (0.3, 0.7, 1.1):
        assert u.value(t) == pytest.approx(1.0, abs=1e-5)


def test_validate_clean():
    assert validate_modulus(ClosedFormModulus("1", (0.0, 1.0))).clean


def test_validate_negative_region():
    rep = validate_modulus(ClosedFormModulus("theta - 1", (0.0, 2.0)))
    assert not rep.clean
    assert rep.negative_thetas
    assert all(th < 1.0 for th in rep.negative_thetas)


def test_validate_nan_sample():
    th = np.linspace(0.0, 1.0, 16)
    v = 1.0 + th
    v[5] = np.nan
    rep = validate_modulus(SampledModulus(th, v))
    assert not rep.clean
    assert rep.nonfinite_thetas == [pytest.approx(th[5])]
