import math

import numpy as np
import pytest
from scipy.integrate import quad

from mlabeam import QuadratureRule, fresnel_cs, gauss_legendre_rule, integrate_cell


def fresnel_oracle(u):
    """Adaptive-quadrature reference for the cosine and sine integrals."""
    c, _ = quad(lambda t: math.cos(math.pi * t * t / 2), 0.0, u, limit=200)
    s, _ = quad(lambda t: math.sin(math.pi * t * t / 2), 0.0, u, limit=200)
    return c, s


@pytest.mark.parametrize("u", [0.25, 0.5, 1.0, 1.7, 2.3, 5.0])
def test_fresnel_against_quadrature(u):
    C, S = fresnel_cs(u)
    c_ref, s_ref = fresnel_oracle(u)
    assert C == pytest.approx(c_ref, abs=1e-10)
    assert S == pytest.approx(s_ref, abs=1e-10)


def test_fresnel_known_point():
    C, S = fresnel_cs(1.0)
    assert C == pytest.approx(0.7798934, abs=1e-7)
    assert S == pytest.approx(0.4382591, abs=1e-7)


def test_fresnel_odd_and_limit():
    C, S = fresnel_cs(-1.0)
    Cp, Sp = fresnel_cs(1.0)
    assert C == -Cp and S == -Sp
    C50, S50 = fresnel_cs(50.0)
    assert abs(C50 - 0.5) < 0.01 and abs(S50 - 0.5) < 0.01
    C0, S0 = fresnel_cs(0.0)
    assert C0 == 0.0 and S0 == 0.0


def test_fresnel_vectorized():
    u = np.array([0.1, 1.0, 2.0])
    C, S = fresnel_cs(u)
    assert C.shape == (3,)
    assert C[1] == pytest.approx(0.7798934, abs=1e-7)


def test_rule_construction():
    rule = gauss_legendre_rule(8)
    assert isinstance(rule, QuadratureRule)
    assert rule.order == 8
    assert rule.weights.sum() == pytest.approx(2.0, abs=1e-14)
    assert np.all(np.diff(rule.nodes) > 0)
    # degree-15 polynomial integrated exactly by 8 nodes
    exact = 2.0 / 15  # integral of t^14 over [-1, 1]
    got = float(np.sum(rule.weights * rule.nodes**14))
    assert got == pytest.approx(exact, rel=1e-13)


def test_integrate_cell_polynomial():
    rule = gauss_legendre_rule(8)
    # integral of x^2 * y over [1,3] x [0,2] = (26/3) * 2
    val = integrate_cell(rule, 2.0, 1.0, 2.0, 2.0,
                         lambda x, y: (x**2 * y).astype(complex))
    assert val.real == pytest.approx(52.0 / 3, rel=1e-12)
    assert val.imag == pytest.approx(0.0, abs=1e-12)


def test_integrate_cell_oscillatory_vs_refined_midpoint():
    """Order-8 tensor rule against a 400x400 midpoint reference on a cell
    whose phase swings a few radians."""
    k = 300.0

    def f(x, y):
        return np.exp(1j * k * (x**2 + y**2))

    rule = gauss_legendre_rule(8)
    got = integrate_cell(rule, 0.05, 0.02, 0.01, 0.01, f)

    n = 2000
    xs = 0.05 + (np.arange(n) + 0.5) / n * 0.01 - 0.005
    ys = 0.02 + (np.arange(n) + 0.5) / n * 0.01 - 0.005
    ref = f(xs[:, None], ys[None, :]).sum() * (0.01 / n) ** 2
    assert abs(got - ref) < 1e-12


def test_integrate_cell_scaling():
    rule = gauss_legendre_rule(8)
    one = integrate_cell(rule, 0.0, 0.0, 0.3, 0.7, lambda x, y: np.ones_like(x + y, dtype=complex))
    assert one.real == pytest.approx(0.21, rel=1e-13)
