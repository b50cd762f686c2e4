import numpy as np
import pytest
import sympy as sp

from minsurf import diffpoly as dp
from minsurf import kdvlab as kl
from minsurf import symexpr as se
from minsurf.errors import OrderError


def test_miura_of_exponential_is_constant():
    u = kl.miura_from_g(se.exp(se.Z))
    z = np.array([0.1, 1 + 2j, -3j])
    assert np.allclose(se.evaluate(u, z), -0.25, atol=1e-15)


def test_miura_of_constant_is_zero():
    u = kl.miura_from_g(se.const(2 - 1j))
    assert abs(se.evaluate(u, 0.3)) == 0


def test_miura_matches_sympy():
    z = sp.Symbol("z")
    g_sym = (z ** 2 + 1) * sp.exp(z) / (z - 3)
    u_sym = sp.lambdify(z, -sp.Rational(3, 4) * sp.diff(g_sym, z) ** 2 / g_sym ** 2
                        + sp.diff(g_sym, z, 2) / (2 * g_sym))
    g = se.parse("(div (mul (add (pow z 2) 1) (exp z)) (sub z 3))")
    pts = np.array([0.4 + 0.3j, -1.1 + 0.5j, 2.0 - 0.7j])
    assert np.allclose(se.evaluate(kl.miura_from_g(g), pts), u_sym(pts), rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_miura_from_x_agrees_with_miura_from_g(seed):
    g = kl.random_rational_g(seed)
    x = kl.log_derivative(g)
    pts = kl.safe_points([g, x], 30, seed)
    a = se.evaluate(kl.miura_from_g(g), pts)
    b = se.evaluate(kl.miura_from_x(x), pts)
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) < 1e-10


def test_chain_rule_residual_is_exactly_zero():
    rep = kl.chain_rule_check()
    assert rep.passed and rep.residual.is_zero()
    assert rep.time_scale == -0.5j


def test_chain_rule_catches_dropped_cubic():
    assert not kl.chain_rule_check(dp.DiffPoly({(3,): 1}, "x")).passed


def test_chain_rule_catches_doubled_flow():
    assert not kl.chain_rule_check(kl.mkdv_poly() * 2).passed


def test_time_scale_numerically():
    # u̇ from the mKdV motion of x equals KDV_TIME_SCALE × flow₁(u)
    g = kl.random_rational_g(3)
    x = kl.log_derivative(g)
    pts = kl.safe_points([g, x], 20, 3)
    xdot = kl.mkdv_from_g(g)
    udot = se.differentiate(xdot) * 0.5 - x * xdot * 0.5
    sample = kl.PotentialSample.from_gauss_map(g, pts, 3)
    flow1 = dp.evaluate(dp.flow(1), sample.jets)
    assert np.allclose(se.evaluate(udot, pts), kl.KDV_TIME_SCALE * flow1, rtol=1e-8, atol=1e-8)


def _detect(u_text, N=3):
    u = se.parse(u_text)
    return kl.algebro_geometric_test(kl.PotentialSample.from_expr(u, kl.sample_points(), kl.required_order(N)), N)


def test_constant_potential_detected_at_first_order():
    d = kl.algebro_geometric_test(
        kl.PotentialSample.from_gauss_map(se.exp(se.Z), kl.sample_points(), kl.required_order(3)), 3)
    assert d.detected and d.stationary_order == 1


@pytest.mark.parametrize("text, order", [
    ("(mul -2 (pow z -2))", 1),
    ("(div -2 (pow (sub z 0.3) 2))", 1),
    ("(mul -6 (pow z -2))", 2),
    ("(mul -12 (pow z -2))", 3),
])
def test_rational_solitons_detected(text, order):
    # −l(l+1)/z² is stationary for the l-th flow
    d = _detect(text)
    assert d.detected and d.stationary_order == order


@pytest.mark.parametrize("seed", range(4))
def test_random_rational_not_detected(seed):
    g = kl.random_rational_g(seed, degree=4)
    pts = kl.safe_points([g, kl.log_derivative(g)], 40, seed)
    d = kl.algebro_geometric_test(kl.PotentialSample.from_gauss_map(g, pts, kl.required_order(3)), 3, 1e-6)
    assert not d.detected
    assert set(d.residuals) == {1, 2, 3}


def test_detection_needs_enough_jets():
    with pytest.raises(OrderError):
        kl.algebro_geometric_test(kl.PotentialSample.from_expr(se.Z, kl.sample_points(), 3), 3)


def test_sample_points_are_seeded():
    assert np.array_equal(kl.sample_points(10, seed=1), kl.sample_points(10, seed=1))
    assert np.all(np.abs(kl.sample_points(50) - (0.5 + 0.5j)) <= 0.4)
