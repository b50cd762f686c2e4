import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsurf import symexpr as se
from minsurf.errors import ParseError, PoleError


def test_eval_euler_identity():
    assert abs(se.evaluate(se.exp(se.Z), 1j * np.pi) + 1) < 1e-15


def test_eval_square():
    assert se.evaluate(se.Z ** 2, 1 + 1j) == 2j


def test_eval_pole_raises():
    e = se.exp(se.Z) / (se.exp(se.Z) - 1)
    with pytest.raises(PoleError):
        se.evaluate(e, 0.0)


def test_eval_array_shape():
    z = np.linspace(0, 1, 7).reshape(7, 1) + 1j * np.linspace(0, 1, 3)
    out = se.evaluate(se.Z * se.Z, z)
    assert out.shape == (7, 3)
    assert np.allclose(out, z * z)


def test_derivative_of_exp_is_exp():
    d = se.differentiate(se.exp(se.Z))
    z = np.array([0.3 + 0.2j, -1.0 + 2.0j])
    assert np.allclose(se.evaluate(d, z), np.exp(z))


def test_derivative_of_cube():
    d = se.differentiate(se.Z ** 3)
    z = np.array([1.5, 0.2 - 0.7j])
    assert np.allclose(se.evaluate(d, z), 3 * z ** 2, rtol=1e-15)


def test_derivative_matches_central_difference():
    e = se.exp(se.Z) / (1 + se.Z)
    d = se.evaluate(se.differentiate(e), 0.5)
    h = 1e-5
    fd = (se.evaluate(e, 0.5 + h) - se.evaluate(e, 0.5 - h)) / (2 * h)
    assert abs(d - fd) < 1e-8


def test_high_jets_stay_finite_near_small_denominators():
    # repeated quotients must not square the denominator at every order
    g = se.div(1, se.Z - 0.06)
    memo = {}
    d = g
    for _ in range(8):
        d = se.differentiate(d, memo)
    val = se.evaluate(d, 0.0)
    exact = 40320 / (-0.06) ** 9
    assert abs(val - exact) < 1e-9 * abs(exact)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_derivative_of_product_rule(x, y):
    z = complex(x, y)
    e = se.exp(se.Z) * se.Z ** 2
    d = se.evaluate(se.differentiate(e), z)
    assert abs(d - cmath.exp(z) * (z * z + 2 * z)) <= 1e-12 * (1 + abs(d))


def test_prefix_roundtrip():
    e = se.div(se.exp(se.Z), se.add(1, se.Z))
    txt = se.to_prefix(e)
    assert txt == "(div (exp z) (add 1 z))"
    assert se.parse(txt) == e


def test_parse_named_atoms_and_sub():
    e = se.parse("(sub (mul i pi) (neg z))")
    assert abs(se.evaluate(e, 1.0) - (1j * np.pi + 1)) < 1e-15


@pytest.mark.parametrize("text", ["", "(add", "(pow z 1.5)", "(exp z z)", "(foo z)", "z )", "(bar"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        se.parse(text)


def test_simplify_preserves_value():
    e = se.add(se.mul(1, se.Z), 0, se.mul(se.Z, 0), se.power(se.power(se.Z, 2), 3))
    s = se.simplify(e)
    assert se.size(s) < se.size(e)
    z = 0.7 - 0.1j
    assert abs(se.evaluate(s, z) - se.evaluate(e, z)) < 1e-14


def test_zeros_of_square():
    out = se.find_zeros_poles(se.Z ** 2, (-1, 1, -1, 1))
    assert len(out) == 1
    assert abs(out[0].location) < 1e-8 and out[0].order == 2 and out[0].kind == "zero"


def test_exp_has_no_zeros():
    assert se.find_zeros_poles(se.exp(se.Z), (-3, 3, -3, 3)) == []


def test_zero_and_pole():
    e = (se.Z - 0.3) ** 2 / (se.Z + 0.4)
    out = sorted(se.find_zeros_poles(e, (-1, 1, -1, 1)), key=lambda s: s.location.real)
    assert [(s.order, s.kind) for s in out] == [(1, "pole"), (2, "zero")]
    assert abs(out[0].location + 0.4) < 1e-8
    assert abs(out[1].location - 0.3) < 1e-8


def test_winding_count_counts_zeros_minus_poles():
    e = (se.Z - 0.3) ** 2 / (se.Z + 0.4)
    assert abs(se.winding_count(e, (-1, 1, -1, 1)) - 1) < 1e-9
