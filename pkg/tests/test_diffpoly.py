from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from minsurf import diffpoly as dp
from minsurf.errors import NotExactError, OrderError

U = dp.DiffPoly.derivative
u, u1, u2, u3 = U(0), U(1), U(2), U(3)


# sympy oracle: Lenard recursion on an explicit function u(z)
_z = sp.Symbol("z")
_u = sp.Function("u")(_z)


def _sym_hierarchy(n):
    P = sp.Rational(1, 2)
    for _ in range(n):
        rhs = sp.diff(P, _z, 3) + 4 * _u * sp.diff(P, _z) + 2 * sp.diff(_u, _z) * P
        P = _sym_antiderivative(sp.expand(rhs))
    return sp.expand(P)


def _sym_antiderivative(expr):
    # ansatz over all monomials one weight lower, solved by sympy
    w = _sym_weight(expr) - 1
    basis = [_sym_monomial(m) for m in dp.monomials_of_weight(w)]
    cs = sp.symbols(f"c0:{len(basis)}")
    trial = sum(c * b for c, b in zip(cs, basis))
    eqs = sp.Poly(sp.expand(sp.diff(trial, _z) - expr), *_jet_symbols(expr, trial)).coeffs()
    sol = sp.solve(eqs, cs, dict=True)[0]
    return sp.expand(trial.subs(sol).subs({c: 0 for c in cs}))


def _jet_symbols(*exprs):
    return sorted({d for e in exprs for d in sp.expand(sp.diff(e, _z)).atoms(sp.Derivative)} | {_u},
                  key=str)


def _sym_weight(expr):
    term = sp.Add.make_args(expr)[0]
    w = 0
    for f in sp.Mul.make_args(term):
        base, e = f.as_base_exp()
        if base == _u:
            w += 2 * e
        elif isinstance(base, sp.Derivative):
            w += (base.derivative_count + 2) * e
    return w


def _sym_monomial(mono):
    out = sp.Integer(1)
    for k in mono:
        out *= sp.diff(_u, _z, k) if k else _u
    return out


def _to_sympy(p):
    return sp.expand(sum(sp.Rational(c.numerator, c.denominator) * _sym_monomial(m) for m, c in p.terms.items()))


def test_dz_generators():
    assert dp.dz(u) == u1
    assert dp.dz(u * u) == 2 * u * u1


def test_dz_of_second_density():
    assert dp.dz(u2 + 3 * u * u) == u3 + 6 * u * u1


def test_integrate_simple():
    assert dp.integrate_dz(2 * u * u1) == u * u
    assert dp.integrate_dz(u3 + 6 * u * u1) == u2 + 3 * u * u


def test_integrate_rejects_non_derivative():
    with pytest.raises(NotExactError):
        dp.integrate_dz(u * u)


def test_hierarchy_seeds():
    assert dp.hierarchy(0) == dp.DiffPoly.constant(Fraction(1, 2))
    assert dp.hierarchy(1) == u
    assert dp.hierarchy(2) == u2 + 3 * u * u
    assert str(dp.hierarchy(2)) == "u'' + 3*u^2"


def test_hierarchy_three_frozen():
    assert str(dp.hierarchy(3)) == "u'''' + 10*u*u'' + 5*u'^2 + 10*u^3"


@pytest.mark.parametrize("n", range(0, 5))
def test_hierarchy_matches_sympy_oracle(n):
    assert sp.expand(_to_sympy(dp.hierarchy(n)) - _sym_hierarchy(n)) == 0


@pytest.mark.parametrize("n", range(0, 6))
def test_recurrence_identity(n):
    P = dp.hierarchy(n)
    lhs = dp.dz(dp.hierarchy(n + 1))
    rhs = dp.dz(dp.dz(dp.dz(P))) + 4 * u * dp.dz(P) + 2 * u1 * P
    assert lhs == rhs


@pytest.mark.parametrize("n", range(0, 7))
def test_weight_homogeneity(n):
    assert dp.hierarchy(n).weights() == {2 * n}


def test_flows():
    assert dp.flow(0) == -u1
    assert dp.flow(1) == -u3 - 6 * u * u1
    assert str(dp.flow(1)) == "-u''' - 6*u*u'"


def test_flows_vanish_on_constants():
    samples = np.array([[2.5 - 1j] + [0] * 13])
    for n in range(7):
        assert np.all(dp.evaluate(dp.flow(n), samples) == 0)


def test_evaluate_examples():
    assert dp.evaluate(u * u, np.array([[3.0]]))[0] == 9
    assert dp.evaluate(u2 + 3 * u * u, np.array([[1.0, 0.0, 2.0]]))[0] == 5


def test_evaluate_flow_on_inverse_fourth_power():
    z = np.array([1.0, 2.0])
    jets = np.stack([z ** -4, -4 * z ** -5, 20 * z ** -6, -120 * z ** -7], axis=1)
    expected = 120 * z ** -7 - 6 * z ** -4 * (-4 * z ** -5)
    assert np.allclose(dp.evaluate(dp.flow(1), jets), expected, rtol=1e-14)


def test_evaluate_needs_enough_jets():
    with pytest.raises(OrderError):
        dp.evaluate(dp.flow(1), np.array([[1.0, 0.0, 0.0]]))


def test_evaluate_absolute_is_termwise():
    jets = np.array([[1.0, -2.0, 0.0, 3.0]])
    assert dp.evaluate(dp.flow(1), jets, absolute=True)[0] == 3 + 6 * 2


def test_substitute_composes_derivatives():
    # u -> u' turns u'' + 3u² into u''' + 3u'²
    assert dp.substitute(u2 + 3 * u * u, u1) == u3 + 3 * u1 * u1


def test_coefficients_are_exact_rationals():
    for c in dp.hierarchy(4).terms.values():
        assert isinstance(c, Fraction)
