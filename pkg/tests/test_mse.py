import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsurf import mse
from minsurf.errors import DivergenceError


def test_scherk_graph_on_65_grid():
    t0 = time.perf_counter()
    p = mse.scherk_problem(65)
    sol = mse.solve_mse(p)
    X, Y = p.grid()
    assert np.max(np.abs(sol.u - mse.scherk_graph(X, Y))) < 1e-4
    assert mse.is_quadratic(sol.trace)
    assert time.perf_counter() - t0 < 10


def test_scherk_domain_stays_inside_the_graph_region():
    X, Y = mse.scherk_problem(17).grid()
    assert np.max(np.abs(np.sinh(X) * np.sinh(Y))) <= 0.9 + 1e-12


def test_catenoid_patch():
    p = mse.catenoid_problem(65)
    sol = mse.solve_mse(p)
    X, Y = p.grid()
    assert np.max(np.abs(sol.u - mse.catenoid_graph(X, Y))) < 1e-4


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3))
def test_affine_data_solved_exactly(a, b, c):
    p = mse.GridProblem((-1.0, 2.0, 0.0, 1.5), (11, 9), lambda x, y: a * x + b * y + c)
    X, Y = p.grid()
    assert np.max(np.abs(mse.solve_mse(p).u - (a * X + b * Y + c))) < 1e-12


def test_affine_residual_is_zero():
    xs = np.linspace(0, 1, 9)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    R = mse.mse_residual(0.3 * X - 2 * Y + 1, bounds=(0, 1, 0, 1))
    assert np.max(np.abs(R)) < 1e-12


def test_residual_of_parabola_is_second_order():
    # div(∇u/√(1+|∇u|²)) for u = x² is 2/(1 + 4x²)^{3/2}
    errs = []
    for n in (17, 33, 65):
        xs = np.linspace(-1, 1, n)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        R = mse.mse_residual(X ** 2, bounds=(-1, 1, -1, 1))
        exact = 2 / (1 + 4 * X ** 2) ** 1.5
        errs.append(np.max(np.abs(R - exact)[1:-1, 1:-1]))
    assert np.log2(errs[0] / errs[1]) > 1.8 and np.log2(errs[1] / errs[2]) > 1.8


def test_solver_output_meets_tolerance():
    p = mse.scherk_problem(33, tol=1e-11)
    sol = mse.solve_mse(p)
    assert sol.converged and sol.trace[-1] < 1e-11
    assert np.max(np.abs(mse.mse_residual(sol.u, *p.spacing))) < 1e-11


def test_gradient_matches_finite_difference_of_area():
    rng = np.random.default_rng(0)
    u = rng.normal(size=(6, 5))
    g = mse.area_gradient(u, 0.3, 0.2)
    e = np.zeros_like(u)
    e[2, 3] = 1e-6
    fd = (mse.discrete_area(u + e, 0.3, 0.2) - mse.discrete_area(u - e, 0.3, 0.2)) / 2e-6
    assert abs(g[2, 3] - fd) < 1e-8


def test_hessian_is_symmetric_and_matches_gradient():
    rng = np.random.default_rng(1)
    u = rng.normal(size=(6, 6))
    H = mse.area_hessian(u, 0.25, 0.25)
    assert abs(H - H.T).max() < 1e-12
    v = rng.normal(size=u.shape)
    fd = (mse.area_gradient(u + 1e-6 * v, 0.25, 0.25) - mse.area_gradient(u - 1e-6 * v, 0.25, 0.25)) / 2e-6
    assert np.max(np.abs(H @ v.ravel() - fd.ravel())) < 1e-7


def test_divergence_carries_trace():
    p = mse.scherk_problem(17, max_iter=1)
    with pytest.raises(DivergenceError) as exc:
        mse.solve_mse(p)
    assert len(exc.value.trace) == 2


def test_array_boundary():
    p = mse.scherk_problem(17)
    X, Y = p.grid()
    q = mse.GridProblem(p.bounds, 17, mse.scherk_graph(X, Y))
    assert np.array_equal(mse.solve_mse(q).u, mse.solve_mse(p).u)


def test_bad_problems_rejected():
    with pytest.raises(ValueError):
        mse.GridProblem((0, 1, 0, 1), 4, lambda x, y: x)
    with pytest.raises(ValueError):
        mse.GridProblem((1, 0, 0, 1), 9, lambda x, y: x)
    with pytest.raises(ValueError):
        mse.GridProblem((0, 1, 0, 1), 9, np.zeros((8, 9))).boundary_values()


def test_quadratic_rate_rule():
    assert mse.is_quadratic([1.0, 0.1, 1e-3, 1e-7])
    assert not mse.is_quadratic([1e-3, 5e-4, 2.5e-4, 1.25e-4])
