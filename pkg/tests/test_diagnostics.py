import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsurf import catalog
from minsurf import diagnostics as dg
from minsurf.errors import AmbiguousDegreeError, InsufficientExtentError, OpenSectionError
from minsurf.weierstrass import generator_loop, circle_loop

TWO_PI = 2 * math.pi


def test_catenoid_flux_at_several_levels():
    m = catalog.mesh("catenoid", (65, 64))
    for level in (-1.3, 0.0, 0.77):
        f = dg.flux(m, level)
        assert np.allclose(f.vector, [0, 0, TWO_PI], atol=1e-6)
        assert f.level == level


def test_flux_series_is_height_independent():
    F = dg.flux_series(catalog.mesh("catenoid", (65, 64)))
    assert np.max(np.ptp(F, axis=0)) < 1e-8


def test_riemann_flux_carries_t():
    F = dg.flux_series(catalog.riemann_example(0.5, (128, 128)))
    assert np.allclose(F, [0.5, 0, TWO_PI], atol=1e-4)


def test_open_section_rejected():
    with pytest.raises(OpenSectionError):
        dg.flux(catalog.mesh("enneper", 16), 0.0)


def test_flux_of_loops():
    assert np.allclose(dg.flux_of_loop(catalog.catenoid(), generator_loop(0.0)), [0, 0, TWO_PI], atol=1e-12)
    assert np.allclose(dg.flux_of_loop(catalog.plane(), circle_loop(0j, 0.5)), 0, atol=1e-12)


def test_decay_needs_extent():
    with pytest.raises(InsufficientExtentError):
        dg.decay_statistic(catalog.mesh("catenoid", 32), [5.0, 10.0])


def test_decay_catenoid_finite_and_helicoid_infinite():
    cat = dg.decay_statistic(catalog.mesh("catenoid", (1201, 16), window=(-6.0, 6.0, 0.0, TWO_PI)),
                             [40.0, 60.0, 80.0, 100.0, 120.0, 160.0])
    hel = dg.decay_statistic(catalog.mesh("helicoid", (33, 401), window=(-2.0, 2.0, -20.0, 20.0)),
                             [2.0, 4.0, 6.0, 8.0, 10.0, 12.0])
    assert cat.verdict == "finite total curvature" and dg.is_flat(cat.KR4)
    assert hel.verdict == "infinite total curvature" and np.all(np.diff(hel.KR2) > 0)


def test_decay_accepts_weierstrass_data():
    ds = dg.decay_statistic(catalog.enneper(), [1.0, 2.0, 3.0], window=(-3, 3, -3, 3), resolution=121)
    assert ds.KR2.shape == (3,) and np.all(ds.KR4 >= ds.KR2 * 0.99)


def test_decay_verdict_rule():
    assert dg.decay_verdict([5.0, 3.0, 2.9, 2.95]) == "finite total curvature"
    assert dg.decay_verdict([1.0, 2.0, 3.0, 4.0]) == "infinite total curvature"


def test_jacobi_normal_component_converges():
    r = [dg.jacobi_residual(c, c.normal[..., 2]) for c in (catalog.mesh("catenoid", n) for n in (64, 128))]
    assert math.log2(r[0] / r[1]) > 1.8


def test_jacobi_constant_is_not_a_jacobi_field():
    c = catalog.mesh("catenoid", 64)
    assert dg.jacobi_residual(c, np.ones(c.shape)) > 0.5


def test_jacobi_zero_field():
    c = catalog.mesh("catenoid", 16)
    assert dg.jacobi_residual(c, np.zeros(c.shape)) == 0.0


@pytest.mark.parametrize("name, make, genus, ends", [
    ("catenoid", lambda: catalog.mesh("catenoid", (401, 128), window=(-4.0, 4.0, 0.0, TWO_PI)), 0, (1, 1)),
    ("plane", lambda: catalog.mesh("plane", 33), 0, (1,)),
    ("enneper", lambda: catalog.mesh("enneper", 401, window=(-5.0, 5.0, -5.0, 5.0)), 0, (3,)),
])
def test_gauss_degree(name, make, genus, ends):
    deg, info = dg.gauss_degree(make(), details=True)
    assert deg == dg.jorge_meeks_degree(genus, ends)
    assert info["counts"].count(deg) >= 2


def test_embedded_ends_give_genus_plus_ends_minus_one():
    assert dg.jorge_meeks_degree(0, (1, 1)) == 1
    assert dg.jorge_meeks_degree(1, (1, 1, 1)) == 3
    assert dg.jorge_meeks_degree(0, (1,)) == 0


def test_truncated_enneper_degree_is_ambiguous():
    with pytest.raises(AmbiguousDegreeError):
        dg.gauss_degree(catalog.mesh("enneper", 65, window=(-0.8, 0.8, -0.8, 0.8)))


def test_regular_values_are_seeded_and_off_the_poles():
    v = dg.regular_values()
    assert np.array_equal(v, dg.regular_values())
    assert np.allclose(np.linalg.norm(v, axis=1), 1) and np.all(np.abs(v[:, 2]) < 0.9)


def test_plane_area_ratio_is_pi():
    r = dg.area_growth(catalog.mesh("plane", 9, window=(-2.0, 2.0, -2.0, 2.0)), radii=(0.3, 1.0, 1.9))
    assert np.allclose(r, math.pi, atol=1e-10)


def test_catenoid_area_ratio_non_decreasing():
    r = dg.area_growth(catalog.mesh("catenoid", (401, 64), window=(-4.0, 4.0, 0.0, TWO_PI)),
                       radii=(2.0, 4.0, 8.0, 16.0, 25.0))
    assert np.all(np.diff(r) >= -1e-8)
    assert r[-1] < TWO_PI


def test_area_growth_needs_extent():
    with pytest.raises(InsufficientExtentError):
        dg.area_growth(catalog.mesh("plane", 9), radii=(5.0,))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-1, 1), st.floats(-1, 1))
def test_ball_area_of_a_large_flat_triangle(R, cx, cy):
    tri = np.array([[[-20.0, -20.0, 0.0], [40.0, -20.0, 0.0], [-20.0, 40.0, 0.0]]])
    assert abs(dg.ball_area(tri, (cx, cy, 0.0), R) - math.pi * R * R) < 1e-9 * R * R


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.05, 2.0))
def test_ball_area_of_a_tilted_triangle_cut_by_the_ball(h, R):
    # the plane at distance |h| from the centre cuts a disk of radius √(R² − h²)
    tri = np.array([[[-30.0, -30.0, h], [60.0, -30.0, h], [-30.0, 60.0, h]]])
    rho2 = max(R * R - h * h, 0.0)
    assert abs(dg.ball_area(tri, (0.0, 0.0, 0.0), R) - math.pi * rho2) < 1e-9 * (1 + R * R)


def test_ball_area_of_a_small_triangle_inside():
    tri = np.array([[[0.1, 0.0, 0.0], [0.2, 0.0, 0.0], [0.1, 0.3, 0.0]]])
    assert abs(dg.ball_area(tri, (0.0, 0.0, 0.0), 1.0) - 0.015) < 1e-15
