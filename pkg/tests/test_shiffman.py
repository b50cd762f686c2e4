import numpy as np
import pytest

from minsurf import catalog
from minsurf import shiffman as sh
from minsurf import symexpr as se
from minsurf.errors import DegenerateSectionError
from minsurf.weierstrass import immerse


def test_catenoid_field_vanishes():
    f = sh.shiffman_geometric(catalog.mesh("catenoid", 256))
    assert f.max_abs() < 1e-6


def test_helicoid_field_vanishes():
    f = sh.shiffman_geometric(catalog.mesh("helicoid", 128, form="height"))
    assert f.max_abs() < 1e-6


def test_riemann_field_decays_second_order():
    errs = [sh.shiffman_geometric(catalog.riemann_example(1.0, (n, n))).max_abs() for n in (256, 512)]
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_section_curvature_of_catenoid_circles():
    m = catalog.mesh("catenoid", 64)
    kappa = sh.section_curvature(m)
    # the section at height x3 is a circle of radius cosh x3
    r = np.cosh(m.position[:, 0, 2])
    assert np.allclose(np.abs(kappa), 1 / r[:, None], rtol=5e-3)


def test_non_level_rows_rejected():
    with pytest.raises(ValueError):
        sh.section_curvature(catalog.mesh("enneper", 16))


def test_degenerate_section():
    m = catalog.mesh("catenoid", 16)
    pos = m.position.copy()
    pos[3] = pos[3, :1]
    with pytest.raises(DegenerateSectionError):
        sh.section_curvature(m.replace(position=pos))


def test_calibration_convention():
    cal = sh.calibrate()
    assert cal["part"] == sh.CONVENTION["part"] == "imag"
    assert cal["sign"] == sh.CONVENTION["sign"] == 1.0
    assert cal["correlation"] > 0.999999
    assert abs(cal["scale"] - 1) < 1e-3
    assert cal["catenoid_max_imag"] < 1e-12 < cal["catenoid_max_real"]


def test_calibrated_part_matches_geometric_field():
    wd = sh.generic_patch()
    m = immerse(wd, (0.0, 1.0, 0.0, 1.0), 128)
    geo = sh.shiffman_geometric(m).S[2:-2, 2:-2]
    closed = sh.shiffman_part(wd, m.z)[2:-2, 2:-2]
    assert np.max(np.abs(geo - closed)) < 1e-3 * np.max(np.abs(closed))


def test_gdot_of_catenoid_is_a_rotation():
    # ġ = −(i/4) g: the variation only spins the catenoid about its axis
    z = np.array([0.4 + 0.1j, -1.0 + 2.0j])
    g = se.exp(se.Z)
    assert np.allclose(se.evaluate(sh.gdot_expr(g), z) / np.exp(z), -0.25j, atol=1e-14)
    wd = catalog.catenoid()
    assert np.allclose(sh.gdot_shiffman(wd, z), se.evaluate(sh.gdot_expr(g), z), atol=1e-14)


def test_linearity_zero_field():
    m = catalog.mesh("catenoid", 32)
    v, res = sh.linearity_test(np.zeros(m.shape), m.normal)
    assert np.all(v == 0) and res == 0


def test_linearity_recovers_translation_field():
    m = catalog.mesh("catenoid", 32)
    v, res = sh.linearity_test(m.normal[..., 2], m.normal)
    assert np.allclose(v, [0, 0, 1], atol=1e-12) and res < 1e-10


def test_linearity_rejects_height_function():
    m = catalog.mesh("catenoid", 32)
    _, res = sh.linearity_test(m.position[..., 2], m.normal)
    assert res > 0.1
