import math

import numpy as np
import pytest

from minsurf import catalog
from minsurf.errors import UnknownExampleError
from minsurf.mesh import mean_curvature_fd, read_obj, write_csv, write_obj, CSV_HEADER


def test_unknown_example():
    with pytest.raises(UnknownExampleError):
        catalog.example("costa")


def test_mesh_resolution():
    assert catalog.mesh("catenoid", 128).shape == (128, 128)
    assert catalog.mesh("enneper", (17, 9)).shape == (17, 9)


def test_helicoid_forms_are_both_helicoids():
    # the rulings turn at unit rate: e^{2i(φ ± x3)} is constant for one sign
    for form in ("conjugate", "height"):
        X = catalog.mesh("helicoid", 33, form=form).position
        ok = np.hypot(X[..., 0], X[..., 1]) > 1e-6
        phi = np.arctan2(X[..., 1], X[..., 0])[ok]
        spreads = []
        for sign in (1, -1):
            w = np.exp(2j * (phi + sign * X[..., 2][ok]))
            spreads.append(np.max(np.abs(w - w[0])))
        assert min(spreads) < 1e-9


def test_conjugate_pair_shares_metric():
    cat, hel = catalog.conjugate_pair()
    assert cat.g == hel.g


def test_scherk_singly_is_a_graph_of_the_closed_form():
    m = catalog.scherk_singly_mesh(33)
    X = m.position
    assert np.max(np.abs(np.sin(X[..., 2]) - np.sinh(X[..., 0]) * np.sinh(X[..., 1]))) < 1e-12


def test_scherk_doubly_graph_is_minimal():
    def err(n):
        m = catalog.scherk_doubly_mesh(n)
        inside = np.all(np.abs(m.position[..., :2]) <= 1.0, axis=-1)
        return np.nanmax(np.abs(mean_curvature_fd(m)[inside]))
    assert math.log2(err(33) / err(65)) > 1.8


def test_riemann_profile_neck_flux():
    prof = catalog.riemann_profile(1.0)
    f1, f3 = catalog.neck_flux(prof.neck_radius, prof.lam)
    assert abs(f1 / f3 - 1.0 / (2 * math.pi)) < 1e-9
    assert prof.neck_radius > 0 and prof.end_height > 0


def test_riemann_sections_are_circles():
    m = catalog.riemann_example(1.0, (64, 64))
    X = m.position
    for i in (5, 32, 58):
        ring = X[i]
        assert np.ptp(ring[:, 2]) < 1e-12
        # algebraic circle fit: x² + y² = 2ax + 2by + c
        x, y = ring[:, 0], ring[:, 1]
        A = np.stack([2 * x, 2 * y, np.ones_like(x)], axis=1)
        sol, *_ = np.linalg.lstsq(A, x * x + y * y, rcond=None)
        r = np.hypot(x - sol[0], y - sol[1])
        assert np.ptp(r) < 1e-10 * r.mean()


def test_riemann_section_closure_and_meta():
    m = catalog.riemann_example(1.0, (64, 64))
    assert m.meta["section_closure"] < 1e-9
    assert m.meta["t"] == 1.0
    assert m.periodic and m.conformal


def test_riemann_mean_curvature_decays():
    errs = []
    for n in (128, 256):
        H = mean_curvature_fd(catalog.riemann_example(1.0, (n, n)))
        errs.append(np.nanmax(np.abs(H[2:-2])))
    assert math.log2(errs[0] / errs[1]) > 1.8


def test_obj_roundtrip(tmp_path):
    m = catalog.mesh("catenoid", 16)
    p = tmp_path / "m.obj"
    write_obj(m, p)
    r = read_obj(p)
    assert r.shape == m.shape and r.periodic == m.periodic
    assert np.array_equal(r.position, m.position)
    assert np.array_equal(r.z, m.z)
    assert np.array_equal(r.gaussian_curvature, m.gaussian_curvature)


def test_csv_export(tmp_path):
    m = catalog.mesh("enneper", 8)
    p = tmp_path / "m.csv"
    write_csv(m, p)
    lines = p.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 64
    row = np.array(lines[1].split(","), dtype=float)
    assert np.allclose(row[2:5], m.position[0, 0])
