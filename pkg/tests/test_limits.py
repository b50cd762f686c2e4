import numpy as np
import pytest

from minsurf import catalog
from minsurf import limits as lm
from minsurf.errors import EmptyRegionError


def test_rescale_identity():
    m = catalog.mesh("catenoid", 16)
    assert lm.rescale(m, 1.0) is m


def test_rescale_shrinks_the_neck():
    m = catalog.mesh("catenoid", (33, 32))
    for n in (2, 5, 10):
        s = lm.rescale(m, 1.0 / n)
        neck = np.min(np.hypot(s.position[..., 0], s.position[..., 1]))
        assert abs(neck - 1.0 / n) < 1e-12
        assert np.allclose(s.gaussian_curvature, m.gaussian_curvature * n * n)


def test_rescale_rejects_nonpositive():
    with pytest.raises(ValueError):
        lm.rescale(catalog.mesh("plane", 5), 0.0)


def test_catenoid_blowup_is_the_origin():
    res = lm.blowup_set("catenoid")
    assert len(res.points) > 0
    assert np.max(np.linalg.norm(res.points, axis=1)) <= lm.CELL


def test_helicoid_blowup_is_the_axis():
    res = lm.blowup_set("helicoid")
    assert np.max(np.hypot(res.points[:, 0], res.points[:, 1])) <= lm.CELL
    assert res.points[:, 2].min() < -0.9 and res.points[:, 2].max() > 0.9


def test_plane_blowup_is_empty():
    res = lm.blowup_set("plane", (4, 8))
    assert len(res.points) == 0


def test_catenoid_lamination_distance_decreases():
    d = lm.distance_series("catenoid", (8, 16, 32, 64), lm.Region(r_min=0.5, r_max=1.0))
    assert np.all(np.diff(d) < 0)


def test_helicoid_lamination_distance_decreases():
    d = lm.distance_series("helicoid", (8, 16, 32), lm.Region(center=(0.6, 0.0, 0.0), r_max=0.3))
    assert np.all(np.diff(d) < 0)


def test_plane_against_itself():
    d = lm.distance_series("plane", (4, 8), lm.Region(r_max=1.0))
    assert np.all(d == 0)


def test_empty_region():
    with pytest.raises(EmptyRegionError):
        lm.lamination_distance(catalog.mesh("plane", 5), [0.0], lm.Region(center=(50.0, 0, 0), r_max=1.0))


def test_sheet_heights_spacing():
    h = lm.helicoid_sheet_heights(10)
    assert np.allclose(np.diff(h), -np.pi / 10)


def test_unknown_sequence():
    with pytest.raises(ValueError):
        lm.base_mesh("costa", 8)
