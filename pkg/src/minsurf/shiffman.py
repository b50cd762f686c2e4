"""Shiffman function: geometric pipeline, closed form in the Gauss map, the
induced Gauss-map variation, and the linearity test.

Geometric definition: S = Λ ∂κ/∂y where κ is the curvature of the
horizontal section through a point and y = Im z is the section parameter
(not arclength).  The closed form

    (3/2)(g'/g)² − g''/g − (g'/g)²/(1 + |g|²)

is complex; which part equals the geometric S is fixed by
:func:`calibrate` and exposed as ``CONVENTION``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symexpr as se
from .errors import DegenerateSectionError, PoleError
from .mesh import SurfaceMesh
from .weierstrass import WeierstrassData, immerse

LEVEL_TOL = 1e-8
DEGENERATE_TOL = 1e-12

# part of the closed form matching Λ ∂κ/∂y, with its sign; see calibrate()
CONVENTION = {"part": "imag", "sign": 1.0}


@dataclass(frozen=True)
class SectionCurvatureField:
    kappa: np.ndarray
    dkappa_dy: np.ndarray
    conformal_factor: np.ndarray
    S: np.ndarray

    def max_abs(self, interior: int = 0) -> float:
        s = self.S
        if interior:
            s = s[interior:-interior]
        return float(np.nanmax(np.abs(s)))


def _dy(f, h, periodic):
    if periodic:
        return (np.roll(f, -1, 1) - np.roll(f, 1, 1)) / (2 * h)
    out = np.full(f.shape, np.nan, dtype=f.dtype)
    out[:, 1:-1] = (f[:, 2:] - f[:, :-2]) / (2 * h)
    return out


def _dyy(f, h, periodic):
    if periodic:
        return (np.roll(f, -1, 1) - 2 * f + np.roll(f, 1, 1)) / h ** 2
    out = np.full(f.shape, np.nan, dtype=f.dtype)
    out[:, 1:-1] = (f[:, 2:] - 2 * f[:, 1:-1] + f[:, :-2]) / h ** 2
    return out


def section_curvature(mesh: SurfaceMesh) -> np.ndarray:
    """Signed curvature of each grid row as a planar curve in (x1, x2),
    positive for counter-clockwise traversal in y."""
    P = mesh.position
    spread = np.ptp(P[..., 2], axis=1)
    scale = max(1.0, float(np.nanmax(np.abs(P[..., 2]))))
    if np.any(spread > LEVEL_TOL * scale):
        raise ValueError("grid rows are not horizontal sections; parameterise with x3 = Re z")
    _, hy = mesh.spacing
    x, y = P[..., 0], P[..., 1]
    x1, y1 = _dy(x, hy, mesh.periodic), _dy(y, hy, mesh.periodic)
    x2, y2 = _dyy(x, hy, mesh.periodic), _dyy(y, hy, mesh.periodic)
    speed = np.hypot(x1, y1)
    if np.any(speed[np.isfinite(speed)] < DEGENERATE_TOL):
        raise DegenerateSectionError("a horizontal section degenerates to a point")
    return (x1 * y2 - y1 * x2) / speed ** 3


def shiffman_geometric(mesh: SurfaceMesh) -> SectionCurvatureField:
    """S = Λ ∂κ/∂y with centred differences along each section."""
    kappa = section_curvature(mesh)
    _, hy = mesh.spacing
    dk = _dy(kappa, hy, mesh.periodic)
    return SectionCurvatureField(kappa, dk, mesh.conformal_factor, mesh.conformal_factor * dk)


def _log_derivs(wd: WeierstrassData, z):
    z = np.asarray(z, dtype=complex)
    g = se.evaluate(wd.g, z)
    if np.any(np.abs(g) <= se.POLE_TOL):
        raise PoleError("Gauss map vanishes")
    g1, g2, g3 = (se.evaluate(d, z) for d in wd.dg)
    return g, g1, g2, g3


def shiffman_complex(wd: WeierstrassData, z):
    """The closed form (3/2)(g'/g)² − g''/g − (g'/g)²/(1 + |g|²)."""
    g, g1, g2, _ = _log_derivs(wd, z)
    x = g1 / g
    val = 1.5 * x * x - g2 / g - x * x / (1 + np.abs(g) ** 2)
    return complex(val) if np.ndim(val) == 0 else val


def shiffman_part(wd: WeierstrassData, z, convention=None):
    """The real field selected by the calibrated convention."""
    conv = convention or CONVENTION
    v = np.asarray(shiffman_complex(wd, z))
    part = v.imag if conv["part"] == "imag" else v.real
    return conv["sign"] * part


def gdot_shiffman(wd: WeierstrassData, z):
    """Gauss-map variation (i/2)(g''' − 3g'g''/g + (3/2)g'³/g²)."""
    g, g1, g2, g3 = _log_derivs(wd, z)
    val = 0.5j * (g3 - 3 * g1 * g2 / g + 1.5 * g1 ** 3 / g ** 2)
    return complex(val) if np.ndim(val) == 0 else val


def gdot_expr(g: se.Expr) -> se.Expr:
    """ġ_S as an expression in z."""
    memo: dict = {}
    g1 = se.differentiate(g, memo)
    g2 = se.differentiate(g1, memo)
    g3 = se.differentiate(g2, memo)
    return se.const(0.5j) * (g3 - 3 * g1 * g2 / g + se.const(1.5) * g1 ** 3 / g ** 2)


def linearity_test(S, normals):
    """Least-squares fit S ≈ ⟨N, v⟩; returns (v, ‖S − ⟨N,v⟩‖/‖S‖)."""
    S = np.asarray(S, dtype=float).ravel()
    A = np.asarray(normals, dtype=float).reshape(-1, 3)
    ok = np.isfinite(S) & np.all(np.isfinite(A), axis=1)
    S, A = S[ok], A[ok]
    norm = np.linalg.norm(S)
    if norm == 0:
        return np.zeros(3), 0.0
    v, *_ = np.linalg.lstsq(A, S, rcond=None)
    return v, float(np.linalg.norm(S - A @ v) / norm)


# ------------------------------------------------------------- calibration

def generic_patch() -> WeierstrassData:
    """Gauss map (1 + z/2)e^z with dh = dz: sections are not circles."""
    return WeierstrassData(se.mul(se.const(1) + se.const(0.5) * se.Z, se.exp(se.Z)), se.const(1),
                           "plane", name="generic")


def calibrate(resolution: int = 128):
    """Select the part of the closed form that matches the geometric field.

    Criterion (a): the part must vanish on the catenoid (g = e^z, dh = dz).
    Criterion (b): its sign is fixed by correlation with Λ ∂κ/∂y on a
    generic patch, where both fields are nonzero.
    """
    zs = np.linspace(-2, 2, 41) + 0.7j
    cat = WeierstrassData(se.exp(se.Z), se.const(1), "cylinder")
    v = np.asarray(shiffman_complex(cat, zs))
    parts = {"real": float(np.max(np.abs(v.real))), "imag": float(np.max(np.abs(v.imag)))}
    part = min(parts, key=parts.get)
    wd = generic_patch()
    m = immerse(wd, (0.0, 1.0, 0.0, 1.0), resolution)
    geo = shiffman_geometric(m).S[2:-2, 2:-2]
    val = np.asarray(shiffman_complex(wd, m.z))[2:-2, 2:-2]
    closed = val.imag if part == "imag" else val.real
    corr = float(np.corrcoef(geo.ravel(), closed.ravel())[0, 1])
    sign = 1.0 if corr >= 0 else -1.0
    scale = float(np.dot(geo.ravel(), closed.ravel()) / np.dot(closed.ravel(), closed.ravel()))
    return {"part": part, "sign": sign, "correlation": abs(corr), "scale": abs(scale),
            "catenoid_max_real": parts["real"], "catenoid_max_imag": parts["imag"]}

