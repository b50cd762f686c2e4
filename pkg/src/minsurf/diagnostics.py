"""Geometric statistics on sampled surfaces: flux, curvature decay, Jacobi
residuals, Gauss-map degree and area growth."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousDegreeError, InsufficientExtentError, OpenSectionError
from .mesh import SurfaceMesh, flat_laplacian
from .weierstrass import WeierstrassData, period_residual

LEVEL_TOL = 1e-8
DEGREE_TOL = 0.2
FLAT_TOL = 0.05
DEGREE_SEED = 20240611


@dataclass(frozen=True)
class FluxVector:
    vector: np.ndarray
    level: float
    length: float


@dataclass(frozen=True)
class DecaySeries:
    radii: np.ndarray
    KR2: np.ndarray
    KR4: np.ndarray
    verdict: str


# -------------------------------------------------------------------- flux

def _spectral_dy(P):
    """Derivative of a periodic sampled curve with respect to its index
    (period = number of samples), rows along axis 0."""
    n = P.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0
    return np.real(np.fft.ifft(np.fft.fft(P, axis=0) * (2j * np.pi * k / n)[:, None], axis=0))


def _curve_flux(P, N, forward, hy):
    """∫ η ds along a closed curve: η = unit(T × N), oriented with ``forward``."""
    T = _spectral_dy(P) / hy
    eta = np.cross(T, N)
    nrm = np.linalg.norm(eta, axis=1, keepdims=True)
    if np.any(nrm == 0):
        raise OpenSectionError("degenerate section: zero tangent")
    eta /= nrm
    if np.sum(np.einsum("ij,ij->i", eta, forward)) < 0:
        eta = -eta
    speed = np.linalg.norm(T, axis=1)
    return (eta * speed[:, None]).sum(axis=0) * hy, float(speed.sum() * hy)


def _row_forward(mesh, i):
    if mesh.tangent_x is not None and np.all(np.isfinite(mesh.tangent_x[i])):
        return mesh.tangent_x[i]
    nx = mesh.shape[0]
    a, b = (i, i + 1) if i + 1 < nx else (i - 1, i)
    return mesh.position[b] - mesh.position[a]


def row_flux(mesh: SurfaceMesh, i: int):
    """Flux and length of the closed grid row ``i`` of a periodic mesh."""
    if not mesh.periodic:
        raise OpenSectionError("grid rows are open curves on a non-periodic mesh")
    if not mesh.valid[i].all():
        raise OpenSectionError(f"row {i} contains excluded vertices")
    _, hy = mesh.spacing
    return _curve_flux(mesh.position[i], mesh.normal[i], _row_forward(mesh, i), hy)


def flux(mesh: SurfaceMesh, level: float) -> FluxVector:
    """Flux through the horizontal section x3 = level.

    When grid rows are horizontal sections the bracketing rows are
    integrated with the periodic trapezoid rule and interpolated linearly in
    height (flux is height independent, so this is exact in the limit).
    Otherwise the section is cut out column by column.
    """
    if not mesh.periodic:
        raise OpenSectionError("the level set is not a closed curve on this mesh")
    x3 = mesh.position[..., 2]
    nx, ny = mesh.shape
    _, hy = mesh.spacing
    spread = np.nanmax(np.abs(x3 - np.nanmean(x3, axis=1, keepdims=True)), axis=1)
    scale = max(1.0, float(np.nanmax(np.abs(x3))))
    if np.all(spread <= LEVEL_TOL * scale):
        h = np.nanmean(x3, axis=1)
        order = np.argsort(h)
        hs = h[order]
        if not hs[0] - LEVEL_TOL * scale <= level <= hs[-1] + LEVEL_TOL * scale:
            raise OpenSectionError(f"no section at height {level}")
        k = int(np.clip(np.searchsorted(hs, level), 1, nx - 1))
        ia, ib = order[k - 1], order[k]
        w = 0.0 if hs[k] == hs[k - 1] else float(np.clip((level - hs[k - 1]) / (hs[k] - hs[k - 1]), 0, 1))
        if abs(hs[k - 1] - level) <= 1e-14 * scale:
            w = 0.0
        fa, la = row_flux(mesh, ia)
        if w == 0.0:
            return FluxVector(fa, float(level), la)
        fb, lb = row_flux(mesh, ib)
        return FluxVector((1 - w) * fa + w * fb, float(level), (1 - w) * la + w * lb)

    # general case: one crossing per column along the x-direction
    pts = np.empty((ny, 3))
    nrm = np.empty((ny, 3))
    fwd = np.empty((ny, 3))
    for j in range(ny):
        col = x3[:, j] - level
        s = np.nonzero(np.sign(col[:-1]) * np.sign(col[1:]) <= 0)[0]
        if len(s) != 1:
            raise OpenSectionError(f"column {j} crosses height {level} {len(s)} times")
        i = s[0]
        t = 0.0 if col[i] == col[i + 1] else col[i] / (col[i] - col[i + 1])
        pts[j] = (1 - t) * mesh.position[i, j] + t * mesh.position[i + 1, j]
        n = (1 - t) * mesh.normal[i, j] + t * mesh.normal[i + 1, j]
        nrm[j] = n / np.linalg.norm(n)
        fwd[j] = mesh.position[i + 1, j] - mesh.position[i, j]
    vec, length = _curve_flux(pts, nrm, fwd, hy)
    return FluxVector(vec, float(level), length)


def flux_series(mesh: SurfaceMesh, rows=None) -> np.ndarray:
    """Per-row flux vectors for the given (default: all valid) rows."""
    rows = range(mesh.shape[0]) if rows is None else rows
    return np.array([row_flux(mesh, i)[0] for i in rows])


def flux_of_loop(wd: WeierstrassData, loop) -> np.ndarray:
    """Flux of the image of a closed parameter loop, Im ∮ Φ."""
    return period_residual(wd, loop)[1]


# ------------------------------------------------------------------- decay

def _finite(mesh):
    P = mesh.position
    ok = mesh.valid & np.all(np.isfinite(P), axis=-1) & np.isfinite(mesh.gaussian_curvature)
    return P[ok], mesh.gaussian_curvature[ok]


def decay_statistic(surface, radii, center=(0.0, 0.0, 0.0), window=None, resolution=None) -> DecaySeries:
    """sup_{|p − c| ≥ R} |K| times R² and R⁴ for each radius R.

    Verdict "finite total curvature" when the R² series is bounded: its last
    three samples agree within 5% or do not increase.
    """
    if isinstance(surface, WeierstrassData):
        from .weierstrass import immerse
        if window is None or resolution is None:
            raise ValueError("Weierstrass input needs a window and resolution")
        surface = immerse(surface, window, resolution)
    P, K = _finite(surface)
    d = np.linalg.norm(P - np.asarray(center, dtype=float), axis=1)
    radii = np.asarray(radii, dtype=float)
    if d.max() < 4 * radii.min():
        raise InsufficientExtentError(
            f"mesh reaches radius {d.max():.4g}, need at least {4 * radii.min():.4g}")
    order = np.argsort(d)
    dk = d[order]
    tail = np.maximum.accumulate(np.abs(K[order])[::-1])[::-1]
    sup = np.zeros(radii.size)
    for n, R in enumerate(radii):
        k = np.searchsorted(dk, R)
        sup[n] = tail[k] if k < dk.size else 0.0
    KR2 = sup * radii ** 2
    KR4 = sup * radii ** 4
    return DecaySeries(radii, KR2, KR4, decay_verdict(KR2))


def decay_verdict(KR2) -> str:
    last = np.asarray(KR2[-3:], dtype=float)
    top = float(np.max(np.abs(last)))
    bounded = top == 0 or (np.ptp(last) <= FLAT_TOL * top) or bool(np.all(np.diff(last) <= 0))
    return "finite total curvature" if bounded else "infinite total curvature"


def is_flat(series, tol: float = FLAT_TOL) -> bool:
    s = np.asarray(series, dtype=float)
    return bool(np.ptp(s) <= tol * np.max(np.abs(s)))


# ------------------------------------------------------------------ Jacobi

def jacobi_operator(mesh: SurfaceMesh, S) -> np.ndarray:
    """Λ⁻² (flat 5-point Laplacian of S) − 2KS; NaN on the boundary."""
    hx, hy = mesh.spacing
    S = np.asarray(S, dtype=float)
    return flat_laplacian(S, hx, hy, mesh.periodic) / mesh.conformal_factor ** 2 \
        - 2 * mesh.gaussian_curvature * S


def jacobi_residual(mesh: SurfaceMesh, S) -> float:
    """max |Δ_M S − 2KS| normalised by max|S| · max|2K|."""
    L = jacobi_operator(mesh, S)
    ok = np.isfinite(L)
    S = np.asarray(S, dtype=float)
    norm = float(np.nanmax(np.abs(S[ok]))) * float(np.nanmax(np.abs(2 * mesh.gaussian_curvature[ok])))
    if norm == 0:
        return 0.0
    return float(np.max(np.abs(L[ok]))) / norm


# ------------------------------------------------------------------ degree

def _quad_areas(mesh):
    P = mesh.flat_positions()
    q = mesh.quads()
    a, b, c, d = (P[q[:, k]] for k in range(4))
    area = 0.5 * (np.linalg.norm(np.cross(b - a, c - a), axis=1) + np.linalg.norm(np.cross(c - a, d - a), axis=1))
    return q, area


def total_curvature(mesh: SurfaceMesh) -> float:
    """∫ K dA with K averaged over the corners of each quad."""
    q, area = _quad_areas(mesh)
    K = mesh.gaussian_curvature.ravel()[q].mean(axis=1)
    ok = np.isfinite(K) & np.isfinite(area)
    return float(np.sum(K[ok] * area[ok]))


def regular_values(n: int = 3, seed: int = DEGREE_SEED) -> np.ndarray:
    """Seeded random unit vectors with |n3| < 0.9."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if abs(v[2]) < 0.9:
            out.append(v)
    return np.array(out)


def preimage_count(mesh: SurfaceMesh, value) -> int:
    """Signed number of mesh triangles whose spherical image contains ``value``."""
    Nn = mesh.normal.reshape(-1, 3)
    tri = mesh.triangles()
    ok = np.all(np.isfinite(Nn[tri]), axis=(1, 2))
    tri = tri[ok]
    A = np.stack([Nn[tri[:, 0]], Nn[tri[:, 1]], Nn[tri[:, 2]]], axis=-1)  # columns are normals
    det = np.linalg.det(A)
    good = np.abs(det) > 1e-300
    coef = np.full((len(tri), 3), -1.0)
    coef[good] = np.linalg.solve(A[good], np.broadcast_to(np.asarray(value, float), (good.sum(), 3))[..., None])[..., 0]
    hit = np.all(coef > 0, axis=1)
    return int(np.sum(np.sign(det[hit])))


def gauss_degree(mesh: SurfaceMesh, details: bool = False):
    """Degree of the Gauss map from (1/4π)∫|K| dA, cross-checked by signed
    preimage counts of three seeded regular values."""
    integral = -total_curvature(mesh) / (4 * math.pi)
    deg = int(round(integral))
    counts = [abs(preimage_count(mesh, v)) for v in regular_values()]
    majority = max(set(counts), key=counts.count)
    info = {"integral": integral, "counts": counts, "degree": deg}
    if abs(integral - deg) > DEGREE_TOL:
        raise AmbiguousDegreeError(f"curvature integral {integral:.4f} is not near an integer")
    if majority != deg or counts.count(majority) < 2:
        raise AmbiguousDegreeError(f"curvature integral gives {deg}, preimage counts give {counts}")
    return (deg, info) if details else deg


def jorge_meeks_degree(genus: int, end_multiplicities) -> int:
    """Degree of the Gauss map of a complete surface of finite total
    curvature: (Σ I_j − χ)/2 with χ = 2 − 2g − r.  Embedded ends (all
    I_j = 1) give g + r − 1."""
    ends = list(end_multiplicities)
    chi = 2 - 2 * genus - len(ends)
    twice = sum(ends) - chi
    if twice % 2:
        raise ValueError("inconsistent topology: odd total")
    return twice // 2


# ------------------------------------------------------------- area growth

def _disk_triangle_area(A, B, C, r):
    """Area of (triangle ABC) ∩ (disk of radius r at the origin) in 2-D,
    as a sum of signed origin-edge pieces."""
    total = np.zeros(len(A))
    for P, Q in ((A, B), (B, C), (C, A)):
        d = Q - P
        a = np.einsum("ij,ij->i", d, d)
        b = np.einsum("ij,ij->i", P, d)
        c = np.einsum("ij,ij->i", P, P) - r * r
        disc = b * b - a * c
        sq = np.sqrt(np.maximum(disc, 0))
        with np.errstate(invalid="ignore", divide="ignore"):
            t1 = np.where(a > 0, (-b - sq) / a, 0.0)
            t2 = np.where(a > 0, (-b + sq) / a, 0.0)
        miss = disc <= 0
        s = np.where(miss, 0.0, np.clip(t1, 0, 1))
        e = np.where(miss, 0.0, np.clip(t2, 0, 1))
        Ps = P + s[:, None] * d
        Pe = P + e[:, None] * d

        def sector(U, V):
            cr = U[:, 0] * V[:, 1] - U[:, 1] * V[:, 0]
            dt = np.einsum("ij,ij->i", U, V)
            return 0.5 * r * r * np.arctan2(cr, dt)

        tri = 0.5 * (Ps[:, 0] * Pe[:, 1] - Ps[:, 1] * Pe[:, 0])
        total += sector(P, Ps) + tri + sector(Pe, Q)
    return np.abs(total)


def ball_area(tri_xyz, center, R) -> float:
    """Exact area of a triangle soup inside the ball B(center, R)."""
    a, b, c = (tri_xyz[:, k] - center for k in range(3))
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    keep = nn > 0
    a, b, c, n, nn = a[keep], b[keep], c[keep], n[keep], nn[keep]
    n = n / nn[:, None]
    dist = np.einsum("ij,ij->i", a, n)
    near = np.abs(dist) < R
    if not near.any():
        return 0.0
    a, b, c, n, dist = a[near], b[near], c[near], n[near], dist[near]
    rho = np.sqrt(R * R - dist * dist)
    foot = dist[:, None] * n
    e1 = b - a
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(n, e1)

    def flat(p):
        q = p - foot
        return np.stack([np.einsum("ij,ij->i", q, e1), np.einsum("ij,ij->i", q, e2)], axis=1)

    # scale each triangle so its disk has unit radius
    A2, B2, C2 = (flat(p) / rho[:, None] for p in (a, b, c))
    return float(np.sum(_disk_triangle_area(A2, B2, C2, 1.0) * rho * rho))


def boundary_distance(mesh: SurfaceMesh, center) -> float:
    """Distance from ``center`` to the mesh boundary (open edges)."""
    P = mesh.position
    edge = [P[0], P[-1]]
    if not mesh.periodic:
        edge += [P[:, 0], P[:, -1]]
    if mesh.mask is not None:
        m = mesh.mask
        inner = np.zeros_like(m)
        inner[1:-1, 1:-1] = ~m[1:-1, 1:-1]
        grow = inner | np.roll(inner, 1, 0) | np.roll(inner, -1, 0) | np.roll(inner, 1, 1) | np.roll(inner, -1, 1)
        edge.append(P[grow & m])
    pts = np.concatenate([e.reshape(-1, 3) for e in edge])
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    return float(np.min(np.linalg.norm(pts - np.asarray(center, float), axis=1)))


def area_growth(mesh: SurfaceMesh, center=(0.0, 0.0, 0.0), radii=(1.0,)) -> np.ndarray:
    """A(R)/R² for the triangulated mesh, clipping triangles exactly
    against each ball."""
    center = np.asarray(center, dtype=float)
    radii = np.asarray(radii, dtype=float)
    reach = boundary_distance(mesh, center)
    if radii.max() >= reach:
        raise InsufficientExtentError(f"ball of radius {radii.max():.4g} meets the mesh boundary at {reach:.4g}")
    P = mesh.flat_positions()
    tri = P[mesh.triangles()]
    tri = tri[np.all(np.isfinite(tri), axis=(1, 2))]
    return np.array([ball_area(tri, center, R) / R ** 2 for R in radii])
