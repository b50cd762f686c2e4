"""Structured surface meshes: container, grid finite differences, and I/O.

Meshes are tensor grids indexed ``[i, j]`` with ``i`` running along the
real parameter direction (x = Re z) and ``j`` along y = Im z.  The
y-direction may be periodic (cylinder domains), in which case the grid
wraps and the last column connects back to the first.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

NORMAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    z: np.ndarray                 # (nx, ny) complex parameter values
    position: np.ndarray          # (nx, ny, 3)
    normal: np.ndarray            # (nx, ny, 3) unit
    conformal_factor: np.ndarray  # (nx, ny) Λ, metric = Λ² |dz|²
    gaussian_curvature: np.ndarray
    periodic: bool = False
    conformal: bool = True
    name: str = ""
    tangent_x: np.ndarray | None = None
    tangent_y: np.ndarray | None = None
    mask: np.ndarray | None = None  # True where the vertex is valid
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.z.shape

    @property
    def spacing(self):
        """Parameter steps (hx, hy)."""
        nx, ny = self.shape
        hx = (self.z[-1, 0].real - self.z[0, 0].real) / (nx - 1) if nx > 1 else 1.0
        if self.periodic:
            hy = self.meta.get("period", 2 * np.pi) / ny
        else:
            hy = (self.z[0, -1].imag - self.z[0, 0].imag) / (ny - 1) if ny > 1 else 1.0
        return float(hx), float(hy)

    @property
    def valid(self):
        if self.mask is None:
            return np.ones(self.shape, dtype=bool)
        return self.mask

    def replace(self, **kw) -> "SurfaceMesh":
        return replace(self, **kw)

    def quads(self) -> np.ndarray:
        """Vertex-index quads (flat indices), counter-clockwise in (x, y)."""
        nx, ny = self.shape
        idx = np.arange(nx * ny).reshape(nx, ny)
        jj = np.arange(ny if self.periodic else ny - 1)
        a = idx[:-1][:, jj]
        b = idx[1:][:, jj]
        c = idx[1:][:, (jj + 1) % ny]
        d = idx[:-1][:, (jj + 1) % ny]
        q = np.stack([a, b, c, d], axis=-1).reshape(-1, 4)
        if self.mask is not None:
            ok = self.mask.ravel()[q].all(axis=1)
            q = q[ok]
        return q

    def triangles(self) -> np.ndarray:
        q = self.quads()
        return np.concatenate([q[:, [0, 1, 2]], q[:, [0, 2, 3]]])

    def flat_positions(self):
        return self.position.reshape(-1, 3)


# ----------------------------------------------------------- grid calculus

def _d1(f, h, axis, periodic):
    if periodic:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)
    out = np.full(f.shape, np.nan, dtype=f.dtype)
    sl = [slice(None)] * f.ndim
    sl[axis] = slice(1, -1)
    hi = [slice(None)] * f.ndim
    hi[axis] = slice(2, None)
    lo = [slice(None)] * f.ndim
    lo[axis] = slice(None, -2)
    out[tuple(sl)] = (f[tuple(hi)] - f[tuple(lo)]) / (2 * h)
    return out


def _d2(f, h, axis, periodic):
    if periodic:
        return (np.roll(f, -1, axis) - 2 * f + np.roll(f, 1, axis)) / h ** 2
    out = np.full(f.shape, np.nan, dtype=f.dtype)
    sl = [slice(None)] * f.ndim
    sl[axis] = slice(1, -1)
    hi = [slice(None)] * f.ndim
    hi[axis] = slice(2, None)
    lo = [slice(None)] * f.ndim
    lo[axis] = slice(None, -2)
    out[tuple(sl)] = (f[tuple(hi)] - 2 * f[tuple(sl)] + f[tuple(lo)]) / h ** 2
    return out


def grid_derivatives(f, hx, hy, periodic=False):
    """Second-order central differences (f_x, f_y, f_xx, f_xy, f_yy).

    Values on non-periodic boundary rows/columns are NaN.
    """
    fx = _d1(f, hx, 0, False)
    fy = _d1(f, hy, 1, periodic)
    fxx = _d2(f, hx, 0, False)
    fyy = _d2(f, hy, 1, periodic)
    fxy = _d1(_d1(f, hx, 0, False), hy, 1, periodic)
    return fx, fy, fxx, fxy, fyy


def flat_laplacian(f, hx, hy, periodic=False):
    """5-point Laplacian in the parameter plane; NaN on the boundary."""
    return _d2(f, hx, 0, False) + _d2(f, hy, 1, periodic)


def fundamental_forms(mesh: SurfaceMesh):
    """Finite-difference first and second fundamental forms.

    Returns (E, F, G, L, M, N, normal) with the normal oriented like
    ``mesh.normal``.
    """
    hx, hy = mesh.spacing
    X = mesh.position
    Xx, Xy, Xxx, Xxy, Xyy = grid_derivatives(X, hx, hy, mesh.periodic)
    E = np.einsum("...k,...k", Xx, Xx)
    F = np.einsum("...k,...k", Xx, Xy)
    G = np.einsum("...k,...k", Xy, Xy)
    n = np.cross(Xx, Xy)
    with np.errstate(invalid="ignore", divide="ignore"):
        n = n / np.linalg.norm(n, axis=-1, keepdims=True)
        flip = np.sign(np.einsum("...k,...k", n, mesh.normal))
        flip[flip == 0] = 1
        n = n * np.nan_to_num(flip, nan=1.0)[..., None]
    L = np.einsum("...k,...k", Xxx, n)
    M = np.einsum("...k,...k", Xxy, n)
    N = np.einsum("...k,...k", Xyy, n)
    return E, F, G, L, M, N, n


def mean_curvature_fd(mesh: SurfaceMesh) -> np.ndarray:
    """Discrete mean curvature from finite-difference fundamental forms."""
    E, F, G, L, M, N, _ = fundamental_forms(mesh)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (E * N - 2 * F * M + G * L) / (2 * (E * G - F * F))


def gaussian_curvature_fd(mesh: SurfaceMesh) -> np.ndarray:
    E, F, G, L, M, N, _ = fundamental_forms(mesh)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (L * N - M * M) / (E * G - F * F)


def angle_defect_curvature(mesh: SurfaceMesh) -> np.ndarray:
    """Angle defect over barycentric area at interior vertices (NaN elsewhere).

    Each quad is cut along both diagonals through its centroid so the
    triangulation is symmetric.
    """
    nx, ny = mesh.shape
    P = mesh.flat_positions()
    q = mesh.quads()
    centroid = P[q].mean(axis=1)
    ci = np.arange(len(q)) + len(P)
    allp = np.concatenate([P, centroid])
    tris = np.concatenate([np.stack([q[:, k], q[:, (k + 1) % 4], ci], axis=1) for k in range(4)])
    a, b, c = allp[tris[:, 0]], allp[tris[:, 1]], allp[tris[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def ang(p, q1, q2):
        u, v = q1 - p, q2 - p
        return np.arctan2(np.linalg.norm(np.cross(u, v), axis=1), np.einsum("ij,ij->i", u, v))

    nv = len(allp)
    angsum = np.zeros(nv)
    varea = np.zeros(nv)
    for k, (p, q1, q2) in enumerate(((a, b, c), (b, c, a), (c, a, b))):
        np.add.at(angsum, tris[:, k], ang(p, q1, q2))
        np.add.at(varea, tris[:, k], area / 3)
    K = (2 * np.pi - angsum[: nx * ny]) / varea[: nx * ny]
    K = K.reshape(nx, ny)
    K[0, :] = np.nan
    K[-1, :] = np.nan
    if not mesh.periodic:
        K[:, 0] = np.nan
        K[:, -1] = np.nan
    return K


def normals_from_positions(X, hx, hy, periodic):
    Xx = np.gradient(X, hx, axis=0)
    if periodic:
        Xy = (np.roll(X, -1, 1) - np.roll(X, 1, 1)) / (2 * hy)
    else:
        Xy = np.gradient(X, hy, axis=1)
    n = np.cross(Xx, Xy)
    return n / np.linalg.norm(n, axis=-1, keepdims=True), Xx, Xy


# --------------------------------------------------------------------- I/O

def write_obj(mesh: SurfaceMesh, path) -> None:
    """OBJ with v/vt/vn per vertex (vt carries z) and quad faces.

    Grid metadata and per-vertex (Λ, K) ride along in comment lines so a
    round trip preserves everything the diagnostics need.
    """
    nx, ny = mesh.shape
    P = mesh.position.reshape(-1, 3)
    Nn = mesh.normal.reshape(-1, 3)
    zz = mesh.z.ravel()
    lam = mesh.conformal_factor.ravel()
    K = mesh.gaussian_curvature.ravel()
    lines = ["# minsurf grid mesh",
             f"# name {mesh.name or 'surface'}",
             f"# grid {nx} {ny} periodic={int(mesh.periodic)} conformal={int(mesh.conformal)}"
             f" period={mesh.meta.get('period', 2 * np.pi)!r}"]
    lines += [f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}" for p in P]
    lines += [f"vt {w.real:.17g} {w.imag:.17g}" for w in zz]
    lines += [f"vn {n[0]:.17g} {n[1]:.17g} {n[2]:.17g}" for n in Nn]
    lines += [f"#vf {a:.17g} {k:.17g}" for a, k in zip(lam, K)]
    for quad in mesh.quads() + 1:
        lines.append("f " + " ".join(f"{v}/{v}/{v}" for v in quad))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path) -> SurfaceMesh:
    """Read a grid OBJ written by :func:`write_obj`."""
    v, vt, vn, vf = [], [], [], []
    grid = None
    name = ""
    meta = {}
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "v":
                v.append([float(x) for x in parts[1:4]])
            elif tag == "vt":
                vt.append(complex(float(parts[1]), float(parts[2])))
            elif tag == "vn":
                vn.append([float(x) for x in parts[1:4]])
            elif tag == "#vf":
                vf.append([float(parts[1]), float(parts[2])])
            elif tag == "#" and len(parts) > 1 and parts[1] == "grid":
                nx, ny = int(parts[2]), int(parts[3])
                opts = dict(p.split("=") for p in parts[4:])
                grid = (nx, ny, opts.get("periodic") == "1", opts.get("conformal", "1") == "1")
                if "period" in opts:
                    meta["period"] = float(opts["period"])
            elif tag == "#" and len(parts) > 2 and parts[1] == "name":
                name = parts[2]
    if grid is None:
        raise ValueError(f"{path}: not a minsurf grid OBJ (missing '# grid' header)")
    nx, ny, periodic, conformal = grid
    shape = (nx, ny)
    P = np.array(v, dtype=float).reshape(nx, ny, 3)
    Zp = np.array(vt, dtype=complex).reshape(shape)
    if vn:
        Nn = np.array(vn, dtype=float).reshape(nx, ny, 3)
    else:
        hx = (Zp[-1, 0].real - Zp[0, 0].real) / (nx - 1)
        hy = meta.get("period", 2 * np.pi) / ny if periodic else (Zp[0, -1].imag - Zp[0, 0].imag) / (ny - 1)
        Nn = normals_from_positions(P, hx, hy, periodic)[0]
    finite = np.all(np.isfinite(P), axis=-1)
    mask = None if finite.all() else finite
    mesh = SurfaceMesh(Zp, P, Nn, np.ones(shape), np.zeros(shape), periodic, conformal, name,
                       mask=mask, meta=meta)
    if vf:
        f = np.array(vf).reshape(nx, ny, 2)
        return mesh.replace(conformal_factor=f[..., 0], gaussian_curvature=f[..., 1])
    hx, hy = mesh.spacing
    Xy = grid_derivatives(P, hx, hy, periodic)[1]
    return mesh.replace(conformal_factor=np.linalg.norm(Xy, axis=-1),
                        gaussian_curvature=gaussian_curvature_fd(mesh))


CSV_HEADER = "re_z,im_z,x1,x2,x3,n1,n2,n3,lambda,K"


def write_csv(mesh: SurfaceMesh, path) -> None:
    cols = np.column_stack([mesh.z.real.ravel(), mesh.z.imag.ravel(),
                            mesh.position.reshape(-1, 3), mesh.normal.reshape(-1, 3),
                            mesh.conformal_factor.ravel(), mesh.gaussian_curvature.ravel()])
    np.savetxt(path, cols, delimiter=",", header=CSV_HEADER, comments="", fmt="%.17g")
