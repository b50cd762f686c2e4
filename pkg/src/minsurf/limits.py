"""Shrinking sequences (1/n)·M of catalog surfaces: curvature blow-up sets
and distance to the limit lamination by horizontal planes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegionError
from .mesh import SurfaceMesh

CELL = 0.05
DEFAULT_N = (4, 8, 16, 32, 64)
SEQUENCES = ("catenoid", "helicoid", "plane")


def rescale(mesh: SurfaceMesh, lam: float) -> SurfaceMesh:
    """Homothety by λ: positions and Λ scale by λ, K by λ⁻²."""
    if not lam > 0:
        raise ValueError("scale factor must be positive")
    if lam == 1:
        return mesh
    meta = dict(mesh.meta)
    meta["scale"] = meta.get("scale", 1.0) * lam
    tx = None if mesh.tangent_x is None else mesh.tangent_x * lam
    ty = None if mesh.tangent_y is None else mesh.tangent_y * lam
    return mesh.replace(position=mesh.position * lam, conformal_factor=mesh.conformal_factor * lam,
                        gaussian_curvature=mesh.gaussian_curvature / lam ** 2,
                        tangent_x=tx, tangent_y=ty, meta=meta)


def base_mesh(name: str, n_max: int, box: float = 1.0, spacing: float = 0.02) -> SurfaceMesh:
    """One mesh of the unscaled surface large enough that (1/n)·mesh covers
    the cube [−box, box]³ for every n ≤ n_max."""
    from .catalog import mesh as catalog_mesh
    reach = n_max * box * math.sqrt(3)
    if name == "catenoid":
        x = math.acosh(max(reach, 1.0)) + 0.1
        nx = 2 * int(math.ceil(x / spacing)) + 1
        return catalog_mesh("catenoid", (nx, 128), window=(-x, x, 0.0, 2 * math.pi))
    if name == "helicoid":
        x = math.asinh(reach) + 0.1
        y = n_max * box + 0.5
        nx = 2 * int(math.ceil(x / (2 * spacing))) + 1
        ny = 2 * int(math.ceil(y / (2 * spacing))) + 1
        return catalog_mesh("helicoid", (nx, ny), window=(-x, x, -y, y))
    if name == "plane":
        return catalog_mesh("plane", 65, window=(-reach, reach, -reach, reach))
    raise ValueError(f"unknown sequence {name!r}; choose from {', '.join(SEQUENCES)}")


def _cell_index(points):
    # cells centred on the lattice CELL·k so the origin is a cell centre
    return np.floor(points / CELL + 0.5).astype(np.int64)


@dataclass
class BlowupResult:
    points: np.ndarray
    cells: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    per_n: dict = field(default_factory=dict)  # n -> number of flagged cells


def blowup_set(sequence, n_values=DEFAULT_N, tau=None, box: float = 1.0) -> BlowupResult:
    """Ambient cells where the n-th shrunk surface has |K| > τ_n for every
    sampled n in the upper half of ``n_values``.

    Each persistent cell is reported by the mean of its flagged points at
    the largest n.

    ``sequence`` is a catalog name or a ready unscaled SurfaceMesh; ``tau``
    maps n to the threshold (default τ_n = n).
    """
    n_values = sorted(int(n) for n in n_values)
    tau = tau or (lambda n: float(n))
    base = sequence if isinstance(sequence, SurfaceMesh) else base_mesh(sequence, n_values[-1], box)
    P = base.position.reshape(-1, 3)
    K = np.abs(base.gaussian_curvature.ravel())
    ok = np.all(np.isfinite(P), axis=1) & np.isfinite(K)
    P, K = P[ok], K[ok]
    late = n_values[len(n_values) // 2:]
    common = None
    out = BlowupResult(np.zeros((0, 3)))
    for n in n_values:
        Q = P / n
        inside = np.all(np.abs(Q) <= box, axis=1)
        hot = Q[inside & (K * n * n > tau(n))]
        idx = _cell_index(hot)
        cells = {tuple(c) for c in idx}
        out.per_n[n] = len(cells)
        if n in late:
            common = cells if common is None else common & cells
    if common:
        keys = sorted(common)
        centers = []
        for key in keys:
            sel = np.all(idx == np.array(key), axis=1)
            centers.append(hot[sel].mean(axis=0))
        out.points = np.array(centers)
        out.cells = np.array(keys, dtype=float) * CELL
    return out


# --------------------------------------------------------------- lamination

@dataclass(frozen=True)
class Region:
    """Annulus r_min ≤ |p − c| ≤ r_max (a ball when r_min = 0)."""
    center: tuple = (0.0, 0.0, 0.0)
    r_min: float = 0.0
    r_max: float = 1.0

    def contains(self, P) -> np.ndarray:
        d = np.linalg.norm(P - np.asarray(self.center, float), axis=-1)
        return (d >= self.r_min) & (d <= self.r_max)


def lamination_distance(mesh: SurfaceMesh, heights, region: Region, normal=(0.0, 0.0, 1.0)) -> float:
    """One-sided Hausdorff distance from the mesh points in ``region`` to the
    parallel planes ⟨p, normal⟩ = h for h in ``heights``."""
    P = mesh.position.reshape(-1, 3)
    P = P[np.all(np.isfinite(P), axis=1)]
    P = P[region.contains(P)]
    if not len(P):
        raise EmptyRegionError("no mesh points in the region")
    nrm = np.asarray(normal, float)
    nrm = nrm / np.linalg.norm(nrm)
    h = np.sort(np.asarray(heights, float).ravel())
    s = P @ nrm
    k = np.clip(np.searchsorted(h, s), 1, len(h) - 1) if len(h) > 1 else np.zeros(len(s), int)
    d = np.abs(s - h[k])
    if len(h) > 1:
        d = np.minimum(d, np.abs(s - h[k - 1]))
    return float(d.max())


def helicoid_sheet_heights(n: int, box: float = 1.0) -> np.ndarray:
    """Heights where the shrunk helicoid (1/n)·H crosses the half-line
    {x2 = 0, x1 > 0}: −(π/2 + kπ)/n."""
    kmax = int(math.ceil(n * box / math.pi)) + 2
    k = np.arange(-kmax, kmax + 1)
    return -(math.pi / 2 + k * math.pi) / n


def distance_series(name: str, n_values, region: Region, box: float = 1.0, skip_empty: bool = False) -> np.ndarray:
    """lamination_distance of (1/n)·M for each n: the catenoid against
    {x3 = 0}, the helicoid against its sheet heights, the plane against
    itself (normal e1).  With ``skip_empty`` an n whose region holds no
    mesh points gives NaN instead of raising."""
    n_values = sorted(int(n) for n in n_values)
    base = base_mesh(name, n_values[-1], box)
    out = []
    for n in n_values:
        m = rescale(base, 1.0 / n)
        normal = (0.0, 0.0, 1.0)
        if name == "helicoid":
            heights = helicoid_sheet_heights(n, box)
        elif name == "plane":
            heights, normal = [0.0], (1.0, 0.0, 0.0)
        else:
            heights = [0.0]
        try:
            out.append(lamination_distance(m, heights, region, normal))
        except EmptyRegionError:
            if not skip_empty:
                raise
            out.append(math.nan)
    return np.array(out)
