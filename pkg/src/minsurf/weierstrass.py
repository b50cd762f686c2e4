"""Minimal immersions from Weierstrass data (g, dh).

With dh = f(z) dz the immersion is X = Re ∫ Φ where

    Φ = (½(1/g − g), (i/2)(1/g + g), 1) f dz.

The unit normal is the inverse stereographic image of g,
N = (2 Re g, 2 Im g, |g|² − 1)/(|g|² + 1), which matches X_x × X_y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import symexpr as se
from .errors import NonClosedPeriodError, PoleError, PoleOnPathError
from .mesh import SurfaceMesh
from .symexpr import Expr

DOMAINS = ("plane", "cylinder", "annulus")
PATH_POLE_TOL = 1e-6
EXCLUSION_RADIUS = 1e-3
CLOSURE_TOL = 1e-9
TWO_PI = 2 * math.pi

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True, eq=False)
class WeierstrassData:
    g: Expr
    dh: Expr  # coefficient f of dh = f(z) dz
    domain: str = "plane"
    homology_loops: tuple = ()
    name: str = ""
    # dh/g in closed form, used where g and f vanish together
    eta: Expr | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {self.domain!r}")

    @cached_property
    def dg(self) -> tuple:
        """(g', g'', g''') as expressions sharing subtrees."""
        memo: dict = {}
        g1 = se.differentiate(self.g, memo)
        g2 = se.differentiate(g1, memo)
        g3 = se.differentiate(g2, memo)
        return g1, g2, g3

    def conjugate(self) -> "WeierstrassData":
        """Conjugate surface: dh -> i dh (same g, same metric)."""
        eta = None if self.eta is None else se.const(1j) * self.eta
        return WeierstrassData(self.g, se.const(1j) * self.dh, self.domain, self.homology_loops,
                               f"{self.name}*" if self.name else "", eta, dict(self.meta))

    def _g_eta_f(self, z):
        g = se.evaluate(self.g, z)
        f = se.evaluate(self.dh, z)
        if self.eta is not None:
            eta = se.evaluate(self.eta, z)
        else:
            if np.any(np.abs(g) <= se.POLE_TOL):
                raise PoleError("Gauss map vanishes; supply eta = dh/g")
            eta = f / g
        return g, eta, f

    def phi(self, z) -> np.ndarray:
        """Φ(z) as complex array of shape z.shape + (3,)."""
        z = np.asarray(z, dtype=complex)
        g, eta, f = self._g_eta_f(z)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.stack([0.5 * eta * (1 - g * g), 0.5j * eta * (1 + g * g), f], axis=-1)
        return out

    def periodicity_defect(self, samples) -> float:
        """max |h(z + 2πi) − h(z)| over g and f at the given samples."""
        z = np.asarray(samples, dtype=complex)
        d = 0.0
        for e in (self.g, self.dh):
            a, b = se.evaluate(e, z), se.evaluate(e, z + TWO_PI * 1j)
            d = max(d, float(np.max(np.abs(a - b) / np.maximum(1, np.abs(a)))))
        return d

    def singular_points(self, window) -> list:
        """Points in the window where Φ has a pole or the metric degenerates.

        Returns (location, reason) pairs; reason is "pole" when
        ord(f) < |ord(g)| and "branch" when ord(f) > |ord(g)|.
        """
        gz = se.find_zeros_poles(self.g, window)
        fz = se.find_zeros_poles(self.dh, window)

        def signed(s):
            return s.order if s.kind == "zero" else -s.order

        pts: list = []
        for s in gz + fz:
            if not any(abs(s.location - p) < 1e-6 for p in pts):
                pts.append(s.location)
        out = []
        for p in pts:
            og = sum(signed(s) for s in gz if abs(s.location - p) < 1e-6)
            of = sum(signed(s) for s in fz if abs(s.location - p) < 1e-6)
            if of < abs(og):
                out.append((p, "pole"))
            elif of > abs(og):
                out.append((p, "branch"))
        return out


def curvature_and_metric(wd: WeierstrassData, z):
    """Conformal factor Λ, Gaussian curvature K and unit normal at z.

    Λ = ½|η|(1 + |g|²) with η = dh/g, which equals ½(|g| + 1/|g|)|f|;
    K = −(4|g'| / (|η|(1 + |g|²)²))² ≤ 0.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    g, eta, _ = wd._g_eta_f(z)
    g1 = se.evaluate(wd.dg[0], z)
    a2 = np.abs(g) ** 2
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lam = 0.5 * np.abs(eta) * (1 + a2)
        if np.any(lam <= 0):
            raise PoleError("conformal factor vanishes (branch point)")
        K = -(4 * np.abs(g1) / (np.abs(eta) * (1 + a2) ** 2)) ** 2
        big = a2 > 1e150
        denom = np.where(big, 1.0, 1 + a2)
        N = np.stack([2 * g.real / denom, 2 * g.imag / denom, (a2 - 1) / denom], axis=-1)
        if np.any(big):
            N[big] = [0.0, 0.0, 1.0]
    if scalar:
        return float(lam), float(K), N.reshape(3)
    return lam, K, N


def _segment_integrals(wd, a, b, chunk=20000):
    """∫_a^b Φ dz along straight segments with 16-point Gauss–Legendre."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    out = np.empty((a.size, 3), dtype=complex)
    for s in range(0, a.size, chunk):
        aa, bb = a[s:s + chunk, None], b[s:s + chunk, None]
        nodes = (aa + bb) / 2 + (bb - aa) / 2 * _GL_X[None, :]
        try:
            vals = wd.phi(nodes)
        except PoleError as exc:
            raise PoleOnPathError(str(exc)) from exc
        if not np.all(np.isfinite(vals)):
            raise PoleOnPathError("Φ is not finite on an integration path")
        out[s:s + chunk] = np.einsum("sn,snk->sk", (bb - aa) / 2 * _GL_W[None, :], vals)
    return out


def parameter_grid(window, resolution, periodic):
    x0, x1, y0, y1 = map(float, window)
    nx, ny = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    xs = np.linspace(x0, x1, int(nx))
    if periodic:
        ys = y0 + (y1 - y0) * np.arange(int(ny)) / int(ny)
    else:
        ys = np.linspace(y0, y1, int(ny))
    return xs[:, None] + 1j * ys[None, :], xs, ys


def _is_periodic_window(wd, window):
    return wd.domain == "cylinder" and abs((window[3] - window[2]) - TWO_PI) < 1e-9


def immerse(wd: WeierstrassData, window, resolution, basepoint=None, base_position=(0.0, 0.0, 0.0),
            check_singularities: bool = True) -> SurfaceMesh:
    """Sample the immersion on a parameter grid.

    Positions are integrated along the grid edges with 16-point
    Gauss–Legendre: first along the row through the basepoint, then up and
    down every column.  Each cell's loop integral (real part) must close to
    ``CLOSURE_TOL × cell size × |Φ|``; on a cylinder whose window spans the
    full period the grid wraps and the column periods must vanish as well.
    ``base_position`` is the point assigned to ``basepoint``.
    """
    periodic = _is_periodic_window(wd, window)
    Zg, xs, ys = parameter_grid(window, resolution, periodic)
    nx, ny = Zg.shape
    hx = xs[1] - xs[0] if nx > 1 else 1.0
    hy = (ys[1] - ys[0]) if ny > 1 else 1.0
    if basepoint is None:
        basepoint = 0j if (window[0] <= 0 <= window[1] and window[2] <= 0 <= window[3]) else \
            complex((window[0] + window[1]) / 2, (window[2] + window[3]) / 2)
    basepoint = complex(basepoint)
    if not (window[0] <= basepoint.real <= window[1] and window[2] <= basepoint.imag <= window[3]):
        raise ValueError("basepoint must lie inside the window")

    mask = np.ones((nx, ny), dtype=bool)
    if check_singularities:
        box = (window[0] - 0.37 * hx, window[1] + 0.41 * hx, window[2] - 0.43 * hy, window[3] + 0.39 * hy)
        for p, _reason in wd.singular_points(box):
            dx = np.min(np.abs(xs - p.real))
            dy = np.min(np.abs(ys - p.imag))
            if min(dx, dy) < PATH_POLE_TOL:
                raise PoleOnPathError(f"singularity at {p:.6g} lies on a grid line; shift the window")
            mask &= np.abs(Zg - p) > EXCLUSION_RADIUS
    bad = ~mask

    ib = int(np.argmin(np.abs(xs - basepoint.real)))
    jb = int(np.argmin(np.abs(ys - basepoint.imag)))
    F0 = _segment_integrals(wd, [basepoint], [Zg[ib, jb]])[0]

    H = _segment_integrals(wd, Zg[:-1, :], Zg[1:, :]).reshape(nx - 1, ny, 3)
    top = Zg[:, 1:]
    if periodic:
        top = np.concatenate([top, Zg[:, :1] + TWO_PI * 1j], axis=1)
        V = _segment_integrals(wd, Zg, top).reshape(nx, ny, 3)
    else:
        V = _segment_integrals(wd, Zg[:, :-1], top).reshape(nx, ny - 1, 3)

    F = np.empty((nx, ny, 3), dtype=complex)
    row = np.zeros((nx, 3), dtype=complex)
    row[ib] = F0
    row[ib + 1:] = F0 + np.cumsum(H[ib:, jb], axis=0)
    if ib > 0:
        row[:ib] = F0 - np.cumsum(H[:ib, jb][::-1], axis=0)[::-1]
    F[:, jb] = row
    if jb + 1 < ny:
        F[:, jb + 1:] = row[:, None, :] + np.cumsum(V[:, jb:ny - 1], axis=1)
    if jb > 0:
        F[:, :jb] = row[:, None, :] - np.cumsum(V[:, :jb][:, ::-1], axis=1)[:, ::-1]

    # loop closure per cell: bottom + right − top − left
    ncol = ny if periodic else ny - 1
    Hn = np.concatenate([H, H[:, :1]], axis=1) if periodic else H
    resid = H[:, :ncol] + V[1:, :ncol] - Hn[:, 1:ncol + 1] - V[:-1, :ncol]
    cell_ok = ~(bad[:-1, :ncol] | bad[1:, :ncol] | bad[:-1, (np.arange(ncol) + 1) % ny]
                | bad[1:, (np.arange(ncol) + 1) % ny])
    scale = np.maximum(1.0, np.abs(Hn[:, :ncol]).max(axis=-1) / max(hx, 1e-300))
    err = np.linalg.norm(resid.real, axis=-1)
    limit = CLOSURE_TOL * max(hx, hy) * scale
    if np.any((err > limit) & cell_ok):
        worst = float(np.max(np.where(cell_ok, err / limit, 0)))
        raise NonClosedPeriodError(f"cell loop residual exceeds tolerance (ratio {worst:.3g})")
    if periodic:
        per = np.linalg.norm(V.sum(axis=1).real, axis=-1)
        plim = CLOSURE_TOL * TWO_PI * np.maximum(1.0, np.abs(V).max(axis=(1, 2)) / hy)
        if np.any(per > plim):
            raise NonClosedPeriodError(f"real period around the cylinder is {per.max():.3e}")

    X = F.real + np.asarray(base_position, dtype=float)
    lam = np.full((nx, ny), np.nan)
    K = np.full((nx, ny), np.nan)
    N = np.full((nx, ny, 3), np.nan)
    Tx = np.full((nx, ny, 3), np.nan)
    Ty = np.full((nx, ny, 3), np.nan)
    zv = Zg[mask]
    lam[mask], K[mask], N[mask] = curvature_and_metric(wd, zv)
    ph = wd.phi(zv)
    Tx[mask] = ph.real
    Ty[mask] = -ph.imag
    X[bad] = np.nan
    meta = {"window": tuple(map(float, window)), "basepoint": basepoint,
            "max_closure_residual": float(np.max(np.where(cell_ok, err, 0))) if err.size else 0.0}
    if periodic:
        meta["period"] = TWO_PI
    return SurfaceMesh(Zg, X, N, lam, K, periodic, True, wd.name, Tx, Ty,
                       None if mask.all() else mask, meta)


def generator_loop(x0: float, y0: float = 0.0, n: int = 64) -> np.ndarray:
    """Vertical path x0 + i[y0, y0 + 2π]; closed on the cylinder."""
    return x0 + 1j * (y0 + np.linspace(0.0, TWO_PI, n + 1))


def circle_loop(center, radius, n: int = 128) -> np.ndarray:
    t = np.linspace(0.0, TWO_PI, n + 1)
    pts = complex(center) + radius * np.exp(1j * t)
    pts[-1] = pts[0]
    return pts


def period_residual(wd: WeierstrassData, loop, singular_points=None):
    """∮ Φ along a polygonal loop, split into (real part, imaginary part).

    The real part must vanish for the immersion to close up; the imaginary
    part is the flux-type period.
    """
    pts = np.asarray(loop, dtype=complex)
    if singular_points:
        a, b = pts[:-1], pts[1:]
        for p in singular_points:
            d = b - a
            t = np.clip(((p - a) * np.conj(d)).real / np.maximum(np.abs(d) ** 2, 1e-300), 0, 1)
            if np.min(np.abs(a + t * d - p)) < PATH_POLE_TOL:
                raise PoleOnPathError(f"loop passes through singularity {p:.6g}")
    # subdivide long segments so each panel is short relative to the loop
    seg_a, seg_b = [], []
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil(abs(b - a) / 0.05)))
        t = np.linspace(0, 1, m + 1)
        seg_a.extend(a + (b - a) * t[:-1])
        seg_b.extend(a + (b - a) * t[1:])
    total = _segment_integrals(wd, seg_a, seg_b).sum(axis=0)
    return total.real, total.imag
