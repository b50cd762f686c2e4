"""Classical example surfaces.

Weierstrass examples (plane, catenoid, helicoid, Enneper) come back as
:class:`WeierstrassData`; the Scherk graphs and the Riemann examples are
built directly as meshes.

Normalisations: the catenoid has axis x3, neck the unit circle and flux
(0, 0, 2π); the helicoid has axis x3 and |K| = 1 on the axis; the Riemann
example R_t has flux (t, 0, 2π).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from . import symexpr as se
from .errors import NonConvergenceError, UnknownExampleError
from .mesh import SurfaceMesh
from .weierstrass import TWO_PI, WeierstrassData, immerse

NAMES = ("plane", "catenoid", "helicoid", "enneper", "scherk_singly", "scherk_doubly_graph", "riemann")

SCHERK_LEVEL = 0.9


def plane() -> WeierstrassData:
    # constant Gauss map 1: the vertical plane x1 = 0, X = (0, -y, x)
    return WeierstrassData(se.const(1), se.const(1), "plane", name="plane")


def catenoid() -> WeierstrassData:
    return WeierstrassData(se.exp(se.Z), se.const(1), "cylinder",
                           homology_loops=("generator",), name="catenoid")


def helicoid(form: str = "conjugate") -> WeierstrassData:
    """``conjugate``: g = e^z, dh = i dz (conjugate of the catenoid data).
    ``height``: g = e^{-iz}, dh = dz, so x3 = Re z and the grid lines
    Re z = const are the horizontal sections."""
    if form == "conjugate":
        return WeierstrassData(se.exp(se.Z), se.const(1j), "plane", name="helicoid")
    if form == "height":
        return WeierstrassData(se.exp(se.const(-1j) * se.Z), se.const(1), "plane", name="helicoid")
    raise ValueError(f"unknown helicoid form {form!r}")


def enneper() -> WeierstrassData:
    return WeierstrassData(se.Z, se.Z, "plane", name="enneper", eta=se.const(1))


def conjugate_pair():
    """(catenoid, helicoid) as Weierstrass data differing by dh -> i dh."""
    c = catenoid()
    return c, c.conjugate()


_BASE_POSITION = {"catenoid": (-1.0, 0.0, 0.0)}


def default_window(name: str, **params):
    if name == "catenoid":
        return (-2.0, 2.0, 0.0, TWO_PI)
    if name == "helicoid":
        return (-1.5, 1.5, -math.pi, math.pi)
    if name == "enneper":
        return (-1.5, 1.5, -1.5, 1.5)
    if name == "plane":
        return (-1.0, 1.0, -1.0, 1.0)
    raise UnknownExampleError(name)


# -------------------------------------------------------------- graph meshes

def _graph_mesh(name, xs, ys, u, ux, uy, uxx, uxy, uyy) -> SurfaceMesh:
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    W2 = 1 + ux ** 2 + uy ** 2
    N = np.stack([-ux, -uy, np.ones_like(u)], axis=-1) / np.sqrt(W2)[..., None]
    K = (uxx * uyy - uxy ** 2) / W2 ** 2
    P = np.stack([X, Y, u], axis=-1)
    Tx = np.stack([np.ones_like(u), np.zeros_like(u), ux], axis=-1)
    Ty = np.stack([np.zeros_like(u), np.ones_like(u), uy], axis=-1)
    # not conformal: Λ holds the square root of the area density
    return SurfaceMesh(X + 1j * Y, P, N, W2 ** 0.25, K, False, False, name, Tx, Ty)


def scherk_singly_mesh(resolution=129, level: float = SCHERK_LEVEL, theta: float = math.pi / 2) -> SurfaceMesh:
    """Graph piece x3 = arcsin(sinh x1 sinh x2) of the θ = π/2 singly
    periodic Scherk surface, over the square where |sinh x1 sinh x2| ≤ level."""
    if abs(theta - math.pi / 2) > 1e-12:
        raise ValueError("only the θ = π/2 Scherk surface is available in closed form")
    n = int(resolution)
    a = math.asinh(math.sqrt(level))
    xs = np.linspace(-a, a, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    s = np.sinh(X) * np.sinh(Y)
    sx, sy, sxy = np.cosh(X) * np.sinh(Y), np.sinh(X) * np.cosh(Y), np.cosh(X) * np.cosh(Y)
    q = 1 - s * s
    r = np.sqrt(q)
    u = np.arcsin(s)
    ux, uy = sx / r, sy / r
    uxx = s / r + s * sx * sx / q ** 1.5
    uyy = s / r + s * sy * sy / q ** 1.5
    uxy = sxy / r + s * sx * sy / q ** 1.5
    return _graph_mesh("scherk_singly", xs, xs, u, ux, uy, uxx, uxy, uyy)


def scherk_doubly_mesh(resolution=129, extent: float = 1.2) -> SurfaceMesh:
    """Doubly periodic Scherk graph x3 = log(cos x2 / cos x1) over
    |x1|, |x2| ≤ extent < π/2."""
    n = int(resolution)
    xs = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    u = np.log(np.cos(Y) / np.cos(X))
    ux, uy = np.tan(X), -np.tan(Y)
    uxx, uyy = 1 / np.cos(X) ** 2, -1 / np.cos(Y) ** 2
    return _graph_mesh("scherk_doubly_graph", xs, xs, u, ux, uy, uxx, np.zeros_like(u), uyy)


# ------------------------------------------------------------- Riemann R_t

@dataclass(frozen=True)
class RiemannProfile:
    """Neck data and profile ODE of a circle-foliated minimal surface.

    Horizontal sections are circles of radius r(h) centred at (c(h), 0, h)
    with c' = λ r² and r r'' = 1 + r'² + λ² r⁴; the neck is at h = 0.
    """
    t: float
    neck_radius: float
    lam: float
    end_height: float   # first height where r blows up (planar end)
    solution: object    # dense ODE solution for (r, r', c) on h >= 0

    def at(self, h):
        h = np.asarray(h, dtype=float)
        s = self.solution.sol(np.abs(h))
        sg = np.sign(h)
        return s[0], s[1] * sg, s[2] * sg


def _neck_integrals(a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        i0 = quad(lambda th: 1 / math.sqrt(1 + (a * math.cos(th)) ** 2), 0, TWO_PI,
                  epsabs=1e-14, epsrel=1e-14, limit=400)[0]
        i1 = quad(lambda th: math.cos(th) ** 2 / math.sqrt(1 + (a * math.cos(th)) ** 2), 0, TWO_PI,
                  epsabs=1e-14, epsrel=1e-14, limit=400)[0]
    return i0, i1


def neck_flux(r0: float, lam: float):
    """Flux (F1, F3) of the neck circle of radius r0 with c' = λ r0²."""
    a = lam * r0 * r0
    i0, i1 = _neck_integrals(a)
    return r0 * a * i1, r0 * i0


def riemann_profile(t: float, h_max: float = 50.0) -> RiemannProfile:
    """Shoot on the neck data (r0, λ) so that the flux is (t, 0, 2π), then
    integrate the profile ODE up to the planar end."""
    if not t > 0:
        raise ValueError("flux parameter t must be positive")

    def ratio(a):
        i0, i1 = _neck_integrals(a)
        return a * i1 / i0 - t / TWO_PI

    hi = 1.0
    while ratio(hi) < 0:
        hi *= 2
        if hi > 1e8:
            raise NonConvergenceError("could not bracket the neck parameter", residual=ratio(hi))
    try:
        a = brentq(ratio, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise NonConvergenceError(f"neck shooting failed: {exc}") from exc
    r0 = TWO_PI / _neck_integrals(a)[0]
    lam = a / r0 ** 2
    f1, f3 = neck_flux(r0, lam)
    if abs(f1 - t) > 1e-10 * max(1, t) or abs(f3 - TWO_PI) > 1e-10:
        raise NonConvergenceError("neck flux mismatch after shooting", residual=(f1 - t, f3 - TWO_PI))

    def rhs(h, s):
        r, rp, c = s
        return [rp, (1 + rp * rp + lam * lam * r ** 4) / r, lam * r * r]

    def blowup(h, s):
        return s[0] - 1e6
    blowup.terminal = True

    sol = solve_ivp(rhs, [0.0, h_max], [r0, 0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14,
                    events=blowup, dense_output=True)
    if sol.status < 0 or not sol.t_events[0].size:
        raise NonConvergenceError(f"profile ODE did not reach the planar end: {sol.message}")
    return RiemannProfile(t, r0, lam, float(sol.t_events[0][0]), sol)


def riemann_example(t: float, resolution=(256, 256), r_max: float = 4.0) -> SurfaceMesh:
    """Riemann minimal example R_t on conformal cylinder coordinates.

    x3 = Re z and y = Im z ∈ [0, 2π) is the conjugate harmonic coordinate,
    so horizontal sections are the grid rows.  The mesh covers the piece
    between two consecutive planar ends, cut where the section radius
    reaches ``r_max``.
    """
    prof = riemann_profile(t)
    nx, ny = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    lam = prof.lam
    sol = prof.solution
    try:
        H = brentq(lambda h: sol.sol(h)[0] - r_max, 0.0, prof.end_height, xtol=1e-14)
    except ValueError:
        H = prof.end_height * (1 - 1e-3)
    hs = np.linspace(-H, H, int(nx))
    r, rp, c = prof.at(hs)
    cp = lam * r * r
    ys = TWO_PI * np.arange(int(ny)) / int(ny)

    # θ(y) along each section: dy = r dθ / sqrt(1 + w²), w = c' cos θ + r'
    def dtheta(y, th):
        w = cp * np.cos(th) + rp
        return np.sqrt(1 + w * w) / r

    so = solve_ivp(dtheta, [0.0, TWO_PI], np.zeros(hs.size), method="DOP853", rtol=1e-13, atol=1e-14,
                   t_eval=np.append(ys, TWO_PI))
    if so.status < 0:
        raise NonConvergenceError(f"section reparametrisation failed: {so.message}")
    closure = float(np.max(np.abs(so.y[:, -1] - TWO_PI)))
    if closure > 1e-8:
        raise NonConvergenceError("conformal period of a section differs from 2π", residual=closure)
    th = so.y[:, :-1]
    cos, sin = np.cos(th), np.sin(th)
    R, RP, CP, C = r[:, None], rp[:, None], cp[:, None], c[:, None]
    w = CP * cos + RP
    lamf = np.sqrt(1 + w * w)
    X = np.stack([C + R * cos, R * sin, np.broadcast_to(hs[:, None], th.shape)], axis=-1)
    N = np.stack([-cos, -sin, w], axis=-1) / lamf[..., None]
    cpp = 2 * lam * R * RP
    rpp = (1 + RP ** 2 + lam ** 2 * R ** 4) / R
    K = -(cpp * cos + rpp) / (R * (1 + w * w) ** 2)
    Tx = np.stack([w * cos, w * sin, np.ones_like(w)], axis=-1)
    Ty = np.stack([-sin, cos, np.zeros_like(w)], axis=-1) * lamf[..., None]
    Zg = hs[:, None] + 1j * ys[None, :]
    meta = {"period": TWO_PI, "t": t, "neck_radius": prof.neck_radius, "lambda": lam,
            "end_height": prof.end_height, "cut_height": float(H), "section_closure": closure}
    return SurfaceMesh(Zg, X, N, lamf, K, True, True, "riemann", Tx, Ty, None, meta)


# ------------------------------------------------------------------ lookup

def example(name: str, **params):
    """Catalog lookup: WeierstrassData for the Weierstrass examples, a
    SurfaceMesh for the Scherk graphs and the Riemann examples."""
    if name == "plane":
        return plane()
    if name == "catenoid":
        return catenoid()
    if name == "helicoid":
        return helicoid(params.get("form", "conjugate"))
    if name == "enneper":
        return enneper()
    if name == "scherk_singly":
        return scherk_singly_mesh(params.get("resolution", 129), params.get("level", SCHERK_LEVEL),
                                  params.get("theta", math.pi / 2))
    if name == "scherk_doubly_graph":
        return scherk_doubly_mesh(params.get("resolution", 129), params.get("extent", 1.2))
    if name == "riemann":
        res = params.get("resolution", (256, 256))
        return riemann_example(float(params.get("t", 1.0)), res, params.get("r_max", 4.0))
    raise UnknownExampleError(f"unknown example {name!r}; choose from {', '.join(NAMES)}")


def mesh(name: str, resolution=128, window=None, **params) -> SurfaceMesh:
    """Any catalog example as a mesh, with the documented normalisation."""
    ex = example(name, resolution=resolution, **params)
    if isinstance(ex, SurfaceMesh):
        return ex
    if window is None:
        window = default_window(name)
    base = _BASE_POSITION.get(name, (0.0, 0.0, 0.0))
    basepoint = 0j if name == "catenoid" else None
    return immerse(ex, window, resolution, basepoint=basepoint, base_position=base)
