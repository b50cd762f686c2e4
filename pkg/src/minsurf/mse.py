"""Dirichlet problem for the minimal surface equation on a grid.

The discrete energy is the area of the bilinear interpolant of the nodal
values, integrated with 2 x 2 Gauss points per cell.  Its gradient, scaled
by −1/(hx hy), is a conservative divergence-form residual of
div(∇u/√(1 + |∇u|²)); Newton uses the exact Hessian of the discrete area.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DivergenceError

ARMIJO_C = 1e-4
MIN_STEP = 2.0 ** -20
GD_STEPS = 20
QUADRATIC_C = 100.0

_CORNERS = ((0, 0), (1, 0), (0, 1), (1, 1))


def _gauss_points():
    """(x-slope weights, y-slope weights, quadrature weight) per Gauss point,
    slopes as combinations of the four cell corners."""
    g = ((1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2)
    out = []
    for xi in g:
        for et in g:
            cp = np.array([-(1 - et), 1 - et, -et, et])
            cq = np.array([-(1 - xi), -xi, 1 - xi, xi])
            out.append((cp, cq, 0.25))
    return tuple(out)


_GAUSS = _gauss_points()


@dataclass(frozen=True)
class GridProblem:
    """Rectangle [x0, x1] × [y0, y1] sampled on nx × ny nodes.

    ``boundary`` is either a callable u(x, y) or an (nx, ny) array whose
    edge entries hold the Dirichlet data.
    """
    bounds: tuple
    resolution: tuple
    boundary: object
    tol: float = 1e-10
    max_iter: int = 50

    def __post_init__(self):
        nx, ny = self.shape
        if nx < 5 or ny < 5:
            raise ValueError("need at least 3 x 3 interior points")
        if not (self.bounds[1] > self.bounds[0] and self.bounds[3] > self.bounds[2]):
            raise ValueError("empty rectangle")

    @property
    def shape(self):
        r = self.resolution
        return (int(r), int(r)) if np.ndim(r) == 0 else (int(r[0]), int(r[1]))

    @property
    def spacing(self):
        nx, ny = self.shape
        x0, x1, y0, y1 = self.bounds
        return (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1)

    def grid(self):
        nx, ny = self.shape
        x0, x1, y0, y1 = self.bounds
        return np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), indexing="ij")

    def boundary_values(self) -> np.ndarray:
        """(nx, ny) array with the Dirichlet data on the edges, 0 inside."""
        X, Y = self.grid()
        if callable(self.boundary):
            full = np.asarray(self.boundary(X, Y), dtype=float)
        else:
            full = np.asarray(self.boundary, dtype=float)
            if full.shape != X.shape:
                raise ValueError(f"boundary array has shape {full.shape}, expected {X.shape}")
        out = np.zeros_like(X)
        edge = ~interior_mask(X.shape)
        out[edge] = full[edge]
        if not np.all(np.isfinite(out[edge])):
            raise ValueError("boundary data must be finite")
        return out


@dataclass
class Solution:
    u: np.ndarray
    trace: list = field(default_factory=list)   # residual max-norm per iteration
    steps: list = field(default_factory=list)   # "newton" or "descent" per iteration
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


def interior_mask(shape) -> np.ndarray:
    m = np.zeros(shape, dtype=bool)
    m[1:-1, 1:-1] = True
    return m


def _point_data(u, hx, hy):
    """Per Gauss point: corner index arrays, slope coefficients, weight and
    slopes (p, q) on every cell."""
    nx, ny = u.shape
    idx = np.arange(nx * ny).reshape(nx, ny)
    nodes = [idx[i:nx - 1 + i, j:ny - 1 + j].ravel() for i, j in _CORNERS]
    uf = u.ravel()
    vals = [uf[n] for n in nodes]
    out = []
    for cp, cq, w in _GAUSS:
        p = sum(c * v for c, v in zip(cp, vals)) / hx
        q = sum(c * v for c, v in zip(cq, vals)) / hy
        out.append((nodes, cp / hx, cq / hy, w * hx * hy, p, q))
    return out


def discrete_area(u, hx: float, hy: float) -> float:
    """Area of the bilinear graph, 2 x 2 Gauss quadrature per cell."""
    total = 0.0
    for *_, w, p, q in _point_data(np.asarray(u, float), hx, hy):
        total += w * np.sum(np.sqrt(1 + p * p + q * q))
    return float(total)


def area_gradient(u, hx, hy) -> np.ndarray:
    u = np.asarray(u, float)
    g = np.zeros(u.size)
    for nodes, cp, cq, w, p, q in _point_data(u, hx, hy):
        W = np.sqrt(1 + p * p + q * q)
        for k, n in enumerate(nodes):
            np.add.at(g, n, w * (p * cp[k] + q * cq[k]) / W)
    return g.reshape(u.shape)


def area_hessian(u, hx, hy) -> sp.csr_matrix:
    u = np.asarray(u, float)
    rows, cols, vals = [], [], []
    for nodes, cp, cq, w, p, q in _point_data(u, hx, hy):
        W = np.sqrt(1 + p * p + q * q)
        for m in range(4):
            for n in range(4):
                h = (cp[m] * cp[n] + cq[m] * cq[n]) / W \
                    - (p * cp[m] + q * cq[m]) * (p * cp[n] + q * cq[n]) / W ** 3
                rows.append(nodes[m])
                cols.append(nodes[n])
                vals.append(w * h)
    n = u.size
    return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n)).tocsr()


def mse_residual(u, hx: float = None, hy: float = None, bounds=None) -> np.ndarray:
    """Divergence-form residual of the minimal surface equation at interior
    nodes (0 on the boundary).  Pass either the spacings or the bounds."""
    u = np.asarray(u, float)
    if hx is None:
        if bounds is None:
            raise ValueError("give hx, hy or bounds")
        nx, ny = u.shape
        hx = (bounds[1] - bounds[0]) / (nx - 1)
        hy = (bounds[3] - bounds[2]) / (ny - 1)
    R = -area_gradient(u, hx, hy) / (hx * hy)
    R[~interior_mask(u.shape)] = 0.0
    return R


def harmonic_extension(p: GridProblem) -> np.ndarray:
    """Discrete harmonic function (5-point) with the problem's boundary data."""
    u = p.boundary_values()
    hx, hy = p.spacing
    inner = interior_mask(u.shape)
    L = _laplacian_matrix(u.shape, hx, hy)
    ii = np.flatnonzero(inner)
    bb = np.flatnonzero(~inner)
    A = L[ii][:, ii]
    rhs = -L[ii][:, bb] @ u.ravel()[bb]
    u.ravel()[ii] = spla.spsolve(A.tocsc(), rhs)
    return u


def _laplacian_matrix(shape, hx, hy):
    nx, ny = shape
    ex, ey = np.ones(nx), np.ones(ny)
    Dx = sp.diags([ex[:-1], -2 * ex, ex[:-1]], [-1, 0, 1]) / hx ** 2
    Dy = sp.diags([ey[:-1], -2 * ey, ey[:-1]], [-1, 0, 1]) / hy ** 2
    return (sp.kron(Dx, sp.identity(ny)) + sp.kron(sp.identity(nx), Dy)).tocsr()


def solve_mse(p: GridProblem, initial=None) -> Solution:
    """Damped Newton on the discrete area, with a gradient-descent fallback
    when the Armijo search on the residual norm stalls."""
    hx, hy = p.spacing
    u = harmonic_extension(p) if initial is None else np.array(initial, dtype=float)
    inner = interior_mask(u.shape)
    ii = np.flatnonzero(inner)
    scale = 1.0 / (hx * hy)

    def res_norm(v):
        return float(np.max(np.abs(mse_residual(v, hx, hy))))

    sol = Solution(u)
    r = res_norm(u)
    sol.trace.append(r)
    for _ in range(p.max_iter):
        if r < p.tol:
            sol.converged = True
            break
        g = area_gradient(u, hx, hy).ravel()[ii]
        H = area_hessian(u, hx, hy)[ii][:, ii]
        try:
            delta = spla.spsolve(H.tocsc(), -g)
        except RuntimeError:
            delta = None
        step_ok = False
        if delta is not None and np.all(np.isfinite(delta)):
            alpha = 1.0
            while alpha >= MIN_STEP:
                trial = u.copy()
                trial.ravel()[ii] += alpha * delta
                rt = res_norm(trial)
                if rt <= (1 - ARMIJO_C * alpha) * r:
                    u, r, step_ok = trial, rt, True
                    break
                alpha /= 2
        if step_ok:
            sol.steps.append("newton")
        else:
            u, r = _descend(u, ii, hx, hy, scale)
            sol.steps.append("descent")
        sol.trace.append(r)
    else:
        if r < p.tol:
            sol.converged = True
    sol.u = u
    if not sol.converged:
        raise DivergenceError(f"no convergence after {p.max_iter} iterations (residual {r:.3e})",
                              trace=list(sol.trace))
    return sol


def _descend(u, ii, hx, hy, scale):
    """A few Armijo-backtracked gradient steps on the discrete area."""
    area = discrete_area(u, hx, hy)
    for _ in range(GD_STEPS):
        g = area_gradient(u, hx, hy).ravel()[ii] * scale
        gg = float(g @ g)
        if gg == 0:
            break
        beta = 1.0
        while beta >= MIN_STEP:
            trial = u.copy()
            trial.ravel()[ii] -= beta * g * hx * hy
            at = discrete_area(trial, hx, hy)
            if at <= area - ARMIJO_C * beta * gg * hx * hy * hx * hy:
                u, area = trial, at
                break
            beta /= 2
        else:
            break
    return u, float(np.max(np.abs(mse_residual(u, hx, hy))))


def quadratic_rate(trace, last: int = 4) -> np.ndarray:
    """Ratios r_{k+1}/r_k² over the final ``last`` residuals (three steps by default)."""
    t = np.asarray(trace[-last:], dtype=float)
    return t[1:] / t[:-1] ** 2


# ---------------------------------------------------------- closed forms

def scherk_graph(x, y):
    """x3 = arcsin(sinh x sinh y), the graph piece of sin x3 = sinh x1 sinh x2."""
    return np.arcsin(np.sinh(x) * np.sinh(y))


def catenoid_graph(x, y):
    """Upper half of the unit catenoid as a graph over |p| > 1."""
    return np.arccosh(np.hypot(x, y))


def scherk_problem(resolution=65, level: float = 0.9, **kw) -> GridProblem:
    a = float(np.arcsinh(np.sqrt(level)))
    return GridProblem((-a, a, -a, a), resolution, scherk_graph, **kw)


def catenoid_problem(resolution=65, bounds=(1.5, 3.0, -0.75, 0.75), **kw) -> GridProblem:
    return GridProblem(tuple(bounds), resolution, catenoid_graph, **kw)


def is_quadratic(trace, C: float = QUADRATIC_C) -> bool:
    """True when every one of the last three steps obeys r_{k+1} ≤ C r_k²."""
    if len(trace) < 4:
        return False
    return bool(np.all(quadratic_rate(trace) <= C))
