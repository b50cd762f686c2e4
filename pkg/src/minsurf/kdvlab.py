"""Miura transforms from the Gauss map to KdV potentials, flow evaluation on
sampled potentials, and detection of algebro-geometric (stationary)
potentials."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import diffpoly as dp
from . import symexpr as se
from .diffpoly import DiffPoly
from .errors import OrderError

DETECT_TOL = 1e-6
TRIVIAL_TOL = 1e-12
# x = g'/g evolves by (i/2)(x''' − (3/2)x²x'); the induced u evolves by the
# KdV flow −u''' − 6uu' in the rescaled time t_KdV = −(i/2) t
KDV_TIME_SCALE = -0.5j


# ---------------------------------------------------------------- symbolic

def miura_from_g(g: se.Expr) -> se.Expr:
    """u = −3g'²/(4g²) + g''/(2g)."""
    memo: dict = {}
    g1 = se.differentiate(g, memo)
    g2 = se.differentiate(g1, memo)
    return se.simplify(se.const(-0.75) * g1 * g1 / (g * g) + se.const(0.5) * g2 / g)


def log_derivative(g: se.Expr) -> se.Expr:
    return se.simplify(se.differentiate(g) / g)


def miura_from_x(x: se.Expr) -> se.Expr:
    """u = x'/2 − x²/4 as an expression."""
    return se.simplify(se.const(0.5) * se.differentiate(x) - se.const(0.25) * x * x)


def mkdv_from_g(g: se.Expr) -> se.Expr:
    """(i/2)(x''' − (3/2)x²x') with x = g'/g."""
    memo: dict = {}
    x = se.differentiate(g, memo) / g
    x1 = se.differentiate(x, memo)
    x3 = se.differentiate(se.differentiate(x1, memo), memo)
    return se.const(0.5j) * (x3 - se.const(1.5) * x * x * x1)


def xdot_from_g(g: se.Expr, gdot: se.Expr) -> se.Expr:
    """Variation of x = g'/g induced by ġ: (ġ/g)'."""
    return se.differentiate(gdot / g)


def miura_poly() -> DiffPoly:
    """u = x'/2 − x²/4 as a differential polynomial in x."""
    return DiffPoly({(1,): Fraction(1, 2), (0, 0): Fraction(-1, 4)}, var="x")


def mkdv_poly() -> DiffPoly:
    """x''' − (3/2)x²x', the modified-KdV right-hand side without its i/2."""
    return DiffPoly({(3,): 1, (1, 0, 0): Fraction(-3, 2)}, var="x")


@dataclass(frozen=True)
class ChainRuleReport:
    residual: DiffPoly
    time_scale: complex

    @property
    def passed(self) -> bool:
        return self.residual.is_zero()


def chain_rule_check(xdot: DiffPoly | None = None) -> ChainRuleReport:
    """Verify u̇ = ẋ'/2 − xẋ/2 against the KdV flow after u = x'/2 − x²/4.

    ``xdot`` is the x-evolution without its constant factor i/2 (default
    x''' − (3/2)x²x').  The residual (ẋ' − xẋ)/2 + flow₁(u(x)) must vanish
    identically; the i/2 factor becomes the time rescaling KDV_TIME_SCALE.
    """
    xdot = mkdv_poly() if xdot is None else xdot
    x = DiffPoly.derivative(0, "x")
    udot = (dp.dz(xdot) - x * xdot) * Fraction(1, 2)
    kdv = dp.substitute(dp.flow(1), miura_poly())
    return ChainRuleReport(udot + kdv, KDV_TIME_SCALE)


# ------------------------------------------------------------------ samples

@dataclass(frozen=True)
class PotentialSample:
    """Jets (u, u', ..., u^(K)) of a potential at sample points."""
    z: np.ndarray
    jets: np.ndarray  # (npts, K + 1) complex
    source: str = ""

    @property
    def order(self) -> int:
        return self.jets.shape[1] - 1

    @classmethod
    def from_expr(cls, u: se.Expr, z, order: int) -> "PotentialSample":
        z = np.asarray(z, dtype=complex).ravel()
        memo: dict = {}
        ders = [u]
        for _ in range(order):
            ders.append(se.differentiate(ders[-1], memo))
        jets = np.stack([np.broadcast_to(se.evaluate(d, z), z.shape) for d in ders], axis=1)
        return cls(z, jets.astype(complex), se.to_prefix(u))

    @classmethod
    def from_gauss_map(cls, g: se.Expr, z, order: int) -> "PotentialSample":
        return cls.from_expr(miura_from_g(g), z, order)


def sample_points(n: int = 40, seed: int = 7, center=0.5 + 0.5j, radius: float = 0.4) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.random(n))
    return complex(center) + r * np.exp(2j * np.pi * rng.random(n))


def required_order(N: int) -> int:
    """Highest derivative needed by flows 0..N (flow n has order 2n + 1)."""
    return 2 * N + 1


@dataclass
class Detection:
    detected: bool
    stationary_order: int | None = None
    coefficients: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)


def algebro_geometric_test(u: PotentialSample, N: int = 3, tol: float = DETECT_TOL) -> Detection:
    """Smallest n ≤ N with flow(n) a linear combination of flows 0..n−1 on
    the sample grid (relative least-squares residual below ``tol``).

    A flow that cancels to roundoff against its own term sizes is a trivial
    combination; this covers constants, where every flow vanishes.
    """
    if u.order < required_order(N):
        raise OrderError(f"flows up to {N} need jets of order {required_order(N)}, sample has {u.order}")
    cols = [dp.evaluate(dp.flow(0), u.jets)]
    out = Detection(False)
    for n in range(1, N + 1):
        f = dp.evaluate(dp.flow(n), u.jets)
        fn = float(np.linalg.norm(f))
        # flows of size roundoff relative to their own terms, or to the size
        # |u|^((2n+3)/2) set by the potential's length scale, count as zero
        terms = float(np.linalg.norm(dp.evaluate(dp.flow(n), u.jets, absolute=True)))
        natural = float(np.linalg.norm(np.abs(u.jets[:, 0]) ** ((2 * n + 3) / 2)))
        if fn <= TRIVIAL_TOL * max(terms, natural):
            out.residuals[n] = 0.0
            out.detected, out.stationary_order = True, n
            out.coefficients = [0j] * n
            return out
        A = np.stack(cols, axis=1)
        c, *_ = np.linalg.lstsq(A, f, rcond=None)
        res = float(np.linalg.norm(f - A @ c) / fn)
        out.residuals[n] = res
        if res < tol:
            out.detected, out.stationary_order = True, n
            out.coefficients = [complex(v) for v in c]
            return out
        cols.append(f)
    return out


def random_rational_g(seed: int, degree: int = 2) -> se.Expr:
    """Seeded rational Gauss map P(z)/Q(z) with small complex coefficients,
    used as generic test input."""
    rng = np.random.default_rng(seed)

    def poly():
        c = np.round(rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1), 2)
        c[-1] = c[-1] if abs(c[-1]) > 0.2 else 1.0
        out = se.const(complex(c[0]))
        for k in range(1, degree + 1):
            out = out + se.const(complex(c[k])) * se.Z ** k
        return out

    return se.simplify(poly() / poly())


def safe_points(exprs, n: int = 100, seed: int = 0, radius: float = 1.5, margin: float = 0.05) -> np.ndarray:
    """Seeded points in a disk where every expression (and its reciprocal)
    stays moderate, so identities can be compared pointwise."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z = radius * (2 * rng.random(4 * n) - 1) + 1j * radius * (2 * rng.random(4 * n) - 1)
        ok = np.ones(z.shape, dtype=bool)
        for e in exprs:
            v = np.asarray(se.evaluate(e, z)) * np.ones(z.shape)
            ok &= np.isfinite(v) & (np.abs(v) > margin) & (np.abs(v) < 1 / margin)
        out.extend(z[ok].tolist())
    return np.array(out[:n])
