"""Differential polynomials in one function u(z) with rational coefficients.

A monomial is a tuple of derivative orders sorted in descending order, so
``(2, 0, 0)`` is u''·u².  The empty tuple is the constant monomial.  Each
u^(k) has weight k + 2; d/dz raises the weight of every monomial by one.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .errors import NotExactError, OrderError

MAX_ORDER = 6


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be rational, got {type(c).__name__}")


def weight(mono) -> int:
    return sum(k + 2 for k in mono)


def _sort_key(mono):
    return (weight(mono), mono)


class DiffPoly:
    """Immutable map monomial -> nonzero Fraction."""

    __slots__ = ("_terms", "var")

    def __init__(self, terms=None, var: str = "u"):
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(sorted(mono, reverse=True))
            c = _coerce(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self._terms = clean
        self.var = var

    @classmethod
    def constant(cls, c, var="u"):
        return cls({(): c}, var)

    @classmethod
    def derivative(cls, k: int = 0, var="u"):
        """The generator u^(k)."""
        return cls({(k,): 1}, var)

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def max_order(self) -> int:
        return max((max(m) for m in self._terms if m), default=-1)

    def weights(self) -> set:
        return {weight(m) for m in self._terms}

    def coeff(self, mono) -> Fraction:
        return self._terms.get(tuple(sorted(mono, reverse=True)), Fraction(0))

    def _lift(self, other):
        if isinstance(other, DiffPoly):
            return other
        return DiffPoly.constant(_coerce(other), self.var)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.constant(other, self.var)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return DiffPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self._terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            c = _coerce(other)
            return DiffPoly({m: c * v for m, v in self._terms.items()}, self.var)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(sorted(m1 + m2, reverse=True))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return DiffPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = DiffPoly.constant(1, self.var)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"DiffPoly({self})"

    def __str__(self):
        return to_text(self)


def _factor_text(var, k, n):
    s = var + "'" * k
    return s if n == 1 else f"{s}^{n}"


def to_text(p: DiffPoly) -> str:
    """Plain-text form such as ``u'' + 3*u^2``; deterministic ordering."""
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.items():
        counts = sorted(Counter(mono).items())
        body = "*".join(_factor_text(p.var, k, n) for k, n in counts)
        mag = abs(c)
        if not body:
            txt = str(mag)
        elif mag == 1:
            txt = body
        else:
            txt = f"{mag}*{body}"
        sign = "-" if c < 0 else "+"
        if not parts:
            parts.append(txt if sign == "+" else "-" + txt)
        else:
            parts.append(f" {sign} {txt}")
    return "".join(parts)


def dz(p: DiffPoly) -> DiffPoly:
    """Total z-derivative by the Leibniz rule, u^(k) -> u^(k+1)."""
    out: dict = {}
    for mono, c in p._terms.items():
        counts = Counter(mono)
        for k, n in counts.items():
            rest = list(mono)
            rest.remove(k)
            new = tuple(sorted(rest + [k + 1], reverse=True))
            out[new] = out.get(new, Fraction(0)) + c * n
    return DiffPoly(out, p.var)


@lru_cache(maxsize=None)
def monomials_of_weight(w: int) -> tuple:
    """All non-constant monomials of total weight ``w``."""
    out = []
    for nfac in range(1, w // 2 + 1):
        for parts in combinations_with_replacement(range(w - 2 * nfac, -1, -1), nfac):
            if sum(k + 2 for k in parts) == w:
                out.append(tuple(sorted(parts, reverse=True)))
    return tuple(sorted(set(out), reverse=True))


def _solve_exact(cols, rhs):
    """Solve sum_j x_j cols[j] = rhs over Fractions; None if inconsistent.

    ``cols`` and ``rhs`` are dicts monomial -> Fraction.
    """
    rows = sorted({m for c in cols for m in c} | set(rhs), reverse=True)
    n = len(cols)
    mat = [[cols[j].get(r, Fraction(0)) for j in range(n)] + [rhs.get(r, Fraction(0))]
           for r in rows]
    piv_cols = []
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][j] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][j]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][j] != 0:
                f = mat[i][j]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(j)
        r += 1
    if any(row[-1] != 0 for row in mat[r:]):
        return None
    x = [Fraction(0)] * n
    for i, j in enumerate(piv_cols):
        x[j] = mat[i][-1]
    return x


def integrate_dz(p: DiffPoly) -> DiffPoly:
    """Return q with dz(q) = p and no constant term.

    Each weight component of p is matched against dz of every monomial one
    weight lower; an inconsistent linear system means p is not a total
    derivative and raises NotExactError.
    """
    by_weight: dict = {}
    for mono, c in p._terms.items():
        by_weight.setdefault(weight(mono), {})[mono] = c
    out: dict = {}
    for w, part in sorted(by_weight.items()):
        basis = monomials_of_weight(w - 1) if w >= 1 else ()
        cols = [dz(DiffPoly({m: 1}, p.var))._terms for m in basis]
        sol = _solve_exact(cols, part) if basis else None
        if sol is None:
            raise NotExactError(f"weight-{w} part of {to_text(p)} is not a total derivative")
        for m, c in zip(basis, sol):
            if c:
                out[m] = out.get(m, Fraction(0)) + c
    return DiffPoly(out, p.var)


def lenard(p: DiffPoly) -> DiffPoly:
    """(d³/dz³ + 4u d/dz + 2u') applied to p."""
    u = DiffPoly.derivative(0, p.var)
    u1 = DiffPoly.derivative(1, p.var)
    return dz(dz(dz(p))) + 4 * u * dz(p) + 2 * u1 * p


@lru_cache(maxsize=None)
def _hierarchy(n: int) -> DiffPoly:
    if n == 0:
        return DiffPoly.constant(Fraction(1, 2))
    return integrate_dz(lenard(_hierarchy(n - 1)))


def hierarchy(n: int, max_order: int = MAX_ORDER) -> DiffPoly:
    """The n-th KdV polynomial: P0 = 1/2 and dz P_{n+1} = lenard(P_n),
    with every integration constant set to zero."""
    if n < 0 or n > max_order:
        raise ValueError(f"hierarchy order must be in [0, {max_order}], got {n}")
    return _hierarchy(n)


def flow(n: int, max_order: int = MAX_ORDER) -> DiffPoly:
    """Right-hand side of the n-th KdV flow, -dz P_{n+1}."""
    if n < 0 or n > max_order:
        raise ValueError(f"flow order must be in [0, {max_order}], got {n}")
    return -dz(_hierarchy(n + 1))


def evaluate(p: DiffPoly, samples, absolute: bool = False) -> np.ndarray:
    """Evaluate p pointwise; ``samples[i] = (u, u', ..., u^(K))``.

    With ``absolute`` every term enters with its modulus, which gives the
    scale against which cancellation in p is judged.
    """
    s = np.atleast_2d(np.asarray(samples, dtype=complex))
    need = p.max_order()
    if need >= s.shape[1]:
        raise OrderError(f"polynomial needs derivative order {need}, samples carry {s.shape[1] - 1}")
    out = np.zeros(s.shape[0], dtype=complex)
    for mono, c in p._terms.items():
        term = np.full(s.shape[0], complex(c.numerator) / c.denominator)
        for k in mono:
            term = term * s[:, k]
        out += np.abs(term) if absolute else term
    return out.real if absolute else out


def substitute(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    """Replace u by the differential polynomial q (in another function),
    so u^(k) becomes dz^k q."""
    jets = [q]
    out = DiffPoly({}, q.var)
    for mono, c in p._terms.items():
        term = DiffPoly.constant(c, q.var)
        for k in mono:
            while len(jets) <= k:
                jets.append(dz(jets[-1]))
            term = term * jets[k]
        out = out + term
    return out
