"""Holomorphic expressions in one complex variable ``z``.

Expressions are immutable trees built from complex constants, the variable,
n-ary sums and products, quotients, integer powers and the exponential.
There is deliberately no node for modulus or conjugation: anything
non-holomorphic is applied to *evaluated* values by the caller.

Text form is a parenthesised prefix syntax, e.g. ``(div (exp z) (add 1 z))``.
"""
from __future__ import annotations

import cmath
import math
from typing import NamedTuple

import numpy as np

from .errors import BoundaryHitError, ParseError, PoleError

POLE_TOL = 1e-300

_KINDS = ("const", "var", "add", "mul", "div", "pow", "exp")


class Expr:
    __slots__ = ("kind", "args", "value", "_hash")

    def __init__(self, kind, args=(), value=None):
        if kind not in _KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash((kind, self.args, value)))

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (self._hash == other._hash and self.kind == other.kind
                and self.value == other.value and self.args == other.args)

    def __repr__(self):
        return to_prefix(self)

    # arithmetic sugar; no simplification happens here
    def __add__(self, other):
        return Expr("add", (self, as_expr(other)))

    def __radd__(self, other):
        return Expr("add", (as_expr(other), self))

    def __sub__(self, other):
        return Expr("add", (self, Expr("mul", (const(-1), as_expr(other)))))

    def __rsub__(self, other):
        return Expr("add", (as_expr(other), Expr("mul", (const(-1), self))))

    def __mul__(self, other):
        return Expr("mul", (self, as_expr(other)))

    def __rmul__(self, other):
        return Expr("mul", (as_expr(other), self))

    def __truediv__(self, other):
        return Expr("div", (self, as_expr(other)))

    def __rtruediv__(self, other):
        return Expr("div", (as_expr(other), self))

    def __neg__(self):
        return Expr("mul", (const(-1), self))

    def __pow__(self, n):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        return Expr("pow", (self,), int(n))

    def __call__(self, z):
        return evaluate(self, z)


def const(c) -> Expr:
    return Expr("const", (), complex(c))


Z = Expr("var")
ZERO = const(0)
ONE = const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.number)):
        return const(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def exp(e) -> Expr:
    return Expr("exp", (as_expr(e),))


def add(*terms) -> Expr:
    return Expr("add", tuple(as_expr(t) for t in terms))


def mul(*factors) -> Expr:
    return Expr("mul", tuple(as_expr(f) for f in factors))


def div(num, den) -> Expr:
    return Expr("div", (as_expr(num), as_expr(den)))


def power(base, n: int) -> Expr:
    return Expr("pow", (as_expr(base),), int(n))


# ---------------------------------------------------------------- evaluation

def evaluate(e: Expr, z):
    """Evaluate ``e`` at a complex scalar or an array of points.

    Raises PoleError if any quotient denominator (or a zero base raised to a
    negative power) has magnitude below ``POLE_TOL``.
    """
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=complex)
    memo: dict[int, object] = {}
    with np.errstate(all="ignore"):
        out = _eval(e, zz, memo)
    out = np.broadcast_to(out, zz.shape)
    if scalar:
        return complex(out)
    return np.array(out, dtype=complex)


def _eval(e, z, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    k = e.kind
    if k == "const":
        v = e.value
    elif k == "var":
        v = z
    elif k == "add":
        v = _eval(e.args[0], z, memo)
        for a in e.args[1:]:
            v = v + _eval(a, z, memo)
    elif k == "mul":
        v = _eval(e.args[0], z, memo)
        for a in e.args[1:]:
            v = v * _eval(a, z, memo)
    elif k == "div":
        num = _eval(e.args[0], z, memo)
        den = _eval(e.args[1], z, memo)
        if np.any(np.abs(den) <= POLE_TOL):
            raise PoleError(f"denominator vanishes in {to_prefix(e.args[1])}")
        v = num / den
    elif k == "pow":
        b = _eval(e.args[0], z, memo)
        n = e.value
        if n < 0:
            if np.any(np.abs(b) <= POLE_TOL):
                raise PoleError(f"zero base raised to {n}")
            v = 1.0 / b ** (-n)
        else:
            v = b ** n if n else np.ones_like(b)
    else:  # exp
        v = np.exp(_eval(e.args[0], z, memo))
    # keep e alive so id() stays unique during this traversal
    memo[key] = (e, v)
    return v


# ----------------------------------------------------------- differentiation

def _is_const(e, c=None):
    return e.kind == "const" and (c is None or e.value == c)


def _sadd(terms):
    out, acc = [], 0j
    for t in terms:
        if t.kind == "const":
            acc += t.value
        elif t.kind == "add":
            out.extend(t.args)
        else:
            out.append(t)
    if acc != 0 or not out:
        out.append(const(acc))
    return out[0] if len(out) == 1 else Expr("add", out)


def _smul(factors):
    out, acc = [], 1 + 0j
    for f in factors:
        if f.kind == "const":
            acc *= f.value
        elif f.kind == "mul":
            for g in f.args:
                if g.kind == "const":
                    acc *= g.value
                else:
                    out.append(g)
        else:
            out.append(f)
    if acc == 0:
        return ZERO
    if acc != 1 or not out:
        out.insert(0, const(acc))
    return out[0] if len(out) == 1 else Expr("mul", out)


def _spow(b, n):
    if n == 0:
        return ONE
    if n == 1:
        return b
    if b.kind == "const":
        return const(b.value ** n)
    if b.kind == "pow":
        return _spow(b.args[0], b.value * n)
    return Expr("pow", (b,), n)


def _sdiv(a, b):
    if _is_const(b, 1):
        return a
    if _is_const(a, 0):
        return ZERO
    if b.kind == "const" and b.value != 0:
        return _smul([const(1 / b.value), a])
    return Expr("div", (a, b))


def differentiate(e: Expr, memo: dict | None = None) -> Expr:
    """Exact symbolic derivative d/dz.

    Passing the same ``memo`` across repeated calls shares derivative
    subtrees, which keeps high-order jets a DAG instead of a tree.
    """
    if memo is None:
        memo = {}
    return _diff(e, memo)


def _diff(e, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    k = e.kind
    if k == "const":
        d = ZERO
    elif k == "var":
        d = ONE
    elif k == "add":
        d = _sadd([_diff(a, memo) for a in e.args])
    elif k == "mul":
        terms = []
        for i, a in enumerate(e.args):
            da = _diff(a, memo)
            if _is_const(da, 0):
                continue
            terms.append(_smul([da] + [b for j, b in enumerate(e.args) if j != i]))
        d = _sadd(terms) if terms else ZERO
    elif k == "div":
        a, b = e.args
        da, db = _diff(a, memo), _diff(b, memo)
        if _is_const(db, 0):
            d = _sdiv(da, b)
        else:
            # (a' − (a/b) b')/b keeps one factor of b per order instead of
            # squaring it, so high jets do not overflow near small b
            top = _sadd([da, _smul([const(-1), e, db])])
            d = _sdiv(top, b)
    elif k == "pow":
        b, n = e.args[0], e.value
        db = _diff(b, memo)
        d = ZERO if n == 0 else _smul([const(n), _spow(b, n - 1), db])
    else:
        da = _diff(e.args[0], memo)
        d = _smul([e, da])
    memo[key] = (e, d)
    return d


def simplify(e: Expr) -> Expr:
    """Value-preserving local rewrites: constant folding, 0/1 identities,
    flattening and merging of repeated powers.  No factorisation."""
    k = e.kind
    if k in ("const", "var"):
        return e
    args = [simplify(a) for a in e.args]
    if k == "add":
        return _sadd(args)
    if k == "mul":
        m = _smul(args)
        if m.kind != "mul":
            return m
        # merge equal bases into integer powers
        counts: dict[Expr, int] = {}
        order = []
        coeff = []
        for f in m.args:
            if f.kind == "const":
                coeff.append(f)
                continue
            base, n = (f.args[0], f.value) if f.kind == "pow" else (f, 1)
            if base not in counts:
                order.append(base)
                counts[base] = 0
            counts[base] += n
        merged = coeff + [_spow(b, counts[b]) for b in order if counts[b] != 0]
        return _smul(merged) if merged else ONE
    if k == "div":
        a, b = args
        if a.kind == "const" and b.kind == "const" and b.value != 0:
            return const(a.value / b.value)
        return _sdiv(a, b)
    if k == "pow":
        return _spow(args[0], e.value)
    a = args[0]
    if a.kind == "const":
        return const(cmath.exp(a.value))
    return Expr("exp", (a,))


def size(e: Expr) -> int:
    """Number of distinct nodes (DAG size)."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.extend(n.args)
    return len(seen)


# -------------------------------------------------------------- text format

def _fmt_num(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        r = c.real
        if r == int(r) and abs(r) < 1e15:
            return str(int(r))
        return repr(r)
    s = repr(c)
    return s[1:-1] if s.startswith("(") else s


def to_prefix(e: Expr) -> str:
    k = e.kind
    if k == "const":
        return _fmt_num(e.value)
    if k == "var":
        return "z"
    if k == "pow":
        return f"(pow {to_prefix(e.args[0])} {e.value})"
    return "(" + k + " " + " ".join(to_prefix(a) for a in e.args) + ")"


def _tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


_NAMED = {"z": Z, "i": const(1j), "pi": const(math.pi), "e": const(math.e)}


def parse(text: str) -> Expr:
    """Parse the prefix form produced by :func:`to_prefix`.

    Operators: add, sub, mul, div, neg, pow, exp.  Atoms: ``z``, ``i``,
    ``pi``, ``e`` and Python complex literals such as ``2.5`` or ``1-2j``.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    pos = 0

    def atom(tok):
        if tok in _NAMED:
            return _NAMED[tok]
        try:
            return const(complex(tok))
        except ValueError:
            raise ParseError(f"bad atom {tok!r}") from None

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ParseError("unexpected ')'")
        if tok != "(":
            return atom(tok)
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        op = tokens[pos]
        pos += 1
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            if op == "pow" and len(args) == 1:
                try:
                    args.append(int(tokens[pos]))
                except ValueError:
                    raise ParseError("pow exponent must be an integer") from None
                pos += 1
                continue
            args.append(node())
        if pos >= len(tokens):
            raise ParseError("missing ')'")
        pos += 1
        return _build(op, args)

    out = node()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens: {' '.join(tokens[pos:])}")
    return out


def _build(op, args):
    arity = {"div": 2, "pow": 2, "exp": 1, "neg": 1, "sub": 2}
    if op in arity and len(args) != arity[op]:
        raise ParseError(f"{op} takes {arity[op]} arguments, got {len(args)}")
    if op in ("add", "mul"):
        if not args:
            raise ParseError(f"{op} needs at least one argument")
        return Expr(op, args) if len(args) > 1 else args[0]
    if op == "div":
        return Expr("div", args)
    if op == "pow":
        return Expr("pow", (args[0],), args[1])
    if op == "exp":
        return Expr("exp", args)
    if op == "neg":
        return -args[0]
    if op == "sub":
        return args[0] - args[1]
    raise ParseError(f"unknown operator {op!r}")


# ------------------------------------------------- zeros and poles in a box

class Singularity(NamedTuple):
    location: complex
    order: int
    kind: str  # "zero" | "pole"


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _edge_moments(f, df, a, b, center, panels):
    t = np.linspace(0.0, 1.0, panels + 1)
    lo, hi = t[:-1, None], t[1:, None]
    s = (lo + hi) / 2 + (hi - lo) / 2 * _GL_X[None, :]
    w = ((hi - lo) / 2 * _GL_W[None, :]).ravel()
    zz = (a + (b - a) * s).ravel()
    ratio = evaluate(df, zz) / evaluate(f, zz)
    if not np.all(np.isfinite(ratio)):
        raise PoleError("integrand not finite on contour")
    rel = zz - center
    weights = w * (b - a) * ratio
    return np.array([np.sum(weights * rel ** k) for k in range(4)])


def _moments(f, df, box, center):
    """(1/2πi)∮ (z-c)^k f'/f dz, k=0..3, over the box boundary."""
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    panels = 4
    prev = None
    while panels <= 1024:
        tot = sum(_edge_moments(f, df, corners[i], corners[(i + 1) % 4], center, panels)
                  for i in range(4)) / (2j * math.pi)
        if prev is not None and np.all(np.abs(tot - prev) <= 1e-11 * (1 + np.abs(tot))):
            return tot
        prev = tot
        panels *= 2
    return prev


def winding_count(e: Expr, window) -> float:
    """(1/2πi)∮ e'/e over the window boundary: zeros minus poles."""
    x0, x1, y0, y1 = window
    m = _moments(e, differentiate(e), window, complex((x0 + x1) / 2, (y0 + y1) / 2))
    return m[0].real


_SPLITS = (0.5, 0.471, 0.529, 0.437, 0.563, 0.409, 0.591, 0.38, 0.62)


def find_zeros_poles(e: Expr, window, max_depth: int = 40) -> list[Singularity]:
    """Locate zeros and poles of ``e`` inside ``window = (x0, x1, y0, y1)``.

    The box is recursively quartered; each cell's log-derivative moments
    give its net count and, once the cell holds a single point, that point's
    location.  A cell with zero net count but nonzero first or second moment
    hides a zero/pole pair and is split further.
    """
    df = differentiate(e)
    x0, x1, y0, y1 = map(float, window)

    def moments(box):
        c = complex((box[0] + box[1]) / 2, (box[2] + box[3]) / 2)
        try:
            m = _moments(e, df, box, c)
        except PoleError:
            return c, None
        return c, m

    def integral(m):
        return m is not None and abs(m[0] - round(m[0].real)) < 1e-3

    c, m = moments((x0, x1, y0, y1))
    if not integral(m):
        raise BoundaryHitError("window boundary passes too close to a zero or pole")

    found: list[Singularity] = []
    stack = [((x0, x1, y0, y1), c, m, 0)]
    while stack:
        box, c, m, depth = stack.pop()
        n = int(round(m[0].real))
        w = max(box[1] - box[0], box[3] - box[2])
        if n == 0 and abs(m[1]) < 1e-8 * w and abs(m[2]) < 1e-8 * w * w:
            continue
        if n != 0:
            z0 = m[1] / n
            if abs(m[2] / n - z0 ** 2) < 1e-7 * w ** 2 and abs(m[3] / n - z0 ** 3) < 1e-7 * w ** 3:
                found.append(Singularity(complex(c + z0), abs(n), "zero" if n > 0 else "pole"))
                continue
        if depth >= max_depth:
            raise BoundaryHitError(f"could not isolate roots after {max_depth} subdivisions")
        children = None
        for s in _SPLITS:
            xm = box[0] + s * (box[1] - box[0])
            ym = box[2] + s * (box[3] - box[2])
            boxes = [(box[0], xm, box[2], ym), (xm, box[1], box[2], ym),
                     (box[0], xm, ym, box[3]), (xm, box[1], ym, box[3])]
            kids = [moments(b) for b in boxes]
            if all(integral(km) for _, km in kids):
                total = sum(round(km[0].real) for _, km in kids)
                if total == n:
                    children = list(zip(boxes, kids))
                    break
        if children is None:
            raise BoundaryHitError("subdivision lines keep hitting a root")
        for b, (kc, km) in children:
            stack.append((b, kc, km, depth + 1))

    found.sort(key=lambda s: (s.kind, round(s.location.real, 9), round(s.location.imag, 9)))
    return found
