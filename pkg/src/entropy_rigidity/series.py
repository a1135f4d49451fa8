"""Truncated power series in one and two variables, and 2D map jets.

Coefficients are plain Python scalars, so the same code runs on floats and on
``mpmath.mpf`` values.  Every operation keeps the truncation order fixed:
products and compositions drop all terms above it.
"""
from functools import lru_cache
import math

import mpmath
from mpmath import mp

from .errors import CapabilityError, DomainError

JET_CEILING = 16


def _ctx(x):
    return mp if isinstance(x, mpmath.mpf) else mpmath.fp


def _is_zero(x):
    return not x


# ---------------------------------------------------------------------------
# univariate


class Series1:
    """Truncated series sum_k c[k] u^k, k <= order."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @property
    def order(self):
        return len(self.c) - 1

    @classmethod
    def variable(cls, value, order):
        c = [0] * (order + 1)
        c[0] = value
        if order >= 1:
            c[1] = 1
        return cls(c)

    @classmethod
    def constant(cls, value, order):
        return cls([value] + [0] * order)

    @property
    def const(self):
        return self.c[0]

    def copy(self):
        return Series1(self.c)

    def __add__(self, other):
        if isinstance(other, Series1):
            n = min(len(self.c), len(other.c))
            return Series1([self.c[k] + other.c[k] for k in range(n)])
        c = list(self.c)
        c[0] = c[0] + other
        return Series1(c)

    __radd__ = __add__

    def __neg__(self):
        return Series1([-x for x in self.c])

    def __sub__(self, other):
        if isinstance(other, Series1):
            n = min(len(self.c), len(other.c))
            return Series1([self.c[k] - other.c[k] for k in range(n)])
        c = list(self.c)
        c[0] = c[0] - other
        return Series1(c)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series1):
            a, b = self.c, other.c
            n = min(len(a), len(b))
            out = [0] * n
            for i in range(n):
                ai = a[i]
                if _is_zero(ai):
                    continue
                for j in range(n - i):
                    bj = b[j]
                    if not _is_zero(bj):
                        out[i + j] += ai * bj
            return Series1(out)
        return Series1([x * other for x in self.c])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series1):
            return self * reciprocal(other)
        return Series1([x / other for x in self.c])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        return power(self, n)

    def deriv(self):
        return Series1([k * self.c[k] for k in range(1, len(self.c))] + [0])

    def integrate(self, c0=0):
        return Series1([c0] + [self.c[k] / (k + 1) for k in range(len(self.c))])

    def compose(self, inner):
        """self(inner - ...) where ``inner`` is a series whose constant is the
        displacement origin: returns sum_k c_k inner^k (no shift applied)."""
        out = None
        for ck in reversed(self.c):
            out = (inner * 0 + ck) if out is None else out * inner + ck
        return out

    def evaluate(self, u):
        acc = 0
        for ck in reversed(self.c):
            acc = acc * u + ck
        return acc

    def shift(self, h):
        """Re-expand around u = h: returns coefficients of self(h + w) in w."""
        w = Series1.variable(h, self.order)
        return self.compose(w)

    def revert(self):
        """Compositional inverse of a series with zero constant and nonzero slope."""
        if not _is_zero(self.c[0]):
            raise DomainError("reversion needs a zero constant term")
        f1 = self.c[1]
        if _is_zero(f1):
            raise DomainError("reversion needs a nonzero linear term")
        n = self.order
        w = Series1.variable(0, n)
        g = w / f1
        for _ in range(n):
            g = g - (self.compose(g) - w) / f1
        return g

    def truncate(self, order):
        c = list(self.c[: order + 1])
        c += [0] * (order + 1 - len(c))
        return Series1(c)

    def __repr__(self):
        return "Series1(%r)" % (self.c,)


# ---------------------------------------------------------------------------
# bivariate


@lru_cache(maxsize=None)
def monomials(order):
    """Monomials (a, b) with a + b <= order, sorted by degree then by -a."""
    mons = tuple((a, d - a) for d in range(order + 1) for a in range(d, -1, -1))
    return mons, {m: i for i, m in enumerate(mons)}


@lru_cache(maxsize=None)
def _product_rows(order):
    mons, index = monomials(order)
    rows = []
    for a1, b1 in mons:
        row = []
        for j, (a2, b2) in enumerate(mons):
            if a1 + b1 + a2 + b2 <= order:
                row.append((j, index[(a1 + a2, b1 + b2)]))
        rows.append(tuple(row))
    return tuple(rows)


@lru_cache(maxsize=None)
def _deriv_map(order, var):
    mons, index = monomials(order)
    _, low = monomials(order - 1) if order >= 1 else ((), {})
    out = []
    for (a, b), i in index.items():
        e = a if var == 0 else b
        if e == 0:
            continue
        tgt = (a - 1, b) if var == 0 else (a, b - 1)
        out.append((i, low[tgt], e))
    return tuple(out)


class Series2:
    """Truncated series sum c_ab d1^a d2^b over a + b <= order."""

    __slots__ = ("order", "c")

    def __init__(self, order, coeffs=None):
        if order > JET_CEILING:
            raise CapabilityError("jet order %d above ceiling %d" % (order, JET_CEILING))
        self.order = order
        n = (order + 1) * (order + 2) // 2
        if coeffs is None:
            self.c = [0] * n
        else:
            self.c = list(coeffs)
            if len(self.c) != n:
                raise ValueError("wrong coefficient count for order %d" % order)

    @classmethod
    def constant(cls, value, order):
        s = cls(order)
        s.c[0] = value
        return s

    @classmethod
    def variable(cls, var, value, order):
        s = cls(order)
        s.c[0] = value
        if order >= 1:
            s.c[1 + var] = 1  # index 1 is (1,0), index 2 is (0,1)
        return s

    @classmethod
    def from_dict(cls, order, coeffs):
        s = cls(order)
        _, index = monomials(order)
        for (a, b), v in coeffs.items():
            if a + b <= order:
                s.c[index[(a, b)]] = v
        return s

    @property
    def const(self):
        return self.c[0]

    def copy(self):
        return Series2(self.order, self.c)

    def coeff(self, a, b):
        if a + b > self.order:
            return 0
        return self.c[monomials(self.order)[1][(a, b)]]

    def set_coeff(self, a, b, value):
        self.c[monomials(self.order)[1][(a, b)]] = value

    def items(self):
        mons, _ = monomials(self.order)
        return zip(mons, self.c)

    def _match(self, other):
        if self.order == other.order:
            return self, other
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        if isinstance(other, Series2):
            a, b = self._match(other)
            return Series2(a.order, [x + y for x, y in zip(a.c, b.c)])
        s = self.copy()
        s.c[0] = s.c[0] + other
        return s

    __radd__ = __add__

    def __neg__(self):
        return Series2(self.order, [-x for x in self.c])

    def __sub__(self, other):
        if isinstance(other, Series2):
            a, b = self._match(other)
            return Series2(a.order, [x - y for x, y in zip(a.c, b.c)])
        s = self.copy()
        s.c[0] = s.c[0] - other
        return s

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series2):
            a, b = self._match(other)
            rows = _product_rows(a.order)
            out = [0] * len(a.c)
            bc = b.c
            for i, ai in enumerate(a.c):
                if _is_zero(ai):
                    continue
                for j, k in rows[i]:
                    bj = bc[j]
                    if not _is_zero(bj):
                        out[k] += ai * bj
            return Series2(a.order, out)
        return Series2(self.order, [x * other for x in self.c])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series2):
            return self * reciprocal(other)
        return Series2(self.order, [x / other for x in self.c])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        return power(self, n)

    def deriv(self, var):
        """Partial derivative; the result has order one less."""
        if self.order == 0:
            return Series2(0)
        out = Series2(self.order - 1)
        for i, k, e in _deriv_map(self.order, var):
            out.c[k] = e * self.c[i]
        return out

    def truncate(self, order):
        if order == self.order:
            return self.copy()
        out = Series2(order)
        _, index = monomials(order)
        mons, _ = monomials(self.order)
        for (a, b), v in zip(mons, self.c):
            if a + b <= order:
                out.c[index[(a, b)]] = v
        return out

    def degree_part(self, d):
        out = Series2(self.order)
        lo = d * (d + 1) // 2
        hi = (d + 1) * (d + 2) // 2
        out.c[lo:hi] = self.c[lo:hi]
        return out

    def max_abs(self, start_degree=0):
        lo = start_degree * (start_degree + 1) // 2
        vals = [abs(x) for x in self.c[lo:]]
        return max(vals) if vals else 0

    def evaluate(self, x, y):
        mons, _ = monomials(self.order)
        acc = 0
        for (a, b), v in zip(mons, self.c):
            if not _is_zero(v):
                acc += v * x ** a * y ** b
        return acc

    def substitute(self, u, v):
        """Polynomial substitution self(u, v) for series u, v of one common type.

        ``u`` and ``v`` may be Series1 or Series2.  Constants in u, v are allowed;
        the result is the exact polynomial composition truncated at the
        inner series order.
        """
        K = self.order
        mons, index = monomials(K)
        vp = [None] * (K + 1)
        vp[0] = v * 0 + 1
        for b in range(1, K + 1):
            vp[b] = vp[b - 1] * v
        out = None
        for a in range(K, -1, -1):
            q = vp[0] * 0
            for b in range(K - a + 1):
                cab = self.c[index[(a, b)]]
                if not _is_zero(cab):
                    q = q + vp[b] * cab
            out = q if out is None else out * u + q
        return out

    def __repr__(self):
        terms = ["%s*d1^%d*d2^%d" % (v, a, b) for (a, b), v in self.items() if not _is_zero(v)]
        return "Series2(%d: %s)" % (self.order, " + ".join(terms) or "0")


# ---------------------------------------------------------------------------
# elementary functions through univariate Taylor expansions at the constant term


def _apply(s, coeffs):
    """sum_k coeffs[k] (s - s0)^k, evaluated by Horner."""
    w = s - s.const
    out = None
    for ck in reversed(coeffs):
        out = (w * 0 + ck) if out is None else out * w + ck
    return out


def _power_coeffs(c0, alpha, n):
    ctx = _ctx(c0)
    if isinstance(alpha, int) and alpha >= 0:
        base = c0 ** alpha
    else:
        base = ctx.power(c0, alpha)
    out = [base]
    coef = base
    for k in range(1, n + 1):
        coef = coef * (alpha - k + 1) / (k * c0)
        out.append(coef)
    return out


def power(s, alpha):
    if isinstance(alpha, int) and alpha >= 0:
        out = s * 0 + 1
        base = s
        e = alpha
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out
    c0 = s.const
    if _is_zero(c0):
        raise DomainError("power with zero constant term")
    return _apply(s, _power_coeffs(c0, alpha, s.order))


def reciprocal(s):
    c0 = s.const
    if _is_zero(c0):
        raise DomainError("reciprocal of a series with zero constant term")
    n = s.order
    out = [1 / c0]
    q = out[0]
    for k in range(1, n + 1):
        q = -q / c0
        out.append(q)
    return _apply(s, out)


def sqrt(s):
    return power(s, mp.mpf(1) / 2 if isinstance(s.const, mpmath.mpf) else 0.5)


def exp(s):
    ctx = _ctx(s.const)
    e0 = ctx.exp(s.const)
    out = [e0]
    for k in range(1, s.order + 1):
        out.append(out[-1] / k)
    return _apply(s, out)


def log(s):
    ctx = _ctx(s.const)
    c0 = s.const
    out = [ctx.log(c0)]
    q = 1
    for k in range(1, s.order + 1):
        q = q / c0
        out.append(q / k if k % 2 else -q / k)
    return _apply(s, out)


def _sincos_coeffs(c0, n, which):
    ctx = _ctx(c0)
    sn, cs = ctx.sin(c0), ctx.cos(c0)
    cyc = [sn, cs, -sn, -cs] if which == "sin" else [cs, -sn, -cs, sn]
    out = []
    fact = 1
    for k in range(n + 1):
        if k:
            fact *= k
        out.append(cyc[k % 4] / fact)
    return out


def sin(s):
    return _apply(s, _sincos_coeffs(s.const, s.order, "sin"))


def cos(s):
    return _apply(s, _sincos_coeffs(s.const, s.order, "cos"))


def _integrated_coeffs(c0, n, deriv_of):
    """Taylor coefficients at c0 of F with F' = deriv_of(u-series)."""
    x = Series1.variable(c0, max(n - 1, 0))
    d = deriv_of(x)
    return d.c


def asin(s):
    c0 = s.const
    ctx = _ctx(c0)
    n = s.order
    if n == 0:
        return s * 0 + ctx.asin(c0)
    d = _integrated_coeffs(c0, n, lambda x: power(1 - x * x, -0.5 if ctx is mpmath.fp else mp.mpf(-1) / 2))
    coeffs = [ctx.asin(c0)] + [d[k] / (k + 1) for k in range(n)]
    return _apply(s, coeffs)


def atan(s):
    c0 = s.const
    ctx = _ctx(c0)
    n = s.order
    if n == 0:
        return s * 0 + ctx.atan(c0)
    d = _integrated_coeffs(c0, n, lambda x: reciprocal(1 + x * x))
    coeffs = [ctx.atan(c0)] + [d[k] / (k + 1) for k in range(n)]
    return _apply(s, coeffs)


# ---------------------------------------------------------------------------
# jets of planar maps


class Jet2:
    """Truncated Taylor expansion of a map R^2 -> R^2 around ``center``.

    ``comps[i]`` is a Series2 in the displacement (d1, d2) from ``center``;
    its constant term is the image point.
    """

    __slots__ = ("center", "comps")

    def __init__(self, center, comps):
        self.center = (center[0], center[1])
        self.comps = (comps[0], comps[1])
        if comps[0].order != comps[1].order:
            raise ValueError("component orders differ")

    @property
    def order(self):
        return self.comps[0].order

    @property
    def value(self):
        return (self.comps[0].const, self.comps[1].const)

    @classmethod
    def identity(cls, center, order):
        return cls(center, (Series2.variable(0, center[0], order), Series2.variable(1, center[1], order)))

    @classmethod
    def linear(cls, matrix, center=(0, 0), value=(0, 0), order=1):
        comps = []
        for i in range(2):
            s = Series2(order)
            s.c[0] = value[i]
            if order >= 1:
                s.c[1] = matrix[i][0]
                s.c[2] = matrix[i][1]
            comps.append(s)
        return cls(center, comps)

    def copy(self):
        return Jet2(self.center, (self.comps[0].copy(), self.comps[1].copy()))

    def linear_part(self):
        if self.order < 1:
            raise CapabilityError("jet of order 0 has no linear part")
        return [[self.comps[0].c[1], self.comps[0].c[2]], [self.comps[1].c[1], self.comps[1].c[2]]]

    def truncate(self, order):
        return Jet2(self.center, (self.comps[0].truncate(order), self.comps[1].truncate(order)))

    def __call__(self, inner):
        return compose(self, inner)

    def __sub__(self, other):
        return Jet2(self.center, (self.comps[0] - other.comps[0], self.comps[1] - other.comps[1]))

    def __add__(self, other):
        return Jet2(self.center, (self.comps[0] + other.comps[0], self.comps[1] + other.comps[1]))

    def evaluate(self, d1, d2):
        return (self.comps[0].evaluate(d1, d2), self.comps[1].evaluate(d1, d2))

    def max_abs(self, start_degree=0):
        return max(self.comps[0].max_abs(start_degree), self.comps[1].max_abs(start_degree))

    def translate_output(self, shift):
        return Jet2(self.center, (self.comps[0] + shift[0], self.comps[1] + shift[1]))

    def recenter(self, point):
        """Re-expand the (polynomial) jet around another domain point."""
        order = self.order
        u = Series2.variable(0, point[0], order)
        v = Series2.variable(1, point[1], order)
        return compose(self, Jet2(point, (u, v)))

    def inverse(self, iterations=None):
        """Jet of the local inverse, centered at the image point."""
        order = self.order
        L = self.linear_part()
        det = L[0][0] * L[1][1] - L[0][1] * L[1][0]
        if _is_zero(det):
            raise DomainError("jet with singular linear part has no inverse")
        Li = [[L[1][1] / det, -L[0][1] / det], [-L[1][0] / det, L[0][0] / det]]
        y0 = self.value
        ident = Jet2.identity(y0, order)
        d1 = Series2.variable(0, 0, order)
        d2 = Series2.variable(1, 0, order)
        h = Jet2(y0, (self.center[0] + Li[0][0] * d1 + Li[0][1] * d2,
                      self.center[1] + Li[1][0] * d1 + Li[1][1] * d2))
        for _ in range(iterations or order):
            r = compose(self, h) - ident
            h = Jet2(y0, (h.comps[0] - (Li[0][0] * r.comps[0] + Li[0][1] * r.comps[1]),
                          h.comps[1] - (Li[1][0] * r.comps[0] + Li[1][1] * r.comps[1])))
        return h

    def __repr__(self):
        return "Jet2(center=%r, order=%d)" % (self.center, self.order)


def compose(outer, inner):
    """outer o inner as a jet centered at inner.center.

    The outer jet is treated as a polynomial in the displacement from its own
    center, so inner may land anywhere; the substitution is exact up to the
    common truncation order.
    """
    u = inner.comps[0] - outer.center[0]
    v = inner.comps[1] - outer.center[1]
    if outer.order != inner.order:
        k = min(outer.order, inner.order)
        outer = outer.truncate(k)
        u, v = u.truncate(k), v.truncate(k)
    return Jet2(inner.center, (outer.comps[0].substitute(u, v), outer.comps[1].substitute(u, v)))


def det_series(jet):
    """Jacobian determinant of a jet, as a series of order ``jet.order - 1``."""
    f, g = jet.comps
    return f.deriv(0) * g.deriv(1) - f.deriv(1) * g.deriv(0)


def factorial(k):
    return math.factorial(k)
