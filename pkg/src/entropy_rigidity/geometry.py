"""Strictly convex obstacles, arclength jets and table-level validity checks.

Every obstacle is a closed curve gamma(t) with an analytic parameter t
(the polar angle for circles and Fourier circles, the eccentric anomaly for
ellipses), traversed counterclockwise.  Arclength s is measured from t = 0.
For non-circles the map t -> s is realised through the Fourier series of the
speed |gamma'(t)|, which converges geometrically for these analytic curves.
"""
import ast
import configparser
import math
import operator
from dataclasses import dataclass, field

import mpmath
import numpy as np
from mpmath import mp

from . import _kernels
from .errors import CapabilityError, DegenerateError, PreconditionError, ValidationError
from .series import Series1, JET_CEILING

fp = mpmath.fp


# ---------------------------------------------------------------------------
# numeric literals in config files


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_number(text, ctx=mp):
    """Evaluate a numeric literal such as ``3*sqrt(3)`` or ``pi/6`` in ``ctx``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return ctx.mpf(repr(node.value)) if ctx is mp else float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Name) and node.id == "pi":
            return ctx.pi
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in ("sqrt", "sin", "cos") and len(node.args) == 1):
            return getattr(ctx, node.func.id)(ev(node.args[0]))
        raise ValidationError("unsupported numeric literal: %r" % text)

    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ValidationError("cannot parse number %r" % text) from exc
    return ev(tree)


def _as_text(x):
    return x if isinstance(x, str) else repr(x)


# ---------------------------------------------------------------------------
# curves


class ObstacleCurve:
    """Base class. Parameters are kept as text and evaluated per precision."""

    kind = None

    def __init__(self, center, **params):
        self.center_text = tuple(_as_text(c) for c in center)
        self.param_text = {k: (tuple(_as_text(x) for x in v) if isinstance(v, (list, tuple)) else _as_text(v))
                           for k, v in params.items()}
        self._cache = {}
        self.validate()

    # parameters -----------------------------------------------------------
    def params(self, ctx=mp):
        key = ("p", mp.prec if ctx is mp else 53)
        if key not in self._cache:
            vals = {k: (tuple(parse_number(x, ctx) for x in v) if isinstance(v, tuple) else parse_number(v, ctx))
                    for k, v in self.param_text.items()}
            vals["center"] = tuple(parse_number(c, ctx) for c in self.center_text)
            self._cache[key] = vals
        return self._cache[key]

    def describe(self):
        d = {"kind": self.kind, "center": list(self.center_text)}
        d.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in self.param_text.items()})
        return d

    def scaled(self, factor):
        raise NotImplementedError

    # to be provided by subclasses ------------------------------------------
    def derivs_t(self, t, n, ctx=mp):
        """[(x^(k)(t), y^(k)(t)) for k = 0..n]."""
        raise NotImplementedError

    def speed_t(self, t, ctx=mp):
        d = self.derivs_t(t, 1, ctx)[1]
        return ctx.sqrt(d[0] ** 2 + d[1] ** 2)

    # shared machinery ------------------------------------------------------
    def point_t(self, t, ctx=mp):
        return self.derivs_t(t, 0, ctx)[0]

    def sample_np(self, n):
        """(points, t) for n equispaced parameter values, in double precision."""
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        pts = np.array([self.point_t(float(x), fp) for x in t])
        return pts, t

    def taylor_t(self, t0, order):
        ctx = mp if isinstance(t0, mpmath.mpf) else fp
        ds = self.derivs_t(t0, order, ctx)
        xs, ys, f = [], [], 1
        for k, (dx, dy) in enumerate(ds):
            if k:
                f *= k
            xs.append(dx / f)
            ys.append(dy / f)
        return Series1(xs), Series1(ys)

    def curvature_t(self, t, ctx=mp):
        d = self.derivs_t(t, 2, ctx)
        (x1, y1), (x2, y2) = d[1], d[2]
        sp = ctx.sqrt(x1 * x1 + y1 * y1)
        return (x1 * y2 - y1 * x2) / sp ** 3

    # arclength -------------------------------------------------------------
    @property
    def length(self):
        return self._arc()["length"]

    def length_fp(self):
        return float(self._arc_fp()["length"])

    def _arc_fp(self):
        key = ("arc", 53)
        if key not in self._cache:
            n = 4096
            t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
            sp = np.array([self.speed_t(float(x), fp) for x in t])
            c = np.fft.rfft(sp) / n
            c0 = c[0].real
            k = np.arange(1, len(c))
            a = 2 * c[1:].real
            b = -2 * c[1:].imag
            decay = np.abs(c[1:])
            # evaluation only needs the modes above double-precision noise
            big = np.nonzero(decay > 1e-15 * max(c0, decay.max(initial=0.0)))[0]
            keep = big[-1] + 1 if len(big) else 0
            self._cache[key] = {"c0": c0, "a": a[:keep], "b": b[:keep], "k": k[:keep], "length": 2 * np.pi * c0,
                                "decay": decay}
        return self._cache[key]

    def _arc(self):
        key = ("arc", mp.prec)
        if key in self._cache:
            return self._cache[key]
        # choose the number of nodes from the double-precision decay rate
        base = self._arc_fp()
        dec = base["decay"]
        kk = np.arange(1, len(dec) + 1)
        top = float(np.max(dec)) if len(dec) else 0.0
        tol_digits = mp.dps + 8
        nmodes = 16
        sel = dec > 1e-12 * max(top, 1e-300)
        if top > 0 and np.count_nonzero(sel) >= 3:
            ks, ls = kk[sel], np.log10(dec[sel])
            tail = max(2, len(ks) // 3)
            slope = (ls[-1] - ls[-tail - 1]) / (ks[-1] - ks[-tail - 1]) if len(ks) > tail else -1.0
            if slope < -1e-3:
                nmodes = int(math.ceil(1.25 * (tol_digits + math.log10(top)) / -slope)) + 8
        elif top > 0 and np.count_nonzero(sel) >= 1:
            nmodes = 32
        nmodes = max(16, min(nmodes, 3000))
        N = 2 * nmodes + 2
        two_pi = 2 * mp.pi
        nodes = [two_pi * j / N for j in range(N)]
        f = [self.speed_t(t, mp) for t in nodes]
        c0 = mp.fsum(f) / N
        a = [mp.zero] * (nmodes + 1)
        b = [mp.zero] * (nmodes + 1)
        for t, fj in zip(nodes, f):
            c1, s1 = mp.cos(t), mp.sin(t)
            ck, sk = mp.one, mp.zero
            for k in range(1, nmodes + 1):
                ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
                a[k] += fj * ck
                b[k] += fj * sk
        scale = mp.mpf(2) / N
        a = [x * scale for x in a]
        b = [x * scale for x in b]
        data = {"c0": c0, "a": a, "b": b, "n": nmodes, "length": two_pi * c0}
        self._cache[key] = data
        return data

    def _arc_fixed(self, d):
        key = ("arc-fixed", mp.prec)
        if key not in self._cache:
            wp = mp.prec + 24 + d["n"].bit_length()
            A = [0] + [int(mp.nint(mp.ldexp(d["a"][k] / k, wp))) for k in range(1, d["n"] + 1)]
            B = [0] + [int(mp.nint(mp.ldexp(d["b"][k] / k, wp))) for k in range(1, d["n"] + 1)]
            self._cache[key] = (wp, A, B)
        return self._cache[key]

    def s_of_t(self, t):
        """Arclength from t = 0 to t (t reduced to [0, 2 pi))."""
        if isinstance(t, mpmath.mpf):
            two_pi = 2 * mp.pi
            t = t % two_pi
            d = self._arc()
            wp, A, B = self._arc_fixed(d)
            # the rotation recurrence runs on integers scaled by 2^wp
            with mp.workprec(wp + 10):
                c1 = int(mp.nint(mp.ldexp(mp.cos(t), wp)))
                s1 = int(mp.nint(mp.ldexp(mp.sin(t), wp)))
            one = 1 << wp
            ck, sk = one, 0
            acc = 0
            for k in range(1, d["n"] + 1):
                ck, sk = (ck * c1 - sk * s1) >> wp, (sk * c1 + ck * s1) >> wp
                acc += A[k] * sk + B[k] * (one - ck)
            return d["c0"] * t + mp.ldexp(mp.mpf(acc), -2 * wp)
        t = float(t) % (2 * math.pi)
        d = self._arc_fp()
        k = d["k"]
        return float(d["c0"] * t + np.sum((d["a"] * np.sin(k * t) + d["b"] * (1 - np.cos(k * t))) / k))

    def t_of_s(self, s):
        if isinstance(s, mpmath.mpf):
            memo = self._cache.setdefault(("t_of_s", mp.prec), {})
            if s in memo:
                return memo[s]
            L = self.length
            s = s % L
            t = mp.mpf(self.t_of_s(float(s)))
            two_pi = 2 * mp.pi
            quad = mp.sqrt(mp.eps) / 1024
            for _ in range(60):
                # unwrap so the residual stays continuous across t = 2 pi
                dt = (self.s_of_t(t) + L * mp.floor(t / two_pi) - s) / self.speed_t(t, mp)
                t -= dt
                # quadratic convergence: once dt is below sqrt(eps) the update is final
                if abs(dt) < quad:
                    break
            t = t % (2 * mp.pi)
            if len(memo) > 4096:
                memo.clear()
            memo[s] = t
            return t
        L = self.length_fp()
        s = float(s) % L
        t = 2 * math.pi * s / L
        for _ in range(50):
            dt = (self.s_of_t(t) + L * math.floor(t / (2 * math.pi)) - s) / self.speed_t(t, fp)
            t -= dt
            if abs(dt) < 1e-15:
                break
        return t % (2 * math.pi)

    def taylor_s(self, s0, order):
        """Series of gamma(s0 + sigma) in sigma, as (Series1 x, Series1 y)."""
        t0 = self.t_of_s(s0)
        x, y = self.taylor_t(t0, order)
        if order == 0:
            return x, y
        sp2 = x.deriv() * x.deriv() + y.deriv() * y.deriv()
        from .series import sqrt as ssqrt
        sarc = ssqrt(sp2.truncate(order - 1)).integrate(0)
        sarc = sarc.truncate(order)
        u = sarc.revert()
        return x.compose(u), y.compose(u)

    def validate(self):
        pass

    def check_convex(self, n=2048, margin=1e-9):
        ts = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        k = np.array([self.curvature_t(float(t), fp) for t in ts])
        if not np.all(k > margin):
            bad = float(ts[int(np.argmin(k))])
            raise ValidationError("%s obstacle is not strictly convex: curvature %.3g at t=%.4f"
                                  % (self.kind, float(np.min(k)), bad))
        return float(np.min(k)), float(np.max(k))


class Circle(ObstacleCurve):
    kind = "circle"

    def __init__(self, center, radius):
        super().__init__(center, radius=radius)

    def validate(self):
        if self.params(fp)["radius"] <= 0:
            raise ValidationError("circle radius must be positive")

    def scaled(self, factor):
        c = self.params(mp)
        f = mp.mpf(factor)
        return Circle([str(c["center"][0] * f), str(c["center"][1] * f)], str(c["radius"] * f))

    def derivs_t(self, t, n, ctx=mp):
        p = self.params(ctx)
        R = p["radius"]
        cx, cy = p["center"]
        c, s = ctx.cos(t), ctx.sin(t)
        cyc = [(c, s), (-s, c), (-c, -s), (s, -c)]
        out = [(cx + R * c, cy + R * s)]
        for k in range(1, n + 1):
            dx, dy = cyc[k % 4]
            out.append((R * dx, R * dy))
        return out

    def speed_t(self, t, ctx=mp):
        return self.params(ctx)["radius"]

    @property
    def length(self):
        return 2 * mp.pi * self.params(mp)["radius"]

    def length_fp(self):
        return 2 * math.pi * self.params(fp)["radius"]

    def s_of_t(self, t):
        if isinstance(t, mpmath.mpf):
            return (t % (2 * mp.pi)) * self.params(mp)["radius"]
        return (float(t) % (2 * math.pi)) * self.params(fp)["radius"]

    def t_of_s(self, s):
        if isinstance(s, mpmath.mpf):
            return (s / self.params(mp)["radius"]) % (2 * mp.pi)
        return (float(s) / self.params(fp)["radius"]) % (2 * math.pi)

    def taylor_s(self, s0, order):
        ctx = mp if isinstance(s0, mpmath.mpf) else fp
        R = self.params(ctx)["radius"]
        t0 = self.t_of_s(s0)
        ds = self.derivs_t(t0, order, ctx)
        xs, ys, f, rk = [], [], 1, 1
        for k, (dx, dy) in enumerate(ds):
            if k:
                f *= k
                rk *= R
            xs.append(dx / (f * rk))
            ys.append(dy / (f * rk))
        return Series1(xs), Series1(ys)

    def curvature_t(self, t, ctx=mp):
        return 1 / self.params(ctx)["radius"]


class Ellipse(ObstacleCurve):
    kind = "ellipse"

    def __init__(self, center, a, b, rotation="0"):
        super().__init__(center, a=a, b=b, rotation=rotation)

    def validate(self):
        p = self.params(fp)
        if not (p["a"] >= p["b"] > 0):
            raise ValidationError("ellipse needs semi-axes a >= b > 0")

    def scaled(self, factor):
        p = self.params(mp)
        f = mp.mpf(factor)
        return Ellipse([str(p["center"][0] * f), str(p["center"][1] * f)], str(p["a"] * f), str(p["b"] * f),
                       self.param_text["rotation"])

    def derivs_t(self, t, n, ctx=mp):
        p = self.params(ctx)
        a, b, th = p["a"], p["b"], p["rotation"]
        cx, cy = p["center"]
        cr, sr = ctx.cos(th), ctx.sin(th)
        c, s = ctx.cos(t), ctx.sin(t)
        cyc = [(c, s), (-s, c), (-c, -s), (s, -c)]
        out = []
        for k in range(n + 1):
            u, v = cyc[k % 4]
            x, y = a * u, b * v
            px, py = cr * x - sr * y, sr * x + cr * y
            if k == 0:
                px, py = px + cx, py + cy
            out.append((px, py))
        return out

    def speed_t(self, t, ctx=mp):
        p = self.params(ctx)
        return ctx.sqrt((p["a"] * ctx.sin(t)) ** 2 + (p["b"] * ctx.cos(t)) ** 2)


class FourierCircle(ObstacleCurve):
    """Polar curve r(t) = R (1 + sum_k eps_k cos(k t - phi_k)), k = 2..K."""

    kind = "fourier-circle"

    def __init__(self, center, radius, eps=(), phases=None):
        eps = tuple(eps)
        phases = tuple(phases) if phases is not None else tuple("0" for _ in eps)
        if len(phases) != len(eps):
            raise ValidationError("fourier-circle needs one phase per coefficient")
        super().__init__(center, radius=radius, eps=eps, phases=phases)

    def validate(self):
        p = self.params(fp)
        if p["radius"] <= 0:
            raise ValidationError("fourier-circle base radius must be positive")
        if sum(abs(e) for e in p["eps"]) >= 1:
            raise ValidationError("fourier-circle coefficients must keep r(t) > 0")
        self.check_convex()

    def scaled(self, factor):
        p = self.params(mp)
        f = mp.mpf(factor)
        return FourierCircle([str(p["center"][0] * f), str(p["center"][1] * f)], str(p["radius"] * f),
                             self.param_text["eps"], self.param_text["phases"])

    def _r_derivs(self, t, n, ctx):
        p = self.params(ctx)
        R = p["radius"]
        out = []
        for j in range(n + 1):
            acc = 1 if j == 0 else 0
            for m, (e, ph) in enumerate(zip(p["eps"], p["phases"]), start=2):
                arg = m * t - ph
                cyc = (ctx.cos(arg), -ctx.sin(arg), -ctx.cos(arg), ctx.sin(arg))[j % 4]
                acc += e * m ** j * cyc
            out.append(R * acc)
        return out

    def derivs_t(self, t, n, ctx=mp):
        p = self.params(ctx)
        cx, cy = p["center"]
        r = self._r_derivs(t, n, ctx)
        c, s = ctx.cos(t), ctx.sin(t)
        cyc = [(c, s), (-s, c), (-c, -s), (s, -c)]
        out = []
        for k in range(n + 1):
            x = y = 0
            for j in range(k + 1):
                bn = math.comb(k, j)
                u, v = cyc[(k - j) % 4]
                x += bn * r[j] * u
                y += bn * r[j] * v
            if k == 0:
                x, y = x + cx, y + cy
            out.append((x, y))
        return out

    def speed_t(self, t, ctx=mp):
        r = self._r_derivs(t, 1, ctx)
        return ctx.sqrt(r[0] ** 2 + r[1] ** 2)


CURVE_KINDS = {"circle": Circle, "ellipse": Ellipse, "fourier-circle": FourierCircle}


def curve_eval(curve, s, order):
    """Position and arclength derivatives [gamma(s), gamma'(s), ..., gamma^(order)(s)]."""
    if order > JET_CEILING:
        raise CapabilityError("derivative order %d above the jet ceiling %d" % (order, JET_CEILING))
    if order < 0:
        raise ValidationError("order must be nonnegative")
    x, y = curve.taylor_s(s, order)
    out, f = [], 1
    for k in range(order + 1):
        if k:
            f *= k
        out.append((x.c[k] * f, y.c[k] * f))
    return out


def curvature(curve, s):
    """Signed curvature; positive for counterclockwise convex obstacles."""
    return curve.curvature_t(curve.t_of_s(s), mp if isinstance(s, mpmath.mpf) else fp)


# ---------------------------------------------------------------------------
# tables


@dataclass
class NonEclipseReport:
    passed: bool
    margin: float
    witness: tuple
    clearance: float
    details: list = field(default_factory=list)


class BilliardTable:
    def __init__(self, obstacles, name="table", non_eclipse_margin=1e-6, samples=512, validate=True):
        self.obstacles = list(obstacles)
        self.name = name
        self.required_margin = float(non_eclipse_margin)
        self.samples = int(samples)
        self.report = None
        if validate:
            self.report = non_eclipse_check(self, samples=self.samples)
            if not self.report.passed:
                raise ValidationError("table %r fails the non-eclipse condition (margin %.3g, witness %s)"
                                      % (name, self.report.margin, self.report.witness))

    @property
    def m(self):
        return len(self.obstacles)

    @property
    def non_eclipse_margin(self):
        return self.report.margin if self.report else None

    def perimeter(self):
        return mp.fsum(c.length for c in self.obstacles)

    def scaled(self, factor):
        return BilliardTable([c.scaled(factor) for c in self.obstacles], name="%s*%s" % (self.name, factor),
                             non_eclipse_margin=self.required_margin, samples=self.samples)

    def describe(self):
        return {"name": self.name, "non_eclipse_margin": self.required_margin,
                "obstacles": [c.describe() for c in self.obstacles]}


def _sagitta(curve, n):
    kmin, kmax = curve.check_convex(n=max(n, 256), margin=-1e300)
    L = curve.length_fp()
    ts = np.linspace(0.0, 2 * np.pi, n + 1)
    ss = np.array([curve.s_of_t(float(t)) for t in ts[:-1]] + [L])
    ds = float(np.max(np.diff(ss)))
    return kmax * ds * ds / 8.0


def _outer_tangents(ci, cj, pts_i, ts_i, pts_j, ts_j):
    """Both outer common tangent points (t_i, t_j), refined by 2D Newton."""
    from scipy.spatial import ConvexHull
    pts = np.vstack([pts_i, pts_j])
    owner = np.r_[np.zeros(len(pts_i), int), np.ones(len(pts_j), int)]
    hull = ConvexHull(pts)
    v = list(hull.vertices)
    seeds = []
    for a, b in zip(v, v[1:] + v[:1]):
        if owner[a] != owner[b]:
            ia, jb = (a, b) if owner[a] == 0 else (b, a)
            seeds.append((float(ts_i[ia]), float(ts_j[jb - len(pts_i)])))
    if len(seeds) != 2:
        raise DegenerateError("could not seed outer tangents (hull bridges: %d)" % len(seeds))
    out = []
    for ti, tj in seeds:
        for _ in range(60):
            di = ci.derivs_t(ti, 2, fp)
            dj = cj.derivs_t(tj, 2, fp)
            d = (dj[0][0] - di[0][0], dj[0][1] - di[0][1])
            f1 = di[1][0] * d[1] - di[1][1] * d[0]
            f2 = dj[1][0] * d[1] - dj[1][1] * d[0]
            # partial derivatives
            a11 = (di[2][0] * d[1] - di[2][1] * d[0]) + (-di[1][0] * di[1][1] + di[1][1] * di[1][0])
            a12 = di[1][0] * dj[1][1] - di[1][1] * dj[1][0]
            a21 = -(dj[1][0] * di[1][1] - dj[1][1] * di[1][0])
            a22 = (dj[2][0] * d[1] - dj[2][1] * d[0]) + (dj[1][0] * dj[1][1] - dj[1][1] * dj[1][0])
            det = a11 * a22 - a12 * a21
            if det == 0:
                break
            dti = (f1 * a22 - f2 * a12) / det
            dtj = (a11 * f2 - a21 * f1) / det
            ti -= dti
            tj -= dtj
            if abs(dti) + abs(dtj) < 1e-14:
                break
        else:
            raise DegenerateError("outer tangent Newton did not converge")
        out.append((ti % (2 * np.pi), tj % (2 * np.pi)))
    return out


def non_eclipse_check(table, samples=512):
    """Verify that the convex hull of every obstacle pair avoids all others.

    Distances are computed between inscribed sample polygons and corrected by
    the chord sagitta of each polygon, so the reported margin is a lower bound.
    """
    obs = table.obstacles
    m = len(obs)
    if m < 3:
        raise PreconditionError("a table needs at least 3 obstacles (got %d)" % m)
    polys, ts, sag = [], [], []
    for c in obs:
        c.check_convex()
        p, t = c.sample_np(samples)
        polys.append(p)
        ts.append(t)
        sag.append(_sagitta(c, samples))
    clearance = math.inf
    for i in range(m):
        for j in range(i + 1, m):
            d = _kernels.convex_polygon_distance(polys[i], polys[j]) - sag[i] - sag[j]
            clearance = min(clearance, d)
            if d <= 0:
                return NonEclipseReport(False, float(d), (i, j), float(d))
    margin, witness, details = math.inf, None, []
    for i in range(m):
        for j in range(i + 1, m):
            try:
                tang = _outer_tangents(obs[i], obs[j], polys[i], ts[i], polys[j], ts[j])
            except DegenerateError as exc:
                raise DegenerateError("tangent solver failed for obstacles %d,%d: %s" % (i + 1, j + 1, exc))
            extra = np.array([obs[i].point_t(tt[0], fp) for tt in tang] + [obs[j].point_t(tt[1], fp) for tt in tang])
            from scipy.spatial import ConvexHull
            pts = np.vstack([polys[i], polys[j], extra])
            hull = pts[ConvexHull(pts).vertices]
            hsag = max(sag[i], sag[j])
            for k in range(m):
                if k in (i, j):
                    continue
                d = _kernels.convex_polygon_distance(hull, polys[k]) - hsag - sag[k]
                details.append(((i, j, k), float(d)))
                if d < margin:
                    margin, witness = d, (i, j, k)
    passed = margin > table.required_margin
    return NonEclipseReport(bool(passed), float(margin), witness, float(clearance), details)


# ---------------------------------------------------------------------------
# config files


def _split(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def curve_from_record(rec):
    kind = rec.get("kind", "").strip()
    try:
        center = _split(rec["center"])
        if len(center) != 2:
            raise ValidationError("center needs two coordinates")
        if kind == "circle":
            return Circle(center, rec["radius"])
        if kind == "ellipse":
            return Ellipse(center, rec["a"], rec["b"], rec.get("rotation", "0"))
        if kind == "fourier-circle":
            eps = _split(rec.get("eps", ""))
            phases = _split(rec["phases"]) if "phases" in rec else None
            return FourierCircle(center, rec["radius"], eps, phases)
    except KeyError as exc:
        raise ValidationError("obstacle record missing field %s" % exc) from exc
    raise ValidationError("unknown obstacle kind %r" % kind)


def table_from_config(parser, validate=True):
    if not parser.has_section("table"):
        raise ValidationError("table file needs a [table] section")
    sec = parser["table"]
    names = sorted((s for s in parser.sections() if s.lower().startswith("obstacle")),
                   key=lambda s: int(s.split()[-1]) if s.split()[-1].isdigit() else 0)
    if not names:
        raise ValidationError("table file has no [obstacle N] sections")
    curves = [curve_from_record(dict(parser[s])) for s in names]
    return BilliardTable(curves, name=sec.get("name", "table"),
                         non_eclipse_margin=float(sec.get("non_eclipse_margin", "1e-6")),
                         samples=int(sec.get("samples", "512")), validate=validate)


def load_table(path, validate=True):
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ValidationError("cannot read table file %s: %s" % (path, exc)) from exc
    except configparser.Error as exc:
        raise ValidationError("malformed table file %s: %s" % (path, exc)) from exc
    return table_from_config(parser, validate=validate)


def symmetric_three_disks(side="6", radius="1"):
    """Three equal disks on an equilateral triangle with the given side."""
    s = str(side)
    return BilliardTable([Circle(["0", "0"], radius), Circle([s, "0"], radius),
                          Circle(["(%s)/2" % s, "(%s)*sqrt(3)/2" % s], radius)],
                         name="three-disks-side-%s" % s)
