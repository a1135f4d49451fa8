"""The billiard map between obstacles of an open dispersing table.

Phase points are (obstacle, s, phi): s is the arclength position on the
(counterclockwise) obstacle and phi is the angle between the outward normal
n = (T_y, -T_x) and the outgoing velocity, positive towards the tangent T.
So the velocity leaving the obstacle is ``cos(phi) n + sin(phi) T``.

Obstacle indices are 0-based here; symbolic words use the labels 1..m.
"""
from dataclasses import dataclass
import math

import mpmath
import numpy as np
from mpmath import mp

from .errors import EscapeError, GrazingError, InternalError, ValidationError
from .geometry import Circle
from .series import JET_CEILING, Jet2, Series2, asin, cos, sin, sqrt

fp = mpmath.fp

GRAZING_GUARD = 1e-3
BRACKET_NODES = 64
DEFAULT_JET_CEILING = 8
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    obstacle: int
    s: object
    phi: object

    def check(self, table=None, guard=GRAZING_GUARD):
        if table is not None and not 0 <= self.obstacle < table.m:
            raise ValidationError("obstacle index %d outside 0..%d" % (self.obstacle, table.m - 1))
        if abs(float(self.phi)) >= math.pi / 2 - guard:
            raise GrazingError("|phi| = %.6g is within %g of grazing" % (abs(float(self.phi)), guard))
        return self

    def reversed(self):
        """Same collision with the velocity reversed (time reversal)."""
        return PhasePoint(self.obstacle, self.s, -self.phi)

    def as_tuple(self):
        return (self.obstacle, self.s, self.phi)


def _ctx(x):
    return mp if isinstance(x, mpmath.mpf) else fp


def _frame(curve, s, ctx):
    """Point and unit tangent at arclength s."""
    if isinstance(curve, Circle):
        p = curve.params(ctx)
        R = p["radius"]
        cx, cy = p["center"]
        t = s / R
        c, sn = ctx.cos(t), ctx.sin(t)
        return (cx + R * c, cy + R * sn), (-sn, c)
    t = curve.t_of_s(s)
    d = curve.derivs_t(t, 1, ctx)
    (x, y), (dx, dy) = d
    sp = ctx.sqrt(dx * dx + dy * dy)
    return (x, y), (dx / sp, dy / sp)


def outgoing_ray(table, x):
    """Base point and unit velocity of the ray leaving x."""
    ctx = _ctx(x.s)
    P, T = _frame(table.obstacles[x.obstacle], x.s, ctx)
    c, sn = ctx.cos(x.phi), ctx.sin(x.phi)
    n = (T[1], -T[0])
    v = (c * n[0] + sn * T[0], c * n[1] + sn * T[1])
    return P, v


# ---------------------------------------------------------------------------
# ray / obstacle intersection


def _hit_circle(curve, P, v, ctx):
    p = curve.params(ctx)
    R = p["radius"]
    wx, wy = P[0] - p["center"][0], P[1] - p["center"][1]
    b = v[0] * wx + v[1] * wy
    disc = b * b - (wx * wx + wy * wy - R * R)
    if disc <= 0:
        return None
    tau = -b - ctx.sqrt(disc)
    if tau <= 0:
        return None
    qx, qy = wx + tau * v[0], wy + tau * v[1]
    t = ctx.atan2(qy, qx)
    if t < 0:
        t += 2 * ctx.pi
    return tau, R * t


def _samples(curve):
    key = ("bracket", BRACKET_NODES)
    if key not in curve._cache:
        curve._cache[key] = curve.sample_np(BRACKET_NODES)
    return curve._cache[key]


def _newton_bracketed(f, df, a, b, ctx, tol, maxit=200):
    """Root of f in [a, b] (f(a), f(b) of opposite signs), Newton with bisection fallback."""
    fa = f(a)
    if fa > 0:
        sign = -1
    else:
        sign = 1
    t = (a + b) / 2
    for _ in range(maxit):
        ft = f(t) * sign
        if ft < 0:
            a = t
        else:
            b = t
        d = df(t) * sign
        step_ok = False
        if d > 0:
            tn = t - ft / d
            if a < tn < b:
                step_ok = True
        if not step_ok:
            tn = (a + b) / 2
        if abs(tn - t) <= tol * (1 + abs(tn)):
            return tn
        t = tn
    raise InternalError("bracketed Newton did not converge")


def _support_point(curve, P, v, t0, sign, ctx, tol):
    """Local extremum of f(t) = cross(v, gamma(t) - P) near t0 (max if sign>0)."""
    t = ctx.convert(t0)
    for _ in range(100):
        d = curve.derivs_t(t, 2, ctx)
        f1 = v[0] * d[1][1] - v[1] * d[1][0]
        f2 = v[0] * d[2][1] - v[1] * d[2][0]
        if sign * f2 >= 0:
            # wrong curvature of f here; nudge along the gradient
            step = sign * 0.05 * (1 if f1 > 0 else -1)
        else:
            step = -f1 / f2
            step = max(min(step, 0.3), -0.3)
        t += step
        if abs(step) <= tol:
            break
    d = curve.derivs_t(t, 0, ctx)[0]
    return t, v[0] * (d[1] - P[1]) - v[1] * (d[0] - P[0])


def _hit_curve(curve, P, v, ctx):
    if ctx is mp:
        return _hit_curve_mp(curve, P, v)
    hit = _hit_curve_t(curve, P, v, ctx)
    if hit is None:
        return None
    return hit[0], curve.s_of_t(hit[1])


def _hit_curve_mp(curve, P, v):
    """Double-precision root, then Newton at working precision.  Grazing hits
    are rejected upstream, so the double root is well separated."""
    hit = _hit_curve_t(curve, (float(P[0]), float(P[1])), (float(v[0]), float(v[1])), fp)
    if hit is None:
        return None
    r = mp.mpf(hit[1])
    tol = mp.eps * 16
    prev = mp.inf
    for _ in range(40):
        d = curve.derivs_t(r, 1, mp)
        f = v[0] * (d[0][1] - P[1]) - v[1] * (d[0][0] - P[0])
        df = v[0] * d[1][1] - v[1] * d[1][0]
        step = f / df
        if abs(step) < mp.sqrt(mp.eps) and abs(step) >= prev:
            # rounding noise in f over a shallow crossing: steps no longer shrink
            break
        r -= step
        if abs(step) <= tol * (1 + abs(r)):
            break
        prev = abs(step)
    else:
        raise InternalError("ray/curve Newton polish did not converge")
    g = curve.derivs_t(r, 0, mp)[0]
    tau = v[0] * (g[0] - P[0]) + v[1] * (g[1] - P[1])
    return tau, curve.s_of_t(r % (2 * mp.pi))


def _hit_curve_t(curve, P, v, ctx):
    pts, ts = _samples(curve)
    fv = float(v[0]) * (pts[:, 1] - float(P[1])) - float(v[1]) * (pts[:, 0] - float(P[0]))
    tol = ctx.eps * 16 if ctx is mp else 1e-15
    tmax, fmax = _support_point(curve, P, v, ts[int(np.argmax(fv))], 1, ctx, tol)
    tmin, fmin = _support_point(curve, P, v, ts[int(np.argmin(fv))], -1, ctx, tol)
    if fmax <= 0 or fmin >= 0:
        return None
    two_pi = 2 * ctx.pi

    def f(t):
        g = curve.derivs_t(t, 0, ctx)[0]
        return v[0] * (g[1] - P[1]) - v[1] * (g[0] - P[0])

    def df(t):
        g = curve.derivs_t(t, 1, ctx)[1]
        return v[0] * g[1] - v[1] * g[0]

    a1, b1 = tmin, tmax
    while b1 <= a1:
        b1 += two_pi
    a2, b2 = b1, tmin
    while b2 <= a2:
        b2 += two_pi
    best = None
    for a, b in ((a1, b1), (a2, b2)):
        r = _newton_bracketed(f, df, a, b, ctx, tol)
        g = curve.derivs_t(r, 0, ctx)[0]
        tau = v[0] * (g[0] - P[0]) + v[1] * (g[1] - P[1])
        if best is None or tau < best[0]:
            best = (tau, r)
    tau, r = best
    if tau <= 0:
        return None
    return tau, r % two_pi


def hit_obstacle(curve, P, v):
    """(flight, arclength) of the first entry of the ray P + tau v into ``curve``, or None."""
    ctx = _ctx(P[0])
    if isinstance(curve, Circle):
        return _hit_circle(curve, P, v, ctx)
    return _hit_curve(curve, P, v, ctx)


def _landing_angle(curve, s, v, ctx):
    _, T = _frame(curve, s, ctx)
    sn = v[0] * T[0] + v[1] * T[1]
    cs = -(v[0] * T[1] - v[1] * T[0])
    return ctx.atan2(sn, cs)


def billiard_step(table, x, guard=GRAZING_GUARD, target=None):
    """Next collision of the trajectory leaving x.

    Returns ``(x_next, flight)``.  With ``target`` the landing obstacle is
    prescribed (no search over the other obstacles).
    """
    x.check(table, guard)
    ctx = _ctx(x.s)
    P, v = outgoing_ray(table, x)
    hits = []
    candidates = [target] if target is not None else range(table.m)
    for j in candidates:
        if j == x.obstacle:
            continue
        h = hit_obstacle(table.obstacles[j], P, v)
        if h is not None:
            hits.append((h[0], j, h[1]))
    if not hits:
        raise EscapeError("ray leaving obstacle %d escapes the table" % x.obstacle,
                          direction=(float(v[0]), float(v[1])))
    hits.sort(key=lambda h: h[0])
    if len(hits) > 1 and abs(float(hits[1][0] - hits[0][0])) < TIE_TOL:
        raise InternalError("tie between obstacles %d and %d" % (hits[0][1], hits[1][1]))
    tau, j, s_new = hits[0]
    phi_new = _landing_angle(table.obstacles[j], s_new, v, ctx)
    if abs(float(phi_new)) >= math.pi / 2 - guard:
        raise GrazingError("collision with obstacle %d at |phi| = %.6g is near grazing" % (j, abs(float(phi_new))))
    return PhasePoint(j, s_new, phi_new), tau


def iterate(table, x, steps, guard=GRAZING_GUARD):
    """List of the successive collisions x_0 = x, ..., x_steps and the flights."""
    pts, flights = [x], []
    for _ in range(steps):
        x, tau = billiard_step(table, x, guard)
        pts.append(x)
        flights.append(tau)
    return pts, flights


def random_phase_points(table, n, rng, margin=0.05, ctx=fp, max_tries=None):
    """n phase points whose outgoing ray lands on the table away from grazing.

    Each draw aims from a uniform point of a random obstacle at a uniform point
    of another one, which keeps the acceptance rate high on open tables.
    ``rng`` is a numpy Generator; points are in double precision unless ``ctx``
    is ``mp``.
    """
    out = []
    tries = 0
    max_tries = max_tries or 50 * n
    guard = max(margin, GRAZING_GUARD)
    while len(out) < n:
        tries += 1
        if tries > max_tries:
            raise InternalError("sampled %d candidates for %d phase points" % (tries, n))
        i, j = rng.choice(table.m, size=2, replace=False)
        ci, cj = table.obstacles[i], table.obstacles[j]
        s = ctx.mpf(float(rng.random() * ci.length_fp()))
        P, T = _frame(ci, s, ctx)
        Q, _ = _frame(cj, ctx.mpf(float(rng.random() * cj.length_fp())), ctx)
        d = (Q[0] - P[0], Q[1] - P[1])
        nrm = (T[1], -T[0])
        phi = ctx.atan2(d[0] * T[0] + d[1] * T[1], d[0] * nrm[0] + d[1] * nrm[1])
        if abs(float(phi)) >= math.pi / 2 - guard:
            continue
        x = PhasePoint(int(i), s, phi)
        try:
            billiard_step(table, x, guard)
        except (EscapeError, GrazingError, InternalError):
            continue
        out.append(x)
    return out


# ---------------------------------------------------------------------------
# jets of one collision


def _curve_series(curve, s0, order, d):
    """gamma(s0 + d) and the unit tangent there, as series in the Series2 ``d``."""
    x, y = curve.taylor_s(s0, order + 1)
    X = x.truncate(order).compose(d)
    Y = y.truncate(order).compose(d)
    TX = x.deriv().truncate(order).compose(d)
    TY = y.deriv().truncate(order).compose(d)
    return X, Y, TX, TY


def jet_collision_step(table, x, order, coords="phi", target=None, guard=GRAZING_GUARD,
                       ceiling=DEFAULT_JET_CEILING, return_flight=False):
    """Truncated Taylor expansion of one collision step around x.

    Displacements are (ds, dphi), or (ds, dp) with p = sin(phi) when
    ``coords="p"``.  The landing point solves cross(v, gamma_j(s') - P) = 0;
    each chord sweep below fixes one more order of s', since the residual's
    derivative in s' is the constant cross(v, T') at the base point plus
    higher order terms.
    """
    if order > min(ceiling, JET_CEILING):
        raise ValidationError("jet order %d above the ceiling %d" % (order, min(ceiling, JET_CEILING)))
    if coords not in ("phi", "p"):
        raise ValidationError("coords must be 'phi' or 'p'")
    ctx = _ctx(x.s)
    base, tau0 = billiard_step(table, x, guard, target=target)
    K = order
    d1 = Series2.variable(0, 0, K)
    d2 = Series2.variable(1, 0, K)
    Px, Py, Tx, Ty = _curve_series(table.obstacles[x.obstacle], x.s, K, d1)
    if coords == "phi":
        ang = x.phi + d2
        cs, sn = cos(ang), sin(ang)
        center = (x.s, x.phi)
    else:
        p0 = ctx.sin(x.phi)
        sn = p0 + d2
        cs = sqrt(1 - sn * sn)
        center = (x.s, p0)
    vx = cs * Ty + sn * Tx
    vy = -cs * Tx + sn * Ty
    cj = table.obstacles[base.obstacle]
    xj, yj = cj.taylor_s(base.s, K + 1)
    dxj, dyj = xj.deriv(), yj.deriv()
    xj, yj = xj.truncate(K), yj.truncate(K)
    v0 = (vx.const, vy.const)
    slope = v0[0] * dyj.c[0] - v0[1] * dxj.c[0]
    if not slope:
        raise InternalError("singular collision equation (grazing landing)")
    sig = Series2(K)
    for _ in range(K):
        F = vx * (yj.compose(sig) - Py) - vy * (xj.compose(sig) - Px)
        sig = sig - F / slope
    TXj = dxj.truncate(K).compose(sig)
    TYj = dyj.truncate(K).compose(sig)
    sphi = vx * TXj + vy * TYj
    out_s = sig + base.s
    if coords == "phi":
        out_a = asin(sphi)
        out_a.c[0] = base.phi
    else:
        out_a = sphi
    jet = Jet2(center, (out_s, out_a))
    if return_flight:
        flight = vx * (xj.compose(sig) - Px) + vy * (yj.compose(sig) - Py)
        return jet, base, flight
    return jet


def billiard_derivative(table, x, coords="phi", guard=GRAZING_GUARD):
    """2x2 derivative of the billiard map at x, from the order-1 collision jet."""
    return jet_collision_step(table, x, 1, coords=coords, guard=guard).linear_part()


def cycle_jet(table, points, order, coords="phi", targets=None):
    """Composite jet of len(points) consecutive steps starting at points[0].

    ``points`` are the collisions visited; the landing arclengths are
    re-expressed on the representative used by the next point, so cyclic
    orbits close up consistently.
    """
    jets = []
    n = len(points)
    for k, x in enumerate(points):
        tgt = None if targets is None else targets[k]
        J = jet_collision_step(table, x, order, coords=coords, target=tgt)
        nxt = points[(k + 1) % n]
        J = _align(table, J, nxt.s)
        jets.append(J)
    out = jets[0]
    for J in jets[1:]:
        out = J(out)
    return out


def _align(table, J, s_ref):
    """Shift the s-output of J by a multiple of the obstacle length towards s_ref."""
    s_out = J.comps[0].const
    ctx = _ctx(s_out)
    # the landing obstacle is not recorded on the jet; infer the wrap length
    diff = s_ref - s_out
    if abs(diff) < 1e-6:
        return J
    for c in table.obstacles:
        L = c.length if ctx is mp else c.length_fp()
        k = int(round(float(diff / L)))
        if k and abs(diff - k * L) < 1e-6:
            return J.translate_output((k * L, 0))
    return J
