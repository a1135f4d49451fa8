"""Periodic and homoclinic billiard orbits from the length functional.

A billiard orbit with itinerary w is a critical point of the total length of
the broken line through gamma_{w_0}(t_0), gamma_{w_1}(t_1), ...  On a
dispersing table with non-eclipse the critical point is a nondegenerate
minimum, so we warm start with coordinate descent in double precision and
finish with Newton's method at the working precision.  The Hessian is
(cyclic) tridiagonal, since each t_j only talks to its two neighbours.
"""
from dataclasses import dataclass, field
import math

import mpmath
import numpy as np
from mpmath import mp

from .billiard import PhasePoint, billiard_derivative, GRAZING_GUARD
from .errors import (AdmissibilityError, DegenerateError, InternalError, NonConvergenceError,
                     ValidationError)
from .symbolic import SymbolicWord, homoclinic_word, require_admissible

fp = mpmath.fp

STATIONARITY_TOL = mpmath.mpf("1e-40")
TRANSVERSALITY_FLOOR = 1e-4


# ---------------------------------------------------------------------------
# length functional


def _jets(curves, ts, ctx):
    return [c.derivs_t(t, 2, ctx) for c, t in zip(curves, ts)]


def _segment(A, B, ctx):
    dx, dy = B[0] - A[0], B[1] - A[1]
    ln = ctx.sqrt(dx * dx + dy * dy)
    return ln, (dx / ln, dy / ln)


def _quad(a, u, b, ln):
    """a^T (I - u u^T) b / ln."""
    return (a[0] * b[0] + a[1] * b[1] - (a[0] * u[0] + a[1] * u[1]) * (b[0] * u[0] + b[1] * u[1])) / ln


def _functional(curves, ts, ctx, cyclic, left=None, right=None):
    """Length, gradient, Hessian diagonal and off-diagonal of the broken line.

    Cyclic chains close up; open chains run from the fixed point ``left``
    through the free points to the fixed point ``right``.
    """
    J = _jets(curves, ts, ctx)
    n = len(ts)
    X = [d[0] for d in J]
    if cyclic:
        pts = X + [X[0]]
    else:
        pts = [left] + X + [right]
    segs = [_segment(pts[k], pts[k + 1], ctx) for k in range(len(pts) - 1)]
    total = sum(s[0] for s in segs) if ctx is fp else mp.fsum(s[0] for s in segs)
    g, diag, off = [], [], []
    for j in range(n):
        if cyclic:
            sp, sn = segs[j - 1], segs[j]
        else:
            sp, sn = segs[j], segs[j + 1]
        d1, d2 = J[j][1], J[j][2]
        du = (sp[1][0] - sn[1][0], sp[1][1] - sn[1][1])
        g.append(d1[0] * du[0] + d1[1] * du[1])
        diag.append(d2[0] * du[0] + d2[1] * du[1] + _quad(d1, sp[1], d1, sp[0]) + _quad(d1, sn[1], d1, sn[0]))
    nn = n if cyclic else n - 1
    for j in range(nn):
        sn = segs[j] if cyclic else segs[j + 1]
        off.append(-_quad(J[j][1], sn[1], J[(j + 1) % n][1], sn[0]))
    return total, g, diag, off, J, segs


def _solve_tridiag(diag, off, rhs, cyclic):
    """Solve the symmetric (cyclic) tridiagonal system; plain Python scalars."""
    n = len(diag)
    if cyclic and n == 2:
        e = off[0] + off[1]
        det = diag[0] * diag[1] - e * e
        return [(diag[1] * rhs[0] - e * rhs[1]) / det, (diag[0] * rhs[1] - e * rhs[0]) / det]
    if not cyclic or n == 1:
        return _thomas(list(diag), list(off), list(rhs))
    # Sherman-Morrison on the corner entries off[n-1]
    corner = off[n - 1]
    gamma = -diag[0]
    b = list(diag)
    b[0] = diag[0] - gamma
    b[-1] = diag[-1] - corner * corner / gamma
    sub = list(off[:n - 1])
    y = _thomas(b, sub, list(rhs))
    u = [0] * n
    u[0] = gamma
    u[-1] = corner
    z = _thomas(b, sub, u)
    fac = (y[0] + corner * y[-1] / gamma) / (1 + z[0] + corner * z[-1] / gamma)
    return [y[k] - fac * z[k] for k in range(n)]


def _thomas(b, c, d):
    n = len(b)
    cp = [0] * n
    dp = [0] * n
    cp[0] = c[0] / b[0] if n > 1 else 0
    dp[0] = d[0] / b[0]
    for i in range(1, n):
        m = b[i] - c[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = c[i] / m
        dp[i] = (d[i] - c[i - 1] * dp[i - 1]) / m
    x = [0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _seed(curves, neighbours):
    ts = []
    for c, (a, b) in zip(curves, neighbours):
        pts, tt = c.sample_np(256)
        cost = np.hypot(*(pts - a).T) + np.hypot(*(pts - b).T)
        ts.append(float(tt[int(np.argmin(cost))]))
    return ts


def _minimize_fp(curves, ts, cyclic, left=None, right=None, sweeps=200, tol=1e-11):
    """Coordinate descent then damped Newton, double precision."""
    ts = [float(t) for t in ts]
    n = len(ts)
    for _ in range(sweeps):
        L, g, diag, off, _, _ = _functional(curves, ts, fp, cyclic, left, right)
        if max(abs(x) for x in g) < 1e-4:
            break
        for j in range(n):
            # one Newton step on coordinate j with everything else frozen
            _, gj, dj, _, _, _ = _functional(curves, ts, fp, cyclic, left, right)
            h = dj[j] if dj[j] > 1e-3 else 1.0
            ts[j] -= max(min(gj[j] / h, 0.3), -0.3)
    for _ in range(100):
        L, g, diag, off, _, _ = _functional(curves, ts, fp, cyclic, left, right)
        gmax = max(abs(x) for x in g)
        if gmax < tol:
            return ts, gmax
        step = _solve_tridiag(diag, off, g, cyclic)
        if sum(a * b for a, b in zip(step, g)) <= 0:
            step = list(g)
        lam = 1.0
        while lam > 1e-8:
            trial = [t - lam * s for t, s in zip(ts, step)]
            if _functional(curves, trial, fp, cyclic, left, right)[0] < L + 1e-15 * abs(L):
                ts = trial
                break
            lam /= 2
        else:
            break
    L, g, *_ = _functional(curves, ts, fp, cyclic, left, right)
    return ts, max(abs(x) for x in g)


def _refine_mp(curves, ts, cyclic, left=None, right=None, tol=None, maxit=60):
    """Newton on the gradient at working precision."""
    if tol is None:
        tol = max(STATIONARITY_TOL, mp.eps * 2 ** 20)
    ts = [mp.mpf(t) for t in ts]
    best = None
    stall = 0
    for _ in range(maxit):
        L, g, diag, off, J, segs = _functional(curves, ts, mp, cyclic, left, right)
        gmax = max(abs(x) for x in g)
        if best is not None and gmax >= best:
            stall += 1
        else:
            stall = 0
            best = gmax
        if gmax < mp.eps * 64 or stall >= 2:
            break
        step = _solve_tridiag(diag, off, g, cyclic)
        ts = [t - s for t, s in zip(ts, step)]
    L, g, diag, off, J, segs = _functional(curves, ts, mp, cyclic, left, right)
    gmax = max(abs(x) for x in g)
    # report the gradient per unit arclength
    grad_s = max(abs(x) / mp.sqrt(J[k][1][0] ** 2 + J[k][1][1] ** 2) for k, x in enumerate(g))
    if grad_s > tol:
        raise NonConvergenceError("length-functional Newton stalled at gradient %s" % mpmath.nstr(grad_s, 5),
                                  residual=grad_s)
    return ts, grad_s, J, segs


def _angles(J, segs, cyclic):
    """Outgoing angle at each free point from the chord to the next point."""
    out = []
    n = len(J)
    for j in range(n):
        u = segs[j][1] if cyclic else segs[j + 1][1]
        d1 = J[j][1]
        sp = mp.sqrt(d1[0] ** 2 + d1[1] ** 2)
        T = (d1[0] / sp, d1[1] / sp)
        sn = u[0] * T[0] + u[1] * T[1]
        cs = u[0] * T[1] - u[1] * T[0]
        out.append(mp.atan2(sn, cs))
    return out


def _matmul(A, B):
    return [[A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
            [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]]]


def _matvec(A, v):
    return (A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1])


def _inv2(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return [[A[1][1] / det, -A[0][1] / det], [-A[1][0] / det, A[0][0] / det]]


def _unit(v):
    n = mp.sqrt(v[0] ** 2 + v[1] ** 2)
    return (v[0] / n, v[1] / n)


# ---------------------------------------------------------------------------
# periodic orbits


@dataclass
class PeriodicOrbit:
    word: SymbolicWord
    collision_params: list
    collision_angles: list
    monodromy: list
    lam: object
    LE: object
    flow_period: object
    flights: list
    residual: object
    t_params: list = field(repr=False, default_factory=list)
    derivatives: list = field(repr=False, default_factory=list)

    @property
    def period(self):
        return len(self.word)

    def point(self, j):
        j %= self.period
        return PhasePoint(self.word.symbols[j] - 1, self.collision_params[j], self.collision_angles[j])

    def points(self):
        return [self.point(j) for j in range(self.period)]

    @property
    def trace(self):
        return self.monodromy[0][0] + self.monodromy[1][1]

    @property
    def det(self):
        """Monodromy determinant as the product of the one-step determinants.

        Expanding the product matrix instead would cancel catastrophically
        once |M| ~ lambda^{-n} exceeds the working precision.
        """
        return _det_product(self.derivatives)

    @property
    def matrix_det(self):
        M = self.monodromy
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]

    def eigenvector(self, which="unstable", at=0):
        """Unit eigenvector of the monodromy based at collision ``at``."""
        M = self.monodromy
        for k in range(at):
            M = _matmul(_matmul(self.derivatives[k], M), _inv2(self.derivatives[k]))
        mu = self.lam if which == "stable" else self.det / self.lam
        a = (M[0][1], mu - M[0][0])
        b = (mu - M[1][1], M[1][0])
        v = a if abs(a[0]) + abs(a[1]) >= abs(b[0]) + abs(b[1]) else b
        return _unit(v)

    def summary(self):
        return {"word": str(self.word), "period": self.period, "lambda": self.lam, "LE": self.LE,
                "flow_period": self.flow_period, "residual": self.residual}


def _neighbour_centres(curves, cyclic, left=None, right=None):
    cs = [np.array([float(x) for x in c.params(fp)["center"]]) for c in curves]
    n = len(curves)
    out = []
    for j in range(n):
        if cyclic:
            out.append((cs[j - 1], cs[(j + 1) % n]))
        else:
            a = cs[j - 1] if j > 0 else np.array([float(left[0]), float(left[1])])
            b = cs[j + 1] if j < n - 1 else np.array([float(right[0]), float(right[1])])
            out.append((a, b))
    return out


def monodromy_from(table, points, targets):
    Ds = [billiard_derivative_to(table, x, tgt) for x, tgt in zip(points, targets)]
    M = [[mp.one, mp.zero], [mp.zero, mp.one]]
    for D in Ds:
        M = _matmul(D, M)
    return M, Ds


def billiard_derivative_to(table, x, target):
    from .billiard import jet_collision_step
    return jet_collision_step(table, x, 1, target=target).linear_part()


def _det_product(Ds):
    out = mp.one
    for D in Ds:
        out *= D[0][0] * D[1][1] - D[0][1] * D[1][0]
    return out


def eigen_split(M, det=None):
    """(lambda, det) with lambda the signed contracting eigenvalue of a hyperbolic M."""
    tr = M[0][0] + M[1][1]
    if det is None:
        det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    disc = tr * tr - 4 * det
    if disc <= 0 or abs(tr) <= 2 * mp.sqrt(abs(det)):
        raise InternalError("monodromy is not hyperbolic (trace %s)" % mpmath.nstr(tr, 8))
    big = (tr + mp.sign(tr) * mp.sqrt(disc)) / 2
    return det / big, det


def find_periodic_orbit(table, word, guard=GRAZING_GUARD, seed=None):
    """Periodic orbit realising the cyclic itinerary ``word`` (labels 1..m)."""
    word = SymbolicWord.parse(word, cyclic=True)
    word = require_admissible(word, table.m)
    curves = [table.obstacles[i] for i in word.indices()]
    if seed is None:
        t0 = _seed(curves, _neighbour_centres(curves, True))
    else:
        t0 = [float(t) for t in seed]
    ts, _ = _minimize_fp(curves, t0, True)
    ts, res, J, segs = _refine_mp(curves, ts, True)
    return _assemble_periodic(table, word, curves, ts, res, J, segs, guard)


def _assemble_periodic(table, word, curves, ts, res, J, segs, guard):
    p = len(word)
    ss = [c.s_of_t(t) for c, t in zip(curves, ts)]
    phis = _angles(J, segs, True)
    for j, ph in enumerate(phis):
        if abs(ph) >= mp.pi / 2 - guard:
            raise DegenerateError("collision %d of %s is near grazing" % (j, word))
    pts = [PhasePoint(word.symbols[j] - 1, ss[j], phis[j]) for j in range(p)]
    targets = [word.symbols[(j + 1) % p] - 1 for j in range(p)]
    M, Ds = monodromy_from(table, pts, targets)
    lam, _ = eigen_split(M, _det_product(Ds))
    flights = [s[0] for s in segs]
    ell = mp.fsum(flights)
    LE = -mp.log(abs(lam)) / p
    return PeriodicOrbit(word, ss, phis, M, lam, LE, ell, flights, res, ts, Ds)


def orbit_flow_exponent(orbit):
    """Log of the unstable multiplier per unit flow time."""
    return -mp.log(abs(orbit.lam)) / orbit.flow_period


# ---------------------------------------------------------------------------
# homoclinic segments


@dataclass
class HomoclinicSegment:
    core: PeriodicOrbit
    block: SymbolicWord
    connector: SymbolicWord
    depth: int
    word: SymbolicWord
    collision_params: list
    collision_angles: list
    flights: list
    residual: object
    anchor_indices: tuple
    unstable_dir: tuple
    stable_dir: tuple
    w_1: object
    transversality_angle: object
    derivatives: list = field(repr=False, default_factory=list)

    def point(self, j):
        return PhasePoint(self.word.symbols[j] - 1, self.collision_params[j], self.collision_angles[j])

    @property
    def anchors(self):
        return tuple(self.point(i) for i in self.anchor_indices)

    def __len__(self):
        return len(self.word)

    def stable_dir_at(self, j):
        """Unit (ds, dphi) stable direction at collision j, pulled back from the end."""
        p, q = len(self.block), len(self.connector)
        last = (2 * self.depth - 1) * p + q
        if not 0 <= j <= last:
            raise ValidationError("collision %d outside 0..%d" % (j, last))
        vs = self.core.eigenvector("stable", 0)
        for i in range(last - 1, j - 1, -1):
            vs = _unit(_matvec(_inv2(self.derivatives[i]), vs))
        return vs


def find_homoclinic_segment(table, w_O, w_c, depth, floor=TRANSVERSALITY_FLOOR, core=None):
    """Finite orbit w_O^depth w_c w_O^depth with both ends pinned to the
    periodic orbit of w_O.

    Anchor 1 starts the last block before the connector, anchor 2 starts the
    first block after it.  ``unstable_dir``/``stable_dir`` are unit (ds, dphi)
    directions of the invariant manifolds of the periodic orbit through
    anchor 1; ``w_1`` is the slope of the stable one in the orbit's linear
    eigen-coordinates (the frame computation refines it nonlinearly).
    """
    w_O = require_admissible(SymbolicWord.parse(w_O), table.m, "block")
    w_c = SymbolicWord.parse(w_c, cyclic=False)
    if w_c.symbols == w_O.symbols:
        raise ValidationError("connector equals the block: no homoclinic excursion")
    if depth < 1:
        raise ValidationError("depth must be at least 1")
    word = homoclinic_word(w_O, w_c, depth)
    if word.symbols[0] == w_O.symbols[-1] or word.symbols[-1] == w_O.symbols[0]:
        raise AdmissibilityError("segment does not join the periodic orbit admissibly")
    if core is None:
        core = find_periodic_orbit(table, w_O)
    p, q = len(w_O), len(w_c)
    N = len(word)
    curves = [table.obstacles[i] for i in word.indices()]
    core_curves = [table.obstacles[i] for i in w_O.indices()]
    left = core_curves[-1].derivs_t(core.t_params[-1], 0, mp)[0]
    right = core_curves[0].derivs_t(core.t_params[0], 0, mp)[0]
    left_f = (float(left[0]), float(left[1]))
    right_f = (float(right[0]), float(right[1]))
    nb = _neighbour_centres(curves, False, left_f, right_f)
    seeds = _seed(curves, nb)
    for j in range(N):
        if j < depth * p:
            seeds[j] = float(core.t_params[j % p])
        elif j >= depth * p + q:
            seeds[j] = float(core.t_params[(j - depth * p - q) % p])
    ts, _ = _minimize_fp(curves, seeds, False, left_f, right_f)
    ts, res, J, segs = _refine_mp(curves, ts, False, left, right)
    ss = [c.s_of_t(t) for c, t in zip(curves, ts)]
    phis = _angles(J, segs, False)
    pts = [PhasePoint(word.symbols[j] - 1, ss[j], phis[j]) for j in range(N)]
    Ds = [billiard_derivative_to(table, pts[j], word.symbols[j + 1] - 1) for j in range(N - 1)]
    i1, i2 = (depth - 1) * p, depth * p + q
    # unstable direction: push the orbit's unstable eigenvector forward from
    # the far left; stable direction: pull the stable one back from the far right
    vu = core.eigenvector("unstable", 0)
    for j in range(0, i1):
        vu = _unit(_matvec(Ds[j], vu))
    vs = core.eigenvector("stable", 0)
    last = (2 * depth - 1) * p + q
    for j in range(last - 1, i1 - 1, -1):
        vs = _unit(_matvec(_inv2(Ds[j]), vs))
    cross = vu[0] * vs[1] - vu[1] * vs[0]
    angle = mp.asin(min(abs(cross), mp.one))
    if angle < floor:
        raise DegenerateError("homoclinic intersection nearly tangent (angle %s)" % mpmath.nstr(angle, 5))
    # slope of the stable direction in the eigenbasis (e_s, e_u) of the core
    es = core.eigenvector("stable", 0)
    eu = core.eigenvector("unstable", 0)
    det = es[0] * eu[1] - es[1] * eu[0]
    a = (vs[0] * eu[1] - vs[1] * eu[0]) / det
    b = (es[0] * vs[1] - es[1] * vs[0]) / det
    w1 = b / a if a else mp.inf
    return HomoclinicSegment(core, w_O, w_c, depth, word, ss, phis, [s[0] for s in segs], res,
                             (i1, i2), vu, vs, w1, angle, Ds)
