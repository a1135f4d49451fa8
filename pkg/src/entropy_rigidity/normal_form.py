"""Birkhoff normal form at a hyperbolic periodic orbit and the homoclinic frame.

Jets are taken in the symplectic collision coordinates (s, p = sin phi), in
which the billiard map preserves ds dp exactly.  The normal form

    N(xi, eta) = (Delta(xi eta) xi, Delta(xi eta)^{-1} eta),
    Delta(z) = a_0 + a_1 z + a_2 z^2 + ...,   a_0 = lambda,

is reached by a unit-determinant eigenbasis change followed by Lie
transforms exp(X_H), one homogeneous degree at a time, so every coordinate
change is area preserving up to the truncation order.
"""
from dataclasses import dataclass, field
import random

import mpmath
from mpmath import mp

from .billiard import jet_collision_step
from .errors import DegenerateError, DomainError, NonConvergenceError, ValidationError
from .series import JET_CEILING, Jet2, Series1, Series2, compose, power, sqrt

DEFAULT_K = 3


# ---------------------------------------------------------------------------
# small helpers


def _pad(s, order):
    return s if s.order == order else s.truncate(order)


def _linear_jet(matrix, center, value, order):
    return Jet2.linear(matrix, center=center, value=value, order=order)


def _eig_hyperbolic(A):
    tr = A[0][0] + A[1][1]
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    disc = tr * tr - 4 * det
    if disc <= 0:
        raise DomainError("linear part has complex or double eigenvalues (trace %s)" % mpmath.nstr(tr, 8))
    big = (tr + mp.sign(tr) * mp.sqrt(disc)) / 2
    lam = det / big
    if abs(lam) >= 1 or abs(big) <= 1:
        raise DomainError("linear part is not a saddle")
    return lam, big, det


def _eigvec(A, mu):
    a = (A[0][1], mu - A[0][0])
    b = (mu - A[1][1], A[1][0])
    v = a if abs(a[0]) + abs(a[1]) >= abs(b[0]) + abs(b[1]) else b
    n = mp.sqrt(v[0] ** 2 + v[1] ** 2)
    return (v[0] / n, v[1] / n)


def hamiltonian_flow(H, order, t=1):
    """Time-t map of dxi/dt = dH/deta, deta/dt = -dH/dxi, as a jet at the origin.

    H must have no terms below degree 3, so the Lie series terminates within
    the truncation order.
    """
    X1 = _pad(H.deriv(1), order) * t
    X2 = _pad(H.deriv(0), order) * (-t)
    comps = []
    for var in (0, 1):
        term = Series2.variable(var, 0, order)
        acc = term.copy()
        for k in range(1, order + 1):
            term = (X1 * _pad(term.deriv(0), order) + X2 * _pad(term.deriv(1), order)) / k
            if term.max_abs() == 0:
                break
            acc = acc + term
        comps.append(acc)
    return Jet2((0, 0), comps)


def normal_form_map(a, center, order, power_=1):
    """Jet of N_Delta^power_ around ``center`` (Delta given by coefficients a)."""
    c0, c1 = center
    xi = Series2.variable(0, c0, order)
    eta = Series2.variable(1, c1, order)
    z = xi * eta
    Dz = Series1(list(a)).compose(z)
    if power_ >= 0:
        f = power(Dz, power_)
        g = power(Dz, -power_) if power_ else Dz * 0 + 1
    else:
        f = power(Dz, power_)
        g = power(Dz, -power_)
    return Jet2(center, (f * xi, g * eta))


def delta_inverse(a):
    """Coefficients of 1/Delta."""
    s = Series1(list(a))
    return (1 / s).c


# ---------------------------------------------------------------------------
# return map


def return_map_jet(table, orbit, order, base=0, coords="p"):
    """Jet of the p-fold billiard map around collision ``base`` of a periodic orbit."""
    if order > JET_CEILING:
        raise ValidationError("order %d above the jet ceiling %d" % (order, JET_CEILING))
    p = orbit.period
    pts = [orbit.point(base + j) for j in range(p)]
    targets = [orbit.point(base + j + 1).obstacle for j in range(p)]
    return _chain_jet(table, pts, targets, order, coords, close_on=pts[0].s)


def _chain_jet(table, pts, targets, order, coords, close_on=None):
    out = None
    n = len(pts)
    for k in range(n):
        J = jet_collision_step(table, pts[k], order, coords=coords, target=targets[k], ceiling=JET_CEILING)
        ref = pts[k + 1].s if k + 1 < n else close_on
        if ref is not None:
            J = _align_s(table, J, targets[k], ref)
        out = J if out is None else J(out)
    return out


def _align_s(table, J, obstacle, s_ref):
    L = table.obstacles[obstacle].length
    k = mp.nint((s_ref - J.comps[0].const) / L)
    if k:
        J = J.translate_output((k * L, 0))
    return J


def phase_to_coords(x, coords="p"):
    return (x.s, mp.sin(x.phi)) if coords == "p" else (x.s, x.phi)


# ---------------------------------------------------------------------------
# Birkhoff extraction


@dataclass
class NormalForm:
    lam: object
    a: list
    conjugacy: Jet2
    inverse: Jet2
    normalized: Jet2
    residual: object
    center: tuple
    order: int
    b: list = field(default_factory=list)
    coords: str = "p"

    @property
    def K(self):
        return len(self.a) - 1

    def delta(self, z):
        return mp.fsum(ak * z ** k for k, ak in enumerate(self.a))

    def map_jet(self, center, power_=1, order=None):
        return normal_form_map(self.a, center, order or self.order, power_)

    def apply(self, point, power_=1):
        """N^power_ at a point (exact for the truncated Delta)."""
        xi, eta = point
        d = self.delta(xi * eta)
        return (d ** power_ * xi, d ** (-power_) * eta)


def extract_birkhoff(G, K=DEFAULT_K, tol=None):
    """Normal form of a saddle fixed-point jet G (center = fixed point).

    The jet order must be at least 2K+1; every degree up to the jet order is
    normalized, and a_k for k > K are dropped from the report (they are still
    in ``normalized``).
    """
    order = G.order
    if order < 2 * K + 1:
        raise ValidationError("jet order %d too low for K=%d (need %d)" % (order, K, 2 * K + 1))
    z0 = G.center
    gap = max(abs(G.value[0] - z0[0]), abs(G.value[1] - z0[1]))
    if gap > mp.mpf(10) ** (-mp.dps // 3):
        raise DomainError("jet is not centred at a fixed point (offset %s)" % mpmath.nstr(gap, 5))
    A = G.linear_part()
    lam, mu, det = _eig_hyperbolic(A)
    es = _eigvec(A, lam)
    eu = _eigvec(A, mu)
    dP = es[0] * eu[1] - es[1] * eu[0]
    P = [[es[0], eu[0] / dP], [es[1], eu[1] / dP]]
    Pi = [[P[1][1], -P[0][1]], [-P[1][0], P[0][0]]]
    T = _linear_jet(Pi, z0, (0, 0), order)
    Ti = _linear_jet(P, (0, 0), z0, order)
    F = T(G(Ti))
    R, Ri = T, Ti
    for d in range(2, order + 1):
        H = Series2(order + 1)
        c1, c2 = F.comps
        for a in range(d + 2):
            b = d + 1 - a
            if a == b:
                continue
            if b >= 1:
                div = b * (lam - lam ** a * mu ** (b - 1))
                h = -c1.coeff(a, b - 1) / div
            else:
                div = a * (lam ** (a - 1) * mu ** b - mu)
                h = -c2.coeff(a - 1, b) / div
            H.set_coeff(a, b, h)
        if H.max_abs() == 0:
            continue
        Phi = hamiltonian_flow(H, order, 1)
        Phi_i = hamiltonian_flow(H, order, -1)
        F = Phi_i(F(Phi))
        R = Phi_i(R)
        Ri = Ri(Phi)
    residual = _nonresonant_norm(F)
    scale = max(abs(lam), abs(mu))
    if tol is None:
        # 1e-30 at the default 256 bits; looser at low precision, where the
        # Lie transforms lose roughly half the digits on strongly hyperbolic orbits
        tol = max(mp.mpf(10) ** (-30), mp.eps ** mp.mpf(0.4))
    if residual > tol * scale:
        raise NonConvergenceError("normal-form residual %s above tolerance %s; raise the working precision"
                                  % (mpmath.nstr(residual, 5), mpmath.nstr(tol * scale, 3)),
                                  residual=residual)
    a_all = [F.comps[0].coeff(k + 1, k) for k in range((order - 1) // 2 + 1)]
    b_all = [F.comps[1].coeff(k, k + 1) for k in range((order - 1) // 2 + 1)]
    return NormalForm(lam, a_all[:K + 1], R, Ri, F, residual, z0, order, b_all)


def _nonresonant_norm(F):
    worst = 0
    for comp, shift in ((F.comps[0], 1), (F.comps[1], -1)):
        for (a, b), v in comp.items():
            if a + b == 0:
                continue
            if a - b == shift:
                continue
            worst = max(worst, abs(v))
    return worst


def anosov_cocycle_value(nf):
    """-a_1 / lambda."""
    if len(nf.a) < 2:
        return mp.zero
    return -nf.a[1] / nf.lam


def anosov_from_jet(nf):
    """(1/2) lambda d^3 F_2 / dxi deta^2 at the origin of the normalized jet."""
    c = nf.normalized.comps[1].coeff(1, 2)
    return nf.lam * c


def anosov_from_first(nf):
    """-(1/2) lambda^{-1} d^3 F_1 / deta dxi^2 at the origin of the normalized jet."""
    c = nf.normalized.comps[0].coeff(2, 1)
    return -c / nf.lam


def resonance_consistency(nf):
    """Largest mismatch between the eta-resonant coefficients and 1/Delta."""
    inv = delta_inverse(nf.a)
    return max(abs(x - y) for x, y in zip(nf.b[:len(inv)], inv))


# ---------------------------------------------------------------------------
# random area-preserving jets (test fixtures)


def random_symplectic_jet(order, rng=None, scale=1, linear=True, center=(0, 0)):
    """Polynomial area-preserving map as a composition of shears.

    The result fixes ``center``.  Coefficients are uniform in [-scale, scale].
    """
    rng = rng or random.Random(0)

    def u():
        return mp.mpf(rng.uniform(-1, 1)) * scale

    d1 = Series2.variable(0, 0, order)
    d2 = Series2.variable(1, 0, order)
    x, y = d1, d2
    if linear:
        a, b, c = u() + 2, u(), u()
        d = (1 + b * c) / a
        x, y = a * d1 + b * d2, c * d1 + d * d2
    for _ in range(2):
        f = Series1([0, 0] + [u() for _ in range(order - 1)])
        x = x + f.compose(y)
        g = Series1([0, 0] + [u() for _ in range(order - 1)])
        y = y + g.compose(x)
    return Jet2(center, (x + center[0], y + center[1]))


def conjugated_normal_form(a, R0, order):
    """R0 o N_Delta o R0^{-1} as a jet at R0's image of the origin."""
    N = normal_form_map(a, (0, 0), order)
    R0 = R0.truncate(order)
    R0i = R0.inverse()
    return R0(N(R0i))


# ---------------------------------------------------------------------------
# homoclinic frame


@dataclass
class HomoclinicFrame:
    lam: object
    a: list
    xi_inf: object
    gamma: list
    g: list
    w_1: object
    w_1_dynamic: object
    D: list
    a_bar: list
    gamma_bar: list
    g_bar: list
    gluing: Jet2
    checks: dict
    sign: int = 1
    depth_k: int = 2
    uncertainty: dict = field(default_factory=dict)

    @property
    def g_0(self):
        return self.g[0]

    @property
    def xi_inf_sq(self):
        return self.xi_inf ** 2 * self.sign

    def trace_constants(self):
        """(C_0, B = C_1 a_1) of the trace expansion."""
        C0 = self.g[0]
        B = -2 / self.lam * self.xi_inf ** 2 * self.g[0] * self.a[1]
        return C0, B


def _locus_graph(G, order):
    """Series eta = c(xi) around xi = 0 solving Pi(G(xi, eta)) = xi eta.

    G must be centred on the eta axis.  Returns the Series1 of the second
    coordinate (absolute value) in the first one.
    """
    cx, cy = G.center
    if cx != 0:
        raise ValueError("locus solver expects a jet centred on the eta axis")
    G1, G2 = G.comps
    d1 = Series2.variable(0, 0, G.order)
    d2 = Series2.variable(1, 0, G.order)
    Phi = G1 * G2 - d1 * (d2 + cy)
    dPhi = Phi.deriv(1)
    u = Series1([0, 1] + [0] * (order - 1))
    e = Series1([0] * (order + 1))
    for _ in range(2 * order + 8):
        r = Phi.substitute(u, e)
        slope = dPhi.substitute(u, e)
        step = Series1(r.c[:order + 1]) / Series1((slope.c + [0] * (order + 1))[:order + 1])
        e = e - step
        if max(abs(c) for c in step.c) < mp.eps * 4:
            break
    return e + cy


def _recenter_on_axis(G, eta0):
    order = G.order
    u = Series2.variable(0, 0, order)
    v = Series2.variable(1, eta0, order)
    return compose(G, Jet2((0, eta0), (u, v)))


def _normalize_D(G, order):
    """Mirror correction N_D for a gluing jet centred near the eta axis."""
    c1 = _locus_graph(G, order)
    G1, G2 = G.comps
    x = Series1([0, 1] + [0] * (order - 1))
    X = G1.substitute(x, c1 - G.center[1])
    Y = G2.substitute(x, c1 - G.center[1])
    u = x * c1
    xi_of_u = u.revert()
    num = c1.compose(xi_of_u)
    den = X.compose(xi_of_u)
    ratio = num / den
    sign = 1 if ratio.c[0] > 0 else -1
    D = sqrt(ratio * sign)
    return D, sign, c1, X, Y


def _ND_jet(D, center, order, inverse=False):
    xi = Series2.variable(0, center[0], order)
    eta = Series2.variable(1, center[1], order)
    Dz = D.compose(xi * eta)
    if inverse:
        return Jet2(center, (xi / Dz, eta * Dz))
    return Jet2(center, (Dz * xi, eta / Dz))


def gluing_jet(table, nf, seg, k=2, order=None, coords="p"):
    """Jet of R o F^{p+q} o R^{-1} at R(x^1), built from F^M between y_{-k}
    and y_k (M = (2k-1)p + q) and conjugated back by N^{-(k-1)}."""
    order = order or nf.order
    p, q = len(seg.block), len(seg.connector)
    m = seg.depth
    if k < 1 or m < k + 1:
        raise ValidationError("segment depth %d too small for k=%d" % (m, k))
    start = (m - k) * p
    M = (2 * k - 1) * p + q
    pts = [seg.point(start + j) for j in range(M + 1)]
    targets = [pts[j + 1].obstacle for j in range(M)]
    core0 = seg.core.point(0)
    FM = _chain_jet(table, pts[:M], targets, order, coords, close_on=None)
    # bring both ends onto the arclength representative of the core point
    FM = _align_s(table, FM, core0.obstacle, core0.s)
    y_m = phase_to_coords(pts[0], coords)
    L = table.obstacles[core0.obstacle].length
    shift_in = mp.nint((core0.s - y_m[0]) / L) * L
    R = nf.conjugacy.truncate(order)
    Ri = nf.inverse.truncate(order)
    zm = R.evaluate(y_m[0] + shift_in - R.center[0], y_m[1] - R.center[1])
    Ri_c = Ri.recenter(zm)
    if shift_in:
        Ri_c = Ri_c.translate_output((-shift_in, 0))
    core_jet = R(FM(Ri_c))
    if k == 1:
        return core_jet, zm
    c1 = nf.apply(zm, k - 1)
    a_full = nf_full_a(nf)
    Nin = normal_form_map(a_full, c1, order, -(k - 1))
    Nout = normal_form_map(a_full, core_jet.value, order, -(k - 1))
    return Nout(core_jet(Nin)), zm


def nf_full_a(nf):
    """All resonant coefficients available in the normalized jet."""
    return [nf.normalized.comps[0].coeff(k + 1, k) for k in range((nf.order - 1) // 2 + 1)]


def mirror_normalize(table, nf, seg, k=2, J=4, order=None, coords="p", compare_k=True):
    """Mirror-normalized homoclinic frame (xi_inf, gamma_k, g_k, w_1).

    ``k`` selects how many blocks away from the anchors the conjugacy is
    evaluated; with ``compare_k`` the frame is recomputed with k+1 and the
    differences are reported as uncertainties.
    """
    frame = _frame(table, nf, seg, k, J, order, coords)
    if compare_k and seg.depth >= k + 2:
        other = _frame(table, nf, seg, k + 1, J, order, coords)
        unc = {"xi_inf": abs(frame.xi_inf - other.xi_inf),
               "g_0": abs(frame.g[0] - other.g[0]),
               "gamma_1": abs(frame.gamma[1] - other.gamma[1]),
               "w_1": abs(frame.w_1 - other.w_1)}
        for i in range(1, min(len(frame.g), len(other.g))):
            unc["g_%d" % i] = abs(frame.g[i] - other.g[i])
        for i in range(2, min(len(frame.gamma), len(other.gamma))):
            unc["gamma_%d" % i] = abs(frame.gamma[i] - other.gamma[i])
        frame.uncertainty = unc
    return frame


def _frame(table, nf, seg, k, J, order, coords):
    order = order or nf.order
    if J > order - 1:
        raise ValidationError("arc degree J=%d needs jet order >= %d" % (J, J + 1))
    G, zm = gluing_jet(table, nf, seg, k, order, coords)
    # move the centre exactly onto the eta axis
    G = _recenter_on_axis(G, G.center[1])
    D, sign, c1hat, X, Y = _normalize_D(G, order)
    if sign < 0:
        # the two anchors sit on opposite half-axes: mirror through the
        # anti-diagonal instead, i.e. work with (xi, eta) -> (xi, -eta) first
        G = _flip_conj(G, order)
        D, sign2, c1hat, X, Y = _normalize_D(G, order)
        if sign2 < 0:
            raise DegenerateError("mirror correction has no real square root")
    a_full = nf_full_a(nf)
    a_eff = [ak * (sign ** i) for i, ak in enumerate(a_full)]
    c1p = (0, G.center[1] / D.c[0])
    NDi = _ND_jet(D, c1p, order, inverse=True)
    inner = G(NDi)
    NDo = _ND_jet(D, inner.value, order)
    Gp = NDo(inner)
    Gp = _recenter_on_axis(Gp, Gp.center[1])
    gam = _locus_graph(Gp, order)
    Gp = _recenter_on_axis(Gp, gam.c[0])
    gam = _locus_graph(Gp, order)
    xi_inf = gam.c[0]
    x = Series1([0, 1] + [0] * (order - 1))
    ed = gam - Gp.center[1]
    G1, G2 = Gp.comps
    g_series = G2.deriv(1).substitute(x, ed)
    gp = gam.deriv()
    # frame checks
    Xs = G1.substitute(x, ed)
    Ys = G2.substitute(x, ed)
    mirror = gam.compose(Ys)
    A11 = G1.deriv(0).substitute(x, ed)
    A12 = G1.deriv(1).substitute(x, ed)
    A21 = G2.deriv(0).substitute(x, ed)
    dkl = max(
        _series_gap(A11, gp * (2 - gp * g_series), J),
        _series_gap(A12, gp * g_series - 1, J),
        _series_gap(A21, 1 - gp * g_series, J))
    G21 = G2.coeff(1, 0)
    G22 = G2.coeff(0, 1)
    w1 = -G21 / G22
    gam_c = gam.c[:J + 1]
    g_c = g_series.c[:J + 1]
    identity = g_c[0] * (gam_c[1] - w1) - 1
    w1_dyn = _dynamic_w1(table, nf, seg, k, D, sign, coords)
    lam = nf.lam
    a_rep = a_eff[:len(nf.a)]
    a_bar = [a_rep[i] * xi_inf ** (2 * i) / lam for i in range(len(a_rep))]
    gamma_bar = [gam_c[i] * xi_inf ** (i - 1) for i in range(len(gam_c))]
    g_bar = [g_c[i] * xi_inf ** i for i in range(len(g_c))]
    checks = {"mirror": _series_gap(mirror, Xs, J),
              "dkl": dkl, "g0_identity": abs(identity),
              "w1_agreement": abs(w1 - w1_dyn) if w1_dyn is not None else None,
              "D0": D.c[0]}
    return HomoclinicFrame(lam, a_rep, xi_inf, gam_c, g_c, w1, w1_dyn, D.c, a_bar, gamma_bar, g_bar,
                           Gp, checks, sign, k)


def _flip_conj(G, order):
    d1 = Series2.variable(0, 0, order)
    d2 = Series2.variable(1, 0, order)
    c = G.center
    inner = Jet2((c[0], -c[1]), (d1 + c[0], -(d2 - c[1])))
    H = compose(G, inner)
    return Jet2(H.center, (H.comps[0], -H.comps[1]))


def _series_gap(a, b, n):
    """Largest relative coefficient mismatch up to degree n."""
    worst = 0
    for i in range(min(n + 1, len(a.c), len(b.c))):
        size = max(abs(a.c[i]), abs(b.c[i]))
        if size:
            worst = max(worst, abs(a.c[i] - b.c[i]) / size)
    return worst


def _dynamic_w1(table, nf, seg, k, D, sign, coords):
    """Slope of the stable direction at x^1 obtained from the billiard orbit
    (pulled back from far downstream), mapped into the normalized frame."""
    p = len(seg.block)
    idx = (seg.depth - k) * p
    v = seg.stable_dir_at(idx)
    x = seg.point(idx)
    if coords == "p":
        v = (v[0], mp.cos(x.phi) * v[1])
    R = nf.conjugacy
    y = phase_to_coords(x, coords)
    L = table.obstacles[seg.core.point(0).obstacle].length
    shift = mp.nint((seg.core.point(0).s - y[0]) / L) * L
    Rc = R.recenter((y[0] + shift, y[1]))
    Ad = Rc.linear_part()
    w = (Ad[0][0] * v[0] + Ad[0][1] * v[1], Ad[1][0] * v[0] + Ad[1][1] * v[1])
    z = Rc.value
    # N^{k-1} then the flip and N_D, all as linear maps at the moving point
    a_full = nf_full_a(nf)
    Nk = normal_form_map(a_full, z, 1, k - 1)
    A = Nk.linear_part()
    w = (A[0][0] * w[0] + A[0][1] * w[1], A[1][0] * w[0] + A[1][1] * w[1])
    z = Nk.value
    if sign < 0:
        w = (w[0], -w[1])
        z = (z[0], -z[1])
    ND = _ND_jet(D, z, 1)
    A = ND.linear_part()
    w = (A[0][0] * w[0] + A[0][1] * w[1], A[1][0] * w[0] + A[1][1] * w[1])
    if w[0] == 0:
        return None
    return w[1] / w[0]
