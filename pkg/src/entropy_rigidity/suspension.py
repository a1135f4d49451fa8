"""Thermodynamic formalism for subshifts of finite type with locally constant data.

Roofs and potentials live on edges (pairs of consecutive symbols), so every
pressure is the log of a Perron root.  Double precision throughout.
"""
from collections import deque
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from ._kernels import birkhoff_sum_distribution
from .errors import (DegenerateError, DomainError, InfeasibleError, NonConvergenceError, ResourceError,
                     ValidationError)

PERRON_TOL = 1e-14
ROOT_TOL = 1e-13
FLEX_TOL = 1e-6


# ---------------------------------------------------------------------------
# Perron roots


def perron(M, tol=PERRON_TOL, max_iter=100000):
    """Perron root of a nonnegative primitive matrix with right and left vectors.

    The eigen-solver only seeds the power iteration; the returned root is
    bracketed by the Collatz-Wielandt bounds min (Mu)_i/u_i <= rho <= max (Mu)_i/u_i,
    iterated until the bracket is tol-tight (relative).
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 1:
        r = float(M[0, 0])
        if r <= 0:
            raise DomainError("1x1 matrix with nonpositive entry")
        return r, np.ones(1), np.ones(1)

    def vec(mat):
        w, V = np.linalg.eig(mat)
        k = int(np.argmax(w.real))
        u = np.abs(V[:, k].real)
        return u / u.sum() + 1e-300

    u = vec(M)
    v = vec(M.T)
    lo = hi = None
    for it in range(max_iter):
        Mu = M @ u
        q = Mu / u
        lo, hi = q.min(), q.max()
        if hi - lo <= tol * hi:
            break
        u = Mu / Mu.sum() + 1e-300
    else:
        raise NonConvergenceError("Perron iteration stalled (bracket %g, %g)" % (lo, hi))
    for it in range(max_iter):
        Mv = M.T @ v
        q = Mv / v
        if q.max() - q.min() <= tol * q.max():
            break
        v = Mv / Mv.sum() + 1e-300
    rho = 0.5 * (lo + hi)
    return rho, u / u.sum(), v / v.sum()


def is_primitive(A):
    A = (np.asarray(A) > 0).astype(np.int64)
    n = A.shape[0]
    P = A.copy()
    # Wielandt bound: primitive iff A^((n-1)^2+1) > 0
    for _ in range((n - 1) ** 2 + 1):
        if P.min() > 0:
            return True
        P = np.minimum(P @ A, 1)
    return P.min() > 0


def _is_irreducible(A):
    A = np.asarray(A) > 0
    n = A.shape[0]
    R = np.eye(n, dtype=bool) | A
    for _ in range(n):
        R = R | ((R.astype(np.int64) @ A.astype(np.int64)) > 0)
    return bool(R.all())


# ---------------------------------------------------------------------------
# systems and measures


def _edge_array(values, A, what):
    """Scalar, per-symbol vector or edge matrix -> edge matrix (zero off the graph)."""
    m = A.shape[0]
    x = np.asarray(values, dtype=float)
    if x.ndim == 0:
        x = np.full((m, m), float(x))
    elif x.ndim == 1:
        if x.shape[0] != m:
            raise ValidationError("%s vector has length %d, expected %d" % (what, x.shape[0], m))
        x = np.repeat(x[:, None], m, axis=1)
    elif x.shape != (m, m):
        raise ValidationError("%s matrix has shape %s, expected %s" % (what, x.shape, (m, m)))
    if not np.all(np.isfinite(x[A > 0])):
        raise ValidationError("%s has non-finite entries on allowed edges" % what)
    return np.where(A > 0, x, 0.0)


@dataclass
class MarkovSystem:
    A: np.ndarray
    roof: np.ndarray = None
    potential: np.ndarray = None
    labels: list = None

    def __post_init__(self):
        A = np.asarray(self.A)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValidationError("adjacency matrix must be square and nonempty")
        if not np.all((A == 0) | (A == 1)):
            raise ValidationError("adjacency matrix must be 0/1")
        self.A = A.astype(np.int64)
        if not _is_irreducible(self.A):
            raise DomainError("adjacency matrix is reducible")
        if not is_primitive(self.A):
            raise DomainError("adjacency matrix is irreducible but periodic")
        if self.roof is not None:
            self.roof = _edge_array(self.roof, self.A, "roof")
            if np.any(self.roof[self.A > 0] <= 0):
                raise ValidationError("roof must be strictly positive on allowed edges")
        if self.potential is not None:
            self.potential = _edge_array(self.potential, self.A, "potential")
        if self.labels is None:
            self.labels = [str(i + 1) for i in range(self.m)]

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def edges(self):
        return [tuple(e) for e in np.argwhere(self.A > 0)]

    def with_roof(self, roof):
        return MarkovSystem(self.A, roof, self.potential, self.labels)

    def edge_array(self, values, what="function"):
        return _edge_array(values, self.A, what)


@dataclass
class MarkovMeasure:
    P: np.ndarray
    pi: np.ndarray = None
    tol: float = 1e-12

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError("transition matrix must be square")
        if np.any(P < -1e-15):
            raise ValidationError("negative transition probability")
        P = np.clip(P, 0.0, None)
        rows = P.sum(axis=1)
        if np.max(np.abs(rows - 1)) > 1e-10:
            raise ValidationError("rows of P must sum to 1 (worst %g)" % np.max(np.abs(rows - 1)))
        self.P = P / rows[:, None]
        if self.pi is None:
            self.pi = stationary_vector(self.P)
        self.pi = np.asarray(self.pi, dtype=float)
        res = np.max(np.abs(self.pi @ self.P - self.pi))
        if res > 1e-14 + self.tol or abs(self.pi.sum() - 1) > 1e-12:
            raise ValidationError("pi is not stationary (residual %g)" % res)

    @property
    def m(self):
        return self.P.shape[0]

    def edge_weights(self):
        """pi_i P_ij: the measure of the 2-cylinder [ij]."""
        return self.pi[:, None] * self.P

    def integral(self, f):
        f = np.asarray(f, dtype=float)
        if f.ndim == 0:
            return float(f)
        if f.ndim == 1:
            return float(self.pi @ f)
        return float(np.sum(self.edge_weights() * f))

    def compatible(self, sys):
        return bool(np.all((self.P <= 0) | (sys.A > 0)))


def stationary_vector(P):
    """Left eigenvector of a stochastic matrix for eigenvalue 1, normalized to sum 1."""
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    # solve pi (P - I) = 0 with sum(pi) = 1 as a square system
    M = (P - np.eye(m)).T
    M[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    pi = np.linalg.solve(M, rhs)
    for _ in range(3):
        pi = pi @ P
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _xlogx(P):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)


def markov_entropy(mu):
    return float(-np.sum(mu.pi[:, None] * _xlogx(mu.P)))


def sft_entropy(sys):
    rho, _, _ = perron(sys.A)
    return math.log(rho)


def _weighted(sys, psi):
    """A e^(psi - c) and the shift c = max psi on the graph (keeps exp in range)."""
    c = float(psi[sys.A > 0].max())
    return sys.A * np.exp(np.where(sys.A > 0, psi - c, 0.0)), c


def pressure(sys, psi=0.0):
    psi = sys.edge_array(psi, "potential")
    M, c = _weighted(sys, psi)
    rho, _, _ = perron(M)
    return math.log(rho) + c


def equilibrium_measure(sys, psi=0.0):
    psi = sys.edge_array(psi, "potential")
    M, _ = _weighted(sys, psi)
    rho, u, v = perron(M)
    P = M * u[None, :] / (rho * u[:, None])
    pi = v * u
    pi = pi / pi.sum()
    return MarkovMeasure(P, pi)


def parry_measure(sys):
    return equilibrium_measure(sys, 0.0)


def bernoulli(probs, sys=None):
    p = np.asarray(probs, dtype=float)
    P = np.tile(p, (len(p), 1))
    return MarkovMeasure(P, p / p.sum())


def variational_gap(sys, mu, psi=0.0):
    """pressure - (h_mu + int psi dmu), nonnegative by the variational principle."""
    psi = sys.edge_array(psi, "potential")
    return pressure(sys, psi) - (markov_entropy(mu) + mu.integral(psi))


def _roof(sys, roof):
    r = sys.roof if roof is None else sys.edge_array(roof, "roof")
    if r is None:
        raise ValidationError("no roof given")
    if np.any(r[sys.A > 0] <= 0):
        raise ValidationError("roof must be strictly positive on allowed edges")
    return r


def abramov(mu, sys, roof=None):
    r = _roof(sys, roof)
    return markov_entropy(mu) / mu.integral(r)


def suspension_htop(sys, roof=None, tol=ROOT_TOL):
    """The s >= 0 with pressure(-s r) = 0."""
    r = _roof(sys, roof)
    h = sft_entropy(sys)
    if h == 0:
        return 0.0

    def f(s):
        return pressure(sys, -s * r)

    rmax = r[sys.A > 0].max()
    # P(-s r) >= h - s rmax, so the root is at least h / rmax; grow upwards
    lo = h / rmax
    flo = f(lo)
    if flo < -1e-12:
        raise NonConvergenceError("pressure bracket failed at s=%g (%g)" % (lo, flo))
    hi = 2 * lo
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e300:
            raise NonConvergenceError("no root of the pressure below 1e300")
    s = 0.5 * (lo + hi)
    for _ in range(200):
        fs = f(s)
        if abs(fs) < tol * 0.1:
            break
        if fs > 0:
            lo = s
        else:
            hi = s
        # Newton step with derivative -int r d(equilibrium state)
        d = -equilibrium_measure(sys, -s * r).integral(r)
        step = s - fs / d
        s = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < tol * max(1.0, s):
            break
    return float(s)


def pressure_curve(sys, roof, s_values):
    r = _roof(sys, roof)
    return np.array([pressure(sys, -s * r) for s in s_values])


# ---------------------------------------------------------------------------
# random measures and recoding


def random_markov_measure(sys, rng, floor=0.0):
    """Markov measure with random positive weights on the allowed edges."""
    W = rng.random(sys.A.shape) * sys.A + floor * sys.A
    W = np.where(sys.A > 0, W + 1e-3, 0.0)
    return MarkovMeasure(W / W.sum(axis=1, keepdims=True))


def random_roof(sys, rng, low=0.2, high=2.0):
    return np.where(sys.A > 0, low + (high - low) * rng.random(sys.A.shape), 0.0)


def higher_block(sys, L):
    """Edge shift of the L-block presentation: states are admissible words of
    length L, edges are admissible words of length L+1."""
    if L < 1:
        raise ValidationError("block length must be at least 1")
    words = [(i,) for i in range(sys.m)]
    for _ in range(L - 1):
        words = [w + (j,) for w in words for j in range(sys.m) if sys.A[w[-1], j]]
    index = {w: k for k, w in enumerate(words)}
    n = len(words)
    B = np.zeros((n, n), dtype=np.int64)
    for w, k in index.items():
        for j in range(sys.m):
            if sys.A[w[-1], j]:
                B[k, index[w[1:] + (j,)]] = 1
    labels = ["".join(sys.labels[i] for i in w) for w in words]
    return MarkovSystem(B, labels=labels), words


def lift_measure(mu, words, new_sys):
    """Markov measure on the L-block system induced by a 1-step Markov measure."""
    n = len(words)
    P = np.zeros((n, n))
    index = {w: k for k, w in enumerate(words)}
    for w, k in index.items():
        for j in range(mu.m):
            nxt = w[1:] + (j,)
            if nxt in index and mu.P[w[-1], j] > 0:
                P[k, index[nxt]] = mu.P[w[-1], j]
    pi = np.array([mu.pi[w[0]] * np.prod([mu.P[a, b] for a, b in zip(w, w[1:])]) for w in words])
    return MarkovMeasure(P, pi / pi.sum())


# ---------------------------------------------------------------------------
# flexibility


def _deterministic_cycle_chain(sys):
    """Successor map whose only recurrent class is a shortest cycle of the graph."""
    A = sys.A
    m = sys.m
    best = None
    for s in range(m):
        # BFS for the shortest return to s
        prev = {s: None}
        q = deque([s])
        found = None
        while q and found is None:
            i = q.popleft()
            for j in np.nonzero(A[i])[0]:
                j = int(j)
                if j == s:
                    found = i
                    break
                if j not in prev:
                    prev[j] = i
                    q.append(j)
        if found is None:
            continue
        cyc = [found]
        while cyc[-1] != s:
            cyc.append(prev[cyc[-1]])
        cyc = cyc[::-1]
        if best is None or len(cyc) < len(best):
            best = cyc
    succ = {}
    for k, i in enumerate(best):
        succ[i] = best[(k + 1) % len(best)]
    # everybody else walks to the cycle along reversed BFS
    frontier = deque(best)
    while frontier:
        j = frontier.popleft()
        for i in np.nonzero(A[:, j])[0]:
            i = int(i)
            if i not in succ:
                succ[i] = j
                frontier.append(i)
    D = np.zeros((m, m))
    for i, j in succ.items():
        D[i, j] = 1.0
    return D


def measure_family(sys):
    """t -> Markov measure interpolating Parry (t=0) and a cycle-concentrated chain (t->1)."""
    P0 = parry_measure(sys).P
    D = _deterministic_cycle_chain(sys)

    def mu(t):
        return MarkovMeasure((1 - t) * P0 + t * D)

    return mu


def _bisect(f, lo, hi, target, tol, increasing, iters=200):
    flo, fhi = f(lo) - target, f(hi) - target
    if not increasing:
        flo, fhi = -flo, -fhi
    if flo > 0 or fhi < 0:
        raise InfeasibleError("target %.12g outside the sweep range" % target)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        v = f(mid) - target
        if not increasing:
            v = -v
        if abs(v) < tol * 1e-3 or hi - lo < 1e-15:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def measure_with_entropy(sys, c_mu, tol=FLEX_TOL):
    """Markov measure of entropy c_mu on the Parry-to-cycle family."""
    h = sft_entropy(sys)
    if not 0 < c_mu <= h:
        raise InfeasibleError("entropy %.6g outside (0, %.6g]" % (c_mu, h), achievable=(0.0, h))
    fam = measure_family(sys)
    if abs(c_mu - h) < 1e-14:
        return fam(0.0), 0.0
    t_hi = 1 - 1e-12
    # entropy is continuous in t; bisection uses only the intermediate value
    t = _bisect(lambda t: markov_entropy(fam(t)), 0.0, t_hi, c_mu, tol, increasing=False)
    return fam(t), t


@dataclass
class FlexibilityResult:
    region: str
    system: MarkovSystem
    measure: MarkovMeasure
    roof: np.ndarray
    target: tuple
    achieved: tuple
    residual: float
    parameter: float
    notes: list = field(default_factory=list)


def potential_roof(sys, mu):
    """-log P normalized to unit mu-integral: the roof making mu the flow MME."""
    with np.errstate(divide="ignore"):
        phi = np.where(sys.A > 0, -np.log(np.where(mu.P > 0, mu.P, 1.0)), 0.0)
    return phi / markov_entropy(mu)


def _distinguished_edge(sys, mu, max_block=6):
    """Smallest block presentation with an edge whose removal keeps positive entropy.

    Returns (recoded system, lifted measure, edge) maximizing the entropy of the
    avoiding subshift among edges of that presentation.
    """
    for L in range(1, max_block + 1):
        if L == 1:
            rsys, rmu = sys, mu
        else:
            rsys, words = higher_block(sys, L)
            rmu = lift_measure(mu, words, rsys)
        best, best_h = None, 0.0
        for (i, j) in rsys.edges:
            B = rsys.A.copy()
            B[i, j] = 0
            rho = max(abs(np.linalg.eigvals(B.astype(float))))
            hb = math.log(rho) if rho > 1 + 1e-12 else 0.0
            if hb > best_h + 1e-12:
                best, best_h = (i, j), hb
        if best is not None:
            return rsys, rmu, best, best_h
    raise DegenerateError("no edge can be avoided with positive entropy up to block length %d" % max_block)


def region_two_roof(sys, mu, edge, delta):
    """Roof delta off the distinguished edge, tall on it, with unit mu-integral."""
    w = mu.edge_weights()[edge]
    R = (1 - delta * (1 - w)) / w
    r = np.where(sys.A > 0, delta, 0.0)
    r[edge] = R
    return r


def solve_flexibility(sys, target, region="II", tol=FLEX_TOL):
    """Markov measure mu and roof r with h_mu(flow) = c_mu and h_top(flow) = c_top.

    The roof is normalized to int r dmu = 1, so the flow entropy of mu equals its
    base entropy.  Region I sweeps r from the constant roof towards the roof
    making mu the measure of maximal entropy (c_top in (c_mu, h]); region II
    sweeps the concentrated roof delta -> 0 (c_top in [h, infinity)).
    """
    c_mu, c_top = float(target[0]), float(target[1])
    h = sft_entropy(sys)
    region = str(region).upper()
    if region not in ("I", "II"):
        raise ValidationError("region must be I or II")
    if not 0 < c_mu < c_top:
        raise InfeasibleError("need 0 < c_mu < c_top (got %.6g, %.6g)" % (c_mu, c_top))
    if c_mu > h:
        raise InfeasibleError("c_mu=%.6g exceeds the base entropy %.6g" % (c_mu, h), achievable=(0.0, h))
    if region == "I" and c_top > h * (1 + 1e-12):
        raise InfeasibleError("region I needs c_top <= h=%.6g" % h, achievable=(c_mu, h))
    if region == "II" and c_top < h * (1 - 1e-12):
        raise InfeasibleError("region II needs c_top >= h=%.6g" % h, achievable=(h, math.inf))
    mu, t_mu = measure_with_entropy(sys, c_mu, tol)
    notes = []
    if abs(c_top - h) <= 1e-12 * h:
        roof = np.where(sys.A > 0, 1.0, 0.0)
        return _finish(region, sys, mu, roof, (c_mu, c_top), 0.0, notes, tol)
    if region == "I":
        phi = potential_roof(sys, mu)

        def roof_at(t):
            return np.where(sys.A > 0, (1 - t) + t * phi, 0.0)

        t = _bisect(lambda t: suspension_htop(sys, roof_at(t)), 0.0, 1 - 1e-9, c_top, tol, increasing=False)
        return _finish(region, sys, mu, roof_at(t), (c_mu, c_top), t, notes, tol)
    rsys, rmu, edge, h_avoid = _distinguished_edge(sys, mu)
    if rsys is not sys:
        notes.append("roof lives on the %d-state block presentation" % rsys.m)
    notes.append("distinguished edge %s-%s, avoiding entropy %.6g" % (rsys.labels[edge[0]], rsys.labels[edge[1]], h_avoid))
    d_lo = 1e-6
    while suspension_htop(rsys, region_two_roof(rsys, rmu, edge, d_lo)) < c_top:
        d_lo *= 1e-2
        if d_lo < 1e-30:
            raise InfeasibleError("c_top=%.6g beyond the reach of the delta family" % c_top)
    delta = _bisect(lambda d: suspension_htop(rsys, region_two_roof(rsys, rmu, edge, d)), d_lo, 1.0, c_top, tol,
                    increasing=False)
    return _finish(region, rsys, rmu, region_two_roof(rsys, rmu, edge, delta), (c_mu, c_top), delta, notes, tol)


def _finish(region, sys, mu, roof, target, param, notes, tol):
    got = (abramov(mu, sys, roof), suspension_htop(sys, roof))
    res = max(abs(got[0] - target[0]), abs(got[1] - target[1]), abs(mu.integral(roof) - 1))
    if res > tol:
        raise NonConvergenceError("flexibility residual %.3g above %.1g" % (res, tol), residual=res)
    return FlexibilityResult(region, sys, mu, roof, target, got, res, param, notes)


def homotopy_modulus(sys, r0, r1, samples=100):
    """suspension_htop along r_t = (1-t) r0 + t r1 and the empirical Lipschitz
    constant of t -> h_top relative to the roof sup-distance."""
    r0, r1 = _roof(sys, r0), _roof(sys, r1)
    ts = np.linspace(0.0, 1.0, samples)
    vals = np.array([suspension_htop(sys, (1 - t) * r0 + t * r1) for t in ts])
    dr = np.max(np.abs(r1 - r0)[sys.A > 0]) * (ts[1] - ts[0])
    C = float(np.max(np.abs(np.diff(vals))) / dr) if dr > 0 else 0.0
    return ts, vals, C


# ---------------------------------------------------------------------------
# separating bump


@dataclass
class SeparatingBump:
    N: int
    W: np.ndarray
    centres: np.ndarray
    eta: float
    a: np.ndarray
    gamma: float
    floor: float
    B: np.ndarray
    laws: list

    def value_at_sum(self, S):
        """q on an N-cylinder whose Birkhoff sum of the edge function is S."""
        avg = np.asarray(S, dtype=float) / self.N
        out = np.full(np.shape(avg), self.floor, dtype=float)
        for i, c in enumerate(self.centres):
            out = out + self.a[i] * (np.abs(avg - c) < self.eta)
        return out

    def __call__(self, word):
        """q on the cylinder of a symbol sequence of length N+1 (0-based symbols)."""
        if len(word) != self.N + 1:
            raise ValidationError("cylinder needs %d symbols" % (self.N + 1))
        S = sum(int(self.W[a, b]) for a, b in zip(word, word[1:]))
        return float(self.value_at_sum(S))

    def integral(self, mu, use_numba=None):
        law = birkhoff_sum_distribution(mu.P, mu.pi, self.W, self.N, use_numba)
        return float(np.dot(law, self.value_at_sum(np.arange(len(law)))))

    @property
    def minimum(self):
        return float(self.floor + min(0.0, self.a.min() if self.a.size else 0.0))


def _distinguishing_function(sys, measures, max_weight=2):
    """Integer edge weights W whose integrals separate the measures the most
    (gap relative to the largest weight)."""
    edges = sys.edges
    E = np.array([m.edge_weights()[tuple(zip(*edges))] for m in measures])  # k x |edges|
    best, best_score = None, 0.0
    cands = []
    for e in range(len(edges)):
        cands.append({e: 1})
    for e, f in itertools.combinations(range(len(edges)), 2):
        for we, wf in itertools.product(range(1, max_weight + 1), repeat=2):
            cands.append({e: we, f: wf})
    for c in cands:
        w = np.zeros(len(edges))
        for k, v in c.items():
            w[k] = v
        vals = E @ w
        gap = min(abs(a - b) for a, b in itertools.combinations(vals, 2))
        score = gap / w.max()
        if score > best_score + 1e-15:
            best, best_score = w, score
    if best is None or best_score < 1e-9:
        raise DegenerateError("no edge function distinguishes the measures")
    W = np.zeros(sys.A.shape, dtype=np.int64)
    for k, (i, j) in enumerate(edges):
        W[i, j] = int(best[k])
    return W


def separating_bump(sys, w1, w2, w3, gamma, N0=16, N_max=4096, use_numba=None):
    """Locally constant q >= gamma/2 with integrals (1, 1, gamma) against w1, w2, w3.

    q = floor + sum_i a_i 1_{U_i}, where U_i collects the N-cylinders whose
    empirical average of a separating edge function lies within eta of its
    w_i-mean; N doubles until the matrix B_ij = w_j(U_i) is close enough to the
    identity for all a_i to come out positive.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    measures = [w1, w2, w3]
    for mu in measures:
        if mu.m != sys.m or not mu.compatible(sys):
            raise ValidationError("measure not supported on the system")
    same = [np.allclose(measures[i].edge_weights(), measures[j].edge_weights(), atol=1e-14)
            for i, j in ((0, 1), (0, 2), (1, 2))]
    floor = gamma / 2 if gamma < 2 else 0.5
    if all(same) and abs(gamma - 1) < 1e-15:
        W = np.zeros(sys.A.shape, dtype=np.int64)
        return SeparatingBump(1, W, np.zeros(0), 0.0, np.zeros(0), gamma, 1.0, np.zeros((0, 0)), [])
    if any(same):
        raise DegenerateError("the three measures must be pairwise distinct")
    W = _distinguishing_function(sys, measures)
    centres = np.array([mu.integral(W) for mu in measures])
    gap = min(abs(a - b) for a, b in itertools.combinations(centres, 2))
    eta = 0.45 * gap
    rhs = np.array([1 - floor, 1 - floor, gamma - floor])
    N = N0
    while N <= N_max:
        laws = [birkhoff_sum_distribution(mu.P, mu.pi, W, N, use_numba) for mu in measures]
        avg = np.arange(len(laws[0])) / N
        inside = [np.abs(avg - c) < eta for c in centres]
        B = np.array([[laws[j][inside[i]].sum() for j in range(3)] for i in range(3)])
        a = np.linalg.solve(B.T, rhs)
        if np.all(a > 0):
            q = SeparatingBump(N, W, centres, eta, a, gamma, floor, B, laws)
            ints = [q.integral(mu, use_numba) for mu in measures]
            err = max(abs(ints[0] - 1), abs(ints[1] - 1), abs(ints[2] - gamma))
            if err > 1e-10:
                raise NonConvergenceError("bump integrals off by %.3g" % err, residual=err)
            return q
        N *= 2
    raise ResourceError("cylinder length needed to separate the measures exceeds %d (B=%s)" % (N_max, B.tolist()))


# ---------------------------------------------------------------------------
# two-parameter sweep


def e_proof_sweep(sys, grid=100, gamma=0.5, c_mu=None):
    """Boundary of the (s, t) square for r_{s,t} = (1-t)((1-s) + s q) + t phi.

    q is the separating bump for (mu, Parry, rho) and phi the roof making mu the
    flow MME; every roof has unit mu-integral, so h_mu(flow) stays at h_mu.
    Returns rows (s, t, h_mu_flow, h_top_flow).
    """
    h = sft_entropy(sys)
    c_mu = 0.5 * h if c_mu is None else c_mu
    mu, _ = measure_with_entropy(sys, c_mu)
    nu = parry_measure(sys)
    rho, _ = measure_with_entropy(sys, 0.25 * h)
    q = separating_bump(sys, mu, nu, rho, gamma)
    qe = _bump_edge_roof(sys, q, mu)
    phi = potential_roof(sys, mu)
    one = np.where(sys.A > 0, 1.0, 0.0)
    pts = []
    k = max(int(grid) // 4, 1)
    for i in range(k):
        pts.append((i / k, 0.0))
    for i in range(k):
        pts.append((1.0, i / k))
    for i in range(k):
        pts.append((1 - i / k, 1.0))
    for i in range(k):
        pts.append((0.0, 1 - i / k))
    rows = []
    for s, t in pts:
        r = (1 - t) * ((1 - s) * one + s * qe) + t * phi
        r = np.where(sys.A > 0, np.maximum(r, 1e-9), 0.0)
        r = r / mu.integral(r)
        rows.append((s, t, abramov(mu, sys, r), suspension_htop(sys, r)))
    return rows


def _bump_edge_roof(sys, q, mu):
    """Edge roof with the same mu-integral as the bump: the conditional mean of q
    given the first edge of the cylinder.  Keeps the sweep on edge roofs."""
    if q.N <= 1 and q.a.size == 0:
        return np.where(sys.A > 0, q.floor, 0.0)
    ints = q.integral(mu)
    base = np.where(sys.A > 0, 1.0, 0.0)
    # spread the excess over edges in proportion to the separating weight
    Wf = q.W.astype(float) + base
    return base * q.floor + (ints - q.floor) * Wf / mu.integral(Wf)
