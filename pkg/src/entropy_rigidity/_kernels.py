"""Double-precision hot loops, compiled with numba when available.

Set ``ENTROPY_RIGIDITY_PURE_NUMPY=1`` to force the vectorized numpy versions
(useful for debugging and for the benchmark in ``benchmarks/``).
"""
import os

import numpy as np

PURE_NUMPY = os.environ.get("ENTROPY_RIGIDITY_PURE_NUMPY", "0").lower() not in ("", "0", "false", "no")

try:
    if PURE_NUMPY:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised through the env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# signed distance between convex polygons (counterclockwise vertices)


def _polygon_distance_numpy(P, Q):
    def max_gap(A, B):
        e = np.roll(A, -1, axis=0) - A
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        nrm /= np.linalg.norm(nrm, axis=1)[:, None]
        a = np.einsum("ij,ij->i", nrm, A)
        best = -np.inf
        for start in range(0, len(A), 256):
            sl = slice(start, start + 256)
            b = (nrm[sl] @ B.T).min(axis=1)
            best = max(best, float(np.max(b - a[sl])))
        return best

    def vert_seg(A, B):
        s0 = B
        d = np.roll(B, -1, axis=0) - B
        dd = np.einsum("ij,ij->i", d, d)
        best = np.inf
        for start in range(0, len(A), 256):
            p = A[start:start + 256][:, None, :]
            w = p - s0[None, :, :]
            t = np.clip(np.einsum("kij,ij->ki", w, d) / dd[None, :], 0.0, 1.0)
            r = w - t[..., None] * d[None, :, :]
            best = min(best, float(np.sqrt(np.min(np.einsum("kij,kij->ki", r, r)))))
        return best

    gap = max(max_gap(P, Q), max_gap(Q, P))
    if gap <= 0.0:
        return gap
    return min(vert_seg(P, Q), vert_seg(Q, P))


@njit(cache=True)
def _max_gap_nb(A, B):
    n = A.shape[0]
    m = B.shape[0]
    best = -np.inf
    for i in range(n):
        j = (i + 1) % n
        ex = A[j, 0] - A[i, 0]
        ey = A[j, 1] - A[i, 1]
        ln = np.sqrt(ex * ex + ey * ey)
        nx = ey / ln
        ny = -ex / ln
        a = nx * A[i, 0] + ny * A[i, 1]
        lo = np.inf
        for k in range(m):
            v = nx * B[k, 0] + ny * B[k, 1]
            if v < lo:
                lo = v
        if lo - a > best:
            best = lo - a
    return best


@njit(cache=True)
def _vert_seg_nb(A, B):
    n = A.shape[0]
    m = B.shape[0]
    best = np.inf
    for k in range(m):
        k2 = (k + 1) % m
        dx = B[k2, 0] - B[k, 0]
        dy = B[k2, 1] - B[k, 1]
        dd = dx * dx + dy * dy
        for i in range(n):
            wx = A[i, 0] - B[k, 0]
            wy = A[i, 1] - B[k, 1]
            t = (wx * dx + wy * dy) / dd
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            rx = wx - t * dx
            ry = wy - t * dy
            r = rx * rx + ry * ry
            if r < best:
                best = r
    return np.sqrt(best)


@njit(cache=True)
def _polygon_distance_nb(P, Q):
    gap = max(_max_gap_nb(P, Q), _max_gap_nb(Q, P))
    if gap <= 0.0:
        return gap
    return min(_vert_seg_nb(P, Q), _vert_seg_nb(Q, P))


def convex_polygon_distance(P, Q, use_numba=None):
    """Euclidean distance between convex polygons, negative (minus the
    smallest separating overlap) when they intersect."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return float(_polygon_distance_nb(P, Q))
    return _polygon_distance_numpy(P, Q)


# ---------------------------------------------------------------------------
# distribution of integer Birkhoff sums over N-edge cylinders of a Markov chain


def _sum_distribution_numpy(P, pi, W, N):
    m = P.shape[0]
    wmax = int(W.max()) if W.size else 0
    S = N * wmax + 1
    f = np.zeros((m, S))
    f[:, 0] = pi
    for _ in range(N):
        g = np.zeros_like(f)
        for s in range(m):
            for t in range(m):
                p = P[s, t]
                if p == 0.0:
                    continue
                w = W[s, t]
                if w:
                    g[t, w:] += p * f[s, :S - w]
                else:
                    g[t] += p * f[s]
        f = g
    return f.sum(axis=0)


@njit(cache=True)
def _sum_distribution_nb(P, pi, W, N):
    m = P.shape[0]
    wmax = 0
    for s in range(m):
        for t in range(m):
            if W[s, t] > wmax:
                wmax = W[s, t]
    S = N * wmax + 1
    f = np.zeros((m, S))
    for s in range(m):
        f[s, 0] = pi[s]
    top = 0
    for _ in range(N):
        g = np.zeros((m, S))
        for s in range(m):
            for t in range(m):
                p = P[s, t]
                if p == 0.0:
                    continue
                w = W[s, t]
                for c in range(top + 1):
                    v = f[s, c]
                    if v != 0.0:
                        g[t, c + w] += p * v
        top += wmax
        f = g
    out = np.zeros(S)
    for s in range(m):
        for c in range(S):
            out[c] += f[s, c]
    return out


def birkhoff_sum_distribution(P, pi, W, N, use_numba=None):
    """Law of sum_{k<N} W[x_k, x_{k+1}] for the stationary Markov chain (P, pi).

    ``W`` holds nonnegative integer edge weights; the result has length N*max(W)+1.
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    pi = np.ascontiguousarray(pi, dtype=np.float64)
    W = np.ascontiguousarray(W, dtype=np.int64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _sum_distribution_nb(P, pi, W, int(N))
    return _sum_distribution_numpy(P, pi, W, int(N))
