"""Horseshoe orbit families and their asymptotic expansions.

h_n follows the reference block n+1 times and then the connector once.  Its
flow period grows like n L0 + L1 + O(lambda^n), and its trace like
C_0 lambda^{-n} + B n + C + O(n^2 lambda^n), with B = C_1 a_1.  Fits are done on
the rescaled quantities so every column of the design matrix is O(1).
"""
from dataclasses import dataclass, field
import math

import mpmath
from mpmath import mp

from .errors import (ConditioningError, NonConvergenceError, PreconditionError,
                     ValidationError)
from .normal_form import normal_form_map
from .orbits import find_periodic_orbit, orbit_flow_exponent
from .symbolic import SymbolicWord, horseshoe_word

SOLVER_FLOOR_BITS = 20


# ---------------------------------------------------------------------------
# families


@dataclass
class FamilyRow:
    n: int
    map_period: int
    LE: object
    flow_period: object
    residual: object = 0
    trace: object = None

    @property
    def cosh_value(self):
        """2 cosh(map_period LE): the absolute trace of the return map."""
        return 2 * mp.cosh(self.map_period * self.LE)


@dataclass
class HorseshoeFamily:
    table: str
    w_O: str
    w_c: str
    rows: list
    lam: object
    LE_ref: object
    L0_ref: object
    block: int = 1
    orbits: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.rows)

    @property
    def n_values(self):
        return [r.n for r in self.rows]

    def csv_rows(self, digits=40):
        out = ["n,map_period,LE,flow_period,residual"]
        for r in self.rows:
            out.append("%d,%d,%s,%s,%s" % (r.n, r.map_period, mpmath.nstr(r.LE, digits),
                                           mpmath.nstr(r.flow_period, digits),
                                           mpmath.nstr(mp.mpf(r.residual), 5)))
        return "\n".join(out) + "\n"


def solver_floor():
    """Stationarity residual the orbit solver reaches at the current precision."""
    return max(mp.eps * 2 ** SOLVER_FLOOR_BITS, mp.mpf(10) ** (-mp.dps + 4))


def max_supported_n(lam, P=1, floor=None):
    """Largest n with |lambda|^(n P) above ten times the residual floor."""
    floor = solver_floor() if floor is None else floor
    if P <= 0:
        return 10 ** 6
    lam = abs(mp.mpf(lam))
    if not 0 < lam < 1:
        raise ValidationError("lambda must lie in (0,1) in absolute value")
    n = int(mp.floor(mp.log(10 * floor) / (P * mp.log(lam))))
    while n > 0 and lam ** (n * P) <= 10 * floor:
        n -= 1
    return n


def precision_ceiling(lam, bits=None, margin=2):
    """n_max the working precision can resolve: bits / -log2 lambda minus a margin."""
    bits = bits or mp.prec
    return int(bits / -math.log2(abs(float(lam)))) - margin


def horseshoe_family(table, w_O, w_c, n_max, n_min=0, core=None, check_ceiling=True, progress=None):
    """Solve h_n for n = n_min..n_max."""
    w_O = SymbolicWord.parse(w_O)
    w_c = SymbolicWord.parse(w_c, cyclic=False)
    if n_max < n_min:
        raise ValidationError("n_max below n_min")
    if core is None:
        core = find_periodic_orbit(table, w_O)
    if check_ceiling:
        ceil = precision_ceiling(core.lam)
        if n_max > ceil:
            raise PreconditionError("n_max=%d exceeds the precision ceiling %d at %d bits" % (n_max, ceil, mp.prec))
    p = len(w_O)
    rows, orbits = [], []
    seed = None
    for n in range(n_min, n_max + 1):
        word = horseshoe_word(w_O, w_c, n)
        try:
            orb = find_periodic_orbit(table, word, seed=seed)
        except NonConvergenceError as exc:
            raise NonConvergenceError("h_%d (%s): %s" % (n, word, exc), residual=getattr(exc, "residual", None))
        # the next word has one more block: prepend a copy of the first block
        seed = list(orb.t_params[:p]) + list(orb.t_params)
        rows.append(FamilyRow(n, len(word), orb.LE, orb.flow_period, orb.residual, orb.trace))
        orbits.append(orb)
        if progress:
            progress(n)
    return HorseshoeFamily(getattr(table, "name", "table"), str(w_O), str(w_c), rows, core.lam,
                           core.LE, core.flow_period, p, orbits)


# ---------------------------------------------------------------------------
# least squares


@dataclass
class FitReport:
    model: str
    names: list
    coefficients: dict
    uncertainties: dict
    residuals: list
    n_used: list
    decay_ratios: list = field(default_factory=list)
    floor: object = 0
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.coefficients[key]

    def sigma(self, key):
        return self.uncertainties[key]

    def lines(self, digits=30):
        out = ["model: %s" % self.model, "rows: %d..%d (%d)" % (self.n_used[0], self.n_used[-1], len(self.n_used))]
        for k in self.names:
            out.append("%s = %s +/- %s" % (k, mpmath.nstr(self.coefficients[k], digits),
                                         mpmath.nstr(self.uncertainties[k], 3)))
        if self.decay_ratios:
            out.append("residual decay ratios (tail): " +
                       ", ".join(mpmath.nstr(r, 6) for r in self.decay_ratios[-5:]))
        out.extend("note: %s" % s for s in self.notes)
        return out


def weighted_lstsq(columns, y, weights=None, max_cond_bits=None):
    """Solve min || W (A c - y) || by QR in the working precision.

    ``columns`` is a list of column vectors.  Columns are scaled to unit norm
    before factorization.  Returns (coefficients, covariance scale, residuals).
    """
    N, k = len(y), len(columns)
    if N < k:
        raise PreconditionError("%d rows for %d unknowns" % (N, k))
    w = weights or [mp.one] * N
    A = mp.matrix(N, k)
    b = mp.matrix(N, 1)
    scale = []
    for j, col in enumerate(columns):
        s = mp.sqrt(mp.fsum((w[i] * col[i]) ** 2 for i in range(N)))
        if s == 0:
            raise ConditioningError("design column %d vanishes" % j)
        scale.append(s)
        for i in range(N):
            A[i, j] = w[i] * col[i] / s
    for i in range(N):
        b[i] = w[i] * y[i]
    sol = _householder_solve(A, b)
    coef = [sol[j] / scale[j] for j in range(k)]
    res = [y[i] - mp.fsum(coef[j] * columns[j][i] for j in range(k)) for i in range(N)]
    AtA = A.T * A
    try:
        inv = mp.inverse(AtA)
    except ZeroDivisionError:
        raise ConditioningError("singular design matrix")
    cond = mp.mnorm(AtA, 1) * mp.mnorm(inv, 1)
    limit = mp.prec // 2 if max_cond_bits is None else max_cond_bits
    if cond > mp.mpf(2) ** limit:
        raise ConditioningError("design matrix condition number %s" % mpmath.nstr(cond, 5))
    dof = max(N - k, 1)
    s2 = mp.fsum((w[i] * res[i]) ** 2 for i in range(N)) / dof
    var = [s2 * inv[j, j] / scale[j] ** 2 for j in range(k)]
    return coef, [mp.sqrt(v) for v in var], res


def _householder_solve(A, b):
    """Least-squares solution of A x = b by Householder QR.

    Reflections are sign-chosen against the diagonal with sign(0) taken as +1,
    so exact zeros on the diagonal are harmless.
    """
    A = A.copy()
    b = b.copy()
    m, n = A.rows, A.cols
    diag = []
    for j in range(n):
        s = mp.fsum(A[i, j] ** 2 for i in range(j, m))
        if not s > mp.eps ** 2:
            raise ConditioningError("design matrix is numerically rank deficient")
        alpha = -mp.sqrt(s) if A[j, j] >= 0 else mp.sqrt(s)
        A[j, j] -= alpha
        vnorm2 = s - 2 * alpha * (A[j, j] + alpha) + alpha ** 2
        diag.append(alpha)
        for kk in range(j + 1, n):
            y = mp.fsum(A[i, j] * A[i, kk] for i in range(j, m)) * 2 / vnorm2
            for i in range(j, m):
                A[i, kk] -= y * A[i, j]
        y = mp.fsum(A[i, j] * b[i] for i in range(j, m)) * 2 / vnorm2
        for i in range(j, m):
            b[i] -= y * A[i, j]
    x = [mp.zero] * n
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - mp.fsum(A[i, jj] * x[jj] for jj in range(i + 1, n))) / diag[i]
    return x


def _select(family, n_min=None, n_max=None):
    rows = [r for r in family.rows if (n_min is None or r.n >= n_min) and (n_max is None or r.n <= n_max)]
    return rows


def _tail_start(family, divisor):
    """First n of the tail used by default: n_max // divisor, keeping at least 10 rows."""
    ns = family.n_values
    start = ns[-1] // divisor
    if len([n for n in ns if n >= start]) < 10:
        start = ns[max(len(ns) - 10, 0)]
    return max(start, ns[0])


def _ratios(res):
    out = []
    for a, b in zip(res, res[1:]):
        out.append(b / a if a else mp.inf)
    return out


def fit_period_expansion(family, n_min=None, tail=10):
    """(L0, L1) in l_n = n L0 + L1 + c lambda^n + d n lambda^n.

    By default only the upper half of the rows is used, where the omitted
    lambda^{2n} terms are no larger than the resolved tail at the last row.
    """
    if n_min is None:
        n_min = _tail_start(family, 2)
    rows = _select(family, n_min)
    if len(rows) < 8:
        raise PreconditionError("period fit needs at least 8 rows, got %d" % len(rows))
    lam = abs(family.lam)
    ns = [r.n for r in rows]
    y = [r.flow_period for r in rows]
    cols = [[mp.mpf(n) for n in ns], [mp.one] * len(ns),
            [lam ** n for n in ns], [n * lam ** n for n in ns]]
    names = ["L0", "L1", "c", "d"]
    coef, sig, res = weighted_lstsq(cols, y)
    # systematic part: one more term of the expansion
    cols2 = cols + [[lam ** (2 * n) for n in ns]]
    coef2, _, _ = weighted_lstsq(cols2, y, max_cond_bits=mp.prec) if len(ns) > 5 else (coef, None, None)
    unc = {k: sig[i] + abs(coef[i] - coef2[i]) for i, k in enumerate(names)}
    tail_res = [r.flow_period - r.n * coef[0] - coef[1] for r in rows]
    ratios = _ratios(tail_res)
    rep = FitReport("period: n L0 + L1 + O(lambda^n)", names, dict(zip(names, coef)), unc, tail_res, ns,
                    ratios, floor=max(abs(x) for x in res))
    rep.extra["tail_ratios"] = ratios[-(tail - 1):] if tail else ratios
    rep.extra["L0_reference"] = family.L0_ref
    rep.extra["L0_error"] = abs(coef[0] - family.L0_ref)
    lo, hi = lam / 2, 2 * lam
    bad = [r for r in rep.extra["tail_ratios"] if not lo <= abs(r) <= hi]
    if bad:
        rep.notes.append("residual decay is not geometric at rate lambda (%d tail ratios off)" % len(bad))
    return rep


def trace_values(family):
    return [r.cosh_value for r in family.rows]


def fit_trace_expansion(family, lam=None, n_min=None, n_max=None):
    """(C_0, B, C) in 2cosh(map_period LE_n) = C_0 lambda^{-n} + B n + C + O(n^2 lambda^n).

    Rows are multiplied by lambda^n before solving, which makes the design
    well conditioned: C_0 + B n lambda^n + C lambda^n.
    """
    lam = abs(family.lam if lam is None else lam)
    if not 0 < lam < 1:
        raise ValidationError("lambda must lie in (0,1)")
    if lam > mp.mpf("0.9"):
        raise ConditioningError("lambda=%s too close to 1 for the trace model" % mpmath.nstr(lam, 6))
    if n_min is None:
        n_min = _tail_start(family, 3)
    rows = _select(family, n_min, n_max)
    if len(rows) < 10:
        raise PreconditionError("trace fit needs at least 10 rows, got %d" % len(rows))
    ns = [r.n for r in rows]
    T = [r.cosh_value for r in rows]
    y = [T[i] * lam ** ns[i] for i in range(len(ns))]
    cols = [[mp.one] * len(ns), [n * lam ** n for n in ns], [lam ** n for n in ns]]
    names = ["C0", "B", "C"]
    coef, sig, res = weighted_lstsq(cols, y)
    cols2 = cols + [[n * n * lam ** (2 * n) for n in ns], [n * lam ** (2 * n) for n in ns], [lam ** (2 * n) for n in ns]]
    if len(ns) > len(cols2):
        coef2, _, _ = weighted_lstsq(cols2, y, max_cond_bits=mp.prec)
    else:
        coef2 = coef
    unc = {k: sig[i] + abs(coef[i] - coef2[i]) for i, k in enumerate(names)}
    resid = [T[i] - (coef[0] * lam ** (-ns[i]) + coef[1] * ns[i] + coef[2]) for i in range(len(ns))]
    rep = FitReport("trace: C0 lambda^-n + B n + C", names, dict(zip(names, coef)), unc, resid, ns,
                    _ratios(resid), floor=max(abs(x) for x in res))
    rep.extra["B_over_C0"] = coef[1] / coef[0]
    return rep


def series_index(P):
    return [(q, p) for p in range(P + 1) for q in range(p + 1)]


def fit_series(family, lam=None, P=2, n_min=None, n_max=None, floor=None):
    """L_{q,p} in lambda^n 2cosh(map_period LE_n) = sum_{q<=p<=P} L_{q,p} n^q lambda^{n p}.

    Rows whose last resolved term lambda^{nP} falls below ten times the
    residual floor are dropped (they only add noise).
    """
    lam = abs(family.lam if lam is None else lam)
    if P < 0:
        raise ValidationError("P must be nonnegative")
    floor = solver_floor() if floor is None else mp.mpf(floor)
    idx = series_index(P)
    top = max_supported_n(lam, P, floor) if P else None
    if n_max is not None:
        top = n_max if top is None else min(top, n_max)
    if n_min is None and P < 2:
        # the first omitted term n^{P+1} lambda^{n(P+1)} is large at small n
        n_min = _tail_start(family, 3)
    rows = _select(family, n_min, top)
    need = (P + 1) * (P + 2) // 2 + 5
    if len(rows) < need:
        raise PreconditionError(
            "series fit with P=%d needs %d rows resolvable above the floor %s (have %d; raise the "
            "precision or lower P)" % (P, need, mpmath.nstr(floor, 3), len(rows)))
    ns = [r.n for r in rows]
    y = [r.cosh_value * lam ** r.n for r in rows]
    cols = [[mp.mpf(n) ** q * lam ** (n * p) for n in ns] for (q, p) in idx]
    coef, sig, res = weighted_lstsq(cols, y)
    nxt = [(q, P + 1) for q in range(P + 2)]
    cols2 = cols + [[mp.mpf(n) ** q * lam ** (n * p) for n in ns] for (q, p) in nxt]
    if len(ns) > len(cols2):
        coef2, _, _ = weighted_lstsq(cols2, y, max_cond_bits=mp.prec)
    else:
        coef2 = coef
    names = ["L_%d,%d" % qp for qp in idx]
    unc = {k: sig[i] + abs(coef[i] - coef2[i]) for i, k in enumerate(names)}
    rep = FitReport("series: sum L_qp n^q lambda^(np), P=%d" % P, names, dict(zip(names, coef)), unc,
                    res, ns, _ratios(res), floor=max(max(abs(x) for x in res), floor))
    rep.extra["matrix"] = {qp: coef[i] for i, qp in enumerate(idx)}
    rep.extra["P"] = P
    return rep


# ---------------------------------------------------------------------------
# synthetic families


def synthetic_family(lam, n_max, a=None, gamma=None, g=None, n_min=0, block=1, connector=1, L0=None, L1=None,
                     name="synthetic"):
    """Exact horseshoe data for the local model N_Delta with gluing in mirror form.

    Periodic points sit on the locus at xi = x_n solving x = Delta(x gamma(x))^n gamma(x);
    the return map's derivative is DN^n times the gluing derivative
    [[gamma'(2 - gamma' g), gamma' g - 1], [1 - gamma' g, g]].  Defaults give the
    rigid case Delta = lambda, gamma(x) = 1 + lambda^2 x, g = lambda^-2.
    """
    lam = mp.mpf(lam)
    a = [lam] + [mp.zero] if a is None else [mp.mpf(v) for v in a]
    gamma = [mp.one, lam ** 2] if gamma is None else [mp.mpf(v) for v in gamma]
    g = [lam ** -2] if g is None else [mp.mpf(v) for v in g]
    L0 = -mp.log(lam) if L0 is None else mp.mpf(L0)
    L1 = mp.zero if L1 is None else mp.mpf(L1)

    def poly(c, x):
        return mp.fsum(ck * x ** k for k, ck in enumerate(c))

    def dpoly(c, x):
        return mp.fsum(k * ck * x ** (k - 1) for k, ck in enumerate(c) if k)

    rows = []
    for n in range(n_min, n_max + 1):
        def eq(x):
            return poly(a, x * poly(gamma, x)) ** n * poly(gamma, x) - x

        try:
            x = mp.findroot(eq, lam ** n * gamma[0] / (1 - lam ** n * gamma[1] if len(gamma) > 1 else 1))
        except (ValueError, ZeroDivisionError) as exc:
            raise NonConvergenceError("synthetic periodic point for n=%d: %s" % (n, exc))
        gp, gv = dpoly(gamma, x), poly(g, x)
        DG = [[gp * (2 - gp * gv), gp * gv - 1], [1 - gp * gv, gv]]
        Y = x
        X = poly(gamma, Y)
        N = normal_form_map(a, (X, Y), 1, n).linear_part()
        tr = N[0][0] * DG[0][0] + N[0][1] * DG[1][0] + N[1][0] * DG[0][1] + N[1][1] * DG[1][1]
        period = block * (n + 1) + connector
        LE = mp.acosh(abs(tr) / 2) / period
        ell = n * L0 + L1
        rows.append(FamilyRow(n, period, LE, ell, 0, tr))
    fam = HorseshoeFamily(name, "1" * block, "2" * connector, rows, lam, -mp.log(lam) / block, L0, block)
    return fam


def synthetic_flow_family(lam, h, n_max, L1, c=0, n_min=0):
    """Rows whose exponent per unit flow time equals h exactly: map_period LE = h l_n."""
    lam, h = mp.mpf(lam), mp.mpf(h)
    L0 = -mp.log(lam) / h
    rows = []
    for n in range(n_min, n_max + 1):
        ell = n * L0 + mp.mpf(L1) + mp.mpf(c) * lam ** n
        period = n + 2
        rows.append(FamilyRow(n, period, h * ell / period, ell, 0, None))
    return HorseshoeFamily("synthetic-flow", "1", "2", rows, lam, -mp.log(lam), L0, 1)


# ---------------------------------------------------------------------------
# rigidity diagnostics


VERDICT_OBSTRUCTED = "MME=SRB obstructed"
VERDICT_CLEAR = "no obstruction found at tested order"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass
class OrbitRecord:
    word: str
    period: int
    flow_period: object
    exponent: object
    a1: object
    a1_uncertainty: object
    lam: object = None
    anosov: object = None


@dataclass
class RigidityReport:
    records: list
    dispersion: object
    h_ref: object
    defects: dict
    verdict: str
    reasons: list
    tolerance: object

    def lines(self, digits=30):
        out = ["verdict: %s" % self.verdict]
        out += ["reason: %s" % r for r in self.reasons]
        out.append("exponent dispersion (max-min): %s" % mpmath.nstr(self.dispersion, digits))
        out.append("reference exponent: %s" % mpmath.nstr(self.h_ref, digits))
        for r in self.records:
            out.append("%s: exponent %s, a_1 %s +/- %s, defect %s" % (
                r.word, mpmath.nstr(r.exponent, digits), mpmath.nstr(r.a1, digits),
                mpmath.nstr(r.a1_uncertainty, 3), mpmath.nstr(self.defects[r.word], digits)))
        return out


def rigidity_verdict(records, tol=None, a1_factor=10):
    """Verdict from per-orbit exponents and first Birkhoff invariants."""
    tol = mp.mpf(10) ** (-20) if tol is None else mp.mpf(tol)
    if not records:
        raise ValidationError("no orbits")
    exps = [r.exponent for r in records]
    disp = max(exps) - min(exps)
    h_ref = mp.fsum(exps) / len(exps)
    defects = {r.word: r.exponent * r.flow_period - h_ref * r.flow_period for r in records}
    reasons = []
    if disp > tol:
        reasons.append("exponent dispersion %s exceeds %s" % (mpmath.nstr(disp, 6), mpmath.nstr(tol, 3)))
    for r in records:
        if abs(r.a1) > a1_factor * r.a1_uncertainty and abs(r.a1) > tol:
            reasons.append("a_1 at %s is %s (uncertainty %s)" % (r.word, mpmath.nstr(r.a1, 6),
                                                                  mpmath.nstr(r.a1_uncertainty, 3)))
    if len(records) < 2:
        # below the two-orbit minimum the report is flagged, whatever a_1 says
        verdict = VERDICT_INCONCLUSIVE
        reasons.insert(0, "flagged: a single orbit cannot show dispersion")
    elif reasons:
        verdict = VERDICT_OBSTRUCTED
    else:
        verdict = VERDICT_CLEAR
    return RigidityReport(records, disp, h_ref, defects, verdict, reasons, tol)


def orbit_record(table, word, order=7, K=2):
    from .normal_form import anosov_cocycle_value, extract_birkhoff, return_map_jet
    orb = find_periodic_orbit(table, word)
    nf = extract_birkhoff(return_map_jet(table, orb, order), K=K)
    # a_1 from one order lower gives the truncation uncertainty
    nf_lo = extract_birkhoff(return_map_jet(table, orb, order - 2), K=min(K, (order - 3) // 2))
    unc = abs(nf.a[1] - nf_lo.a[1]) + nf.residual
    return OrbitRecord(str(orb.word), orb.period, orb.flow_period, orbit_flow_exponent(orb), nf.a[1], unc,
                       orb.lam, anosov_cocycle_value(nf))


def rigidity_report(table, words, tol=None, order=7):
    words = list(words)
    if not words:
        raise ValidationError("rigidity report needs at least one word")
    records = [orbit_record(table, w, order) for w in words]
    return rigidity_verdict(records, tol)
