"""Acceptance criteria 1-13.  Each test records a PASS/FAIL line that the
terminal summary prints at the end of the run."""
import contextlib
import math
import os
import random
import time

import numpy as np
import pytest
from mpmath import mp

from conftest import ACCEPTANCE
from entropy_rigidity.asymptotics import (VERDICT_CLEAR, VERDICT_OBSTRUCTED, OrbitRecord, fit_period_expansion,
                                          fit_series, fit_trace_expansion, rigidity_report, rigidity_verdict,
                                          synthetic_family, synthetic_flow_family)
from entropy_rigidity.billiard import (PhasePoint, billiard_derivative, billiard_step, jet_collision_step,
                                       random_phase_points)
from entropy_rigidity.cli import main
from entropy_rigidity.config import bundled
from entropy_rigidity.errors import InfeasibleError
from entropy_rigidity.geometry import curvature
from entropy_rigidity.normal_form import (anosov_cocycle_value, anosov_from_jet, conjugated_normal_form,
                                          extract_birkhoff, normal_form_map, random_symplectic_jet,
                                          return_map_jet)
from entropy_rigidity.orbits import find_periodic_orbit
from entropy_rigidity.suspension import (MarkovSystem, abramov, equilibrium_measure, random_markov_measure,
                                         random_roof, separating_bump, sft_entropy, solve_flexibility,
                                         suspension_htop)

GOLDEN = np.array([[1, 1], [1, 0]])


@contextlib.contextmanager
def criterion(k, budget, detail=""):
    """Time the block, record PASS/FAIL, and fail on a blown budget."""
    info = {"detail": detail}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        ACCEPTANCE[k] = (False, "%s (%s: %s)" % (info["detail"], type(exc).__name__, str(exc)[:120]))
        raise
    dt = time.perf_counter() - t0
    ok = dt < budget
    ACCEPTANCE[k] = (ok, "%s [%.1fs / %ds]" % (info["detail"], dt, budget))
    assert ok, "criterion %d took %.1fs, budget %ds" % (k, dt, budget)


def test_ac01_determinant_identity(tables):
    rng = np.random.default_rng(101)
    with criterion(1, 10) as info:
        mp.prec = 80
        worst = 0
        for t in tables.values():
            for x in random_phase_points(t, 1000, rng):
                x = PhasePoint(x.obstacle, mp.mpf(x.s), mp.mpf(x.phi))
                J, y, _ = jet_collision_step(t, x, 1, return_flight=True)
                D = J.linear_part()
                worst = max(worst, abs(D[0][0] * D[1][1] - D[0][1] * D[1][0] - mp.cos(x.phi) / mp.cos(y.phi)))
        info["detail"] = "det identity, 3x1000 points, max deviation %s" % mp.nstr(worst, 3)
        assert worst < 1e-12


def test_ac02_derivative_oracle(tables):
    rng = np.random.default_rng(202)
    with criterion(2, 30) as info:
        mp.prec = 96
        h = mp.mpf("1e-10")
        worst = 0
        for t in tables.values():
            for x in random_phase_points(t, 100, rng, margin=0.1):
                x = PhasePoint(x.obstacle, mp.mpf(x.s), mp.mpf(x.phi))
                D = billiard_derivative(t, x)
                for col, (ds, dp) in enumerate(((h, 0), (0, h))):
                    yp, _ = billiard_step(t, PhasePoint(x.obstacle, x.s + ds, x.phi + dp))
                    ym, _ = billiard_step(t, PhasePoint(x.obstacle, x.s - ds, x.phi - dp))
                    fd = ((yp.s - ym.s) / (2 * h), (yp.phi - ym.phi) / (2 * h))
                    worst = max(worst, abs(fd[0] - D[0][col]), abs(fd[1] - D[1][col]))
        info["detail"] = "jet derivative vs central differences, 3x100 points, max gap %s" % mp.nstr(worst, 3)
        assert worst < 1e-7


def _jacobi_step(kappa0, phi0, kappa1, phi1, tau):
    """Textbook derivative of one collision in (s, phi) from the flight and curvatures."""
    c0, c1 = mp.cos(phi0), mp.cos(phi1)
    return [[-(tau * kappa0 + c0) / c1, -tau / c1],
            [-(kappa1 * (tau * kappa0 + c0) + kappa0 * c1) / c1, -(tau * kappa1 + c1) / c1]]


def test_ac03_periodic_orbit_closed_form(three_disks):
    with criterion(3, 5) as info:
        o = find_periodic_orbit(three_disks, "12")
        rel = abs(o.flow_period - 8) / 8
        M = [[1, 0], [0, 1]]
        for j in range(o.period):
            x, y = o.point(j), o.point(j + 1)
            k0 = curvature(three_disks.obstacles[x.obstacle], x.s)
            k1 = curvature(three_disks.obstacles[y.obstacle], y.s)
            S = _jacobi_step(k0, x.phi, k1, y.phi, o.flights[j])
            M = [[S[0][0] * M[0][0] + S[0][1] * M[1][0], S[0][0] * M[0][1] + S[0][1] * M[1][1]],
                 [S[1][0] * M[0][0] + S[1][1] * M[1][0], S[1][0] * M[0][1] + S[1][1] * M[1][1]]]
        tr = M[0][0] + M[1][1]
        big = (abs(tr) + mp.sqrt(tr * tr - 4)) / 2
        oracle = big ** (mp.one / o.period)
        gap = abs(mp.exp(o.LE) - oracle)
        info["detail"] = "12 orbit: flow period rel err %s, multiplier gap %s (5+2sqrt6 = %s)" % (
            mp.nstr(rel, 3), mp.nstr(gap, 3), mp.nstr(oracle, 12))
        assert rel < 1e-30 and gap < 1e-25
        assert abs(oracle - (5 + 2 * mp.sqrt(6))) < 1e-60


def test_ac04_normal_form_recovery():
    with criterion(4, 120) as info:
        r = random.Random(404)
        worst_a = worst_res = 0
        for _ in range(50):
            a = [mp.mpf(r.uniform(0.1, 0.5)), mp.mpf(r.uniform(-1, 1)), mp.mpf(r.uniform(-1, 1))]
            R0 = random_symplectic_jet(5, r, scale=mp.mpf("0.5"))
            nf = extract_birkhoff(conjugated_normal_form(a, R0, 5), K=2)
            worst_a = max(worst_a, max(abs(x - y) for x, y in zip(nf.a, a)))
            worst_res = max(worst_res, nf.residual)
        info["detail"] = "50 conjugated forms: max |a_k error| %s, residual %s" % (
            mp.nstr(worst_a, 3), mp.nstr(worst_res, 3))
        assert worst_a < 1e-20 and worst_res < 1e-30


def test_ac05_anosov_identity(tables):
    cases = [("three-disks", w) for w in ("12", "13", "23", "123")] + \
            [("mixed", w) for w in ("12", "13", "123")] + [("four-disks", w) for w in ("12", "24", "134")]
    with criterion(5, 120) as info:
        worst = 0
        for name, w in cases:
            t = tables[name]
            nf = extract_birkhoff(return_map_jet(t, find_periodic_orbit(t, w), 5), K=2)
            worst = max(worst, abs(anosov_cocycle_value(nf) - anosov_from_jet(nf)))
        info["detail"] = "-a_1/lambda vs normalized-jet derivative on %d forms, max gap %s" % (
            len(cases), mp.nstr(worst, 3))
        assert len(cases) == 10 and worst < 1e-18


def test_ac06_period_expansion(flagship):
    with criterion(6, 600) as info:
        fam = flagship["family"]
        assert fam.n_values[-1] == 30 and len(fam) == 31
        rep = fit_period_expansion(fam)
        lam = abs(fam.lam)
        ratios = rep.extra["tail_ratios"]
        in_band = all(lam / 2 <= abs(q) <= 2 * lam for q in ratios)
        err = abs(rep["L0"] - flagship["core"].flow_period)
        info["detail"] = "L0 error %s (bound %s), %d tail ratios in [lam/2, 2 lam]: %s" % (
            mp.nstr(err, 3), mp.nstr(lam ** 25 * 8, 3), len(ratios), in_band)
        assert len(ratios) == 9 and in_band
        assert err < lam ** 25 * abs(rep["L0"])


def test_ac07_trace_expansion(flagship):
    with criterion(7, 900) as info:
        rep = fit_trace_expansion(flagship["family"])
        fr = flagship["frame"]
        c0_rel = abs(rep["C0"] / fr.g_0 - 1)
        pred = -2 / fr.lam * fr.xi_inf_sq * fr.a[1]
        b_rel = abs(rep.extra["B_over_C0"] / pred - 1)
        info["detail"] = "C0 vs g_0 rel %s; B/C0 vs -2 xi^2 a_1/lambda rel %s" % (mp.nstr(c0_rel, 3),
                                                                                 mp.nstr(b_rel, 3))
        assert c0_rel < 0.05 and b_rel < 0.10


def test_ac08_series_pattern(flagship):
    with criterion(8, 900) as info:
        # noise in the lambda^{2n} coefficients grows roughly like lambda^-4, so the
        # literal floor bound is checked for moderate contraction rates
        worst_ratio, pattern = 0, True
        for lv in ("0.2", "0.3", "0.5"):
            lam = mp.mpf(lv)
            rig = fit_series(synthetic_family(lam, 30), P=2)
            L = rig.extra["matrix"]
            others = max(abs(L[qp]) for qp in L if qp not in ((0, 0), (0, 2)))
            pattern = pattern and abs(L[(0, 0)] - lam ** -2) < 10 * rig.floor and \
                abs(L[(0, 2)] - lam ** 2) < 10 * rig.floor
            worst_ratio = max(worst_ratio, others / rig.floor)
        gen = fit_series(flagship["family"], P=2)
        l11, s11 = gen["L_1,1"], gen.sigma("L_1,1")
        fr = flagship["frame"]
        pred = -2 * fr.g_0 * fr.a_bar[1]
        rel = abs(l11 / pred - 1)
        info["detail"] = "rigid (lambda .2/.3/.5): max other/floor %s; generic L11 %s +/- %s vs %s (rel %s)" % (
            mp.nstr(worst_ratio, 3), mp.nstr(l11, 10), mp.nstr(s11, 3), mp.nstr(pred, 10), mp.nstr(rel, 3))
        assert pattern and worst_ratio < 10
        assert abs(l11) > 10 * s11 and rel < 0.10


def test_ac09_rigidity_verdict(three_disks):
    with criterion(9, 60) as info:
        rep = rigidity_report(three_disks, ["12", "13", "23", "1213", "1323"])
        a1s = [r.a1 for r in rep.records]
        # rigid synthetic data: exponent exactly h on every orbit and a linear normal form
        lam, h = mp.mpf("0.1"), mp.mpf("0.7")
        a1 = extract_birkhoff(normal_form_map([lam, 0], (0, 0), 5), K=2).a[1]
        recs = [OrbitRecord("h%d" % r.n, r.map_period, r.flow_period, r.map_period * r.LE / r.flow_period, a1,
                            mp.mpf("1e-40")) for r in synthetic_flow_family(lam, h, 12, "1.3").rows]
        syn = rigidity_verdict(recs)
        info["detail"] = "table: %s (dispersion %s); synthetic: %s" % (rep.verdict, mp.nstr(rep.dispersion, 6),
                                                                      syn.verdict)
        assert rep.verdict == VERDICT_OBSTRUCTED and rep.dispersion > 0 and all(abs(a) > 0 for a in a1s)
        assert syn.verdict == VERDICT_CLEAR


def test_ac10_suspension_arithmetic():
    with criterion(10, 5) as info:
        sys = MarkovSystem(GOLDEN)
        h = sft_entropy(sys)
        e1 = abs(h - math.log((1 + math.sqrt(5)) / 2))
        e2 = abs(suspension_htop(sys, 1.0) - h)
        rng = np.random.default_rng(10)
        e3 = 0
        for _ in range(20):
            r = random_roof(sys, rng)
            ht = suspension_htop(sys, r)
            e3 = max(e3, abs(abramov(equilibrium_measure(sys, -ht * r), sys, r) - ht))
        info["detail"] = "golden entropy err %.2e, r=1 err %.2e, Abramov/equilibrium err %.2e" % (e1, e2, e3)
        assert e1 < 1e-13 and e2 < 1e-13 and e3 < 1e-10


def test_ac11_flexibility_targets():
    with criterion(11, 60) as info:
        sys = MarkovSystem(GOLDEN)
        h = sft_entropy(sys)
        rng = np.random.default_rng(11)
        worst, n = 0.0, 0
        for region in ("I", "II"):
            for _ in range(20):
                c_mu = h * rng.uniform(0.05, 0.95)
                if region == "I":
                    c_top = c_mu + (h - c_mu) * rng.uniform(0.05, 0.95)
                else:
                    c_top = h * rng.uniform(1.05, 3.0)
                worst = max(worst, solve_flexibility(sys, (c_mu, c_top), region).residual)
                n += 1
        rejected = 0
        for target, region in (((1.2 * h, 2 * h), "II"), ((0.3, 0.2), "I"), ((0.3, 2 * h), "I"),
                               ((0.2, 0.5 * h), "II")):
            try:
                solve_flexibility(sys, target, region)
            except InfeasibleError:
                rejected += 1
        info["detail"] = "%d targets, max residual %.2e; infeasible rejected %d/4" % (n, worst, rejected)
        assert worst < 1e-6 and rejected == 4


def test_ac12_separating_bump():
    with criterion(12, 30) as info:
        sys = MarkovSystem(np.ones((2, 2), dtype=int))
        rng = np.random.default_rng(12)
        worst, low, Ns = 0.0, math.inf, []
        for _ in range(10):
            w = [random_markov_measure(sys, rng) for _ in range(3)]
            gamma = float(rng.uniform(0.1, 1.9))
            q = separating_bump(sys, *w, gamma)
            ints = [q.integral(m) for m in w]
            worst = max(worst, abs(ints[0] - 1), abs(ints[1] - 1), abs(ints[2] - gamma))
            low = min(low, q.minimum - gamma / 2)
            Ns.append(q.N)
        info["detail"] = "10 triples: max integral error %.2e, min(q) - gamma/2 = %.2e, N up to %d" % (
            worst, low, max(Ns))
        assert worst < 1e-10 and low >= -1e-15


def test_ac13_determinism(tmp_path, capsys):
    with criterion(13, 600) as info:
        cfg = bundled("three-disks.cfg")
        outs = [str(tmp_path / "run1"), str(tmp_path / "run2")]
        codes = [main(["pipeline", "run", cfg, "--out", d]) for d in outs]
        capsys.readouterr()
        csvs = sorted(n for n in os.listdir(outs[0]) if n.endswith(".csv"))
        same = all(open(os.path.join(outs[0], n), "rb").read() == open(os.path.join(outs[1], n), "rb").read()
                   for n in csvs)
        manifests = [open(os.path.join(d, "MANIFEST"), "rb").read() for d in outs]
        info["detail"] = "exit codes %s; %d CSV files identical: %s; manifests identical: %s" % (
            codes, len(csvs), same, manifests[0] == manifests[1])
        assert codes == [0, 0] and csvs and same and manifests[0] == manifests[1]
