"""Experiment orchestration: table -> orbits -> normal form -> horseshoe -> report.

Every stage writes plain-text or CSV artifacts into the output directory.
Nothing time- or host-dependent is written, so reruns are byte-identical.
A MANIFEST lists each artifact with its sha256 and marks the run complete
or partial (naming the failed stage and its error code).
"""
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor

import mpmath
import numpy as np
from mpmath import mp

from .errors import ArtifactError
from .precision import to_decimal

SCHEMA_VERSION = "1"


def dec(x, digits=None):
    """Decimal string for JSON/CSV output (30+ significant digits for mp values)."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        # numpy scalars repr as np.float64(...)
        return repr(float(x))
    return to_decimal(x, digits)


def dec_list(xs):
    return [dec(x) for x in xs]


class Run:
    def __init__(self, out_dir):
        self.out = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.files = []
        self.summary = {}
        self.failed = None

    def write(self, name, text):
        path = os.path.join(self.out, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        self.files.append(name)
        return path

    def write_json(self, name, obj):
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def manifest(self):
        lines = []
        for name in self.files:
            with open(os.path.join(self.out, name), "rb") as fh:
                lines.append("%s  %s" % (hashlib.sha256(fh.read()).hexdigest(), name))
        if self.failed:
            lines.append("status: partial (stage %s failed: %s)" % self.failed)
        else:
            lines.append("status: complete")
        path = os.path.join(self.out, "MANIFEST")
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        return path


def _csv(header, rows):
    return ",".join(header) + "\n" + "".join(",".join(str(v) for v in r) + "\n" for r in rows)


def run_pipeline(cfg, out_dir=None, progress=None, workers=1):
    """Run every stage; returns (exit status, Run).  Errors are caught per stage.

    ``workers`` > 1 spreads the per-orbit work of the rigidity stage over
    processes; results are gathered in input order so outputs do not change.
    """
    run = Run(out_dir or cfg.out)
    say = progress or (lambda msg: None)
    stage = "validate"
    try:
        with mp.workprec(cfg.precision):
            table = cfg.validate()
            run.write("table.txt", json.dumps(table.describe(), indent=2, sort_keys=True) + "\n")
            stage = "orbits"
            say("orbits")
            _stage_orbits(run, cfg, table)
            stage = "normal-form"
            say("normal form")
            nf, core = _stage_normal_form(run, cfg, table)
            stage = "frame"
            say("homoclinic frame")
            frame = _stage_frame(run, cfg, table, nf, core)
            stage = "horseshoe"
            say("horseshoe family")
            fam = _stage_family(run, cfg, table, core)
            stage = "fits"
            say("fits")
            _stage_fits(run, cfg, fam, frame, nf)
            stage = "rigidity"
            say("rigidity report")
            _stage_rigidity(run, cfg, table, workers)
        if cfg.sft:
            stage = "suspension"
            say("suspension sweep")
            _stage_suspension(run, cfg)
        stage = "summary"
        run.summary["schema_version"] = SCHEMA_VERSION
        run.summary["config"] = os.path.basename(cfg.path)
        run.write_json("summary.json", run.summary)
        run.write("summary.txt", _summary_text(run.summary))
        run.manifest()
        return 0, run
    except ArtifactError as exc:
        run.failed = (stage, exc.code)
        run.summary["error"] = {"stage": stage, "code": exc.code, "message": str(exc)}
        run.write_json("summary.json", run.summary)
        run.manifest()
        return exc.exit_code, run


def _stage_orbits(run, cfg, table):
    from .orbits import find_periodic_orbit, orbit_flow_exponent

    rows = []
    for w in cfg.words:
        o = find_periodic_orbit(table, w)
        rows.append([w, o.period, dec(o.lam), dec(o.LE), dec(o.flow_period), dec(orbit_flow_exponent(o)),
                     dec(o.residual, 5)])
    run.write("orbits.csv", _csv(["word", "period", "lambda", "LE", "flow_period", "flow_exponent", "residual"], rows))


def _stage_normal_form(run, cfg, table):
    from .normal_form import anosov_cocycle_value, anosov_from_jet, extract_birkhoff, resonance_consistency, \
        return_map_jet
    from .orbits import find_periodic_orbit

    word = cfg.nf_word or cfg.block
    core = find_periodic_orbit(table, cfg.block if word == cfg.block else word)
    nf = extract_birkhoff(return_map_jet(table, core, cfg.order), K=cfg.K)
    lines = ["word: %s" % word, "order: %d" % cfg.order, "lambda: %s" % dec(nf.lam)]
    lines += ["a_%d: %s" % (k, dec(v)) for k, v in enumerate(nf.a)]
    lines += ["residual: %s" % dec(nf.residual, 5),
              "anosov value (-a_1/lambda): %s" % dec(anosov_cocycle_value(nf)),
              "anosov value from jet: %s" % dec(anosov_from_jet(nf)),
              "resonance consistency: %s" % dec(resonance_consistency(nf), 5)]
    run.write("normal_form.txt", "\n".join(lines) + "\n")
    run.summary["normal_form"] = {"word": word, "lambda": dec(nf.lam), "a": dec_list(nf.a),
                                  "residual": dec(nf.residual, 5), "anosov": dec(anosov_cocycle_value(nf))}
    if word != cfg.block:
        core = find_periodic_orbit(table, cfg.block)
        nf = extract_birkhoff(return_map_jet(table, core, cfg.order), K=cfg.K)
    return nf, core


def _stage_frame(run, cfg, table, nf, core):
    from .normal_form import mirror_normalize
    from .orbits import find_homoclinic_segment

    seg = find_homoclinic_segment(table, cfg.block, cfg.connector, cfg.depth, core=core)
    fr = mirror_normalize(table, nf, seg, k=2, J=cfg.J)
    C0, B = fr.trace_constants()
    lines = ["block: %s  connector: %s  depth: %d" % (cfg.block, cfg.connector, cfg.depth),
             "transversality angle: %s" % dec(seg.transversality_angle),
             "xi_inf: %s" % dec(fr.xi_inf), "sign: %d" % fr.sign]
    lines += ["gamma_%d: %s" % (k, dec(v)) for k, v in enumerate(fr.gamma)]
    lines += ["g_%d: %s" % (k, dec(v)) for k, v in enumerate(fr.g)]
    lines += ["w_1: %s" % dec(fr.w_1), "w_1 (orbit): %s" % dec(fr.w_1_dynamic)]
    lines += ["a_bar_%d: %s" % (k, dec(v)) for k, v in enumerate(fr.a_bar)]
    lines += ["check %s: %s" % (k, dec(v, 5)) for k, v in sorted(fr.checks.items())]
    lines += ["uncertainty %s: %s" % (k, dec(v, 5)) for k, v in sorted(fr.uncertainty.items())]
    lines += ["predicted C0 = g_0: %s" % dec(C0), "predicted B = -2 xi_inf^2 g_0 a_1 / lambda: %s" % dec(B)]
    run.write("frame.txt", "\n".join(lines) + "\n")
    run.summary["frame"] = {"xi_inf": dec(fr.xi_inf), "g_0": dec(fr.g[0]), "gamma_1": dec(fr.gamma[1]),
                            "w_1": dec(fr.w_1), "C0_predicted": dec(C0), "B_predicted": dec(B)}
    return fr


def _stage_family(run, cfg, table, core):
    from .asymptotics import horseshoe_family

    fam = horseshoe_family(table, cfg.block, cfg.connector, cfg.n_max, core=core)
    rows = [[r.n, r.map_period, dec(r.LE), dec(r.flow_period), dec(r.cosh_value), dec(r.residual, 5)]
            for r in fam.rows]
    run.write("family.csv", _csv(["n", "map_period", "LE", "flow_period", "cosh_value", "residual"], rows))
    # gnuplot-ready: n against lambda^n * trace, which tends to C0
    lam = fam.lam
    run.write("trace.dat", "".join("%d %s\n" % (r.n, mpmath.nstr(abs(r.trace * lam ** r.n), 20)) for r in fam.rows))
    run.write_json("trace.json", {"schema_version": SCHEMA_VERSION, "file": "trace.dat",
                                  "columns": ["n", "lambda^n * trace(h_n)"], "lambda": dec(lam),
                                  "block": cfg.block, "connector": cfg.connector})
    return fam


def _stage_fits(run, cfg, fam, frame, nf):
    from .asymptotics import fit_period_expansion, fit_series, fit_trace_expansion

    out, summ = [], {}
    for name, kw in cfg.fits:
        if name == "period":
            rep = fit_period_expansion(fam)
            summ["L0"] = dec(rep["L0"])
            summ["L1"] = dec(rep["L1"])
        elif name == "trace":
            rep = fit_trace_expansion(fam)
            C0p, Bp = frame.trace_constants()
            summ["C0"] = dec(rep["C0"])
            summ["B"] = dec(rep["B"])
            summ["C0_vs_g0"] = dec(rep["C0"] / C0p - 1, 5)
            summ["B_vs_prediction"] = dec(rep["B"] / Bp - 1, 5)
        else:
            rep = fit_series(fam, P=kw.get("P", 2))
            summ["series"] = {k: dec(v) for k, v in rep.coefficients.items()}
        out += rep.lines() + [""]
    run.write("fits.txt", "\n".join(out))
    run.summary["fits"] = summ


def _record_task(args):
    from .asymptotics import orbit_record
    from .geometry import load_table

    path, word, prec = args
    with mp.workprec(prec):
        return orbit_record(load_table(path), word, 7)


def _stage_rigidity(run, cfg, table, workers=1):
    from .asymptotics import orbit_record, rigidity_verdict

    if workers > 1 and len(cfg.words) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_record_task, [(cfg.table, w, mp.prec) for w in cfg.words]))
    else:
        records = [orbit_record(table, w, 7) for w in cfg.words]
    rep = rigidity_verdict(records)
    run.write("rigidity.txt", "\n".join(rep.lines()) + "\n")
    run.summary["rigidity"] = {"verdict": rep.verdict, "dispersion": dec(rep.dispersion),
                               "a_1": {r.word: dec(r.a1) for r in rep.records}, "reasons": rep.reasons}


def _stage_suspension(run, cfg):
    from .config import load_sft
    from .suspension import e_proof_sweep, sft_entropy

    sys = load_sft(cfg.sft)
    rows = e_proof_sweep(sys, cfg.grid)
    run.write("suspension.csv", _csv(["s", "t", "h_mu_flow", "h_top_flow"],
                                     [["%.6f" % s, "%.6f" % t, "%.15g" % a, "%.15g" % b] for s, t, a, b in rows]))
    run.write_json("suspension.json", {"schema_version": SCHEMA_VERSION, "sft_entropy": repr(sft_entropy(sys)),
                                       "columns": ["s", "t", "h_mu_flow", "h_top_flow"], "rows": len(rows)})
    run.summary["suspension"] = {"sft_entropy": repr(sft_entropy(sys)), "rows": len(rows)}


def _summary_text(summary):
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(prefix + [str(k)], obj[k])
        elif isinstance(obj, list):
            lines.append("%s: %s" % (".".join(prefix), ", ".join(str(x) for x in obj)))
        else:
            lines.append("%s: %s" % (".".join(prefix), obj))

    walk([], summary)
    return "\n".join(lines) + "\n"
