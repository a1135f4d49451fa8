"""Command-line front end: ``entropy-rigidity <group> <action> ...``.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 infeasible target.  ``--json`` prints one JSON object with a
``schema_version`` field; extended-precision numbers are decimal strings.
"""
import argparse
import json
import os
import sys

import numpy as np
from mpmath import mp

from .errors import ArtifactError, ValidationError
from .pipeline import SCHEMA_VERSION, _csv, dec, dec_list

EXIT_OK = 0


def _common(p):
    p.add_argument("--precision", type=int, default=256, metavar="BITS", help="working precision in bits")
    p.add_argument("--workers", type=int, default=1, metavar="K", help="worker processes where supported")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--out", metavar="DIR", help="output directory for data files")
    return p


def resolve(path, kind):
    """A file path, or the name of a bundled config of the given kind."""
    if os.path.exists(path):
        return path
    from .config import bundled
    sub = {"table": "tables", "sft": "sft", "experiment": ""}[kind]
    name = path if path.endswith(".cfg") else path + ".cfg"
    try:
        return bundled(os.path.join(sub, name) if sub else name)
    except ValidationError:
        raise ValidationError("no such %s file or bundled config: %s" % (kind, path)) from None


def _table(args):
    from .geometry import load_table
    return load_table(resolve(args.table, "table"))


def _sft(path):
    from .config import load_sft
    return load_sft(resolve(path, "sft"))


# ---------------------------------------------------------------------------
# commands; each returns (result dict, text lines)


def cmd_table_validate(args):
    from .geometry import load_table
    t = load_table(resolve(args.table, "table"))
    res = {"name": t.name, "obstacles": t.m, "non_eclipse_margin": float(t.non_eclipse_margin),
           "required_margin": t.required_margin, "perimeter": dec(t.perimeter()), "valid": True}
    lines = ["table %s: %d obstacles, non-eclipse margin %.6g (required %.3g): ok" %
             (t.name, t.m, t.non_eclipse_margin, t.required_margin)]
    return res, lines


def cmd_orbit_find(args):
    from .orbits import find_periodic_orbit, orbit_flow_exponent
    o = find_periodic_orbit(_table(args), args.word)
    res = {"word": str(o.word), "period": o.period, "lambda": dec(o.lam), "LE": dec(o.LE),
           "flow_period": dec(o.flow_period), "flow_exponent": dec(orbit_flow_exponent(o)),
           "trace": dec(o.trace), "det": dec(o.det), "residual": dec(o.residual, 5),
           "s": dec_list(o.collision_params), "phi": dec_list(o.collision_angles)}
    lines = ["%s: %s" % (k, v if not isinstance(v, list) else ", ".join(v)) for k, v in res.items()]
    return res, lines


def cmd_orbit_step(args):
    from .billiard import PhasePoint, billiard_step
    table = _table(args)
    x = PhasePoint(args.obstacle - 1, mp.mpf(args.s), mp.mpf(args.phi))
    rows = []
    for k in range(args.steps):
        x, tau = billiard_step(table, x)
        rows.append({"step": k + 1, "obstacle": x.obstacle + 1, "s": dec(x.s), "phi": dec(x.phi),
                     "flight": dec(tau)})
    lines = ["%d: obstacle %d  s %s  phi %s  flight %s" % (r["step"], r["obstacle"], r["s"], r["phi"], r["flight"])
             for r in rows]
    return {"steps": rows}, lines


def cmd_nf_extract(args):
    from .normal_form import anosov_cocycle_value, extract_birkhoff, return_map_jet
    from .orbits import find_periodic_orbit
    if args.order < 2 * args.K + 1:
        raise ValidationError("order %d below 2K+1=%d" % (args.order, 2 * args.K + 1))
    o = find_periodic_orbit(_table(args), args.word)
    nf = extract_birkhoff(return_map_jet(_table(args), o, args.order), K=args.K)
    res = {"word": str(o.word), "order": args.order, "lambda": dec(nf.lam), "a": dec_list(nf.a),
           "residual": dec(nf.residual, 5), "anosov": dec(anosov_cocycle_value(nf))}
    lines = ["lambda: %s" % res["lambda"]] + ["a_%d: %s" % (k, v) for k, v in enumerate(res["a"])]
    lines += ["residual: %s" % res["residual"], "anosov value: %s" % res["anosov"]]
    return res, lines


def cmd_horseshoe_scan(args):
    from .asymptotics import fit_period_expansion, fit_series, fit_trace_expansion, horseshoe_family
    from .config import parse_fits
    fits = parse_fits(args.fits)
    fam = horseshoe_family(_table(args), args.block, args.connector, args.n_max, n_min=args.n_min)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rows = [[r.n, r.map_period, dec(r.LE), dec(r.flow_period), dec(r.cosh_value), dec(r.residual, 5)]
                for r in fam.rows]
        with open(os.path.join(args.out, "family.csv"), "w", newline="\n") as fh:
            fh.write(_csv(["n", "map_period", "LE", "flow_period", "cosh_value", "residual"], rows))
    res = {"block": args.block, "connector": args.connector, "lambda": dec(fam.lam), "rows": len(fam.rows),
           "fits": {}}
    lines = ["family %s/%s: %d rows, lambda %s" % (args.block, args.connector, len(fam.rows), dec(fam.lam))]
    for name, kw in fits:
        if name == "period":
            rep = fit_period_expansion(fam)
        elif name == "trace":
            rep = fit_trace_expansion(fam)
        else:
            rep = fit_series(fam, P=kw.get("P", 2))
        res["fits"][rep.model] = {"coefficients": {k: dec(v) for k, v in rep.coefficients.items()},
                                  "uncertainties": {k: dec(v, 5) for k, v in rep.uncertainties.items()}}
        lines += rep.lines()
    return res, lines


def cmd_rigidity_report(args):
    from .asymptotics import rigidity_report
    rep = rigidity_report(_table(args), args.words, tol=args.tol)
    res = {"verdict": rep.verdict, "dispersion": dec(rep.dispersion), "reasons": rep.reasons,
           "orbits": [{"word": r.word, "exponent": dec(r.exponent), "a_1": dec(r.a1),
                       "a_1_uncertainty": dec(r.a1_uncertainty, 5)} for r in rep.records]}
    return res, rep.lines()


def cmd_entropy_suspension(args):
    from .config import load_roof
    from .suspension import abramov, parry_measure, sft_entropy, suspension_htop
    s = _sft(args.sft)
    roof = load_roof(resolve(args.roof, "sft"), s) if args.roof else s.roof
    h = sft_entropy(s)
    res = {"sft_entropy": repr(h), "states": s.m}
    lines = ["h_top(base): %.15g" % h]
    if roof is not None:
        ht = suspension_htop(s, roof)
        hp = abramov(parry_measure(s), s, roof)
        res.update({"suspension_htop": repr(ht), "parry_flow_entropy": repr(hp)})
        lines += ["h_top(flow): %.15g" % ht, "h_Parry(flow): %.15g" % hp]
    return res, lines


def cmd_flexibility_sample(args):
    from .suspension import solve_flexibility
    from .config import format_matrix
    r = solve_flexibility(_sft(args.sft), args.target, args.region)
    res = {"region": r.region, "target": [float(x) for x in r.target], "achieved": [float(x) for x in r.achieved],
           "residual": float(r.residual), "parameter": float(r.parameter), "states": r.system.m,
           "roof": format_matrix(r.roof), "transition": format_matrix(r.measure.P), "notes": r.notes}
    lines = ["region %s: target (%.10g, %.10g) achieved (%.10g, %.10g), residual %.3g" %
             (r.region, r.target[0], r.target[1], r.achieved[0], r.achieved[1], r.residual)]
    lines += ["roof: %s" % res["roof"], "transition: %s" % res["transition"]] + ["note: %s" % n for n in r.notes]
    return res, lines


def cmd_flexibility_sweep(args):
    from .suspension import e_proof_sweep
    rows = e_proof_sweep(_sft(args.sft), args.grid, gamma=args.gamma)
    table = [["%.6f" % s, "%.6f" % t, "%.15g" % a, "%.15g" % b] for s, t, a, b in rows]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "sweep.csv"), "w", newline="\n") as fh:
            fh.write(_csv(["s", "t", "h_mu_flow", "h_top_flow"], table))
        with open(os.path.join(args.out, "sweep.dat"), "w", newline="\n") as fh:
            fh.writelines("%d %.15g\n" % (k, r[3]) for k, r in enumerate(rows))
        with open(os.path.join(args.out, "sweep.json"), "w") as fh:
            json.dump({"schema_version": SCHEMA_VERSION, "file": "sweep.dat",
                       "columns": ["boundary index", "h_top_flow"]}, fh, indent=2, sort_keys=True)
    hs = np.array([r[3] for r in rows])
    res = {"points": len(rows), "h_mu_flow": [float(r[2]) for r in rows], "h_top_flow": hs.tolist(),
           "h_top_range": [float(hs.min()), float(hs.max())]}
    lines = [",".join(r) for r in table]
    return res, lines


def cmd_pipeline_run(args):
    from .config import load_experiment
    from .pipeline import run_pipeline
    cfg = load_experiment(resolve(args.config, "experiment"))
    if args.precision_set:
        cfg.precision = args.precision
    out = args.out or cfg.out
    status, run = run_pipeline(cfg, out, progress=None if args.json else
                               (lambda m: print("stage: %s" % m, file=sys.stderr)), workers=args.workers)
    res = {"status": status, "out": out, "files": run.files, "summary": run.summary}
    if status:
        err = run.summary["error"]
        raise _Reported(res, "stage %s failed (%s): %s" % (err["stage"], err["code"], err["message"]), status,
                        err["code"])
    lines = ["output: %s" % out, "verdict: %s" % run.summary["rigidity"]["verdict"]]
    return res, lines


def cmd_pipeline_validate(args):
    from .config import load_experiment
    cfg = load_experiment(resolve(args.config, "experiment"))
    if args.precision_set:
        cfg.precision = args.precision
    with mp.workprec(cfg.precision):
        cfg.validate()
        ceil = cfg.check_n_max()
    res = {"config": cfg.path, "valid": True, "n_max": cfg.n_max, "n_max_ceiling": ceil,
           "precision": cfg.precision}
    return res, ["config %s: ok (n_max %d, ceiling %d at %d bits)" % (cfg.path, cfg.n_max, ceil, cfg.precision)]


class _Reported(ArtifactError):
    def __init__(self, result, message, exit_code, code):
        super().__init__(message)
        self.result, self.exit_code, self.code = result, exit_code, code


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="entropy-rigidity",
                                 description="Dispersing billiards: orbits, normal forms, horseshoe "
                                             "asymptotics and symbolic suspension entropy.")
    groups = ap.add_subparsers(dest="group", metavar="GROUP")
    groups.required = True

    def leaf(group_parser, name, func, help_):
        p = _common(group_parser.add_parser(name, help=help_))
        p.set_defaults(func=func)
        return p

    def group(name, help_):
        g = groups.add_parser(name, help=help_).add_subparsers(dest="action", metavar="ACTION")
        g.required = True
        return g

    g = group("table", "billiard tables")
    p = leaf(g, "validate", cmd_table_validate, "check non-eclipse and convexity")
    p.add_argument("table", help="table file or bundled name (three-disks, mixed, four-disks)")

    g = group("orbit", "orbits of the billiard map")
    p = leaf(g, "find", cmd_orbit_find, "periodic orbit with a given itinerary")
    _word_args(p)
    p.add_argument("--table", default="three-disks")
    p = leaf(g, "step", cmd_orbit_step, "iterate the billiard map")
    p.add_argument("--table", default="three-disks")
    p.add_argument("--obstacle", type=int, required=True, help="1-based obstacle label")
    p.add_argument("--s", required=True, help="arclength")
    p.add_argument("--phi", required=True, help="reflection angle")
    p.add_argument("--steps", type=int, default=1)

    g = group("nf", "Birkhoff normal forms")
    p = leaf(g, "extract", cmd_nf_extract, "normal form at a periodic orbit")
    _word_args(p)
    p.add_argument("--table", default="three-disks")
    p.add_argument("--order", type=int, default=9)
    p.add_argument("--K", type=int, default=3)

    g = group("horseshoe", "horseshoe families")
    p = leaf(g, "scan", cmd_horseshoe_scan, "compute a family and fit its expansions")
    p.add_argument("--table", default="three-disks")
    p.add_argument("--block", default="12")
    p.add_argument("--connector", default="13")
    p.add_argument("--nmax", "--n-max", dest="n_max", type=int, default=30)
    p.add_argument("--nmin", "--n-min", dest="n_min", type=int, default=0)
    p.add_argument("--fit", "--fits", dest="fits", default="period, trace, series:P=2")

    g = group("rigidity", "MME=SRB obstruction report")
    p = leaf(g, "report", cmd_rigidity_report, "exponent dispersion and first Birkhoff invariants")
    p.add_argument("words", nargs="+")
    p.add_argument("--table", default="three-disks")
    p.add_argument("--tol", default=None)

    g = group("entropy", "symbolic entropies")
    p = leaf(g, "suspension", cmd_entropy_suspension, "entropy of a subshift and its suspension")
    p.add_argument("--sft", default="golden", help="SFT file or bundled name (golden, full2, cat)")
    p.add_argument("--roof", help="roof file ([roof] values = ...) or bundled name")

    g = group("flexibility", "entropy flexibility of suspensions")
    p = leaf(g, "sample", cmd_flexibility_sample, "realize (c_mu, c_top) by a Markov measure and roof")
    p.add_argument("--sft", default="golden")
    p.add_argument("--target", required=True, type=_pair, help="c_mu,c_top")
    p.add_argument("--region", default="II", choices=["I", "II", "i", "ii"])
    p = leaf(g, "sweep", cmd_flexibility_sweep, "boundary sweep of the two-parameter roof family")
    p.add_argument("--sft", default="golden")
    p.add_argument("--family", default="e-proof", choices=["e-proof"])
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--gamma", type=float, default=0.5)

    g = group("pipeline", "full experiments")
    p = leaf(g, "run", cmd_pipeline_run, "run an experiment config end to end")
    p.add_argument("config", help="experiment file or bundled name (three-disks)")
    p = leaf(g, "validate", cmd_pipeline_validate, "fail-fast config check")
    p.add_argument("config")
    return ap


def _word_args(p):
    p.add_argument("word_pos", nargs="?", metavar="WORD", help="itinerary, e.g. 1213")
    p.add_argument("--word", help="same as the positional WORD")


def _pair(text):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers, got %r" % text) from None
    return a, b


def _emit(args, payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    args.precision_set = "--precision" in (argv if argv is not None else sys.argv[1:])
    if hasattr(args, "word_pos"):
        args.word = args.word or args.word_pos
        if not args.word:
            ap.error("a word is required (positional or --word)")
    command = "%s %s" % (args.group, args.action)
    try:
        if args.precision < 64:
            raise ValidationError("--precision must be at least 64 bits")
        if args.workers < 1:
            raise ValidationError("--workers must be positive")
        with mp.workprec(args.precision):
            result, lines = args.func(args)
    except ArtifactError as exc:
        if args.json:
            payload = {"schema_version": SCHEMA_VERSION, "command": command,
                       "error": {"code": exc.code, "message": str(exc)}}
            if isinstance(exc, _Reported):
                payload["result"] = exc.result
            _emit(args, payload)
        print("error (%s): %s" % (exc.code, exc), file=sys.stderr)
        return exc.exit_code
    if args.json:
        _emit(args, {"schema_version": SCHEMA_VERSION, "command": command, "result": result})
    else:
        print("\n".join(lines))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
