"""Structured-text (INI) configuration files.

Experiment file schema (paths are relative to the file):

    [experiment]
    table = tables/three-disks.cfg     ; billiard table file
    precision = 256                     ; bits, >= 64
    words = 12, 13, 23, 1213, 1323      ; rigidity ensemble
    out = out                           ; default output directory

    [normal_form]
    word = 12          ; reference orbit (defaults to the horseshoe block)
    order = 9          ; jet order, >= 2K+1
    K = 3
    J = 4              ; arc degree in the homoclinic frame
    depth = 6          ; homoclinic segment depth

    [horseshoe]
    block = 12
    connector = 13
    n_max = 30
    fits = period, trace, series:P=2

    [suspension]                        ; optional
    sft = sft/golden.cfg
    grid = 40

SFT files carry ``[sft] adjacency = 1 1; 1 0`` and optionally ``roof`` and
``potential`` rows in the same matrix syntax.
"""
import configparser
from dataclasses import dataclass, field
import os

import numpy as np

from .errors import ValidationError

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def bundled(name):
    """Path of a bundled config file (package data)."""
    path = os.path.join(DATA_DIR, name)
    if not os.path.exists(path):
        raise ValidationError("no bundled config %r" % name)
    return path


def read_ini(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ValidationError("cannot read %s: %s" % (path, exc)) from exc
    except configparser.Error as exc:
        raise ValidationError("malformed config %s: %s" % (path, exc)) from exc
    return parser


def parse_matrix(text, what="matrix"):
    rows = [r.split() for r in str(text).replace(",", " ").split(";") if r.strip()]
    try:
        M = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ValidationError("%s: %s" % (what, exc)) from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("%s must be square" % what)
    return M


def format_matrix(M):
    return "; ".join(" ".join(repr(float(x)) if float(x) != int(x) else str(int(x)) for x in row) for row in M)


def load_sft(path):
    from .suspension import MarkovSystem

    p = read_ini(path)
    if not p.has_section("sft"):
        raise ValidationError("%s needs an [sft] section" % path)
    sec = p["sft"]
    if "adjacency" not in sec:
        raise ValidationError("%s: [sft] needs adjacency" % path)
    A = parse_matrix(sec["adjacency"], "adjacency")
    roof = parse_matrix(sec["roof"], "roof") if "roof" in sec else None
    pot = parse_matrix(sec["potential"], "potential") if "potential" in sec else None
    return MarkovSystem(A.astype(int), roof, pot)


def load_roof(path, sys):
    p = read_ini(path)
    if not p.has_section("roof") or "values" not in p["roof"]:
        raise ValidationError("%s needs [roof] values" % path)
    return sys.edge_array(parse_matrix(p["roof"]["values"], "roof"), "roof")


def _words(text):
    return [w.strip() for w in str(text).split(",") if w.strip()]


def parse_fits(text):
    """'period, trace, series:P=2' -> [('period', {}), ('trace', {}), ('series', {'P': 2})]."""
    out = []
    for item in _words(text):
        name, _, opts = item.partition(":")
        kw = {}
        for o in filter(None, opts.split(";")):
            k, _, v = o.partition("=")
            try:
                kw[k.strip()] = int(v)
            except ValueError as exc:
                raise ValidationError("fit option %r needs an integer" % o) from exc
        name = name.strip()
        if name not in ("period", "trace", "series"):
            raise ValidationError("unknown fit model %r" % name)
        out.append((name, kw))
    return out


@dataclass
class ExperimentConfig:
    path: str
    table: str
    precision: int = 256
    words: list = field(default_factory=list)
    out: str = "out"
    nf_word: str = None
    order: int = 9
    K: int = 3
    J: int = 4
    depth: int = 6
    block: str = "12"
    connector: str = "13"
    n_max: int = 30
    fits: list = field(default_factory=list)
    sft: str = None
    grid: int = 40

    def validate(self, check_n_max=True):
        """Fail fast on everything that can be checked without heavy compute."""
        from .geometry import load_table

        if self.precision < 64:
            raise ValidationError("precision must be at least 64 bits")
        if not os.path.exists(self.table):
            raise ValidationError("table file %s does not exist" % self.table)
        if self.order < 2 * self.K + 1:
            raise ValidationError("order %d below 2K+1=%d" % (self.order, 2 * self.K + 1))
        if self.J > self.order - 1:
            raise ValidationError("J=%d needs order >= %d" % (self.J, self.J + 1))
        if self.n_max < 10:
            raise ValidationError("n_max must be at least 10 for the fits")
        if self.sft and not os.path.exists(self.sft):
            raise ValidationError("sft file %s does not exist" % self.sft)
        table = load_table(self.table)
        for w in self.words + [self.block, self.nf_word or self.block]:
            from .symbolic import require_admissible
            require_admissible(w, table.m)
        if check_n_max:
            self.check_n_max()
        return table

    def check_n_max(self):
        """n_max against the precision: cheap double-precision estimate of lambda."""
        from mpmath import mp

        from .asymptotics import precision_ceiling
        from .geometry import load_table
        from .orbits import find_periodic_orbit

        with mp.workprec(64):
            orb = find_periodic_orbit(load_table(self.table), self.block)
        ceil = precision_ceiling(orb.lam, self.precision)
        if self.n_max > ceil:
            raise ValidationError("n_max=%d exceeds the ceiling %d supported at %d bits" %
                                  (self.n_max, ceil, self.precision))
        return ceil


def load_experiment(path):
    p = read_ini(path)
    base = os.path.dirname(os.path.abspath(path))
    if not p.has_section("experiment"):
        raise ValidationError("%s needs an [experiment] section" % path)
    ex = p["experiment"]

    def rel(x):
        return x if os.path.isabs(x) else os.path.normpath(os.path.join(base, x))

    try:
        cfg = ExperimentConfig(path=os.path.abspath(path), table=rel(ex["table"]),
                               precision=ex.getint("precision", 256), words=_words(ex.get("words", "")),
                               out=rel(ex.get("out", "out")))
        if p.has_section("normal_form"):
            nf = p["normal_form"]
            cfg.nf_word = nf.get("word")
            cfg.order = nf.getint("order", cfg.order)
            cfg.K = nf.getint("K", cfg.K)
            cfg.J = nf.getint("J", cfg.J)
            cfg.depth = nf.getint("depth", cfg.depth)
        if p.has_section("horseshoe"):
            hs = p["horseshoe"]
            cfg.block = hs.get("block", cfg.block)
            cfg.connector = hs.get("connector", cfg.connector)
            cfg.n_max = hs.getint("n_max", cfg.n_max)
            cfg.fits = parse_fits(hs.get("fits", "period, trace, series:P=2"))
        else:
            cfg.fits = parse_fits("period, trace, series:P=2")
        if p.has_section("suspension"):
            su = p["suspension"]
            cfg.sft = rel(su["sft"]) if "sft" in su else None
            cfg.grid = su.getint("grid", cfg.grid)
    except KeyError as exc:
        raise ValidationError("%s: missing key %s" % (path, exc)) from exc
    except ValueError as exc:
        raise ValidationError("%s: %s" % (path, exc)) from exc
    if len(cfg.words) < 2:
        raise ValidationError("%s: the rigidity ensemble needs at least two words" % path)
    return cfg
