"""Command-line front end: solvers, constants, verification runs and sweeps.

Reports are JSON documents (``schema_version`` 1) or a flat CSV projection of
their tables.  Everything except the ``run`` block (timestamp and wall-clock
timings) is a deterministic function of the command line.
"""

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .capacity import CapacityQuery, ball_capacity, isocap_check
from .constants import (HSParams, MatrixForm, capacitary_Apq, hardy_remainder_constant,
                        hs_constant, hs_constant_critical, isocap_constant, qf_best_constant,
                        sobolev_constant, z10_constant)
from .errors import ConvergenceError, SharpConstError
from .inequalities import (CASES, counterexample_x1_delta, elem_grid_check, run_corpus,
                           sharpness_sweep)
from .sl_eigen import STANDARD_Q, build_problem, smallest_eigenvalue

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

DEFAULT_EIGEN_TOL = 1e-4
DEFAULT_QUAD_TOL = 1e-8

COMMANDS = ("eigen", "constant", "verify", "sharpness", "capacity", "all")
PROBLEMS = ("corollary2", "corollary81", "legendre", "hlp", "theorem31", "remark7")
CONSTANTS = ("hs_critical", "hs", "isocap", "sobolev", "hardy_remainder", "capacitary_Apq",
             "qf", "z10")
SWEEP_CASES = ("INEQ-T1", "INEQ-QF", "INEQ-1U", "INEQ-8X", "INEQ-60C")

# the two eigenvalues whose decimal values are stated alongside the proofs
PAPER_EIGENVALUES = {"corollary2": 0.1564, "corollary81": 0.16}


class ConfigError(SharpConstError):
    """Invalid command line or environment; maps to exit code 2."""


@dataclass
class RunConfig:
    command: str
    problem: str = "corollary2"
    q: str = "one"
    name: str = None
    cases: list = field(default_factory=list)
    schedule: list = None
    p: float = None
    a: float = None
    b: float = None
    n: int = None
    qexp: float = None
    m: float = None
    mu: float = 0.0
    radius: float = 1.0
    matrix: list = None
    ratio: float = None
    eigen_tol: float = DEFAULT_EIGEN_TOL
    quad_tol: float = DEFAULT_QUAD_TOL
    output_path: str = None
    format: str = "json"
    threads: int = 1

    def validate(self):
        """Reject unknown selectors and malformed values before any computation."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; known: {list(PROBLEMS)}")
        if self.q not in STANDARD_Q:
            raise ConfigError(f"unknown weight {self.q!r}; known: {sorted(STANDARD_Q)}")
        if self.command == "constant" and self.name not in CONSTANTS:
            raise ConfigError(f"unknown constant {self.name!r}; known: {list(CONSTANTS)}")
        known = SWEEP_CASES if self.command == "sharpness" else tuple(CASES)
        for c in self.cases:
            if c not in known:
                raise ConfigError(f"unknown case {c!r}; known: {sorted(known)}")
        for label, tol in (("eigen tolerance", self.eigen_tol), ("quadrature tolerance", self.quad_tol)):
            if not (tol > 0 and math.isfinite(tol)):
                raise ConfigError(f"{label} must be positive, got {tol!r}")
        if self.threads < 1:
            raise ConfigError(f"thread count must be >= 1, got {self.threads}")
        return self


def _threads_from_env(environ):
    raw = environ.get("SHARPCONST_THREADS", "").strip()
    if not raw:
        return 1
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"SHARPCONST_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise ConfigError(f"SHARPCONST_THREADS must be a positive integer, got {raw!r}")
    return val


def _parse_matrix(text):
    """'1,0;0,-1' -> [[1, 0], [0, -1]]; entries may be complex ('1j')."""
    try:
        rows = [[complex(x.strip().replace(" ", "")) for x in row.split(",")]
                for row in text.split(";")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse matrix {text!r}") from None
    if any(len(r) != len(rows) for r in rows):
        raise argparse.ArgumentTypeError(f"matrix {text!r} is not square")
    return [[z.real if z.imag == 0 else z for z in r] for r in rows]


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse number list {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", dest="output_path", help="write the report here instead of stdout")
    quad = _Parser(add_help=False)
    quad.add_argument("--tol", type=float, dest="quad_tol", default=DEFAULT_QUAD_TOL,
                      help="quadrature tolerance")

    parser = _Parser(prog="sharpconst", description="Sharp constants of Hardy-Sobolev type inequalities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eigen", parents=[common], help="smallest eigenvalue of a registered problem")
    e.add_argument("--tol", type=float, dest="eigen_tol", default=DEFAULT_EIGEN_TOL)
    e.add_argument("--problem", choices=PROBLEMS, default="corollary2")
    e.add_argument("--q", choices=sorted(STANDARD_Q), default="one", help="weight for theorem31")
    e.add_argument("--n", type=int, help="dimension for remark7")
    e.add_argument("--mu", type=float, default=0.0)

    c = sub.add_parser("constant", parents=[common], help="closed-form constants")
    c.add_argument("--name", choices=CONSTANTS, required=True)
    for flag in ("p", "a", "b"):
        c.add_argument(f"--{flag}", type=float)
    c.add_argument("--n", type=int)
    c.add_argument("--q", type=float, dest="qexp", help="Lorentz exponent for hs / capacitary_Apq")
    c.add_argument("--m", type=float, help="dimension for sobolev, degree for z10")
    c.add_argument("--matrix", type=_parse_matrix, help="rows separated by ';', e.g. '1,0;0,-1'")
    c.add_argument("--ratio", type=float, help="max |P|/|Q|^2 on the sphere, for z10")

    v = sub.add_parser("verify", parents=[common, quad], help="verify inequalities on the standard corpus")
    v.add_argument("--case", dest="cases", action="append", choices=sorted(CASES),
                   help="repeatable; default all cases")

    s = sub.add_parser("sharpness", parents=[common, quad], help="ratios along optimizing families")
    s.add_argument("--case", dest="cases", action="append", choices=SWEEP_CASES,
                   help="repeatable; default all sweeps")
    s.add_argument("--schedule", type=_parse_floats, help="comma-separated family parameters")

    k = sub.add_parser("capacity", parents=[common], help="ball capacity and the isocapacitary check")
    k.add_argument("--p", type=float, required=True)
    k.add_argument("--a", type=float, default=0.0)
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--b", type=float, help="also run the isocapacitary check with this b")
    k.add_argument("--radius", type=float, default=1.0)

    everything = sub.add_parser("all", parents=[common, quad], help="constants, eigenvalues, corpus and sweeps")
    everything.add_argument("--eigen-tol", type=float, default=DEFAULT_EIGEN_TOL)
    return parser


def parse_config(argv=None, environ=None):
    """Command line (and environment) to a validated RunConfig."""
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    for key, val in vars(ns).items():
        if key == "command" or val is None:
            continue
        setattr(cfg, key, val)
    cfg.cases = list(ns.cases or []) if hasattr(ns, "cases") else []
    cfg.threads = _threads_from_env(os.environ if environ is None else environ)
    return cfg.validate()


# ---------------------------------------------------------------------------
# report assembly


_INPUT_KEYS = {
    "eigen": ("problem", "q", "n", "mu", "eigen_tol"),
    "constant": ("name", "p", "a", "b", "n", "qexp", "m", "matrix", "ratio"),
    "verify": ("cases", "quad_tol"),
    "sharpness": ("cases", "schedule", "quad_tol"),
    "capacity": ("p", "a", "b", "n", "radius"),
    "all": ("quad_tol", "eigen_tol"),
}


class Report:
    """Accumulates sections, flat table rows, verdicts and timings."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.sections = {}
        self.rows = []
        self.verdicts = []
        self.timings = {}
        self.error = None

    def add(self, name, payload, rows=(), verdicts=(), seconds=None):
        self.sections[name] = payload
        self.rows.extend(dict(section=name, **r) for r in rows)
        self.verdicts.extend(bool(v) for v in verdicts)
        if seconds is not None:
            self.timings[name] = seconds

    @property
    def passed(self):
        return all(self.verdicts)

    def document(self, started, finished):
        keys = _INPUT_KEYS[self.cfg.command]
        inputs = {k: getattr(self.cfg, k) for k in keys if getattr(self.cfg, k) is not None}
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "sharpconst", "version": __version__},
            "command": self.cfg.command,
            "inputs": inputs,
            "results": self.sections,
            "verdict": "pass" if self.passed and self.error is None else "fail",
            "run": {"timestamp": started, "finished": finished, "threads": self.cfg.threads,
                    "timings": self.timings},
        }
        if self.error is not None:
            doc["error"] = self.error
        return _clean(doc)


def _clean(obj):
    """JSON-safe copy: tuples to lists, complex to [re, im], non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def tagged(value, provenance, **extra):
    """A numeric constant with its provenance label."""
    if provenance not in ("closed_form", "eigenvalue", "paper_value"):
        raise ValueError(f"unknown provenance {provenance!r}")
    return dict(value=value, provenance=provenance, **extra)


def _need(cfg, *names):
    missing = [f"--{n if n != 'qexp' else 'q'}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"constant {cfg.name} needs {', '.join(missing)}")


def compute_constant(cfg):
    """Value of the constant selected by ``cfg.name`` (all closed forms)."""
    name = cfg.name
    if name in ("hs_critical", "hs", "isocap"):
        _need(cfg, "p", "a", "b", "n")
        h = HSParams(cfg.p, cfg.a, cfg.b, cfg.n)
        if name == "hs_critical":
            return hs_constant_critical(h)
        if name == "isocap":
            return isocap_constant(h)
        _need(cfg, "qexp")
        return hs_constant(h, cfg.qexp)
    if name == "sobolev":
        if cfg.m is None and cfg.n is None:
            raise ConfigError("constant sobolev needs --m")
        m = cfg.m if cfg.m is not None else cfg.n
        if m != int(m):
            raise ConfigError(f"sobolev dimension must be an integer, got {m}")
        return sobolev_constant(int(m))
    if name == "hardy_remainder":
        _need(cfg, "n")
        return hardy_remainder_constant(cfg.n)
    if name == "capacitary_Apq":
        _need(cfg, "p", "qexp")
        return capacitary_Apq(cfg.p, cfg.qexp)
    if name == "qf":
        _need(cfg, "matrix")
        return qf_best_constant(MatrixForm(cfg.matrix))
    _need(cfg, "n", "m", "ratio")
    return z10_constant(cfg.n, cfg.m, cfg.ratio)


def _constant_inputs(cfg):
    keys = {"hs_critical": ("p", "a", "b", "n"), "hs": ("p", "a", "b", "n", "qexp"),
            "isocap": ("p", "a", "b", "n"), "sobolev": ("m", "n"), "hardy_remainder": ("n",),
            "capacitary_Apq": ("p", "qexp"), "qf": ("matrix",), "z10": ("n", "m", "ratio")}[cfg.name]
    return {("q" if k == "qexp" else k): getattr(cfg, k) for k in keys if getattr(cfg, k) is not None}


def run_constant(cfg, report):
    t0 = time.perf_counter()
    value = compute_constant(cfg)
    inputs = _constant_inputs(cfg)
    report.add("constant", {"name": cfg.name, "inputs": inputs, "constant": tagged(value, "closed_form")},
               rows=[{"name": cfg.name, "inputs": json.dumps(_clean(inputs), sort_keys=True),
                      "value": value, "provenance": "closed_form"}],
               seconds=time.perf_counter() - t0)


def _problem(cfg):
    if cfg.problem == "theorem31":
        return build_problem("theorem31", q=STANDARD_Q[cfg.q]())
    if cfg.problem == "remark7":
        if cfg.n is None:
            raise ConfigError("problem remark7 needs --n")
        return build_problem("remark7", n=cfg.n, mu=cfg.mu)
    return build_problem(cfg.problem)


def run_eigen(cfg, report, problem_name=None, key="eigen"):
    name = problem_name or cfg.problem
    prob = _problem(cfg) if problem_name is None else build_problem(problem_name)
    res = smallest_eigenvalue(prob, tol=cfg.eigen_tol)
    data = res.to_dict()
    seconds = data.pop("seconds")
    payload = {"problem": prob.describe(), "tol": cfg.eigen_tol,
               "lambda": tagged(res.lambda_, "eigenvalue", error_estimate=res.error_estimate),
               "convergence": data["mesh_levels"]}
    if name in PAPER_EIGENVALUES:
        ref = PAPER_EIGENVALUES[name]
        payload["reference"] = tagged(ref, "paper_value", difference=res.lambda_ - ref)
    rows = [{"problem": prob.name, "elements": lvl["elements"], "lambda": lvl["lambda"]}
            for lvl in data["mesh_levels"]]
    rows.append({"problem": prob.name, "elements": "extrapolated", "lambda": res.lambda_,
                 "error_estimate": res.error_estimate, "provenance": "eigenvalue"})
    report.add(key, payload, rows=rows, seconds=seconds)


def _report_rows(reports, timings):
    out = []
    for r in reports:
        d = r.to_dict()
        secs = d["extras"].pop("seconds", None)
        if secs is not None:
            timings[f"{r.case}/{r.field_id}"] = secs
        out.append(d)
    rows = [{"case": d["case"], "field": d["field"], "lhs": d["lhs"], "rhs": d["rhs"],
             "ratio": d["ratio"], "budget": d["budget"], "verdict": d["verdict"],
             "constant": d["constant"]["value"], "provenance": d["constant"]["provenance"]}
            for d in out]
    return out, rows


def run_verify(cfg, report):
    cases = cfg.cases or sorted(CASES)
    t0 = time.perf_counter()
    reports = run_corpus(cases, tol=cfg.quad_tol, workers=cfg.threads)
    field_times = {}
    dicts, rows = _report_rows(reports, field_times)
    report.timings.update(field_times)
    report.add("verify", {"tol": cfg.quad_tol, "cases": cases, "reports": dicts}, rows=rows,
               verdicts=[r.verdict for r in reports], seconds=time.perf_counter() - t0)
    if "INEQ-ELEM" in cases:
        t0 = time.perf_counter()
        g = elem_grid_check()
        only_origin = [tuple(p) for p in g.equality_points] == [(0, 0.0)]
        report.add("elem_grid", {"holds": g.holds, "points": g.points,
                                 "equality_points": g.equality_points,
                                 "degenerate_points": g.degenerate_points, "max_ratio": g.max_ratio,
                                 "equality_only_at_origin": only_origin},
                   rows=[{"case": "INEQ-ELEM", "field": "grid", "ratio": g.max_ratio,
                          "verdict": "pass" if g.holds and only_origin else "fail"}],
                   verdicts=[g.holds and only_origin], seconds=time.perf_counter() - t0)


def run_sharpness(cfg, report):
    cases = cfg.cases or list(SWEEP_CASES)
    t0 = time.perf_counter()
    sweeps, rows, verdicts = [], [], []
    for cid in cases:
        sw = sharpness_sweep(cid, schedule=cfg.schedule, tol=cfg.quad_tol)
        d = sw.to_dict()
        d["reports"], _ = _report_rows(sw.reports, report.timings)
        sweeps.append(d)
        rows.extend({"case": cid, "family": sw.family, "parameter": s, "ratio": r.ratio,
                     "budget": r.budget, "certified": sw.certified}
                    for s, r in zip(sw.schedule, sw.reports))
        verdicts.append(sw.certified and all(r.verdict for r in sw.reports))
    report.add("sharpness", {"tol": cfg.quad_tol, "sweeps": sweeps}, rows=rows, verdicts=verdicts,
               seconds=time.perf_counter() - t0)


def run_capacity(cfg, report):
    t0 = time.perf_counter()
    qry = CapacityQuery(cfg.p, cfg.a, cfg.n, cfg.radius)
    cap = ball_capacity(qry)
    payload = {"query": {"p": cfg.p, "a": cfg.a, "n": cfg.n, "radius": cfg.radius},
               "ball_capacity": tagged(cap, "closed_form")}
    rows = [{"quantity": "ball_capacity", "value": cap, "provenance": "closed_form"}]
    verdicts = []
    if cfg.b is not None:
        h = HSParams(cfg.p, cfg.a, cfg.b, cfg.n)
        chk = isocap_check(h, cfg.radius)
        ok = chk.relative_gap < 1e-10
        payload["isocap"] = {"b": cfg.b, "lhs": chk.lhs, "rhs": chk.rhs,
                             "relative_gap": chk.relative_gap,
                             "constant": tagged(isocap_constant(h), "closed_form"),
                             "verdict": "pass" if ok else "fail"}
        rows.append({"quantity": "isocap_gap", "value": chk.relative_gap,
                     "verdict": "pass" if ok else "fail"})
        verdicts.append(ok)
    report.add("capacity", payload, rows=rows, verdicts=verdicts, seconds=time.perf_counter() - t0)


# standard closed-form constants reported by ``all``
_ALL_CONSTANTS = [
    ("hs_critical", dict(p=1.0, a=0.0, b=0.0, n=2)),
    ("hs_critical", dict(p=2.0, a=0.0, b=0.0, n=3)),
    ("sobolev", dict(m=3)),
    ("sobolev", dict(m=4)),
    ("hardy_remainder", dict(n=2)),
    ("hardy_remainder", dict(n=3)),
    ("qf", dict(matrix=[[1.0, 0.0], [0.0, -1.0]])),
]


def run_all(cfg, report):
    t0 = time.perf_counter()
    rows, table = [], []
    for name, kw in _ALL_CONSTANTS:
        sub = RunConfig(command="constant", name=name, **kw)
        value = compute_constant(sub)
        inputs = _constant_inputs(sub)
        table.append({"name": name, "inputs": inputs, "constant": tagged(value, "closed_form")})
        rows.append({"name": name, "inputs": json.dumps(_clean(inputs), sort_keys=True),
                     "value": value, "provenance": "closed_form"})
    report.add("constants", table, rows=rows, seconds=time.perf_counter() - t0)
    for prob in ("corollary2", "corollary81", "legendre", "hlp"):
        run_eigen(cfg, report, problem_name=prob, key=f"eigen/{prob}")
    run_verify(cfg, report)
    t0 = time.perf_counter()
    ratios = counterexample_x1_delta()
    grows = ratios[-1] > 2.0 * ratios[0]
    report.add("counterexample", {"epsilon": [0.1, 0.01, 0.001], "ratios": ratios, "grows": grows},
               rows=[{"case": "X1-delta", "parameter": e, "ratio": r}
                     for e, r in zip((0.1, 0.01, 0.001), ratios)],
               verdicts=[grows], seconds=time.perf_counter() - t0)
    run_sharpness(cfg, report)


RUNNERS = {"eigen": run_eigen, "constant": run_constant, "verify": run_verify,
           "sharpness": run_sharpness, "capacity": run_capacity, "all": run_all}


def render(doc, rows, fmt):
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(_clean(r))
    return buf.getvalue()


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def run(cfg, stdout=None):
    """Execute ``cfg`` and write the report; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    report = Report(cfg)
    started = _now()
    code = EXIT_OK
    try:
        RUNNERS[cfg.command](cfg, report)
    except ConvergenceError as exc:
        report.error = {"kind": type(exc).__name__, "message": str(exc),
                        "best_estimate": exc.best_estimate, "error_estimate": exc.error_estimate}
        code = EXIT_NONCONVERGENCE
    if code == EXIT_OK and not report.passed:
        code = EXIT_FAIL
    text = render(report.document(started, _now()), report.rows, cfg.format)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv=None, environ=None):
    """Entry point of the ``sharpconst`` command."""
    try:
        cfg = parse_config(argv, environ)
        return run(cfg)
    except ConfigError as exc:
        print(f"sharpconst: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SharpConstError as exc:
        # domain and construction errors come from the supplied parameters
        print(f"sharpconst: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
