"""Command line front end: ``gen``, ``spectrum``, ``solve``, ``check`` and ``sweep``.

Exit status: 0 success, 2 hypothesis violation, 3 solver or gate failure,
4 input/output or usage error.  Set ``GRAPH_YAMABE_LOG`` (e.g. ``INFO``) for
solver progress on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .calculus import OperatorOrder
from .errors import (
    BadExponent,
    EmptyInterior,
    FormatError,
    GraphError,
    HypothesisViolation,
    InadmissibleField,
    NonPositivePotential,
    SolverError,
    TrivialAdmissibleSpace,
    YamabeError,
)
from .graph import decompose_domain
from .solvers import SolverConfig, certify_positivity, residual, solve
from .spectrum import lambda1, lambda_mp, lambda_mp_V, lambda_p, lambda_p_V, sobolev_constant
from .variational import VARIANTS, Problem

log = logging.getLogger("graph_yamabe")

EXIT_OK, EXIT_HYPOTHESIS, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
LOCAL_VARIANTS = ("thm1", "thm2", "thm4")

SWEEP_COLUMNS = [
    "axis", "value", "variant", "alpha", "p", "q", "m", "n_vertices", "threshold",
    "energy", "mp_level", "residual_linf", "residual_dual", "iterations", "wall_time",
    "u_max", "error",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (HypothesisViolation, NonPositivePotential, BadExponent, EmptyInterior,
                        TrivialAdmissibleSpace)):
        return EXIT_HYPOTHESIS
    if isinstance(exc, (SolverError, InadmissibleField)):
        return EXIT_SOLVER
    if isinstance(exc, (OSError, FormatError, GraphError, UsageError, ValueError)):
        return EXIT_IO
    return EXIT_SOLVER


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return io.FLOAT_FMT % v
    return str(v)


# ---------------------------------------------------------------------------
# shared problem setup
# ---------------------------------------------------------------------------

def _load_nonlinearity(spec):
    if spec is None:
        return None
    if os.path.exists(spec):
        with open(spec) as fh:
            return json.load(fh)
    return spec


def _default_p(variant):
    return 4.0 if variant in ("thm1", "thm5") else 2.0


def _setup(args, g=None, domain_ids=None):
    """Graph, domain ids, domain decomposition and h from the common flags."""
    if g is None:
        g = io.load_graph(args.graph)
    if domain_ids is None and getattr(args, "domain", None):
        domain_ids = io.load_domain(args.domain)
    dom = decompose_domain(g, domain_ids) if domain_ids is not None else None
    h = None
    if getattr(args, "h_file", None):
        h = io.read_field_csv(args.h_file, g)
    return g, domain_ids, dom, h


def _problem_params(args, variant):
    p = args.p if args.p is not None else _default_p(variant)
    return {
        "variant": variant,
        "alpha": args.alpha,
        "p": p,
        "q": args.q,
        "m": args.m,
        "nonlinearity": args.nonlinearity,
    }


def _build_problem(g, dom, h, params, force):
    variant = params["variant"]
    if variant in LOCAL_VARIANTS and dom is None:
        raise UsageError(f"{variant} is a Dirichlet problem: --domain is required")
    return Problem.build(
        variant, g, dom, alpha=params["alpha"], p=params["p"], m=params["m"],
        h=h, nonlinearity=_load_nonlinearity(params["nonlinearity"]), q=params["q"],
        force=force,
    )


def _problem_echo(prob: Problem, params) -> dict:
    nl = prob.nonlinearity
    try:
        nl_cfg = nl.to_config()
    except ValueError:
        nl_cfg = nl.name
    return {
        "variant": prob.variant,
        "alpha": prob.alpha,
        "p": params["p"],
        "q": nl.q,
        "m": prob.m,
        "nonlinearity": nl_cfg,
        "h": None if prob.h is None else prob.graph.field_dict(prob.h),
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    fam_args = list(args.size)
    spec = io.generate(args.family, *fam_args, mu_rule=args.mu_rule, w_rule=args.w_rule,
                       seed=args.seed)
    text = io.graph_to_json(spec)
    if args.out:
        io._atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g, domain_ids, dom, h = _setup(args)
    p = 2.0 if args.p is None else args.p
    order = OperatorOrder(args.m, p)
    out = {"graph_sha256": io.graph_hash(g), "domain_sha256": io.domain_hash(domain_ids)}
    results = {}
    if dom is not None:
        results["lambda1"] = lambda1(g, dom)
        if p != 2:
            results["lambda_p"] = lambda_p(g, dom, p, seed=args.seed)
        if args.m > 1:
            results["lambda_mp"] = lambda_mp(g, dom, order, seed=args.seed)
        if args.q is not None:
            out["sobolev_constant"] = {
                "q": args.q, "m": args.m, "p": p,
                "value": sobolev_constant(g, dom, order, args.q, seed=args.seed),
                "exact": p == 2 and (args.q == 2 or math.isinf(args.q)),
            }
    else:
        hv = h if h is not None else np.ones(g.n)
        results["lambda_p_V"] = lambda_p_V(g, hv, p, seed=args.seed)
        if args.m > 1:
            results["lambda_mp_V"] = lambda_mp_V(g, hv, order, seed=args.seed)
    for name, res in results.items():
        out[name] = res.to_dict(g)
        if args.out:
            io.write_field_csv(Path(args.out) / f"minimizer_{name}.csv", g, res.minimizer)
    if args.out:
        io.write_json(Path(args.out) / "spectrum.json", out)
    sys.stdout.write(io.dumps(out))
    return EXIT_OK


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(seed=args.seed)


def run_solve(args):
    """Build, validate and solve; returns ``(report_dict, report, graph)``."""
    g, domain_ids, dom, h = _setup(args)
    params = _problem_params(args, args.variant)
    prob = _build_problem(g, dom, h, params, args.force)
    cfg = _solver_cfg(args)
    rep = solve(prob, cfg, args.method)
    doc = {
        "command": "solve",
        "graph_sha256": io.graph_hash(g),
        "domain_sha256": io.domain_hash(domain_ids),
        "problem": _problem_echo(prob, params),
        "solver": cfg.to_dict(),
        "threshold": prob.threshold,
        "threshold_certified": prob.threshold_certified,
        "hypotheses": None if prob.hypotheses is None else prob.hypotheses.to_dict(),
    }
    doc.update(rep.to_dict(g))
    return doc, rep, g


def cmd_solve(args) -> int:
    doc, rep, g = run_solve(args)
    if args.out:
        out = Path(args.out)
        io.write_json(out / "report.json", doc)
        io.write_field_csv(out / "solution.csv", g, rep.solution)
        io.write_trace_csv(out / "trace.csv", rep.trace)
    else:
        sys.stdout.write(io.dumps(doc))
    print(f"{doc['status']}: energy {rep.energy!r}, residual {rep.residual_dual:.3g}, "
          f"gates {'pass' if rep.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_SOLVER


def cmd_check(args) -> int:
    g, domain_ids, dom, h = _setup(args)
    params = _problem_params(args, args.variant)
    prob = _build_problem(g, dom, h, params, args.force)
    u = io.read_field_csv(args.solution, g)
    cfg = _solver_cfg(args)
    doc = {"command": "check", "graph_sha256": io.graph_hash(g),
           "domain_sha256": io.domain_hash(domain_ids), "variant": prob.variant}
    gates = {}
    if not prob.space.contains(u):
        gates["admissible"] = False
        doc["error"] = "solution violates the boundary constraints"
    else:
        gates["admissible"] = True
        rs = residual(prob, u)
        nrm = prob.norm(u)
        doc.update({"energy": prob.energy(u), "norm": nrm, "residual_linf": rs.linf,
                    "residual_dual": rs.dual})
        gates["residual"] = rs.dual <= cfg.residual_gate * (1 + nrm)
        gates["nontrivial"] = nrm > 0
        if prob.certifies_positivity:
            pos = certify_positivity(prob, u, cfg)
            doc["positivity"] = pos.to_dict()
            gates["positivity"] = pos.strictly_positive_interior
    doc["gates"] = gates
    doc["passed"] = all(gates.values())
    text = io.dumps(doc)
    if args.out:
        io._atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK if doc["passed"] else EXIT_SOLVER


def _parse_values(text):
    text = (text or "").strip()
    if not text:
        return []
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise UsageError("range must be start:stop:step with nonzero step")
        a, b, s = parts
        n = int(math.floor((b - a) / s + 1e-9)) + 1
        return [a + k * s for k in range(max(n, 0))]
    return [float(x) for x in text.split(",") if x.strip()]


def _size_instance(family, n, variant, seed):
    """Graph and domain for the ``size`` axis: the domain drops the outer layer."""
    n = int(n)
    if family == "grid":
        g = io.generate_graph("grid", n, n)
        wr = len(str(n - 1))
        dom = [f"r{i:0{wr}d}c{j:0{wr}d}" for i in range(1, n - 1) for j in range(1, n - 1)]
    elif family == "gnp":
        g = io.generate_graph("gnp", n, 0.3, seed=seed)
        dom = None
    else:
        g = io.generate_graph(family, n)
        dom = list(g.ids[1:-1]) if family == "path" else None
    if variant not in LOCAL_VARIANTS:
        dom = None
    return g, dom


def _sweep_point(payload):
    args_d, axis, value = payload
    args = argparse.Namespace(**args_d)
    row = {c: None for c in SWEEP_COLUMNS}
    row.update(axis=axis, value=value, variant=args.variant, m=args.m)
    t0 = time.perf_counter()
    try:
        if axis == "alpha":
            args.alpha = value
        elif axis == "p":
            args.p = value
        if axis == "size":
            g, dom_ids = _size_instance(args.family, value, args.variant, args.seed)
            g, _, dom, h = _setup(argparse.Namespace(h_file=None), g, dom_ids)
        else:
            g, _, dom, h = _setup(args)
        params = _problem_params(args, args.variant)
        row.update(alpha=params["alpha"], p=params["p"], n_vertices=g.n)
        prob = _build_problem(g, dom, h, params, args.force)
        row.update(q=prob.nonlinearity.q, threshold=prob.threshold)
        rep = solve(prob, SolverConfig(seed=args.seed), args.method)
        row.update(energy=rep.energy, mp_level=rep.mp_level, residual_linf=rep.residual_linf,
                   residual_dual=rep.residual_dual, iterations=rep.iterations,
                   u_max=float(np.max(rep.solution)))
        if not rep.passed:
            row["error"] = "gate failure: " + ",".join(k for k, v in rep.gates.items() if not v)
    except (YamabeError, ValueError, OSError, UsageError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - t0
    return row


def sweep_rows(args) -> list:
    values = _parse_values(args.values)
    args_d = dict(vars(args))
    args_d.pop("func", None)
    payloads = [(args_d, args.axis, v) for v in values]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            return list(ex.map(_sweep_point, payloads))
    return [_sweep_point(pl) for pl in payloads]


def sweep_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    if args.axis == "size" and not args.family:
        raise UsageError("--axis size needs --family")
    if args.axis != "size" and not args.graph:
        raise UsageError("--graph is required unless sweeping over size")
    text = sweep_csv(sweep_rows(args))
    if args.out:
        io._atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _problem_flags(sp, graph_required=True):
    sp.add_argument("--graph", required=graph_required, help="graph JSON file")
    sp.add_argument("--domain", help="domain JSON file (list of vertex ids)")
    sp.add_argument("--variant", choices=VARIANTS, required=True)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--p", type=float, default=None,
                    help="power exponent for thm1/thm5, operator exponent otherwise")
    sp.add_argument("--q", type=float, default=None, help="superlinearity exponent")
    sp.add_argument("--m", type=int, default=1, help="derivative order for thm4/thm8")
    sp.add_argument("--h-file", dest="h_file", help="potential h as vertex_id,value CSV")
    sp.add_argument("--nonlinearity", default=None,
                    help="power{q}, exp_growth, or a JSON file describing a built-in")
    sp.add_argument("--method", choices=("mountain_pass", "nehari"), default="mountain_pass")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--force", action="store_true",
                    help="run even if hypotheses fail; the report is stamped hypotheses-unverified")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="graph-yamabe", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="generate a graph JSON file")
    sp.add_argument("family", choices=("path", "cycle", "grid", "complete", "gnp"))
    sp.add_argument("size", nargs="+", help="n | nx ny | n prob")
    sp.add_argument("--mu-rule", dest="mu_rule", choices=("unit", "degree"), default="unit")
    sp.add_argument("--w-rule", dest="w_rule", default="unit", help="unit or uniform(a,b,seed)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("spectrum", help="first eigenvalues and Sobolev constants")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--domain")
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--q", type=float, default=None, help="also report the L^q Sobolev constant")
    sp.add_argument("--h-file", dest="h_file")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("solve", help="solve one equation variant")
    _problem_flags(sp)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("check", help="verify a solution CSV")
    _problem_flags(sp)
    sp.add_argument("--solution", required=True, help="vertex_id,value CSV")
    sp.add_argument("--out", help="verification JSON file")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("sweep", help="solve over a parameter range")
    _problem_flags(sp, graph_required=False)
    sp.add_argument("--axis", choices=("alpha", "p", "size"), required=True)
    sp.add_argument("--values", default="", help="comma list or start:stop:step")
    sp.add_argument("--family", choices=("path", "cycle", "grid", "complete", "gnp"))
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", help="CSV file")
    sp.set_defaults(func=cmd_sweep)
    return ap


def _configure_logging():
    level = os.environ.get("GRAPH_YAMABE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_IO
    try:
        return args.func(args)
    except Exception as exc:  # map every failure to the documented exit codes
        code = _exit_code(exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if code == EXIT_SOLVER and not isinstance(exc, YamabeError):
            log.debug("unexpected failure", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
