"""Scripted instances shared by the acceptance suite, the CLI tests and the demos."""
from __future__ import annotations

import numpy as np

from graph_yamabe import Problem, decompose_domain
from graph_yamabe.io import generate_graph

GNP_SEED = 7


def central_block(g, nx, ny, k):
    """Grid vertices at least ``k`` steps away from the outer rows and columns."""
    out = []
    for x in g.ids:
        i, j = int(x[1:x.index("c")]), int(x[x.index("c") + 1:])
        if k <= i < nx - k and k <= j < ny - k:
            out.append(x)
    return out


def _grid(n):
    g = generate_graph("grid", n, n)
    return g, central_block(g, n, n, 1)


# name -> (graph factory, keyword parameters understood by Problem.build / the CLI)
SMOKE = {
    # 4x4 domain inside grid(6, 6); its interior is the central 2x2 block
    "thm1": (lambda: _grid(6), dict(alpha=0.5, p=4.0)),
    "thm2": (lambda: _grid(6), dict(p=2.0, q=3.0, nonlinearity="exp_growth")),
    # order 2 needs a wider domain for a nontrivial admissible class
    "thm4": (lambda: _grid(8), dict(m=2, p=2.0, q=4.0, nonlinearity="power4")),
    "thm5": (lambda: (generate_graph("complete", 6), None), dict(p=3.0)),
    "thm6": (lambda: (generate_graph("gnp", 20, 0.3, seed=GNP_SEED), None),
             dict(p=3.0, q=4.0, nonlinearity="power4")),
    "thm8": (lambda: (generate_graph("gnp", 20, 0.3, seed=GNP_SEED), None),
             dict(m=2, p=2.0, q=3.0, nonlinearity="power3")),
}

PURE_POWER = ("thm1", "thm4", "thm5", "thm6", "thm8")


def smoke_problem(name):
    make, params = SMOKE[name]
    g, dom_ids = make()
    dom = decompose_domain(g, dom_ids) if dom_ids is not None else None
    prob = Problem.build(name, g, dom, h=np.ones(g.n), **params)
    return prob, g, dom_ids


def cli_args(name, graph_path, domain_path=None):
    params = SMOKE[name][1]
    argv = ["--graph", str(graph_path), "--variant", name]
    if domain_path is not None:
        argv += ["--domain", str(domain_path)]
    for key in ("alpha", "p", "q", "m", "nonlinearity"):
        if key in params:
            argv += [f"--{key}", str(params[key])]
    return argv
