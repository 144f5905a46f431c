"""Solve one instance of each equation variant and print a summary table.

Local variants use a grid with its outer layer as the complement of the
domain; whole-graph variants use complete(6) and a seeded G(n, p) graph.

    python3 demos/variant_tour.py
"""
import time

import numpy as np

from graph_yamabe import Problem, decompose_domain, solve
from graph_yamabe.io import generate_graph


def grid_instance(n):
    g = generate_graph("grid", n, n)
    ids = [x for x in g.ids
           if 0 < int(x[1:x.index("c")]) < n - 1 and 0 < int(x[x.index("c") + 1:]) < n - 1]
    return g, decompose_domain(g, ids)


def instances():
    g6, d6 = grid_instance(6)
    g8, d8 = grid_instance(8)
    kn = generate_graph("complete", 6)
    rnd = generate_graph("gnp", 20, 0.3, seed=7)
    yield "thm1", Problem.build("thm1", g6, d6, alpha=0.5, p=4.0)
    yield "thm2", Problem.build("thm2", g6, d6, p=2.0, q=3.0, nonlinearity="exp_growth")
    yield "thm4", Problem.build("thm4", g8, d8, m=2, p=2.0, q=4.0)
    yield "thm5", Problem.build("thm5", kn, p=3.0)
    yield "thm6", Problem.build("thm6", rnd, p=3.0, q=4.0)
    yield "thm8", Problem.build("thm8", rnd, m=2, p=2.0, q=3.0)


def main():
    print(f"{'variant':8} {'n':>4} {'energy':>12} {'residual':>10} {'max u':>10} {'method':>14} {'time':>7}")
    for name, prob in instances():
        for method in ("mountain_pass", "nehari"):
            t0 = time.perf_counter()
            rep = solve(prob, method=method)
            wall = time.perf_counter() - t0
            print(f"{name:8} {prob.graph.n:4d} {rep.energy:12.8g} {rep.residual_dual:10.2e} "
                  f"{np.max(rep.solution):10.5g} {method:>14} {wall:6.2f}s")


if __name__ == "__main__":
    main()
