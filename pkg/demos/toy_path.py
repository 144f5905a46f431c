"""Closed-form check on a five-vertex path.

The domain {v01, v02, v03} has the single interior vertex v02, so the
Dirichlet problem -Lap u - alpha u = u^(p-1) reduces to one scalar equation
with solution u(v02) = (2 - alpha)^(1/(p-2)).  This script compares the
mountain-pass and Nehari solvers against that value.

    python3 demos/toy_path.py
"""
from graph_yamabe import Problem, decompose_domain, lambda1, mountain_pass_solve, nehari_solve
from graph_yamabe.io import generate_graph


def main():
    g = generate_graph("path", 5)
    dom = decompose_domain(g, ["v01", "v02", "v03"])
    print(f"lambda1 = {lambda1(g, dom).value:.12g}")
    print(f"{'alpha':>6} {'p':>4} {'exact':>14} {'mountain pass':>14} {'nehari':>14} {'energy':>12}")
    c = g.idx("v02")
    for p in (3.0, 4.0, 6.0):
        for alpha in (0.0, 1.0, 1.9):
            prob = Problem.thm1(g, dom, alpha, p)
            mp = mountain_pass_solve(prob)
            ne = nehari_solve(prob)
            exact = (2.0 - alpha) ** (1.0 / (p - 2.0))
            print(f"{alpha:6.2f} {p:4.1f} {exact:14.10f} {mp.solution[c]:14.10f} "
                  f"{ne.solution[c]:14.10f} {mp.energy:12.6g}")


if __name__ == "__main__":
    main()
