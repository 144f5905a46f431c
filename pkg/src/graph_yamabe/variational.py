"""Function spaces, nonlinearities, energy functionals and hypothesis checks.

A :class:`Problem` couples a graph, an admissible space and one of six
equation variants:

========  ==============================================  =================
variant   equation                                        energy
========  ==============================================  =================
thm1      -Delta u - alpha u = (u+)^{p-1}  in Omega°       J
thm2      -Delta_p u = f(x, u+)             in Omega°       J_p
thm4      L_{m,p} u = f(x, u)              (weakly)        J_{mp}
thm5      -Delta u + h u = (u+)^{p-1}       in V            J_V
thm6      -Delta_p u + h|u|^{p-2}u = f(x,u+) in V           J_{V,p}
thm8      L_{m,p} u + h|u|^{p-2}u = f(x,u)  in V            J^V_{mp}
========  ==============================================  =================

Every energy has the form::

    J(u) = (1/s) int_R (|grad^m u|^s + c |u|^s) dmu - int_R F(x, T u) dmu

with ``R`` the integration region (Omega or V), ``c`` the mass coefficient
(``-alpha``, ``h`` or 0), and ``T u = u+`` for the one-sided variants.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, linalg, sparse

from .calculus import OperatorOrder, m_grad_norm, order_energy
from .errors import (
    BadExponent,
    HypothesisViolation,
    InadmissibleField,
    NonPositivePotential,
    TrivialAdmissibleSpace,
)
from .graph import DomainDecomposition, WeightedGraph

__all__ = [
    "AdmissibleSpace",
    "build_admissible_space",
    "Nonlinearity",
    "power",
    "exp_growth",
    "tabulated",
    "nonlinearity_from_config",
    "quadrature",
    "HypothesisCheck",
    "HypothesisReport",
    "check_hypotheses",
    "norm",
    "Problem",
    "energy",
    "energy_gradient",
    "VARIANTS",
]

VARIANTS = ("thm1", "thm2", "thm4", "thm5", "thm6", "thm8")


# ---------------------------------------------------------------------------
# admissible spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdmissibleSpace:
    """Finite-dimensional function class with a mu-orthonormal basis.

    ``basis`` is an ``(n, d)`` array whose columns satisfy
    ``basis.T @ diag(mu) @ basis = I``.  Coordinates ``c`` of a field ``u`` in
    the space are ``basis.T @ (mu * u)``, so the Euclidean inner product of
    coordinates is the mu-weighted inner product of fields.
    """

    graph: WeightedGraph
    kind: str  # "dirichlet" or "whole"
    m: int
    basis: np.ndarray
    region_mask: np.ndarray    # integration region: Omega or V
    equation_mask: np.ndarray  # where the strong equation is posed: interior or V
    domain: DomainDecomposition | None = None
    h: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def support_mask(self) -> np.ndarray:
        return np.any(self.basis != 0, axis=1)

    def coords(self, u) -> np.ndarray:
        return self.basis.T @ (self.graph.mu * np.asarray(u, dtype=float))

    def field(self, c) -> np.ndarray:
        return self.basis @ np.asarray(c, dtype=float)

    def project(self, u) -> np.ndarray:
        return self.field(self.coords(u))

    def contains(self, u, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        d = u - self.project(u)
        mu = self.graph.mu
        return math.sqrt(np.sum(mu * d * d)) <= tol * (1.0 + math.sqrt(np.sum(mu * u * u)))

    def check(self, u) -> np.ndarray:
        u = self.graph.field(u)
        if not self.contains(u):
            raise InadmissibleField("field violates the boundary constraints of the space")
        return u

    def random_field(self, rng, scale: float = 1.0) -> np.ndarray:
        return self.field(scale * rng.standard_normal(self.dimension))


def _dirichlet_constraints(g: WeightedGraph, dom: DomainDecomposition, m: int):
    """Sparse rows encoding ``|grad^j u| = 0`` on the boundary for ``1 <= j < m``."""
    rows = []
    bnd = np.flatnonzero(dom.boundary_mask)
    LT = g.laplacian_matrix.T.tocsr()
    for j in range(1, m):
        k = j // 2
        # columns of (L^T)^k e_x are the rows of L^k
        E = sparse.csr_matrix(
            (np.ones(g.n), (np.arange(g.n), np.arange(g.n))), shape=(g.n, g.n)
        )
        for _ in range(k):
            E = LT @ E
        Lk_rows = E.T.tocsr()  # row x = e_x^T L^k
        if j % 2 == 0:
            rows.append(Lk_rows[bnd])
        else:
            for x in bnd:
                for y in g.neighbors[x]:
                    rows.append(Lk_rows[y] - Lk_rows[x])
    if not rows:
        return sparse.csr_matrix((0, g.n))
    C = sparse.vstack(rows).tocsr()
    C.eliminate_zeros()
    return C


def build_admissible_space(
    g: WeightedGraph, domain: DomainDecomposition | None = None, m: int = 1, h=None
) -> AdmissibleSpace:
    """Admissible class for a Dirichlet problem on ``domain`` or the whole graph.

    Dirichlet kind: fields vanishing outside Omega with
    ``u = |grad u| = ... = |grad^{m-1} u| = 0`` on the boundary.  Each
    condition is compiled to linear equations (``Delta^{j/2} u(x) = 0`` for
    even ``j``; ``Delta^{(j-1)/2} u(y) = Delta^{(j-1)/2} u(x)`` for each
    neighbor ``y`` when ``j`` is odd) and the basis spans their kernel.
    """
    if int(m) != m or m < 1:
        raise BadExponent(f"m must be a positive integer, got {m}")
    mu = g.mu
    if domain is None:
        hv = None
        if h is not None:
            hv = g.field(h)
            if np.any(hv <= 0):
                raise NonPositivePotential("potential h must be positive everywhere")
        basis = np.diag(1.0 / np.sqrt(mu))
        allv = np.ones(g.n, dtype=bool)
        return AdmissibleSpace(g, "whole", m, basis, allv, allv, None, hv)

    pinned = ~domain.interior_mask  # zero extension and u = 0 on the boundary
    C = _dirichlet_constraints(g, domain, m)
    C = C.tolil() if C.shape[0] else C
    # propagate pins: a row with a single live coordinate forces it to zero
    C = sparse.csr_matrix(C)
    live_rows = np.ones(C.shape[0], dtype=bool)
    changed = True
    while changed and C.shape[0]:
        changed = False
        sub = C[:, ~pinned]
        sub.eliminate_zeros()
        counts = np.diff(sub.indptr)
        cols = np.flatnonzero(~pinned)
        for r in np.flatnonzero(live_rows):
            if counts[r] == 0:
                live_rows[r] = False
            elif counts[r] == 1:
                pinned[cols[sub.indices[sub.indptr[r]]]] = True
                live_rows[r] = False
                changed = True
    unpinned = np.flatnonzero(~pinned)
    if C.shape[0] and live_rows.any():
        R = C[live_rows][:, unpinned]
        R.eliminate_zeros()
        touched_local = np.unique(R.indices)
    else:
        R = None
        touched_local = np.array([], dtype=int)
    touched = unpinned[touched_local]
    free = np.setdiff1d(unpinned, touched)

    cols = []
    for x in free:
        v = np.zeros(g.n)
        v[x] = 1.0 / math.sqrt(mu[x])
        cols.append(v)
    if touched.size:
        Rd = R[:, touched_local].toarray()
        Rd /= np.linalg.norm(Rd, axis=1, keepdims=True)
        N = linalg.null_space(Rd)
        if N.shape[1]:
            G = N.T @ (mu[touched][:, None] * N)
            Lc = linalg.cholesky(G, lower=True)
            Nq = linalg.solve_triangular(Lc, N.T, lower=True).T
            for k in range(Nq.shape[1]):
                v = np.zeros(g.n)
                v[touched] = Nq[:, k]
                cols.append(v)
    if not cols:
        raise TrivialAdmissibleSpace(
            f"boundary conditions up to order {m - 1} leave only the zero field; enlarge the domain"
        )
    basis = np.column_stack(cols)
    return AdmissibleSpace(
        g, "dirichlet", m, basis, domain.omega_mask, domain.interior_mask, domain, None
    )


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------

def quadrature(fun: Callable[[float], float], a: float, b: float) -> float:
    """Integral of a scalar function on ``[a, b]`` (scipy's adaptive QUADPACK)."""
    if a == b:
        return 0.0
    val, _ = integrate.quad(fun, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)
    return float(val)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Right-hand side ``f(x, t)`` with primitive ``F(x, s) = int_0^s f(x, t) dt``.

    ``f`` (and ``F`` if given) are vectorized callables taking an integer
    vertex-index array and a float array of the same shape.  ``p`` is the
    exponent of the operator, ``q > p`` the superlinearity exponent and
    ``threshold`` the optional ``s0``/``M`` beyond which the
    Ambrosetti-Rabinowitz inequality is claimed.
    """

    f: Callable
    p: float
    q: float
    F: Callable | None = None
    threshold: float | None = None
    two_sided: bool = False
    name: str = "custom"
    config: dict | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise BadExponent(f"p must exceed 1, got {self.p}")
        if not self.q > self.p:
            raise BadExponent(f"q must exceed p, got q={self.q}, p={self.p}")

    def value(self, x, t) -> np.ndarray:
        x = np.asarray(x)
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(self.f(x, t), dtype=float) * np.ones_like(t)

    def primitive(self, x, s) -> np.ndarray:
        x = np.asarray(x)
        s = np.asarray(s, dtype=float)
        if self.F is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                return np.asarray(self.F(x, s), dtype=float) * np.ones_like(s)
        xb, sb = np.broadcast_arrays(x, s)
        out = np.empty(sb.shape)
        for k, (xi, si) in enumerate(zip(xb.ravel(), sb.ravel())):
            out.flat[k] = quadrature(
                lambda t: float(self.value(np.array([xi]), np.array([t]))[0]), 0.0, float(si)
            )
        return out

    def to_config(self) -> dict:
        if self.config is None:
            raise ValueError("custom nonlinearities have no serial form")
        return dict(self.config)


def _coef(coef):
    if coef is None:
        return lambda x: 1.0
    arr = np.asarray(coef, dtype=float)
    if arr.ndim == 0:
        return lambda x: float(arr)
    return lambda x: arr[x]


def power(q: float, p: float = 2.0, two_sided: bool = False, coef=None) -> Nonlinearity:
    """``a(x) (t+)^{q-1}`` (one-sided) or ``a(x) |t|^{q-2} t`` (two-sided)."""
    a = _coef(coef)
    if two_sided:
        def f(x, t):
            return a(x) * np.abs(t) ** (q - 2) * t

        def F(x, s):
            return a(x) * np.abs(s) ** q / q
    else:
        def f(x, t):
            return a(x) * np.maximum(t, 0.0) ** (q - 1)

        def F(x, s):
            return a(x) * np.maximum(s, 0.0) ** q / q
    cfg = {"kind": "power", "q": q, "p": p, "two_sided": two_sided}
    if coef is not None:
        cfg["coef"] = np.asarray(coef, dtype=float).tolist()
    return Nonlinearity(f, p, q, F, 0.0, two_sided, f"power{q:g}", cfg)


def exp_growth(p: float = 2.0, q: float = 3.0, two_sided: bool = False) -> Nonlinearity:
    """``|t|^{p-2} t exp(t^2)``: exponential growth, behaves like ``t^{p-1}`` near 0."""

    def f(x, t):
        return np.sign(t) * np.abs(t) ** (p - 1) * np.exp(t * t)

    F = None
    if p == 2:
        def F(x, s):
            return 0.5 * np.expm1(s * s)
    cfg = {"kind": "exp_growth", "p": p, "q": q, "two_sided": two_sided}
    return Nonlinearity(f, p, q, F, None, two_sided, "exp_growth", cfg)


def tabulated(t, values, p: float = 2.0, q: float = 3.0, two_sided: bool = False,
              threshold: float | None = None) -> Nonlinearity:
    """Piecewise-linear ``f`` through ``(t_k, values_k)``, linearly extrapolated.

    The primitive is integrated exactly segment by segment.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("tabulated nonlinearity needs >= 2 strictly increasing knots")
    slope = np.diff(v) / np.diff(t)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(t) * (v[:-1] + v[1:]) / 2)])

    def seg(s):
        return np.clip(np.searchsorted(t, s, side="right") - 1, 0, t.size - 2)

    def f(x, s):
        k = seg(s)
        return v[k] + slope[k] * (s - t[k])

    def antider(s):
        k = seg(s)
        d = s - t[k]
        return cum[k] + v[k] * d + slope[k] * d * d / 2

    def F(x, s):
        return antider(s) - antider(np.zeros_like(s))

    cfg = {"kind": "tabulated", "t": t.tolist(), "f": v.tolist(), "p": p, "q": q,
           "two_sided": two_sided}
    return Nonlinearity(f, p, q, F, threshold, two_sided, "tabulated", cfg)


_POWER_RE = re.compile(r"^power[{:]?\s*([0-9.eE+-]+)\s*}?$")


def nonlinearity_from_config(cfg, p: float | None = None, q: float | None = None,
                             two_sided: bool | None = None) -> Nonlinearity:
    """Build a named built-in from a string (``power4``, ``power{4}``, ``exp_growth``) or dict.

    Explicit keyword arguments override the values stored in ``cfg``.
    """
    if isinstance(cfg, str):
        mt = _POWER_RE.match(cfg.strip())
        if mt:
            cfg = {"kind": "power", "q": float(mt.group(1))}
        elif cfg.strip() == "exp_growth":
            cfg = {"kind": "exp_growth"}
        else:
            raise ValueError(f"unknown nonlinearity {cfg!r}")
    cfg = dict(cfg)
    kind = cfg.pop("kind")
    if p is not None:
        cfg["p"] = p
    if q is not None:
        cfg["q"] = q
    if two_sided is not None:
        cfg["two_sided"] = two_sided
    if kind == "power":
        return power(cfg["q"], cfg.get("p", 2.0), cfg.get("two_sided", False), cfg.get("coef"))
    if kind == "exp_growth":
        return exp_growth(cfg.get("p", 2.0), cfg.get("q", 3.0), cfg.get("two_sided", False))
    if kind == "tabulated":
        return tabulated(cfg["t"], cfg["f"], cfg.get("p", 2.0), cfg.get("q", 3.0),
                         cfg.get("two_sided", False), cfg.get("threshold"))
    raise ValueError(f"unknown nonlinearity kind {kind!r}")


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------

@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    evidence: str
    witness: dict | None = None

    def __post_init__(self):
        self.passed = bool(self.passed)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "evidence": self.evidence,
                "witness": self.witness}


@dataclass
class HypothesisReport:
    mode: str  # "one-sided" or "two-sided"
    threshold: float
    threshold_certified: bool
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list:
        return [c for c in self.checks.values() if not c.passed]

    def summary(self) -> str:
        bad = self.failures()
        if not bad:
            return "all hypotheses pass"
        return "; ".join(f"{c.name} fails: {c.evidence}" for c in bad)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "threshold": self.threshold,
            "threshold_certified": self.threshold_certified,
            "passed": self.passed,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
        }


def _continuity(nl, X, T, delta=1e-6):
    """Two-scale probe: a jump keeps its size when the probe step shrinks."""
    base = nl.value(X, T)
    with np.errstate(invalid="ignore"):
        d1 = np.abs(nl.value(X, T * (1 + delta)) - base)
        d2 = np.abs(nl.value(X, T * (1 + delta / 100)) - base)
        ok = np.isfinite(base) & np.isfinite(d1) & np.isfinite(d2)
        bad = ok & (d1 > 1e-8 * (1 + np.abs(base))) & (d2 > 0.5 * d1)
    bad |= np.isnan(base)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        return False, {"x": int(X[k]), "t": float(T[k])}
    return True, None


def _ar_threshold(nl, X, S, strict_positive: bool):
    """Smallest grid |s| beyond which ``q F <= s f`` (and ``F > 0`` if strict)."""
    F = nl.primitive(X, S)
    fv = nl.value(X, S)
    finite = np.isfinite(F) & np.isfinite(fv)
    lhs = nl.q * F
    rhs = S * fv
    good = lhs <= rhs + 1e-12 * np.abs(rhs)
    if strict_positive:
        good &= F > 0
    good |= ~finite
    mag = np.abs(S)
    bad_mags = mag[~good]
    if nl.threshold is not None:
        viol = (~good) & (mag >= nl.threshold)
        if viol.any():
            k = int(np.flatnonzero(viol)[np.argmax(mag[viol])])
            return None, {"x": int(X[k]), "s": float(S[k])}, int((~finite).sum())
        return float(nl.threshold), None, int((~finite).sum())
    if bad_mags.size == 0:
        return float(mag.min()), None, int((~finite).sum())
    s0 = bad_mags.max()
    beyond = finite & (mag > s0)
    if not beyond.any():
        k = int(np.flatnonzero(~good)[np.argmax(bad_mags)])
        return None, {"x": int(X[k]), "s": float(S[k])}, int((~finite).sum())
    return float(mag[beyond].min()), None, int((~finite).sum())


def check_hypotheses(nl: Nonlinearity, threshold_eig: float, n_vertices: int = 1,
                     grid=None, tail: int = 20, threshold_certified: bool = True) -> HypothesisReport:
    """Sample ``f`` and ``F`` on a logarithmic grid and report each hypothesis.

    One-sided nonlinearities are checked against (H1)-(H4), two-sided ones
    against (A1)-(A3).  Limit conditions are evaluated on the ``tail``
    smallest grid points and labelled as sampled evidence.  Samples where
    ``f`` or ``F`` overflow are skipped and counted.
    """
    grid = np.logspace(-8, 3, 200) if grid is None else np.asarray(grid, dtype=float)
    xs = np.arange(n_vertices)
    X = np.repeat(xs, grid.size)
    T = np.tile(grid, n_vertices)
    small = np.tile(np.arange(grid.size) < tail, n_vertices)
    rep = HypothesisReport("two-sided" if nl.two_sided else "one-sided", float(threshold_eig),
                           threshold_certified)
    p = nl.p
    cert = "" if threshold_certified else " (threshold is an approximate eigenvalue)"
    f0 = nl.value(xs, np.zeros(n_vertices))

    if not nl.two_sided:
        ok, wit = _continuity(nl, X, T)
        rep.checks["H1"] = HypothesisCheck("H1", ok, "sampled continuity on the grid", wit)

        fv = nl.value(X, T)
        neg = np.isfinite(fv) & (fv < 0)
        ok2 = not neg.any() and np.all(f0 == 0)
        wit = None
        if neg.any():
            k = int(np.flatnonzero(neg)[0])
            wit = {"x": int(X[k]), "t": float(T[k]), "f": float(fv[k])}
        elif not np.all(f0 == 0):
            k = int(np.flatnonzero(f0 != 0)[0])
            wit = {"x": k, "t": 0.0, "f": float(f0[k])}
        rep.checks["H2"] = HypothesisCheck("H2", ok2, "f >= 0 on the grid and f(x, 0) = 0", wit)

        s0, wit, skipped = _ar_threshold(nl, X, T, strict_positive=False)
        ev = f"F <= s f / q for s >= {s0:.6g}" if s0 is not None else "no s0 found on the grid"
        if skipped:
            ev += f" ({skipped} overflowing samples skipped)"
        rep.checks["H3"] = HypothesisCheck("H3", s0 is not None, ev,
                                           wit if s0 is None else {"s0": s0})

        ratio = nl.value(X[small], T[small]) / T[small] ** (p - 1)
        est = float(np.max(ratio))
        ok4 = est < threshold_eig - 1e-9 * abs(threshold_eig)
        rep.checks["H4"] = HypothesisCheck(
            "H4", ok4,
            f"sampled evidence: max f/t^(p-1) near 0+ is {est:.10g} vs threshold {threshold_eig:.10g}{cert}",
            {"limsup_estimate": est},
        )
    else:
        Xs = np.concatenate([X, X])
        Ts = np.concatenate([T, -T])
        ok, wit = _continuity(nl, Xs, Ts)
        ok1 = ok and np.all(f0 == 0)
        if ok and not np.all(f0 == 0):
            k = int(np.flatnonzero(f0 != 0)[0])
            wit = {"x": k, "t": 0.0, "f": float(f0[k])}
        rep.checks["A1"] = HypothesisCheck("A1", ok1, "f(x, 0) = 0 and sampled continuity", wit)

        sm = np.concatenate([small, small])
        ratio = np.abs(nl.value(Xs[sm], Ts[sm])) / np.abs(Ts[sm]) ** (p - 1)
        est = float(np.max(ratio))
        ok2 = est < threshold_eig - 1e-9 * abs(threshold_eig)
        rep.checks["A2"] = HypothesisCheck(
            "A2", ok2,
            f"sampled evidence: max |f|/|t|^(p-1) near 0 is {est:.10g} vs threshold {threshold_eig:.10g}{cert}",
            {"limsup_estimate": est},
        )

        M, wit, skipped = _ar_threshold(nl, Xs, Ts, strict_positive=True)
        ev = f"0 < q F <= s f for |s| >= {M:.6g}" if M is not None else "no M found on the grid"
        if skipped:
            ev += f" ({skipped} overflowing samples skipped)"
        rep.checks["A3"] = HypothesisCheck("A3", M is not None, ev, wit if M is None else {"M": M})

    if nl.F is not None and nl.config is None:
        # user-supplied primitive: compare with quadrature on a few points
        probe = np.array([0.1, 0.5, 1.0, 2.0])
        if nl.two_sided:
            probe = np.concatenate([probe, -probe])
        worst = 0.0
        for x in xs[: min(n_vertices, 5)]:
            for s in probe:
                quad = quadrature(lambda t: float(nl.value(np.array([x]), np.array([t]))[0]), 0.0, s)
                Fx = float(nl.primitive(np.array([x]), np.array([s]))[0])
                worst = max(worst, abs(quad - Fx))
        rep.checks["primitive"] = HypothesisCheck(
            "primitive", worst <= 1e-8, f"max |F - quad f| = {worst:.3g}")
    return rep


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def norm(space: AdmissibleSpace, u, order: OperatorOrder, full: bool = False,
         check: bool = True) -> float:
    """Norm of an admissible field.

    Dirichlet: ``(int_Omega |grad^m u|^p)^{1/p}`` or, with ``full=True``,
    ``(sum_{k=0}^m int_Omega |grad^k u|^p)^{1/p}``.  Whole graph:
    ``(int_V |grad^m u|^p + h |u|^p)^{1/p}``.
    """
    g = space.graph
    u = space.check(u) if check else np.asarray(u, dtype=float)
    m, p = order.m, order.p
    w = g.mu * space.region_mask
    if space.kind == "whole":
        h = space.h if space.h is not None else np.ones(g.n)
        total = np.sum(w * m_grad_norm(g, u, m) ** p) + np.sum(w * h * np.abs(u) ** p)
    elif full:
        total = sum(np.sum(w * (np.abs(u) if k == 0 else m_grad_norm(g, u, k)) ** p)
                    for k in range(m + 1))
    else:
        total = np.sum(w * m_grad_norm(g, u, m) ** p)
    return float(total ** (1.0 / p))


# ---------------------------------------------------------------------------
# problems and energies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Problem:
    """One of the six equation variants on a concrete graph.

    Build with the ``thm*`` constructors, which validate the hypotheses and
    raise :class:`HypothesisViolation` unless ``force=True``.
    """

    variant: str
    graph: WeightedGraph
    space: AdmissibleSpace
    m: int
    s: float
    mass: np.ndarray
    nonlinearity: Nonlinearity
    alpha: float | None = None
    h: np.ndarray | None = None
    threshold: float | None = None
    threshold_certified: bool = True
    hypotheses: HypothesisReport | None = None
    hypotheses_verified: bool = True

    # -- constructors ----------------------------------------------------------

    @classmethod
    def thm1(cls, g, domain, alpha: float, p: float, force: bool = False) -> "Problem":
        from .spectrum import lambda1

        space = build_admissible_space(g, domain, 1)
        lam = lambda1(g, domain).value
        verified = True
        msgs = []
        if not p > 2:
            msgs.append(f"p {p} <= 2")
        if not alpha < lam:
            msgs.append(f"alpha {alpha} >= lambda1 {lam}")
        if msgs:
            if not force:
                raise HypothesisViolation("; ".join(msgs))
            verified = False
        mass = -float(alpha) * space.region_mask
        nl = power(p, 2.0, two_sided=False) if p > 2 else _forced_power(p)
        return cls("thm1", g, space, 1, 2.0, mass, nl, alpha=float(alpha), threshold=lam,
                   hypotheses_verified=verified)

    @classmethod
    def thm2(cls, g, domain, nl: Nonlinearity, force: bool = False) -> "Problem":
        from .spectrum import lambda_p

        space = build_admissible_space(g, domain, 1)
        lam = lambda_p(g, domain, nl.p)
        return cls._checked("thm2", g, space, 1, nl, np.zeros(g.n), None, lam, force)

    @classmethod
    def thm4(cls, g, domain, m: int, nl: Nonlinearity, force: bool = False) -> "Problem":
        from .spectrum import lambda_mp

        space = build_admissible_space(g, domain, m)
        lam = lambda_mp(g, domain, OperatorOrder(m, nl.p), space=space)
        return cls._checked("thm4", g, space, m, nl, np.zeros(g.n), None, lam, force)

    @classmethod
    def thm5(cls, g, h, p: float, force: bool = False) -> "Problem":
        hv = g.field(h)
        space = build_admissible_space(g, None, 1, h=hv)
        verified = True
        if not p > 2:
            if not force:
                raise HypothesisViolation(f"p {p} <= 2")
            verified = False
        nl = power(p, 2.0, two_sided=False) if p > 2 else _forced_power(p)
        return cls("thm5", g, space, 1, 2.0, hv.copy(), nl, h=hv, hypotheses_verified=verified)

    @classmethod
    def thm6(cls, g, h, nl: Nonlinearity, force: bool = False) -> "Problem":
        from .spectrum import lambda_p_V

        hv = g.field(h)
        space = build_admissible_space(g, None, 1, h=hv)
        lam = lambda_p_V(g, hv, nl.p)
        return cls._checked("thm6", g, space, 1, nl, hv.copy(), hv, lam, force)

    @classmethod
    def thm8(cls, g, h, m: int, nl: Nonlinearity, force: bool = False) -> "Problem":
        from .spectrum import lambda_mp_V

        hv = g.field(h)
        space = build_admissible_space(g, None, m, h=hv)
        lam = lambda_mp_V(g, hv, OperatorOrder(m, nl.p))
        return cls._checked("thm8", g, space, m, nl, hv.copy(), hv, lam, force)

    @classmethod
    def _checked(cls, variant, g, space, m, nl, mass, h, eig, force):
        expect_two_sided = variant in ("thm4", "thm8")
        if nl.two_sided != expect_two_sided:
            raise HypothesisViolation(
                f"{variant} needs a {'two' if expect_two_sided else 'one'}-sided nonlinearity")
        rep = check_hypotheses(nl, eig.value, g.n, threshold_certified=eig.certified)
        if not rep.passed and not force:
            raise HypothesisViolation(rep.summary())
        return cls(variant, g, space, m, nl.p, mass, nl, h=h, threshold=eig.value,
                   threshold_certified=eig.certified, hypotheses=rep,
                   hypotheses_verified=rep.passed)

    @classmethod
    def build(cls, variant: str, g, domain=None, *, alpha=0.0, p=None, m=1, h=None,
              nonlinearity=None, q=None, force=False) -> "Problem":
        """Dispatch on a variant name; used by the command line front end."""
        variant = variant.lower()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if variant in ("thm1", "thm2", "thm4") and domain is None:
            raise ValueError(f"{variant} is a Dirichlet problem and needs a domain")
        if h is None:
            h = np.ones(g.n)
        if variant == "thm1":
            return cls.thm1(g, domain, alpha, 4.0 if p is None else p, force)
        if variant == "thm5":
            return cls.thm5(g, h, 4.0 if p is None else p, force)
        p = 2.0 if p is None else p
        two = variant in ("thm4", "thm8")
        if nonlinearity is None:
            nonlinearity = f"power{(q if q is not None else p + 1.0):g}"
        nl = nonlinearity if isinstance(nonlinearity, Nonlinearity) else \
            nonlinearity_from_config(nonlinearity, p=p, q=q, two_sided=two)
        if variant == "thm2":
            return cls.thm2(g, domain, nl, force)
        if variant == "thm4":
            return cls.thm4(g, domain, m, nl, force)
        if variant == "thm6":
            return cls.thm6(g, h, nl, force)
        return cls.thm8(g, h, m, nl, force)

    # -- structure ---------------------------------------------------------------

    @property
    def one_sided(self) -> bool:
        return not self.nonlinearity.two_sided

    @property
    def local(self) -> bool:
        return self.space.kind == "dirichlet"

    @property
    def order(self) -> OperatorOrder:
        return OperatorOrder(self.m, self.s)

    @property
    def rho(self) -> np.ndarray:
        return self.graph.mu * self.space.region_mask

    @property
    def certifies_positivity(self) -> bool:
        return self.variant in ("thm1", "thm2", "thm5", "thm6")

    def _arg(self, u):
        return np.maximum(u, 0.0) if self.one_sided else u

    # -- energy ----------------------------------------------------------------------

    def _energy(self, u) -> float:
        g, rho, s = self.graph, self.rho, self.s
        E, _ = order_energy(g, u, self.m, s, rho)
        idx = np.arange(g.n)
        with np.errstate(over="ignore", invalid="ignore"):
            Fv = self.nonlinearity.primitive(idx, self._arg(u))
            nl_term = np.sum(np.where(rho > 0, rho * Fv, 0.0))
        return E + np.sum(rho * self.mass * np.abs(u) ** s) / s - nl_term

    def _gradient(self, u) -> np.ndarray:
        """Euclidean gradient of the energy with respect to all vertex values."""
        g, rho, s = self.graph, self.rho, self.s
        _, dE = order_energy(g, u, self.m, s, rho)
        idx = np.arange(g.n)
        with np.errstate(over="ignore", invalid="ignore"):
            fv = self.nonlinearity.value(idx, self._arg(u))
            if self.one_sided:
                fv = np.where(u > 0, fv, 0.0)
            nl = np.where(rho > 0, rho * fv, 0.0)
        return dE + rho * self.mass * np.sign(u) * np.abs(u) ** (s - 1) - nl if s != 2 else \
            dE + rho * self.mass * u - nl

    def energy(self, u) -> float:
        return float(self._energy(self.space.check(u)))

    def gradient_coords(self, c) -> np.ndarray:
        return self.space.basis.T @ self._gradient(self.space.field(c))

    def energy_coords(self, c) -> float:
        return float(self._energy(self.space.field(c)))

    def energy_gradient(self, u) -> np.ndarray:
        """mu-weighted Riesz representative of ``J'(u)`` inside the admissible space."""
        u = self.space.check(u)
        return self.space.field(self.space.basis.T @ self._gradient(u))

    def norm(self, u, check: bool = True) -> float:
        return norm(self.space, u, self.order, check=check)

    def seed_field(self) -> np.ndarray:
        """Positive seed ``u* = 1`` on the admissible support, projected into the space."""
        sp = self.space
        ind = sp.equation_mask.astype(float)
        u = sp.project(ind)
        if np.max(np.abs(u)) < 1e-12:
            u = sp.basis[:, 0] * np.sign(sp.basis[:, 0].sum() or 1.0)
        return u


def _forced_power(p):
    # exponent outside the supported range; only reachable with force=True
    def f(x, t):
        return np.maximum(t, 0.0) ** (p - 1)

    def F(x, s):
        return np.maximum(s, 0.0) ** p / p

    obj = Nonlinearity.__new__(Nonlinearity)
    for k, v in dict(f=f, p=2.0, q=p, F=F, threshold=0.0, two_sided=False,
                     name=f"power{p:g}", config={"kind": "power", "q": p, "p": 2.0,
                                                 "two_sided": False}).items():
        object.__setattr__(obj, k, v)
    return obj


def energy(prob: Problem, u) -> float:
    return prob.energy(u)


def energy_gradient(prob: Problem, u) -> np.ndarray:
    return prob.energy_gradient(u)
