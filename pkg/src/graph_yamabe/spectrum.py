"""First eigenvalues of Dirichlet and whole-graph Rayleigh quotients, and Sobolev constants.

For ``p = 2`` every quotient is a symmetric (generalized) eigenproblem and is
solved exactly.  For ``p != 2`` the quotient is minimized by projected
gradient descent from several deterministic starts; the result is the best
value found (an upper bound on the infimum) and is flagged ``certified=False``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, sparse
from scipy.sparse.linalg import eigsh

from .calculus import OperatorOrder, order_energy, order_quadratic_form
from .errors import BadExponent, EmptyInterior, NonPositivePotential
from .graph import DomainDecomposition, WeightedGraph
from .variational import AdmissibleSpace, build_admissible_space

log = logging.getLogger(__name__)

__all__ = [
    "EigenResult",
    "lambda1",
    "lambda_p",
    "lambda_mp",
    "lambda_p_V",
    "lambda_mp_V",
    "sobolev_constant",
    "rayleigh_quotient",
]

DENSE_LIMIT = 2000


@dataclass
class EigenResult:
    """Best value of a Rayleigh quotient and a normalized minimizer (``sum rho |u|^p = 1``)."""

    value: float
    minimizer: np.ndarray
    certified: bool
    restarts: int
    p: float = 2.0
    m: int = 1

    def to_dict(self, g: WeightedGraph | None = None) -> dict:
        d = {"value": self.value, "certified": self.certified, "restarts": self.restarts,
             "p": self.p, "m": self.m}
        if g is not None:
            d["minimizer"] = g.field_dict(self.minimizer)
        return d


def _sign_fix(u):
    k = int(np.argmax(np.abs(u)))
    return -u if u[k] < 0 else u


def _mass(space: AdmissibleSpace, h):
    rho = space.graph.mu * space.region_mask
    return rho, (None if h is None else rho * h)


def rayleigh_quotient(space: AdmissibleSpace, u, order: OperatorOrder, h=None) -> float:
    """``int (|grad^m u|^p + h |u|^p) / int |u|^p`` over the space's region."""
    g = space.graph
    rho, hm = _mass(space, h)
    u = np.asarray(u, dtype=float)
    E, _ = order_energy(g, u, order.m, order.p, rho)
    num = order.p * E
    if hm is not None:
        num += np.sum(hm * np.abs(u) ** order.p)
    return float(num / np.sum(rho * np.abs(u) ** order.p))


def _quadratic_coords(space: AdmissibleSpace, m: int, h):
    g = space.graph
    rho, hm = _mass(space, h)
    H = order_quadratic_form(g, m, rho)
    if hm is not None:
        H = H + sparse.diags(hm)
    Q = space.basis
    Hc = Q.T @ (H @ Q)
    return 0.5 * (Hc + Hc.T)


def _exact_p2(space: AdmissibleSpace, m: int, h) -> EigenResult:
    Hc = _quadratic_coords(space, m, h)
    w, V = linalg.eigh(Hc, subset_by_index=[0, 0])
    u = _sign_fix(space.field(V[:, 0]))
    rho = space.graph.mu * space.region_mask
    u = u / math.sqrt(np.sum(rho * u * u))
    return EigenResult(float(max(w[0], 0.0)), u, True, 1, 2.0, m)


def _descend(space, m, p, h, c0, max_iter=20000):
    """Projected BB descent of the p-quotient on ``sum rho |u|^p = 1``."""
    g = space.graph
    Q = space.basis
    rho, hm = _mass(space, h)

    def normalize(c):
        u = Q @ c
        return c / np.sum(rho * np.abs(u) ** p) ** (1.0 / p)

    def value_grad(c):
        u = Q @ c
        E, dE = order_energy(g, u, m, p, rho)
        num = p * E
        dnum = p * dE
        if hm is not None:
            a = np.abs(u)
            num += np.sum(hm * a**p)
            dnum = dnum + p * hm * a ** (p - 1) * np.sign(u)
        den = np.sum(rho * np.abs(u) ** p)
        dden = p * rho * np.abs(u) ** (p - 1) * np.sign(u)
        R = num / den
        return R, Q.T @ ((dnum - R * dden) / den)

    c = normalize(np.asarray(c0, dtype=float))
    R, gr = value_grad(c)
    step = 1.0 / max(1.0, np.linalg.norm(gr))
    c_prev = g_prev = None
    quiet = 0
    for _ in range(max_iter):
        gn2 = float(gr @ gr)
        if gn2 < 1e-26:
            break
        if c_prev is not None:
            s, y = c - c_prev, gr - g_prev
            sy = abs(float(s @ y))
            if sy > 0:
                step = float(s @ s) / sy
        t = step
        while True:
            c_new = normalize(c - t * gr)
            R_new, g_new = value_grad(c_new)
            if np.isfinite(R_new) and R_new <= R - 1e-4 * t * gn2:
                break
            t *= 0.5
            if t < 1e-20:
                c_new = None
                break
        if c_new is None:
            break
        dec = R - R_new
        c_prev, g_prev = c, gr
        c, R, gr = c_new, R_new, g_new
        quiet = quiet + 1 if dec < 1e-14 * max(1.0, abs(R)) else 0
        if quiet >= 5:
            break
    return R, c


def _quotient_min(space, m, p, h, restarts=16, seed=0) -> EigenResult:
    if p == 2:
        return _exact_p2(space, m, h)
    g = space.graph
    rho = g.mu * space.region_mask
    exact = _exact_p2(space, m, h)
    rng = np.random.default_rng(seed)
    starts = [space.coords(exact.minimizer)]
    starts += [rng.standard_normal(space.dimension) for _ in range(max(restarts, 1) - 1)]
    best = None
    for c0 in starts:
        R, c = _descend(space, m, p, h, c0)
        u = _sign_fix(space.field(c))
        u = u / np.sum(rho * np.abs(u) ** p) ** (1.0 / p)
        if best is None or R < best[0] - 1e-12 * max(1.0, abs(best[0])):
            best = (R, u)
        elif abs(R - best[0]) <= 1e-12 * max(1.0, abs(best[0])) and tuple(u) < tuple(best[1]):
            best = (min(R, best[0]), u)
    log.debug("p-quotient m=%d p=%g: best %.12g over %d starts", m, p, best[0], len(starts))
    return EigenResult(float(best[0]), best[1], False, len(starts), float(p), m)


def lambda1(g: WeightedGraph, dom: DomainDecomposition) -> EigenResult:
    """Smallest Dirichlet eigenvalue of the mu-Laplacian on ``dom``.

    Solved on interior coordinates as ``K v = lambda M v`` with ``K`` the
    interior block of ``D - W`` and ``M = diag(mu)``.
    """
    I = np.flatnonzero(dom.interior_mask)
    if I.size == 0:
        raise EmptyInterior("domain has no interior vertex")
    K = (sparse.diags(g.degrees) - g.W).tocsr()[I][:, I]
    s = 1.0 / np.sqrt(g.mu[I])
    S = sparse.diags(s) @ K @ sparse.diags(s)
    if I.size <= DENSE_LIMIT:
        w, V = linalg.eigh(S.toarray(), subset_by_index=[0, 0])
        lam, y = w[0], V[:, 0]
    else:
        w, V = eigsh(S.tocsc(), k=1, sigma=-1.0, which="LM")
        lam, y = w[0], V[:, 0]
    u = np.zeros(g.n)
    u[I] = s * y
    u = _sign_fix(u / math.sqrt(np.sum(g.mu * u * u)))
    return EigenResult(float(max(lam, 0.0)), u, True, 1, 2.0, 1)


def _check_p(p):
    if not p > 1:
        raise BadExponent(f"p must exceed 1, got {p}")


def lambda_p(g: WeightedGraph, dom: DomainDecomposition, p: float,
             restarts: int = 16, seed: int = 0) -> EigenResult:
    """First Dirichlet eigenvalue of the p-Laplacian (best value over multi-starts)."""
    _check_p(p)
    if not dom.interior_mask.any():
        raise EmptyInterior("domain has no interior vertex")
    if p == 2:
        return lambda1(g, dom)
    space = build_admissible_space(g, dom, 1)
    return _quotient_min(space, 1, p, None, restarts, seed)


def lambda_mp(g: WeightedGraph, dom: DomainDecomposition, order: OperatorOrder,
              space: AdmissibleSpace | None = None, restarts: int = 16,
              seed: int = 0) -> EigenResult:
    """Infimum of ``int |grad^m u|^p / int |u|^p`` over the order-m Dirichlet class."""
    if space is None:
        if not dom.interior_mask.any():
            raise EmptyInterior("domain has no interior vertex")
        space = build_admissible_space(g, dom, order.m)
    return _quotient_min(space, order.m, order.p, None, restarts, seed)


def _whole(g, h):
    hv = g.field(h)
    if np.any(hv <= 0):
        raise NonPositivePotential("potential h must be positive everywhere")
    return hv, build_admissible_space(g, None, 1, h=hv)


def lambda_p_V(g: WeightedGraph, h, p: float, restarts: int = 16, seed: int = 0) -> EigenResult:
    """``inf int_V (|grad u|^p + h |u|^p) / int_V |u|^p``."""
    _check_p(p)
    hv, space = _whole(g, h)
    return _quotient_min(space, 1, p, hv, restarts, seed)


def lambda_mp_V(g: WeightedGraph, h, order: OperatorOrder, restarts: int = 16,
                seed: int = 0) -> EigenResult:
    """``inf int_V (|grad^m u|^p + h |u|^p) / int_V |u|^p``."""
    hv, space = _whole(g, h)
    return _quotient_min(space, order.m, order.p, hv, restarts, seed)


def sobolev_constant(g: WeightedGraph, dom: DomainDecomposition, order: OperatorOrder,
                     q: float = 2.0, restarts: int = 16, seed: int = 0,
                     space: AdmissibleSpace | None = None) -> float:
    """Best ``C`` with ``||u||_{L^q(Omega)} <= C ||grad^m u||_{L^p(Omega)}`` on the Dirichlet class.

    Exact for ``p = 2`` and ``q`` in ``{2, inf}``; otherwise the best ratio
    found by multi-start maximization, i.e. a lower bound on the constant.
    """
    if not (q >= 1):
        raise BadExponent(f"q must lie in [1, inf], got {q}")
    m, p = order.m, order.p
    if space is None:
        space = build_admissible_space(g, dom, m)
    rho = g.mu * space.region_mask
    Q = space.basis

    if p == 2 and q == 2:
        lam = _exact_p2(space, m, None).value
        return math.inf if lam <= 0 else lam ** -0.5
    if p == 2 and math.isinf(q):
        Hc = _quadratic_coords(space, m, None)
        try:
            cf = linalg.cho_factor(Hc)
        except linalg.LinAlgError:
            return math.inf
        rows = Q[space.support_mask]
        diag = np.einsum("ij,ji->i", rows, linalg.cho_solve(cf, rows.T))
        return float(math.sqrt(max(diag.max(), 0.0)))

    def seminorm(c):
        u = Q @ c
        E, dE = order_energy(g, u, m, p, rho)
        return E, Q.T @ dE

    if math.isinf(q):
        # C = max_x 1 / min { ||grad^m u||_p : u(x) = 1 }, each a convex problem
        best = 0.0
        for x in np.flatnonzero(space.support_mask):
            a = Q[x]
            c0 = a / (a @ a)
            Z = linalg.null_space(a[None, :])

            def fun(z):
                E, gE = seminorm(c0 + Z @ z)
                return E, Z.T @ gE

            if Z.shape[1]:
                res = optimize.minimize(fun, np.zeros(Z.shape[1]), jac=True, method="L-BFGS-B",
                                        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000})
                E = res.fun
            else:
                E = seminorm(c0)[0]
            if E > 0:
                best = max(best, (p * E) ** (-1.0 / p))
        return float(best)

    def neg_log_ratio(c):
        u = Q @ c
        a = np.abs(u)
        Lq = np.sum(rho * a**q)
        E, gE = seminorm(c)
        val = -(math.log(Lq) / q) + math.log(p * E) / p
        grad = -(Q.T @ (rho * a ** (q - 1) * np.sign(u))) / Lq + gE / (p * E)
        return val, grad

    exact = _exact_p2(space, m, None)
    rng = np.random.default_rng(seed)
    starts = [space.coords(exact.minimizer)]
    starts += [rng.standard_normal(space.dimension) for _ in range(max(restarts, 1) - 1)]
    best = -math.inf
    for c0 in starts:
        res = optimize.minimize(neg_log_ratio, c0, jac=True, method="L-BFGS-B",
                                options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000})
        best = max(best, -res.fun)
    return float(math.exp(best))
