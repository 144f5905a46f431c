"""Discrete differential operators on a weighted graph.

All operators act on full vertex fields (arrays in graph order) and return
either the whole field (``x=None``) or the value at one vertex id.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadExponent
from .graph import WeightedGraph

__all__ = [
    "OperatorOrder",
    "laplacian",
    "laplacian_power",
    "gradient_form",
    "grad_norm",
    "m_grad_norm",
    "p_laplacian",
    "degenerate_vertices",
    "order_energy",
    "order_quadratic_form",
    "lmp_pairing",
    "lmp_strong",
    "lmp_apply",
]


@dataclass(frozen=True)
class OperatorOrder:
    """Derivative order ``m >= 1`` and integrability exponent ``p > 1``."""

    m: int = 1
    p: float = 2.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise BadExponent(f"order m must be a positive integer, got {self.m}")
        if not self.p > 1:
            raise BadExponent(f"exponent p must exceed 1, got {self.p}")


def _at(g, values, x):
    if x is None:
        return values
    return float(values[g.idx(x)])


def _edge_sum(g: WeightedGraph, per_edge_tail, per_edge_head):
    """Accumulate edge quantities onto their tail / head vertices."""
    return np.bincount(g.tails, per_edge_tail, g.n) + np.bincount(g.heads, per_edge_head, g.n)


def laplacian(g: WeightedGraph, u, x=None):
    """``(1/mu(x)) sum_{y~x} w_xy (u(y) - u(x))``."""
    u = np.asarray(u, dtype=float)
    return _at(g, g.laplacian_matrix @ u, x)


def laplacian_power(g: WeightedGraph, u, k: int) -> np.ndarray:
    """``Delta^k u`` over the whole graph (``k = 0`` returns a copy)."""
    v = np.array(u, dtype=float)
    for _ in range(k):
        v = g.laplacian_matrix @ v
    return v


def _laplacian_adjoint_power(g, y, k):
    # Euclidean transpose of Delta^k
    for _ in range(k):
        y = g.laplacian_matrix.T @ y
    return y


def gradient_form(g: WeightedGraph, u, v, x=None):
    """``Gamma(u, v)(x) = (1/(2 mu(x))) sum_{y~x} w_xy (u(y)-u(x)) (v(y)-v(x))``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    prod = g.weights * (u[g.heads] - u[g.tails]) * (v[g.heads] - v[g.tails])
    return _at(g, _edge_sum(g, prod, prod) / (2.0 * g.mu), x)


def _grad_sq(g, u):
    d = u[g.heads] - u[g.tails]
    s = g.weights * d * d
    return _edge_sum(g, s, s) / (2.0 * g.mu)


def grad_norm(g: WeightedGraph, u, x=None):
    """``|grad u|(x) = sqrt(Gamma(u, u)(x))``."""
    return _at(g, np.sqrt(_grad_sq(g, np.asarray(u, dtype=float))), x)


def m_grad_norm(g: WeightedGraph, u, m: int, x=None):
    """Length of the m-th order gradient.

    Even ``m``: ``|Delta^{m/2} u|``; odd ``m``: ``|grad Delta^{(m-1)/2} u|``.
    """
    if m < 1:
        raise BadExponent("m must be >= 1")
    v = laplacian_power(g, u, m // 2)
    vals = np.abs(v) if m % 2 == 0 else np.sqrt(_grad_sq(g, v))
    return _at(g, vals, x)


def _power_weight(norms, p):
    """``norms**(p-2)`` with ``0**(p-2) := 0`` when ``p < 2``."""
    if p >= 2:
        return norms ** (p - 2)
    out = np.zeros_like(norms)
    nz = norms > 0
    out[nz] = norms[nz] ** (p - 2)
    return out


def degenerate_vertices(g: WeightedGraph, u, p: float) -> np.ndarray:
    """Mask of vertices where ``|grad u|^{p-2}`` was set to 0 (only when ``p < 2``)."""
    if p >= 2:
        return np.zeros(g.n, dtype=bool)
    return grad_norm(g, u) == 0


def p_laplacian(g: WeightedGraph, u, p: float, x=None):
    """Pointwise p-Laplacian.

    ``(1/(2 mu(x))) sum_{y~x} (|grad u|^{p-2}(y) + |grad u|^{p-2}(x)) w_xy (u(y) - u(x))``.
    For ``p < 2`` the factor is taken as 0 where the gradient vanishes; see
    :func:`degenerate_vertices`.
    """
    if not p > 1:
        raise BadExponent(f"p must exceed 1, got {p}")
    u = np.asarray(u, dtype=float)
    G = _power_weight(grad_norm(g, u), p)
    i, j = g.tails, g.heads
    c = (G[i] + G[j]) * g.weights * (u[j] - u[i])
    return _at(g, _edge_sum(g, c, -c) / (2.0 * g.mu), x)


def order_energy(g: WeightedGraph, u, m: int, p: float, rho) -> tuple:
    """``E(u) = (1/p) sum_x rho(x) |grad^m u|^p(x)`` and its Euclidean gradient in ``u``.

    ``rho`` is the integration weight, normally ``mu`` times the indicator of
    the integration region.
    """
    u = np.asarray(u, dtype=float)
    k = m // 2
    v = laplacian_power(g, u, k)
    if m % 2 == 0:
        a = np.abs(v)
        E = np.sum(rho * a**p) / p
        dv = rho * np.sign(v) * a ** (p - 1)
    else:
        i, j = g.tails, g.heads
        t = v[j] - v[i]
        wt2 = g.weights * t * t
        N = np.sqrt(_edge_sum(g, wt2, wt2) / (2.0 * g.mu))
        E = np.sum(rho * N**p) / p
        # dE/dt_e = sum over endpoints x of e of rho_x/(2 mu_x) |grad|^{p-2}(x) w_e t_e
        c = rho / (2.0 * g.mu) * _power_weight(N, p)
        dt = (c[i] + c[j]) * g.weights * t
        dv = _edge_sum(g, -dt, dt)
    return float(E), _laplacian_adjoint_power(g, dv, k)


def order_quadratic_form(g: WeightedGraph, m: int, rho):
    """Matrix ``H`` with ``sum_x rho(x) |grad^m u|^2(x) = u^T H u``."""
    from scipy import sparse

    K = sparse.identity(g.n, format="csr")
    for _ in range(m // 2):
        K = g.laplacian_matrix @ K
    if m % 2 == 0:
        H = K.T @ sparse.diags(rho) @ K
    else:
        c = rho / (2.0 * g.mu)
        omega = (c[g.tails] + c[g.heads]) * g.weights
        B = g.difference_matrix @ K
        H = B.T @ sparse.diags(omega) @ B
    return sparse.csr_matrix(H)


def lmp_pairing(g: WeightedGraph, u, phi, order: OperatorOrder, region=None) -> float:
    """Right-hand side of the distributional definition of ``L_{m,p} u`` tested on ``phi``.

    Odd ``m``: ``int |grad^m u|^{p-2} Gamma(D u, D phi)``; even ``m``:
    ``int |grad^m u|^{p-2} D u D phi`` with ``D = Delta^{floor(m/2)}``; the
    integral runs over ``region`` (default: all vertices).
    """
    m, p = order.m, order.p
    rmask = g.mask(region)
    G = _power_weight(m_grad_norm(g, u, m), p)
    Du = laplacian_power(g, u, m // 2)
    Dphi = laplacian_power(g, phi, m // 2)
    if m % 2:
        inner = gradient_form(g, Du, Dphi)
    else:
        inner = Du * Dphi
    return float(np.sum((g.mu * G * inner)[rmask]))


def lmp_strong(g: WeightedGraph, u, order: OperatorOrder, region=None) -> np.ndarray:
    """Field ``S`` with ``sum_x mu S phi`` equal to :func:`lmp_pairing` for every ``phi``."""
    rho = g.mu * g.mask(region)
    _, grad = order_energy(g, u, order.m, order.p, rho)
    return grad / g.mu


def lmp_apply(g: WeightedGraph, dom, u, order: OperatorOrder, space=None) -> np.ndarray:
    """Identify ``L_{m,p} u`` against the admissible test class.

    ``dom`` is a :class:`~graph_yamabe.graph.DomainDecomposition` (Dirichlet
    class, pairing integrated over Omega) or ``None`` (whole graph).  The
    result is the mu-weighted Riesz representative of ``phi -> pairing(u, phi)``
    in the admissible subspace; it vanishes off the support of that subspace.
    Raises :class:`~graph_yamabe.errors.InadmissibleField` if ``u`` is not
    admissible.
    """
    from .variational import build_admissible_space

    if space is None:
        space = build_admissible_space(g, dom, order.m)
    u = space.check(u)
    Q = space.basis
    coeffs = np.array([lmp_pairing(g, u, Q[:, k], order, space.region_mask) for k in range(Q.shape[1])])
    return Q @ coeffs
