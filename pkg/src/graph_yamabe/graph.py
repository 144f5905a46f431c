"""Weighted finite graphs, vertex measures and domain decomposition.

Vertex fields are plain 1-D float arrays whose entries follow the graph's
vertex order (ids sorted as strings).  ``WeightedGraph.field`` and
``WeightedGraph.field_dict`` convert between arrays and ``{id: value}`` maps.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import (
    DisconnectedDomain,
    DuplicateEdge,
    DuplicateVertex,
    EmptyDomain,
    NonPositiveMeasure,
    NonPositiveWeight,
    SelfLoop,
    UnknownVertex,
    UnknownVertexInEdge,
)

__all__ = [
    "WeightedGraph",
    "DomainDecomposition",
    "build_graph",
    "degree",
    "decompose_domain",
    "integrate",
    "volume",
]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite undirected graph with vertex measure ``mu`` and edge weights.

    Edges are stored once as index pairs ``(i, j)`` with ``i < j``, sorted
    lexicographically.  Instances are immutable; derived operators are cached.
    """

    ids: tuple
    mu: np.ndarray
    edges: np.ndarray    # (E, 2) int, i < j
    weights: np.ndarray  # (E,)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.ids)}

    @property
    def tails(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def heads(self) -> np.ndarray:
        return self.edges[:, 1]

    @cached_property
    def W(self) -> sparse.csr_matrix:
        """Symmetric weight matrix."""
        i, j, w = self.tails, self.heads, self.weights
        W = sparse.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n),
        )
        return W.tocsr()

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.bincount(self.tails, self.weights, self.n) + np.bincount(
            self.heads, self.weights, self.n
        )
        return _frozen(d)

    @cached_property
    def neighbors(self) -> tuple:
        """Per-vertex tuple of neighbor indices (sorted)."""
        nb = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nb[i].append(int(j))
            nb[j].append(int(i))
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def laplacian_matrix(self) -> sparse.csr_matrix:
        """Matrix of the mu-Laplacian: ``(L u)(x) = sum_y w_xy (u(y) - u(x)) / mu(x)``."""
        A = self.W - sparse.diags(self.degrees)
        return (sparse.diags(1.0 / self.mu) @ A).tocsr()

    @cached_property
    def difference_matrix(self) -> sparse.csr_matrix:
        """Signed incidence ``B`` with ``(B u)_e = u(j) - u(i)`` for edge ``e = (i, j)``."""
        E = self.n_edges
        rows = np.concatenate([np.arange(E), np.arange(E)])
        cols = np.concatenate([self.heads, self.tails])
        vals = np.concatenate([np.ones(E), -np.ones(E)])
        return sparse.csr_matrix((vals, (rows, cols)), shape=(E, self.n))

    # -- vertex bookkeeping ----------------------------------------------------

    def idx(self, x) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {x!r}") from None

    def mask(self, region) -> np.ndarray:
        """Boolean mask for a region given as ids, a mask, or ``None`` (all)."""
        if region is None:
            return np.ones(self.n, dtype=bool)
        if isinstance(region, np.ndarray) and region.dtype == bool:
            if region.shape != (self.n,):
                raise ValueError("region mask has wrong shape")
            return region
        m = np.zeros(self.n, dtype=bool)
        for x in region:
            m[self.idx(x)] = True
        return m

    def field(self, values=None, default: float = 0.0) -> np.ndarray:
        """Vertex field from a mapping ``{id: value}``, an array, or a constant."""
        if values is None:
            return np.full(self.n, float(default))
        if isinstance(values, Mapping):
            u = np.full(self.n, float(default))
            for x, val in values.items():
                u[self.idx(x)] = float(val)
            return u
        if np.isscalar(values):
            return np.full(self.n, float(values))
        u = np.asarray(values, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"field must have shape ({self.n},), got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("field values must be finite")
        return u

    def field_dict(self, u) -> dict:
        return {x: float(v) for x, v in zip(self.ids, np.asarray(u))}

    def delta(self, x) -> np.ndarray:
        u = np.zeros(self.n)
        u[self.idx(x)] = 1.0
        return u

    def to_spec(self) -> dict:
        """Canonical JSON-ready description (inverse of :func:`build_graph`)."""
        return {
            "vertices": [{"id": v, "mu": float(m)} for v, m in zip(self.ids, self.mu)],
            "edges": [
                {"u": self.ids[i], "v": self.ids[j], "w": float(w)}
                for (i, j), w in zip(self.edges, self.weights)
            ],
        }


def build_graph(spec: Mapping) -> WeightedGraph:
    """Validate a ``{"vertices": [...], "edges": [...]}`` description.

    Each vertex is ``{"id": str, "mu": float}`` (``mu`` defaults to 1) and each
    edge ``{"u": id, "v": id, "w": float}`` (``w`` defaults to 1).  Repeating an
    edge in either orientation is tolerated only if the weights agree exactly.
    """
    verts = spec.get("vertices", [])
    mu_of = {}
    for v in verts:
        vid = str(v["id"])
        if vid in mu_of:
            raise DuplicateVertex(f"vertex {vid!r} declared twice")
        mu = float(v.get("mu", 1.0))
        if not (np.isfinite(mu) and mu > 0):
            raise NonPositiveMeasure(f"vertex {vid!r} has measure {mu}")
        mu_of[vid] = mu
    ids = tuple(sorted(mu_of))
    index = {v: i for i, v in enumerate(ids)}

    seen = {}
    for e in spec.get("edges", []):
        a, b = str(e["u"]), str(e["v"])
        w = float(e.get("w", 1.0))
        for end in (a, b):
            if end not in index:
                raise UnknownVertexInEdge(f"edge ({a!r}, {b!r}) uses unknown vertex {end!r}")
        if a == b:
            raise SelfLoop(f"self-loop at {a!r}")
        if not (np.isfinite(w) and w > 0):
            raise NonPositiveWeight(f"edge ({a!r}, {b!r}) has weight {w}")
        key = tuple(sorted((index[a], index[b])))
        if key in seen:
            if seen[key] != w:
                raise DuplicateEdge(
                    f"edge ({a!r}, {b!r}) declared with weights {seen[key]} and {w}"
                )
            continue
        seen[key] = w

    keys = sorted(seen)
    edges = np.array(keys, dtype=np.int64).reshape(-1, 2)
    weights = np.array([seen[k] for k in keys], dtype=float)
    mu = np.array([mu_of[v] for v in ids], dtype=float)
    return WeightedGraph(ids, _frozen(mu), _frozen(edges), _frozen(weights))


def degree(g: WeightedGraph, x) -> float:
    """``deg(x) = sum_{y ~ x} w_xy``."""
    return float(g.degrees[g.idx(x)])


@dataclass(frozen=True, eq=False)
class DomainDecomposition:
    """A vertex set with its boundary (vertices having an outside neighbor) and interior."""

    omega_mask: np.ndarray
    boundary_mask: np.ndarray
    interior_mask: np.ndarray
    ids: tuple

    def _select(self, mask):
        return tuple(v for v, keep in zip(self.ids, mask) if keep)

    @property
    def omega(self) -> tuple:
        return self._select(self.omega_mask)

    @property
    def boundary(self) -> tuple:
        return self._select(self.boundary_mask)

    @property
    def interior(self) -> tuple:
        return self._select(self.interior_mask)


def decompose_domain(
    g: WeightedGraph, omega: Iterable, allow_disconnected: bool = False
) -> DomainDecomposition:
    """Split ``omega`` into boundary and interior.

    ``omega`` must be nonempty and connected in the induced subgraph unless
    ``allow_disconnected`` is set (the existence results are then not claimed).
    """
    mask = g.mask(omega if isinstance(omega, np.ndarray) else list(omega))
    if not mask.any():
        raise EmptyDomain("domain is empty")
    if not allow_disconnected:
        sub = g.W[mask][:, mask]
        ncomp, _ = csgraph.connected_components(sub, directed=False)
        if ncomp > 1:
            raise DisconnectedDomain(f"domain has {ncomp} connected components")
    outside = (~mask).astype(float)
    touches_outside = (g.W @ outside) > 0
    boundary = mask & touches_outside
    interior = mask & ~touches_outside
    return DomainDecomposition(_frozen(mask), _frozen(boundary), _frozen(interior), g.ids)


def integrate(g: WeightedGraph, region, u) -> float:
    """``sum_{x in region} mu(x) u(x)``; ``region=None`` means the whole vertex set."""
    m = g.mask(region)
    u = g.field(u)
    return float(np.sum(g.mu[m] * u[m]))


def volume(g: WeightedGraph, region) -> float:
    m = g.mask(region)
    return float(np.sum(g.mu[m]))
