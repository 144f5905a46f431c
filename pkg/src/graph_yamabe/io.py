"""File formats and graph generators.

* graph JSON: ``{"vertices": [{"id", "mu"}], "edges": [{"u", "v", "w"}]}``
* domain JSON: a list of vertex ids
* field CSV: header ``vertex_id,value`` then one row per vertex, floats as ``%.17g``
* trace CSV: ``iteration,energy,grad_norm``

JSON floats are written with ``repr`` (shortest round-tripping form), so every
file re-parses to bit-identical values.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np
from scipy.sparse import csgraph

from .errors import DisconnectedAfterRetries, ParseError, VertexMismatch
from .graph import WeightedGraph, build_graph

__all__ = [
    "generate",
    "generate_graph",
    "graph_to_json",
    "load_graph",
    "save_graph",
    "load_domain",
    "save_domain",
    "read_field_csv",
    "write_field_csv",
    "write_trace_csv",
    "write_json",
    "graph_hash",
    "domain_hash",
    "FLOAT_FMT",
]

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _ids(n):
    width = max(2, len(str(max(n - 1, 0))))
    return [f"v{i:0{width}d}" for i in range(n)]


def _parse_w_rule(rule):
    if rule is None or rule == "unit":
        return ("unit",)
    if isinstance(rule, (tuple, list)):
        kind, *args = rule
    else:
        mt = re.fullmatch(r"uniform\(\s*([^,]+),\s*([^,]+)(?:,\s*([^)]+))?\)", str(rule).strip())
        if not mt:
            raise ValueError(f"unknown weight rule {rule!r}")
        kind = "uniform"
        args = [float(mt.group(1)), float(mt.group(2)), int(mt.group(3) or 0)]
    if kind != "uniform":
        raise ValueError(f"unknown weight rule {rule!r}")
    a, b = float(args[0]), float(args[1])
    seed = int(args[2]) if len(args) > 2 else 0
    if not 0 < a <= b:
        raise ValueError("uniform weights need 0 < a <= b")
    return ("uniform", a, b, seed)


def _edges(family, args, seed, max_retries):
    if family == "path":
        (n,) = args
        return _ids(n), [(i, i + 1) for i in range(n - 1)]
    if family == "cycle":
        (n,) = args
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        return _ids(n), [(i, (i + 1) % n) for i in range(n)]
    if family == "complete":
        (n,) = args
        return _ids(n), [(i, j) for i in range(n) for j in range(i + 1, n)]
    if family == "grid":
        nx, ny = args
        wr, wc = len(str(max(nx - 1, 0))), len(str(max(ny - 1, 0)))
        ids = [f"r{i:0{wr}d}c{j:0{wc}d}" for i in range(nx) for j in range(ny)]
        E = []
        for i in range(nx):
            for j in range(ny):
                k = i * ny + j
                if j + 1 < ny:
                    E.append((k, k + 1))
                if i + 1 < nx:
                    E.append((k, k + ny))
        return ids, E
    if family == "gnp":
        n, prob = args
        if not 0 < prob <= 1:
            raise ValueError("gnp probability must lie in (0, 1]")
        rng = np.random.default_rng(seed)
        iu = np.triu_indices(n, 1)
        for _ in range(max_retries):
            keep = rng.random(iu[0].size) < prob
            A = np.zeros((n, n))
            A[iu[0][keep], iu[1][keep]] = 1
            ncomp, _ = csgraph.connected_components(A + A.T, directed=False)
            if ncomp == 1:
                return _ids(n), list(zip(iu[0][keep].tolist(), iu[1][keep].tolist()))
        raise DisconnectedAfterRetries(f"gnp({n}, {prob}) stayed disconnected after {max_retries} draws")
    raise ValueError(f"unknown family {family!r}")


def generate(family: str, *args, mu_rule: str = "unit", w_rule="unit", seed: int = 0,
             max_retries: int = 100) -> dict:
    """Graph JSON description of a standard family.

    ``family`` is one of ``path(n)``, ``cycle(n)``, ``grid(nx, ny)``,
    ``complete(n)`` or ``gnp(n, prob)`` (seeded, redrawn until connected).
    ``mu_rule`` is ``unit`` or ``degree``; ``w_rule`` is ``unit`` or
    ``uniform(a, b, seed)``.
    """
    if any(int(a) < 1 for a in args[:1]):
        raise ValueError("need at least one vertex")
    args = tuple(int(a) if i < (2 if family == "grid" else 1) else float(a)
                 for i, a in enumerate(args))
    ids, E = _edges(family, args, seed, max_retries)
    wr = _parse_w_rule(w_rule)
    if wr[0] == "unit":
        w = np.ones(len(E))
    else:
        w = np.random.default_rng(wr[3]).uniform(wr[1], wr[2], len(E))
    if mu_rule == "unit":
        mu = np.ones(len(ids))
    elif mu_rule == "degree":
        mu = np.zeros(len(ids))
        for (i, j), wij in zip(E, w):
            mu[i] += wij
            mu[j] += wij
    else:
        raise ValueError(f"unknown measure rule {mu_rule!r}")
    return {
        "vertices": [{"id": v, "mu": float(m)} for v, m in zip(ids, mu)],
        "edges": [{"u": ids[i], "v": ids[j], "w": float(x)} for (i, j), x in zip(E, w)],
    }


def generate_graph(family: str, *args, **kw) -> WeightedGraph:
    return build_graph(generate(family, *args, **kw))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(o):
    # numpy scalars and arrays that slip into report dictionaries
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"Object of type {type(o).__name__} is not JSON serializable")


def dumps(obj) -> str:
    """Indented JSON with a trailing newline; numpy values become plain numbers."""
    return json.dumps(obj, indent=2, allow_nan=True, default=_plain) + "\n"


_dumps = dumps


def write_json(path, obj):
    _atomic_write(path, _dumps(obj))


def graph_to_json(g) -> str:
    spec = g.to_spec() if isinstance(g, WeightedGraph) else g
    return _dumps(spec)


def save_graph(path, g):
    _atomic_write(path, graph_to_json(g))


def _read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_graph(path) -> WeightedGraph:
    spec = _read_json(path)
    if not isinstance(spec, dict) or "vertices" not in spec:
        raise ParseError(f"{path}: expected an object with a 'vertices' list")
    try:
        return build_graph(spec)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed graph entry ({exc})") from None


def load_domain(path) -> list:
    ids = _read_json(path)
    if not isinstance(ids, list):
        raise ParseError(f"{path}: domain must be a JSON list of vertex ids")
    return [str(x) for x in ids]


def save_domain(path, ids):
    _atomic_write(path, _dumps(sorted(str(x) for x in ids)))


def graph_hash(g: WeightedGraph) -> str:
    return hashlib.sha256(graph_to_json(g).encode()).hexdigest()


def domain_hash(ids) -> str | None:
    if ids is None:
        return None
    return hashlib.sha256(_dumps(sorted(str(x) for x in ids)).encode()).hexdigest()


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def field_csv(g: WeightedGraph, u) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex_id", "value"])
    for x, v in zip(g.ids, np.asarray(u, dtype=float)):
        w.writerow([x, FLOAT_FMT % v])
    return buf.getvalue()


def write_field_csv(path, g: WeightedGraph, u):
    _atomic_write(path, field_csv(g, u))


def read_field_csv(path, g: WeightedGraph) -> np.ndarray:
    """Parse a ``vertex_id,value`` file; every graph vertex must appear exactly once."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["vertex_id", "value"]:
        raise ParseError(f"{path}: expected header 'vertex_id,value'")
    vals = {}
    for ln, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"{path}:{ln}: expected two columns")
        try:
            v = float(row[1])
        except ValueError:
            raise ParseError(f"{path}:{ln}: bad number {row[1]!r}") from None
        if not np.isfinite(v):
            raise ParseError(f"{path}:{ln}: non-finite value")
        if row[0] in vals:
            raise ParseError(f"{path}:{ln}: vertex {row[0]!r} repeated")
        vals[row[0]] = v
    if set(vals) != set(g.ids):
        extra = sorted(set(vals) - set(g.ids))[:5]
        missing = sorted(set(g.ids) - set(vals))[:5]
        raise VertexMismatch(f"{path}: unknown vertices {extra}, missing vertices {missing}")
    return np.array([vals[x] for x in g.ids])


def write_trace_csv(path, trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "energy", "grad_norm"])
    for it, e, gn in trace:
        w.writerow([int(it), FLOAT_FMT % e, FLOAT_FMT % gn])
    _atomic_write(path, buf.getvalue())
