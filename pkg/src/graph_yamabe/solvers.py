"""Mountain-pass and Nehari solvers, Newton refinement and solution certificates.

All iterations run in the coordinates ``c`` of the problem's admissible
space (``u = basis @ c``).  Because the basis is mu-orthonormal, the
Euclidean gradient in ``c`` is the Riesz representative of ``J'(u)`` and its
norm is the dual-norm residual.
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg, optimize, sparse

from .calculus import (
    OperatorOrder,
    degenerate_vertices,
    laplacian,
    lmp_strong,
    order_quadratic_form,
    p_laplacian,
)
from .errors import GeometryNotFound, MaxIterations, NoNehariRoot, StalledPath, TrivialSolution
from .variational import Problem

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "Geometry",
    "NewtonResult",
    "Residual",
    "Positivity",
    "SolverReport",
    "verify_geometry",
    "mountain_pass_solve",
    "nehari_solve",
    "newton_refine",
    "hessian_spectrum",
    "morse_index",
    "certify_positivity",
    "residual",
    "solve",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and budgets shared by the solvers."""

    path_nodes: int = 40
    grad_tol: float = 1e-10
    newton_enter: float = 1e-3
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    fd_step: float = 1e-7
    max_iter: int = 100_000
    stall_sweeps: int = 100
    pos_tol: float = 1e-10
    energy_tol: float = 1e-10
    residual_gate: float = 1e-8
    seed: int = 0
    r0: float = 1e-2
    radius_halvings: int = 40
    sphere_dirs: int = 64
    nehari_starts: int = 4
    mp_paths: int = 3
    peak_candidates: int = 256
    restarts: int = 3

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class Geometry:
    r: float
    sphere_inf: float
    e: np.ndarray
    J_e: float

    def to_dict(self, g=None) -> dict:
        return {"r": self.r, "sphere_inf": self.sphere_inf, "J_e": self.J_e,
                "e": g.field_dict(self.e) if g is not None else self.e.tolist()}


@dataclass
class NewtonResult:
    u: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float
    flag: str  # converged | singular_jacobian | stagnated | max_iter | trivial


@dataclass
class Residual:
    field: np.ndarray
    linf: float
    dual: float


@dataclass
class Positivity:
    nonneg: bool
    strictly_positive_interior: bool
    u_minus_norm: float
    zero_set: list
    witness: dict | None
    cleaned: np.ndarray

    def to_dict(self) -> dict:
        return {"nonneg": self.nonneg,
                "strictly_positive_interior": self.strictly_positive_interior,
                "u_minus_norm": self.u_minus_norm, "zero_set": list(self.zero_set),
                "witness": self.witness}


@dataclass
class SolverReport:
    variant: str
    method: str
    solution: np.ndarray
    energy: float
    mp_level: float
    residual_linf: float
    residual_dual: float
    iterations: int
    geometry: Geometry | None
    positivity: Positivity | None
    trace: list
    newton_flag: str
    norm: float
    hypotheses_verified: bool = True
    gates: dict = field(default_factory=dict)
    degenerate: list = field(default_factory=list)  # vertices where |grad u|^(p-2) was set to 0

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def to_dict(self, g) -> dict:
        return {
            "variant": self.variant,
            "method": self.method,
            "status": "ok" if self.hypotheses_verified else "hypotheses-unverified",
            "energy": self.energy,
            "mp_level": self.mp_level,
            "residual_linf": self.residual_linf,
            "residual_dual": self.residual_dual,
            "iterations": self.iterations,
            "norm": self.norm,
            "newton_flag": self.newton_flag,
            "gates": dict(self.gates),
            "degenerate_vertices": list(self.degenerate),
            "geometry": None if self.geometry is None else self.geometry.to_dict(g),
            "positivity": None if self.positivity is None else self.positivity.to_dict(),
            "solution": g.field_dict(self.solution),
            "trace": [list(t) for t in self.trace],
        }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _norm_c(prob: Problem, c) -> float:
    return prob.norm(prob.space.field(c), check=False)


def _safe_energy(prob, c) -> float:
    with np.errstate(all="ignore"):
        v = prob.energy_coords(c)
    return v if np.isfinite(v) else math.inf


def _rng(cfg: SolverConfig, salt: int = 0):
    return np.random.default_rng([cfg.seed, salt])


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def _sphere_inf(prob, r, cfg, rng) -> float:
    """Estimate ``inf_{||u|| = r} J`` by sampling and sphere-restricted descent."""
    d = prob.space.dimension

    def to_sphere(c):
        n = _norm_c(prob, c)
        return c * (r / n) if n > 0 else None

    cands = []
    for _ in range(cfg.sphere_dirs):
        c = to_sphere(rng.standard_normal(d))
        if c is not None:
            cands.append((_safe_energy(prob, c), c))
    cands.sort(key=lambda t: t[0])
    best = cands[0][0]
    for val, c in cands[:4]:
        step = r
        for _ in range(60):
            gr = prob.gradient_coords(c)
            gn = np.linalg.norm(gr)
            if gn == 0:
                break
            t = step
            improved = False
            for _ in range(30):
                trial = to_sphere(c - t * gr / gn)
                if trial is not None:
                    v = _safe_energy(prob, trial)
                    if v < val:
                        c, val, improved = trial, v, True
                        break
                t *= 0.5
            if not improved:
                break
            step = 2 * t
        best = min(best, val)
    return float(best)


def verify_geometry(prob: Problem, cfg: SolverConfig = SolverConfig()) -> Geometry:
    """Find ``r`` with ``inf_{||u||=r} J > 0`` and ``e`` with ``J(e) < 0``, ``||e|| > r``."""
    rng = _rng(cfg, 1)
    r = cfg.r0
    for _ in range(cfg.radius_halvings):
        b = _sphere_inf(prob, r, cfg, rng)
        if b > 0:
            break
        r *= 0.5
    else:
        raise GeometryNotFound(
            f"no radius down to {r:.3g} has a positive sphere infimum; check the hypotheses")
    seed = prob.seed_field()
    cs = prob.space.coords(seed)
    cs = cs / _norm_c(prob, cs)
    t = 2.0 * r
    for _ in range(200):
        c = t * cs
        J = _safe_energy(prob, c)
        if J < 0 and _norm_c(prob, c) > r:
            return Geometry(r, b, prob.space.field(c), float(J))
        t *= 2.0
    raise GeometryNotFound("energy stays nonnegative along the seed ray")


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------

def _fd_jacobian(G, c, cfg):
    h = cfg.fd_step * max(1.0, float(np.max(np.abs(c))))
    d = c.size
    Jac = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        Jac[:, j] = (G(c + e) - G(c - e)) / (2 * h)
    return 0.5 * (Jac + Jac.T)


def hessian_spectrum(prob: Problem, u, cfg: SolverConfig = SolverConfig()):
    """Eigenvalues and eigenvectors (coordinates) of the numerical Hessian at ``u``."""
    Jac = _fd_jacobian(prob.gradient_coords, prob.space.coords(u), cfg)
    return linalg.eigh(Jac)


def morse_index(prob: Problem, u, cfg: SolverConfig = SolverConfig()) -> int:
    w, _ = hessian_spectrum(prob, u, cfg)
    return int(np.sum(w < -1e-8 * max(1.0, np.max(np.abs(w)))))


def newton_refine(prob: Problem, u0, cfg: SolverConfig = SolverConfig()) -> NewtonResult:
    """Damped Newton on ``c -> grad J`` with a central-difference Jacobian.

    Returns ``u0`` unchanged with flag ``singular_jacobian`` when the
    Jacobian is numerically singular, and flags a zero limit as ``trivial``.
    """
    sp = prob.space
    c0 = sp.coords(np.asarray(u0, dtype=float))
    c = c0
    G = prob.gradient_coords
    gv = G(c)
    gn = float(np.linalg.norm(gv))
    flag = "max_iter"
    it = 0
    best = (c, gn)
    if gn < cfg.newton_tol:
        flag = "converged"
    else:
        for it in range(1, cfg.newton_max_iter + 1):
            Jac = _fd_jacobian(G, c, cfg)
            sv = linalg.svdvals(Jac)
            if sv[0] == 0 or sv[-1] < 1e-13 * sv[0]:
                flag = "singular_jacobian"
                c, gn = c0, float(np.linalg.norm(G(c0)))
                break
            dc = linalg.solve(Jac, -gv, assume_a="sym")
            t = 1.0
            while t > 1e-8:
                cn = c + t * dc
                gnew = G(cn)
                gnn = float(np.linalg.norm(gnew))
                if np.isfinite(gnn) and gnn < (1 - 1e-4 * t) * gn:
                    break
                t *= 0.5
            else:
                flag = "stagnated"
                break
            c, gv, gn = cn, gnew, gnn
            if gn < best[1]:
                best = (c, gn)
            if gn < cfg.newton_tol:
                flag = "converged"
                break
    if flag != "singular_jacobian":
        c, gn = best
    u = sp.field(c)
    if _norm_c(prob, c) <= 1e-8:
        flag = "trivial"
    return NewtonResult(u, flag == "converged", it, gn, flag)


def _accept(res: NewtonResult, cfg) -> bool:
    return res.flag != "trivial" and (res.converged or res.grad_norm <= cfg.grad_tol)


# ---------------------------------------------------------------------------
# mountain pass
# ---------------------------------------------------------------------------

def _resample(nodes, count):
    """``count`` points at equal arclength along the polyline ``nodes``."""
    seg = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return np.repeat(nodes[:1], count, axis=0)
    targets = np.linspace(0.0, s[-1], count)
    out = np.empty((count, nodes.shape[1]))
    for j in range(nodes.shape[1]):
        out[:, j] = np.interp(targets, s, nodes[:, j])
    out[0], out[-1] = nodes[0], nodes[-1]
    return out


def _refine_max(prob, path, k, Ek):
    """Maximize J on the two polyline segments adjacent to node ``k``."""
    best_x, best = path[k], Ek
    for a, b in ((path[k - 1], path[k]), (path[k], path[k + 1])):
        res = optimize.minimize_scalar(lambda s: -_safe_energy(prob, a + s * (b - a)),
                                       bounds=(0.0, 1.0), method="bounded",
                                       options={"xatol": 1e-12})
        if -res.fun > best:
            best, best_x = -res.fun, a + res.x * (b - a)
    return best_x, best


# largest node displacement per sweep, relative to the node's norm
_MAX_MOVE = 0.1


def _preconditioner(prob: Problem):
    """Cholesky factor of the energy's quadratic part in coordinates.

    Steps along ``P^{-1} grad`` follow the Sobolev gradient of the energy,
    which keeps path descent well conditioned for higher-order operators.
    """
    sp = prob.space
    rho = prob.rho
    H = order_quadratic_form(prob.graph, prob.m, rho) + sparse.diags(rho * np.abs(prob.mass))
    P = sp.basis.T @ (H @ sp.basis)
    P = 0.5 * (P + P.T)
    scale = max(float(np.trace(P)) / P.shape[0], 1e-300)
    try:
        return linalg.cho_factor(P + 1e-12 * scale * np.eye(P.shape[0]))
    except linalg.LinAlgError:
        return linalg.cho_factor(P + 1e-6 * scale * np.eye(P.shape[0]))


def _relax_string(prob, path, energies, k, steps, P):
    """One Armijo step per interior node along the path-normal part of the descent direction."""
    N = path.shape[0]
    for i in range(1, N - 1):
        if i == k:
            continue
        tau = path[i + 1] - path[i - 1]
        tn = np.linalg.norm(tau)
        gv = prob.gradient_coords(path[i])
        d = linalg.cho_solve(P, gv)
        if tn > 0:
            tau = tau / tn
            d = d - (d @ tau) * tau
        slope = float(gv @ d)
        if slope <= 0:
            d = gv - (gv @ tau) * tau if tn > 0 else gv
            slope = float(gv @ d)
        if slope <= 0:
            continue
        t = min(steps[i], _MAX_MOVE * max(np.linalg.norm(path[i]), 1e-12) / np.linalg.norm(d))
        for _ in range(40):
            y = path[i] - t * d
            Ey = _safe_energy(prob, y)
            if Ey <= energies[i] - 1e-4 * t * slope:
                path[i], energies[i] = y, Ey
                steps[i] = min(2.0 * t, 1e6)
                break
            t *= 0.5
        else:
            steps[i] = t


def _mountain_pass_once(prob, geo, cfg, path, trace):
    N = path.shape[0]
    r = geo.r
    energies = np.array([_safe_energy(prob, c) for c in path])
    level_prev = math.inf
    step = 1.0
    stall = 0
    newton_next = cfg.newton_enter
    escapes = 0
    node_steps = np.ones(N)
    P = _preconditioner(prob)
    for it in range(cfg.max_iter):
        k = int(np.argmax(energies[1:-1])) + 1
        x, level = _refine_max(prob, path, k, energies[k])
        if level > level_prev:
            # regrading exposed a higher point of the polyline; take smaller steps
            step *= 0.5
        gv = prob.gradient_coords(x)
        gn = float(np.linalg.norm(gv))
        trace.append((len(trace), float(level), gn))
        if gn < newton_next or gn < cfg.grad_tol:
            res = newton_refine(prob, prob.space.field(x), cfg)
            if not (_accept(res, cfg) and prob.norm(res.u, check=False) > r):
                if gn < cfg.grad_tol:
                    if prob.norm(prob.space.field(x), check=False) <= r:
                        raise TrivialSolution("path maximum collapsed onto the trivial solution")
                    res = NewtonResult(prob.space.field(x), False, 0, gn, res.flag)
                else:
                    res = None
                    newton_next = gn / 10
            if res is not None:
                w, V = hessian_spectrum(prob, res.u, cfg)
                neg = np.flatnonzero(w < -1e-8 * max(1.0, np.max(np.abs(w))))
                if neg.size <= 1 or escapes >= cfg.restarts:
                    return res, it + 1
                # saddle of index > 1 (typically a symmetric one): bend the path
                # along the unstable direction least aligned with the saddle itself
                cx = prob.space.coords(res.u)
                cosines = np.abs(V[:, neg].T @ cx) / np.linalg.norm(cx)
                v = V[:, neg[int(np.argmin(cosines))]]
                bump = np.sin(np.pi * np.linspace(0.0, 1.0, N))[:, None]
                path = path + 0.25 * np.linalg.norm(cx) * bump * v[None, :]
                energies = np.array([_safe_energy(prob, c) for c in path])
                escapes += 1
                level_prev, stall = math.inf, 0
                newton_next = cfg.newton_enter
                log.info("left a saddle of Morse index %d at level %.12g", neg.size, level)
                continue
        stall = stall + 1 if level_prev - level < 1e-15 else 0
        if stall >= cfg.stall_sweeps:
            raise StalledPath(f"no decrease of the path maximum for {stall} sweeps")
        level_prev = level

        d = linalg.cho_solve(P, gv)
        slope = float(gv @ d)
        t = min(step, _MAX_MOVE * np.linalg.norm(x) / np.linalg.norm(d))
        for _ in range(60):
            y = x - t * d
            if _safe_energy(prob, y) <= level - 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            y = x
        step = min(2.0 * t, 1e6)
        path = path.copy()
        _relax_string(prob, path, energies, k, node_steps, P)
        path[k] = y
        left = _resample(path[: k + 1], k + 1)
        right = _resample(path[k:], N - k)
        path = np.vstack([left, right[1:]])
        energies = np.array([_safe_energy(prob, c) for c in path])
    raise MaxIterations(f"mountain pass did not converge in {cfg.max_iter} sweeps")


def _candidate_directions(prob, cfg):
    """Start directions ranked by the energy of their Nehari point.

    Candidates are the positive seed and one projected peak per vertex of
    the admissible support.  Returns ``(energy, direction, t)`` triples.
    """
    sp = prob.space
    dirs = [sp.coords(prob.seed_field())]
    for x in np.flatnonzero(sp.support_mask)[: cfg.peak_candidates]:
        dirs.append(sp.basis[x].copy())
    out = []
    for i, v in enumerate(dirs):
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v = v / nv
        t = _nehari_t(prob, v)
        if t is not None:
            out.append((_safe_energy(prob, t * v), i, v, t))
    out.sort(key=lambda z: (z[0], z[1]))
    return [(E, v, t) for E, _, v, t in out]


def mountain_pass_solve(prob: Problem, cfg: SolverConfig = SolverConfig(),
                        geometry: Geometry | None = None) -> SolverReport:
    """Deform paths from 0 to ``e`` until the path maximum is a critical point.

    Paths are bent through the lowest Nehari points among the candidate
    directions; the lowest critical level found is reported.
    """
    geo = geometry if geometry is not None else verify_geometry(prob, cfg)
    sp = prob.space
    ce = sp.coords(geo.e)
    N = cfg.path_nodes
    origin = np.zeros_like(ce)
    cands = _candidate_directions(prob, cfg)[: cfg.mp_paths]
    paths = [_resample(np.vstack([origin, t * v, ce]), N) for _, v, t in cands]
    base = np.linspace(0.0, 1.0, N)[:, None] * ce[None, :]
    rng = _rng(cfg, 2)
    best = None
    last_err = None
    attempt = 0
    while True:
        if attempt < len(paths):
            if best is not None and cands[attempt][0] > best[0]:
                # this ray already sits above the best critical level
                attempt += 1
                continue
            path = paths[attempt]
        elif best is None and attempt < len(paths) + cfg.restarts + 1:
            k = attempt - len(paths)
            bump = np.sin(np.pi * np.linspace(0, 1, N))[:, None]
            path = base + 0.1 * k * np.linalg.norm(ce) * bump * rng.standard_normal(ce.size)
        else:
            break
        attempt += 1
        trace: list = []
        try:
            res, sweeps = _mountain_pass_once(prob, geo, cfg, path, trace)
        except (TrivialSolution, StalledPath, MaxIterations) as exc:
            last_err = exc
            log.info("mountain pass attempt %d failed: %s", attempt, exc)
            continue
        E = _safe_energy(prob, sp.coords(res.u))
        if best is None or E < best[0] - cfg.energy_tol:
            best = (E, res, sweeps, trace)
    if best is None:
        raise last_err
    _, res, sweeps, trace = best
    return _finish(prob, "mountain_pass", res, sweeps, geo, trace, cfg)


# ---------------------------------------------------------------------------
# Nehari
# ---------------------------------------------------------------------------

def _nehari_t(prob, v):
    """Positive root of ``t -> <J'(t v), v>``, or ``None`` if there is none."""
    def psi(t):
        with np.errstate(all="ignore"):
            val = float(prob.gradient_coords(t * v) @ v)
        return val if np.isfinite(val) else -math.inf if t > 1 else math.inf

    lo = 1.0
    plo = psi(lo)
    for _ in range(80):
        if plo > 0:
            break
        lo *= 0.5
        plo = psi(lo)
    else:
        return None
    hi = lo
    phi = plo
    for _ in range(200):
        if phi < 0:
            break
        lo, plo = hi, phi
        hi *= 2.0
        phi = psi(hi)
    else:
        return None
    if not np.isfinite(phi):
        # shrink until psi is finite but negative
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            pm = psi(mid)
            if not np.isfinite(pm):
                b = mid
            elif pm < 0:
                hi = mid
                break
            else:
                a = lo = mid
        else:
            return None
    return optimize.brentq(psi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def _nehari_descent(prob, v, cfg, trace):
    def phi(v):
        t = _nehari_t(prob, v)
        if t is None:
            return math.inf, None, None
        return _safe_energy(prob, t * v), t, None

    v = v / np.linalg.norm(v)
    val, t, _ = phi(v)
    if t is None:
        return None
    step = 1.0
    v_prev = g_prev = None
    newton_next = cfg.newton_enter
    for it in range(cfg.max_iter):
        gJ = prob.gradient_coords(t * v)
        gn = float(np.linalg.norm(gJ))
        trace.append((len(trace), float(val), gn))
        if gn < newton_next:
            res = newton_refine(prob, prob.space.field(t * v), cfg)
            if _accept(res, cfg):
                return res, it + 1
            if gn < cfg.grad_tol:
                return NewtonResult(prob.space.field(t * v), False, 0, gn, res.flag), it + 1
            newton_next = gn / 10
        grad = t * gJ
        grad = grad - (grad @ v) * v
        g2 = float(grad @ grad)
        if v_prev is not None:
            s, y = v - v_prev, grad - g_prev
            sy = abs(float(s @ y))
            if sy > 0:
                step = float(s @ s) / sy
        tau = step
        for _ in range(60):
            vn = v - tau * grad
            vn /= np.linalg.norm(vn)
            valn, tn, _ = phi(vn)
            if tn is not None and valn <= val - 1e-4 * tau * g2:
                break
            tau *= 0.5
        else:
            if gn < cfg.grad_tol * 100:
                res = newton_refine(prob, prob.space.field(t * v), cfg)
                if _accept(res, cfg):
                    return res, it + 1
            raise StalledPath(f"Nehari descent stalled at energy {val:.15g}")
        v_prev, g_prev = v, grad
        v, val, t = vn, valn, tn
    raise MaxIterations(f"Nehari descent did not converge in {cfg.max_iter} steps")


def nehari_solve(prob: Problem, cfg: SolverConfig = SolverConfig(),
                 geometry: Geometry | None = None) -> SolverReport:
    """Minimize ``J`` over ``{u != 0 : <J'(u), u> = 0}`` by descent over directions."""
    sp = prob.space
    rng = _rng(cfg, 3)
    starts = [(E, v) for E, v, _ in _candidate_directions(prob, cfg)[: cfg.nehari_starts]]
    any_root = bool(starts)
    if not starts:
        starts = [(-math.inf, rng.standard_normal(sp.dimension))
                  for _ in range(max(cfg.nehari_starts, 1))]
    best = None
    escapes = 0
    queue = list(starts)
    while queue:
        E0, v0 = queue.pop(0)
        if best is not None and E0 > best[0]:
            continue
        trace: list = []
        try:
            out = _nehari_descent(prob, v0, cfg, trace)
        except (StalledPath, MaxIterations) as exc:
            log.info("Nehari start failed: %s", exc)
            continue
        if out is None:
            continue
        any_root = True
        res, its = out
        cx = sp.coords(res.u)
        E = _safe_energy(prob, cx)
        if best is None or E < best[0] - cfg.energy_tol:
            best = (E, res, its, trace)
        if escapes < cfg.restarts:
            # a Nehari critical point of Morse index > 1 is not a ground state:
            # restart from it tilted along its unstable directions
            w, V = hessian_spectrum(prob, res.u, cfg)
            neg = np.flatnonzero(w < -1e-8 * max(1.0, np.max(np.abs(w))))
            if neg.size > 1:
                escapes += 1
                nx = np.linalg.norm(cx)
                cosines = np.abs(V[:, neg].T @ cx) / nx
                tilt = V[:, neg[int(np.argmin(cosines))]]
                log.info("Nehari point of Morse index %d at level %.12g", neg.size, E)
                queue[:0] = [(-math.inf, cx / nx + sgn * 0.25 * tilt) for sgn in (1.0, -1.0)]
    if best is None:
        if not any_root:
            raise NoNehariRoot("no start direction meets the Nehari manifold")
        raise StalledPath("Nehari descent failed from every start")
    _, res, its, trace = best
    return _finish(prob, "nehari", res, its, geometry, trace, cfg)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def residual(prob: Problem, u) -> Residual:
    """Strong residual of the variant's equation and its dual norm.

    For ``m = 1`` and for whole-graph problems the field is the pointwise
    left-minus-right side on the equation vertices.  For Dirichlet problems
    with ``m >= 2`` the equation only holds against the admissible test class,
    so the field is the projection of the strong residual onto that class.
    """
    sp = prob.space
    g = prob.graph
    u = sp.check(u)
    s = prob.s
    if prob.m == 1:
        op = -laplacian(g, u) if s == 2 else -p_laplacian(g, u, s)
    else:
        op = lmp_strong(g, u, OperatorOrder(prob.m, s), region=sp.region_mask)
    idx = np.arange(g.n)
    arg = np.maximum(u, 0.0) if prob.one_sided else u
    with np.errstate(all="ignore"):
        fv = prob.nonlinearity.value(idx, arg)
    if prob.one_sided:
        fv = np.where(u > 0, fv, 0.0)
    mass = prob.mass * np.sign(u) * np.abs(u) ** (s - 1) if s != 2 else prob.mass * u
    full = np.where(sp.region_mask, op + mass - fv, 0.0)
    coords = sp.basis.T @ (g.mu * full)
    dual = float(np.linalg.norm(coords))
    if sp.kind == "dirichlet" and prob.m >= 2:
        field_ = sp.field(coords)
    else:
        field_ = np.where(sp.equation_mask, full, 0.0)
    return Residual(field_, float(np.max(np.abs(field_))), dual)


def certify_positivity(prob: Problem, u, cfg: SolverConfig = SolverConfig()) -> Positivity:
    """Sign certificate and maximum-principle propagation witness."""
    g = prob.graph
    sp = prob.space
    u = np.asarray(u, dtype=float)
    umin = float(np.max(np.maximum(-u, 0.0)))
    nonneg = umin <= cfg.pos_tol
    cleaned = np.maximum(u, 0.0) if nonneg else u.copy()
    eq = sp.equation_mask
    zero = eq & (cleaned <= cfg.pos_tol)
    zero_ids = [g.ids[i] for i in np.flatnonzero(zero)]
    witness = None
    if zero.any():
        # a zero minimum forces its neighbors to vanish; follow it through the region
        start = int(np.flatnonzero(zero)[0])
        region = sp.region_mask
        seen = {start}
        order, edges = [g.ids[start]], []
        queue = deque([start])
        while queue:
            x = queue.popleft()
            if not eq[x]:
                continue
            for y in g.neighbors[x]:
                if region[y] and y not in seen:
                    seen.add(y)
                    order.append(g.ids[y])
                    edges.append([g.ids[x], g.ids[y]])
                    queue.append(y)
        witness = {"start": g.ids[start], "reached": order, "edges": edges}
    return Positivity(nonneg, bool(nonneg and not zero.any()), umin, zero_ids, witness, cleaned)


def _finish(prob, method, res: NewtonResult, iterations, geo, trace, cfg) -> SolverReport:
    u = res.u
    pos = None
    if prob.certifies_positivity:
        pos = certify_positivity(prob, u, cfg)
        u = pos.cleaned
    E = float(prob.energy(u))
    rs = residual(prob, u)
    nrm = prob.norm(u)
    gates = {
        "residual": rs.dual <= cfg.residual_gate * (1 + nrm),
        "nontrivial": nrm > (geo.r if geo is not None else 1e-8),
    }
    if pos is not None:
        gates["positivity"] = pos.strictly_positive_interior
    degen = []
    if prob.m == 1 and prob.s < 2:
        mask = degenerate_vertices(prob.graph, u, prob.s) & prob.space.region_mask
        degen = [prob.graph.ids[i] for i in np.flatnonzero(mask)]
    return SolverReport(prob.variant, method, u, E, E, rs.linf, rs.dual,
                        int(iterations + res.iterations), geo, pos, trace, res.flag, nrm,
                        prob.hypotheses_verified, gates, degen)


def solve(prob: Problem, cfg: SolverConfig = SolverConfig(), method: str = "mountain_pass") -> SolverReport:
    if method == "mountain_pass":
        return mountain_pass_solve(prob, cfg)
    if method == "nehari":
        return nehari_solve(prob, cfg, verify_geometry(prob, cfg))
    raise ValueError(f"unknown method {method!r}")
