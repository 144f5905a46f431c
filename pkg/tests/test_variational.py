import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_domain, random_graph
from instances import SMOKE, smoke_problem
from graph_yamabe import (
    Nonlinearity,
    OperatorOrder,
    Problem,
    build_admissible_space,
    build_graph,
    check_hypotheses,
    decompose_domain,
    energy,
    energy_gradient,
    exp_growth,
    laplacian,
    norm,
    power,
    tabulated,
)
from graph_yamabe.errors import (
    BadExponent,
    HypothesisViolation,
    InadmissibleField,
    NonPositivePotential,
    TrivialAdmissibleSpace,
)
from graph_yamabe.io import generate_graph
from graph_yamabe.variational import quadrature, nonlinearity_from_config


@pytest.fixture
def toy():
    g = generate_graph("path", 5)
    return g, decompose_domain(g, ["v01", "v02", "v03"])


def single_vertex():
    return build_graph({"vertices": [{"id": "a", "mu": 1.0}], "edges": []})


# -- admissible spaces ----------------------------------------------------------

def test_space_m1_is_interior_deltas(rng):
    g = random_graph(rng, 15)
    dom = random_domain(rng, g, min_interior=2)
    sp = build_admissible_space(g, dom, 1)
    assert sp.dimension == dom.interior_mask.sum()
    assert np.array_equal(sp.support_mask, dom.interior_mask)
    Q = sp.basis
    assert np.allclose(Q.T @ (g.mu[:, None] * Q), np.eye(sp.dimension), atol=1e-13)


def test_space_m2_path7():
    g = generate_graph("path", 7)
    dom = decompose_domain(g, g.ids[1:6])
    sp = build_admissible_space(g, dom, 2)
    assert sp.dimension == 1
    assert np.flatnonzero(sp.support_mask).tolist() == [3]


def test_space_m2_constraints_hold(rng):
    g = generate_graph("grid", 8, 8)
    ids = [x for x in g.ids if 0 < int(x[1]) < 7 and 0 < int(x[3]) < 7]
    dom = decompose_domain(g, ids)
    sp = build_admissible_space(g, dom, 2)
    assert sp.dimension > 0
    Q = sp.basis
    assert np.allclose(Q.T @ (g.mu[:, None] * Q), np.eye(sp.dimension), atol=1e-12)
    from graph_yamabe import grad_norm
    for k in range(sp.dimension):
        u = Q[:, k]
        assert np.all(np.abs(u[~dom.interior_mask]) < 1e-14)
        assert np.all(grad_norm(g, u)[dom.boundary_mask] < 1e-12)


def test_space_errors(rng):
    g = generate_graph("path", 3)
    with pytest.raises(TrivialAdmissibleSpace):
        build_admissible_space(g, decompose_domain(g, ["v01"]), 1)
    g5 = generate_graph("path", 5)
    sp = build_admissible_space(g5, decompose_domain(g5, ["v01", "v02", "v03"]), 1)
    with pytest.raises(InadmissibleField):
        sp.check(np.ones(5))
    whole = build_admissible_space(g5, None, 1)
    assert whole.dimension == 5 and whole.contains(rng.standard_normal(5))


def test_space_projection_idempotent(rng):
    g = random_graph(rng, 12)
    sp = build_admissible_space(g, random_domain(rng, g), 1)
    u = rng.standard_normal(g.n)
    pu = sp.project(u)
    assert np.allclose(sp.project(pu), pu, atol=1e-14)
    assert sp.contains(pu)


# -- nonlinearities -------------------------------------------------------------

def test_nonlinearity_validation():
    with pytest.raises(BadExponent):
        power(2.0, 2.0)
    with pytest.raises(BadExponent):
        Nonlinearity(lambda x, t: t, 1.0, 3.0)


@pytest.mark.parametrize("nl", [power(4.0, 2.0), power(3.5, 3.0, two_sided=True),
                                exp_growth(2.0, 3.0), exp_growth(3.0, 4.0),
                                tabulated([0, 1, 2], [0, 1, 5], 2.0, 3.0)])
def test_primitive_matches_quadrature(nl):
    for s in (0.3, 1.0, 1.7):
        quad = quadrature(lambda t: float(nl.value(np.array([0]), np.array([t]))[0]), 0.0, s)
        assert math.isclose(float(nl.primitive(np.array([0]), np.array([s]))[0]), quad,
                            rel_tol=1e-8, abs_tol=1e-10)
    assert nl.value(np.array([0]), np.array([0.0]))[0] == 0


def test_nonlinearity_config_roundtrip():
    for name in ("power4", "power{4}", "power:4"):
        nl = nonlinearity_from_config(name, p=2.0)
        assert nl.q == 4.0 and nl.name == "power4"
    nl = nonlinearity_from_config({"kind": "power", "q": 5, "p": 3, "two_sided": True})
    assert nonlinearity_from_config(nl.to_config()).to_config() == nl.to_config()
    tab = tabulated([0, 1, 2], [0, 1, 5])
    assert nonlinearity_from_config(tab.to_config()).to_config() == tab.to_config()
    with pytest.raises(ValueError):
        nonlinearity_from_config("cubic")
    with pytest.raises(ValueError):
        Nonlinearity(lambda x, t: t ** 3, 2.0, 4.0).to_config()


# -- hypotheses -----------------------------------------------------------------

def test_power_passes_all():
    for q, p in ((3.0, 2.0), (5.0, 3.0)):
        rep = check_hypotheses(power(q, p), 0.01)
        assert rep.passed and set(rep.checks) == {"H1", "H2", "H3", "H4"}
        rep2 = check_hypotheses(power(q, p, two_sided=True), 0.01)
        assert rep2.passed and set(rep2.checks) == {"A1", "A2", "A3"}


def test_h4_fails_at_threshold():
    lam = 2.0
    nl = Nonlinearity(lambda x, t: lam * np.maximum(t, 0) + np.maximum(t, 0) ** 3, 2.0, 4.0,
                      lambda x, s: lam * np.maximum(s, 0) ** 2 / 2 + np.maximum(s, 0) ** 4 / 4)
    rep = check_hypotheses(nl, lam)
    assert not rep.checks["H4"].passed
    assert "sampled evidence" in rep.checks["H4"].evidence


def test_exp_growth_passes():
    rep = check_hypotheses(exp_growth(2.0, 3.0), 2.0)
    assert rep.passed, rep.summary()
    assert "s0" in rep.checks["H3"].witness


def test_negative_f_fails_h2():
    nl = Nonlinearity(lambda x, t: t ** 3 - t ** 2, 2.0, 4.0)
    rep = check_hypotheses(nl, 1.0)
    assert not rep.checks["H2"].passed
    assert rep.checks["H2"].witness["f"] < 0


def test_user_primitive_checked():
    bad = Nonlinearity(lambda x, t: np.maximum(t, 0) ** 3, 2.0, 4.0,
                       lambda x, s: np.maximum(s, 0) ** 4)  # should be s^4 / 4
    rep = check_hypotheses(bad, 1.0)
    assert not rep.checks["primitive"].passed


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(0.0, 10.0))
def test_hypothesis_check_monotone_in_threshold(lam, extra):
    nl = Nonlinearity(lambda x, t: 1.5 * np.maximum(t, 0) + np.maximum(t, 0) ** 3, 2.0, 4.0,
                      lambda x, s: 0.75 * np.maximum(s, 0) ** 2 + np.maximum(s, 0) ** 4 / 4)
    lo = check_hypotheses(nl, lam).checks["H4"].passed
    hi = check_hypotheses(nl, lam + extra).checks["H4"].passed
    assert hi or not lo


# -- norms ------------------------------------------------------------------------

def test_norm_examples(toy, rng):
    g, dom = toy
    sp = build_admissible_space(g, dom, 1)
    o = OperatorOrder(1, 2.0)
    t = -1.7
    assert math.isclose(norm(sp, t * g.delta("v02"), o), math.sqrt(2) * abs(t), rel_tol=1e-15)
    assert norm(sp, np.zeros(5), o) == 0
    u = sp.random_field(rng)
    assert math.isclose(norm(sp, 3 * u, o), 3 * norm(sp, u, o), rel_tol=1e-14)
    with pytest.raises(InadmissibleField):
        norm(sp, np.ones(5), o)


def test_norm_equivalence(rng):
    g = generate_graph("grid", 8, 8)
    ids = [x for x in g.ids if 0 < int(x[1]) < 7 and 0 < int(x[3]) < 7]
    sp = build_admissible_space(g, decompose_domain(g, ids), 2)
    o = OperatorOrder(2, 2.0)
    ratios = []
    for _ in range(300):
        u = sp.random_field(rng)
        ratios.append(norm(sp, u, o, full=True) / norm(sp, u, o))
    assert 1.0 <= min(ratios) and max(ratios) < 1e3


def test_whole_graph_norm(rng):
    g = random_graph(rng, 8)
    h = rng.uniform(0.5, 2, g.n)
    sp = build_admissible_space(g, None, 1, h=h)
    u = rng.standard_normal(g.n)
    from graph_yamabe import grad_norm
    want = np.sum(g.mu * (grad_norm(g, u) ** 3 + h * np.abs(u) ** 3)) ** (1 / 3)
    assert math.isclose(norm(sp, u, OperatorOrder(1, 3.0)), want, rel_tol=1e-13)


# -- problems and energies ----------------------------------------------------------

def test_problem_validation(toy):
    g, dom = toy
    with pytest.raises(HypothesisViolation, match="alpha 2.0 >= lambda1 2.0"):
        Problem.thm1(g, dom, 2.0, 4.0)
    with pytest.raises(HypothesisViolation):
        Problem.thm1(g, dom, 0.0, 2.0)
    forced = Problem.thm1(g, dom, 2.5, 4.0, force=True)
    assert not forced.hypotheses_verified
    with pytest.raises(HypothesisViolation):
        Problem.thm2(g, dom, power(4.0, 2.0, two_sided=True))
    with pytest.raises(HypothesisViolation):
        Problem.thm5(generate_graph("complete", 3), np.ones(3), 2.0)
    with pytest.raises(NonPositivePotential):
        Problem.thm6(generate_graph("complete", 3), [1, 0, 1], power(3.0, 2.0))


def test_energy_examples(toy):
    g, dom = toy
    prob = Problem.thm1(g, dom, 0.0, 4.0)
    assert math.isclose(prob.energy(math.sqrt(2) * g.delta("v02")), 1.0, rel_tol=1e-14)
    one = single_vertex()
    p5 = Problem.thm5(one, [1.0], 4.0)
    for t in (0.5, 1.0, 1.3):
        assert math.isclose(p5.energy(np.array([t])), t * t / 2 - t ** 4 / 4, rel_tol=1e-14)


@pytest.mark.parametrize("name", list(SMOKE))
def test_energy_and_gradient_vanish_at_zero(name):
    prob, g, _ = smoke_problem(name)
    z = np.zeros(g.n)
    assert prob.energy(z) == 0
    assert np.all(prob.energy_gradient(z) == 0)
    assert energy(prob, z) == 0 and np.all(energy_gradient(prob, z) == 0)


@pytest.mark.parametrize("name", ["thm1", "thm2", "thm5", "thm6"])
def test_truncation_kills_nonlinear_term(name, rng):
    prob, g, _ = smoke_problem(name)
    u = -np.abs(prob.space.random_field(rng))
    u = prob.space.project(u)
    u = np.minimum(u, 0)
    if not prob.space.contains(u):
        pytest.skip("negative part left the admissible space")
    from graph_yamabe.calculus import order_energy
    E_quad, _ = order_energy(g, u, prob.m, prob.s, prob.rho)
    E_mass = np.sum(prob.rho * prob.mass * np.abs(u) ** prob.s) / prob.s
    assert math.isclose(prob.energy(u), E_quad + E_mass, rel_tol=1e-13, abs_tol=1e-15)


def test_thm1_gradient_is_strong_form(toy, rng):
    g, dom = toy
    alpha, p = 0.7, 3.0
    prob = Problem.thm1(g, dom, alpha, p)
    for _ in range(20):
        u = prob.space.random_field(rng)
        want = (-laplacian(g, u) - alpha * u - np.maximum(u, 0) ** (p - 1)) * dom.interior_mask
        assert np.allclose(prob.energy_gradient(u), want, atol=1e-13)
    t = (2 - alpha) ** (1 / (p - 2))
    assert np.max(np.abs(prob.energy_gradient(t * g.delta("v02")))) <= 1e-12


def test_energy_rejects_inadmissible(toy):
    g, dom = toy
    prob = Problem.thm1(g, dom, 0.0, 4.0)
    with pytest.raises(InadmissibleField):
        prob.energy(np.ones(5))
