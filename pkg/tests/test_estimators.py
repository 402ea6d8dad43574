from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degreedyn.dynamics import DynamicsModel, initial_state
from degreedyn.estimators import (FixedPointOptions, estimate, round_half_away, round_refine,
                                  state_error, topo_plus, zero_topo)
from degreedyn.graph import degrees, gen_barabasi_albert, gen_regular, gen_star
from degreedyn.sampling import SampledSubgraph, sample_edges_uniform
from degreedyn.solver import simulate_full

EPI = DynamicsModel.default("epidemic")


def test_round_half_away():
    assert round_half_away([0.5, 1.5, 2.4999, -0.5, -1.5]).tolist() == [1, 2, 2, -1, -2]


def test_regular_epidemic_converges_fast():
    x = np.full(30, 0.75)  # steady state of a 4-regular graph
    res = zero_topo(x, EPI)
    assert res.delta_hat.tolist() == [4] * 30
    assert res.converged and res.iterations <= 2
    assert res.x_eff == pytest.approx(0.75, abs=1e-8)


def test_single_dead_vertex():
    res = zero_topo(np.array([0.0]), EPI)
    assert res.delta_hat.tolist() == [0]


def test_dead_vertices_get_zero_missing_degree():
    res = zero_topo(np.array([0.75, 0.75, 0.0, 0.75]), EPI)
    assert res.delta_hat.tolist() == [4, 4, 0, 4]


@pytest.fixture(scope="module")
def ba_case():
    g = gen_barabasi_albert(150, 3, seed=2)
    return g, simulate_full(g, EPI, initial_state(EPI))


def test_empty_subgraph_reduces_to_zero_topo(ba_case):
    g, x = ba_case
    a = zero_topo(x, EPI)
    b = topo_plus(x, SampledSubgraph.empty(g.n), EPI)
    assert np.array_equal(a.delta_hat, b.delta_hat)
    assert np.array_equal(a.delta_real, b.delta_real)
    assert a.x_eff == b.x_eff and a.beta == b.beta


def test_full_subgraph_gives_zero_missing(ba_case):
    g, x = ba_case
    res = topo_plus(x, SampledSubgraph.from_graph(g), EPI)
    assert np.mean(res.d == 0) >= 0.99
    assert np.array_equal(res.delta_hat, degrees(g))


def test_star_full_topology():
    g = gen_star(5)
    x = simulate_full(g, EPI, 0.5)
    res = topo_plus(x, SampledSubgraph.from_graph(g), EPI)
    assert res.delta_hat.tolist() == [4, 1, 1, 1, 1]


def test_sampled_degree_is_a_floor(ba_case):
    g, x = ba_case
    sub = sample_edges_uniform(g, 0.3, seed=1)
    res = topo_plus(x, sub, EPI)
    assert np.all(res.delta_hat >= sub.degrees())
    assert np.all(res.delta_hat >= 1)
    assert np.array_equal(res.delta_hat, res.d + sub.degrees())


def test_topoplus_more_accurate_than_zero_topo(ba_case):
    g, x = ba_case
    true = degrees(g)
    z = zero_topo(x, EPI)
    t = topo_plus(x, sample_edges_uniform(g, 0.5, seed=0), EPI)
    assert np.mean(t.delta_hat == true) >= np.mean(z.delta_hat == true)


def test_determinism(ba_case):
    g, x = ba_case
    sub = sample_edges_uniform(g, 0.2, seed=4)
    a, b = estimate("round", x, sub, EPI), estimate("round", x, sub, EPI)
    assert np.array_equal(a.delta_hat, b.delta_hat)
    assert a.x_eff == b.x_eff


def test_fixed_point_invariant(ba_case):
    # at convergence beta and x_eff are consistent with the returned real degrees
    from degreedyn.graph import beta_index
    from degreedyn.meanfield import solve_xeff
    g, x = ba_case
    res = zero_topo(x, EPI)
    assert res.converged
    assert beta_index(res.delta_real) == pytest.approx(res.beta, rel=1e-5)
    assert solve_xeff(EPI, res.beta, float(x.mean())) == pytest.approx(res.x_eff, rel=1e-5)


def test_unknown_states_are_skipped():
    x = np.array([0.75, np.nan, 0.75, 0.75])
    res = zero_topo(x, EPI)
    assert res.delta_hat[[0, 2, 3]].tolist() == [4, 4, 4]
    assert not res.scope[1]


def test_estimator_input_validation():
    with pytest.raises(ValueError):
        zero_topo(np.array([-0.1, 0.5]), EPI)
    with pytest.raises(ValueError):
        estimate("oracle", np.array([0.5]), None, EPI)
    with pytest.raises(ValueError):
        FixedPointOptions(damping=0)


def _toy_states(deltas, xe=0.75):
    d = np.asarray(deltas, dtype=float)
    return d * xe / (1 + d * xe)  # inverts delta = x / ((1 - x) x_eff)


def test_round_pairs_opposite_moves():
    x = _toy_states([2.6, 2.4])
    base = zero_topo(x, EPI)
    start = replace(base, d=np.array([2, 3]), delta_hat=np.array([2, 3]), x_eff=0.75)
    res = round_refine(x, None, start, EPI, FixedPointOptions(round_max_sweeps=1))
    assert res.delta_hat.tolist() == [3, 2]


def test_round_leaves_optimal_rounding_alone():
    x = _toy_states([3.2, 1.9, 5.1])
    base = zero_topo(x, EPI)
    res = round_refine(x, None, base, EPI)
    assert res.converged
    assert res.delta_hat.tolist() == base.delta_hat.tolist()


@settings(max_examples=40)
@given(st.floats(0.01, 5), st.floats(0.01, 5))
def test_state_error_properties(z, x):
    assert state_error(z, x) == pytest.approx(state_error(x, z))
    assert state_error(x, x) == 0
    assert state_error(0.0, x) == pytest.approx(x)


@pytest.mark.parametrize("family", ["regulatory", "ecological"])
def test_regular_graph_other_families(family):
    m = DynamicsModel.default(family)
    g = gen_regular(40, 4, seed=1)
    x = simulate_full(g, m, initial_state(m))
    assert zero_topo(x, m).delta_hat.tolist() == [4] * 40
