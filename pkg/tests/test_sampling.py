from collections import Counter
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from degreedyn.graph import Graph, gen_barabasi_albert, gen_erdos_renyi, parse_edge_list
from degreedyn.sampling import (SampledSubgraph, add_state_noise, fraction_count, load_subgraph,
                                sample_edges_uniform, sample_induced, sample_random_walk,
                                save_subgraph)

TRIANGLE = parse_edge_list("0 1\n1 2\n0 2")
K4 = Graph.from_edges(4, list(itertools.combinations(range(4), 2)))


def test_fraction_count_rounds_half_up():
    assert fraction_count(0.5, 3) == 2
    assert fraction_count(0.25, 6) == 2
    assert fraction_count(0.1, 1497) == 150


def test_uniform_triangle_enumeration():
    seen = {tuple(map(tuple, sample_edges_uniform(TRIANGLE, 2 / 3, s).edges.tolist()))
            for s in range(200)}
    assert seen == {((0, 1), (0, 2)), ((0, 1), (1, 2)), ((0, 2), (1, 2))}


def test_uniform_chi_square():
    counts = Counter(tuple(sample_edges_uniform(K4, 1 / 6, s).edges[0]) for s in range(6000))
    assert len(counts) == 6
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def _walk_oracle(target):
    """Exact law of the collected edge set on K4 from the absorbing chain on (vertex, set)."""
    edges = list(itertools.combinations(range(4), 2))
    sets = [frozenset(c) for r in range(target) for c in itertools.combinations(edges, r)]
    trans = [(v, s) for s in sets for v in range(4)]
    pos = {t: i for i, t in enumerate(trans)}
    finals = sorted({frozenset(c) for c in itertools.combinations(edges, target)}, key=sorted)
    fpos = {f: i for i, f in enumerate(finals)}
    q = np.zeros((len(trans), len(trans)))
    r = np.zeros((len(trans), len(finals)))
    for (v, s), i in pos.items():
        for u in range(4):
            if u == v:
                continue
            s2 = s | {(min(u, v), max(u, v))}
            if len(s2) == target:
                r[i, fpos[s2]] += 1 / 3
            else:
                q[i, pos[(u, s2)]] += 1 / 3
    absorb = np.linalg.solve(np.eye(len(trans)) - q, r)
    start = absorb[[pos[(v, frozenset())] for v in range(4)]].mean(axis=0)
    return {tuple(sorted(f)): pr for f, pr in zip(finals, start) if pr > 0}


def test_random_walk_matches_exact_distribution():
    oracle = _walk_oracle(3)
    assert sum(oracle.values()) == pytest.approx(1.0)
    n = 20000
    counts = Counter(tuple(map(tuple, sample_random_walk(K4, 0.5, s).edges.tolist()))
                     for s in range(n))
    assert set(counts) <= set(oracle)
    keys = sorted(oracle)
    obs = [counts.get(k, 0) for k in keys]
    exp = [oracle[k] * n for k in keys]
    assert stats.chisquare(obs, exp).pvalue > 1e-3
    for o, e in zip(obs, exp):
        assert abs(o - e) / n < 0.01


def test_random_walk_shortfall_on_disconnected_graph():
    g = parse_edge_list("0 1\n2 3\n4 5")
    sub = sample_random_walk(g, 1.0, seed=0, budget_factor=2, max_walks=1)
    assert sub.shortfall and sub.m == 1


def test_induced_keeps_all_edges_among_chosen():
    g = gen_erdos_renyi(30, 120, seed=1)
    sub = sample_induced(g, 0.5, seed=3)
    chosen = set(sub.observed_vertices.tolist())
    assert len(chosen) == 15
    want = {tuple(e) for e in g.edges.tolist() if e[0] in chosen and e[1] in chosen}
    assert {tuple(e) for e in sub.edges.tolist()} == want


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["uniform", "random_walk", "induced"]), st.floats(0, 1), st.integers(0, 10**6))
def test_sampler_invariants(kind, p, seed):
    from degreedyn.sampling import SAMPLERS
    g = gen_barabasi_albert(60, 2, seed=0)
    sub = SAMPLERS[kind](g, p, seed)
    full = {tuple(e) for e in g.edges.tolist()}
    assert {tuple(e) for e in sub.edges.tolist()} <= full
    assert np.all(sub.degrees() <= np.bincount(g.edges.ravel(), minlength=g.n))
    if kind != "induced":
        assert sub.m == fraction_count(p, g.m)
    again = SAMPLERS[kind](g, p, seed)
    assert np.array_equal(sub.edges, again.edges)


def test_invalid_fraction():
    with pytest.raises(ValueError):
        sample_edges_uniform(TRIANGLE, 1.5, 0)


def test_subgraph_rejects_unobserved_endpoint():
    with pytest.raises(ValueError):
        SampledSubgraph(3, np.array([[0, 1]]), np.array([True, False, False]))


def test_noise_moments():
    x = add_state_noise(np.ones(10**6), 0.1, seed=0)
    assert 0.999 <= x.mean() <= 1.001
    assert 0.099 <= x.std() <= 0.101


def test_noise_edge_cases():
    x = np.array([0.0, 1.0, 2.0])
    assert np.array_equal(add_state_noise(x, 0.0, 1), x)
    assert np.all(add_state_noise(x, 5.0, 1) >= 0)
    assert add_state_noise(x, 5.0, 1)[0] == 0.0
    with pytest.raises(ValueError):
        add_state_noise(x, -0.1)


def test_subgraph_roundtrip(tmp_path):
    g = gen_barabasi_albert(40, 2, seed=0)
    sub = sample_edges_uniform(g, 0.3, seed=5)
    save_subgraph(sub, tmp_path / "s.edges", tmp_path / "s.vertices")
    back = load_subgraph(tmp_path / "s.edges", tmp_path / "s.vertices")
    assert back.n == sub.n
    assert np.array_equal(back.edges, sub.edges)
    assert np.array_equal(back.observed, sub.observed)
