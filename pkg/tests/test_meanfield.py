import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degreedyn.dynamics import DynamicsModel
from degreedyn.meanfield import (DegenerateVertexError, degree_closed_form, enhanced_steady,
                                 enhanced_steady_batch, missing_degree, missing_degrees,
                                 solve_xeff)

EPI = DynamicsModel.default("epidemic")
REG = DynamicsModel.default("regulatory")
ECO = DynamicsModel.default("ecological")


def hand_degree(family, x, xe):
    """Independent evaluation of -f(x)/g(x, x_eff) for the default parameters."""
    if family == "epidemic":
        return x / ((1 - x) * xe)
    if family == "regulatory":
        return x / (xe ** 2 / (xe ** 2 + 1))
    B, K, C, D, E, H = 0.1, 5.0, 1.0, 5.0, 0.9, 0.1
    return -(B + x * (1 - x / K) * (x / C - 1)) / (x * xe / (D + E * x + H * xe))


def test_epidemic_examples():
    assert solve_xeff(EPI, 4.0, 0.5) == pytest.approx(0.75, abs=1e-8)
    assert degree_closed_form(EPI, 0.75, 0.75) == pytest.approx(4.0, rel=1e-12)
    assert missing_degree(EPI, 0.75, [0.75], 0.75) == pytest.approx(3.0, rel=1e-12)


def test_regulatory_xeff():
    # -x + beta x^2/(x^2+1) = 0 has positive roots (beta +- sqrt(beta^2 - 4)) / 2
    assert solve_xeff(REG, 3.0, 1.0) == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-8)
    assert solve_xeff(REG, 2.0, 1.0) == pytest.approx(1.0, abs=1e-8)
    # below the saddle-node the only state is 0
    assert solve_xeff(REG, 1.5, 1.0) == pytest.approx(0.0, abs=1e-8)


def test_xeff_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        solve_xeff(EPI, 0.0, 0.5)


@pytest.mark.parametrize("beta", np.linspace(1.5, 40, 12))
def test_epidemic_xeff_grid(beta):
    assert solve_xeff(EPI, beta, 0.5) == pytest.approx(1 - 1 / beta, abs=1e-8)


@pytest.mark.parametrize("family, lo, hi", [("epidemic", 0.01, 0.99), ("regulatory", 0.01, 10),
                                            ("ecological", 0.2, 8)])
def test_closed_form_matches_hand_formula(family, lo, hi):
    m = DynamicsModel.default(family)
    rng = np.random.default_rng(7)
    xs, xe = rng.uniform(lo, hi, 1000), rng.uniform(lo, hi, 1000)
    got = np.array([degree_closed_form(m, a, b) for a, b in zip(xs, xe)])
    want = hand_degree(family, xs, xe)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_degenerate_vertex():
    with pytest.raises(DegenerateVertexError):
        degree_closed_form(EPI, 1.0, 0.5)
    d, degen = missing_degrees(EPI, np.array([1.0, 0.5]), np.zeros(0, int), np.zeros(0, int), 0.5)
    assert degen.tolist() == [True, False]
    assert np.isnan(d[0]) and d[1] == pytest.approx(2.0)


@settings(max_examples=60)
@given(st.floats(0.05, 0.95), st.lists(st.floats(0.05, 0.95), max_size=6), st.floats(0.05, 0.95))
def test_missing_degree_subtracts_observed_neighbours(x, nbrs, xe):
    # d = delta_closed - sum_j g(x, x_j) / g(x, x_eff)
    base = degree_closed_form(EPI, x, xe)
    corr = sum(EPI.g(x, y) for y in nbrs) / EPI.g(x, xe)
    assert missing_degree(EPI, x, nbrs, xe) == pytest.approx(base - corr, rel=1e-9, abs=1e-9)


def test_vectorised_missing_degrees_match_scalar():
    rng = np.random.default_rng(3)
    x = rng.uniform(0.5, 6, 8)
    rows = np.array([0, 0, 1, 2, 3, 3, 3, 5])
    cols = np.array([1, 2, 0, 0, 4, 5, 6, 3])
    d, _ = missing_degrees(ECO, x, rows, cols, 4.0)
    for i in range(8):
        assert d[i] == pytest.approx(missing_degree(ECO, x[i], x[cols[rows == i]], 4.0), rel=1e-12)


@pytest.mark.parametrize("family, x", [("epidemic", 0.6), ("regulatory", 2.0), ("ecological", 5.5)])
def test_self_consistency(family, x):
    # the enhanced steady state at the closed-form degree returns the state itself
    m = DynamicsModel.default(family)
    xe = {"epidemic": 0.7, "regulatory": 2.5, "ecological": 4.5}[family]
    nbrs = [xe * 0.9]
    d = missing_degree(m, x, nbrs, xe)
    assert d > 0
    assert enhanced_steady(m, d, nbrs, xe, x) == pytest.approx(x, abs=1e-7)


def test_enhanced_batch_matches_scalar():
    states = np.array([0.5, 0.6, 0.7, 0.4])
    ptr = np.array([0, 1, 3, 4, 4])
    idx = np.array([1, 0, 2, 1])
    d = np.array([1.0, 2.0, 0.0, 3.0])
    z, ok = enhanced_steady_batch(EPI, np.arange(4), d, ptr, idx, states, 0.7)
    assert ok.all()
    for v in range(4):
        nb = states[idx[ptr[v]:ptr[v + 1]]]
        assert z[v] == pytest.approx(enhanced_steady(EPI, d[v], nb, 0.7, states[v]), abs=1e-8)


def test_enhanced_rejects_negative_degree():
    with pytest.raises(ValueError):
        enhanced_steady(EPI, -1.0, [], 0.5, 0.5)
