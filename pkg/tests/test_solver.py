import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degreedyn.dynamics import DynamicsModel
from degreedyn.graph import gen_barabasi_albert, gen_regular
from degreedyn.solver import (DivergenceError, NonConvergenceError, SolverOptions, full_residual,
                              load_states, save_states, simulate_full, solve_scalar_steady)

OPTS = SolverOptions()
EPI = DynamicsModel.default("epidemic")


def test_epidemic_regular_fixed_point():
    g = gen_regular(40, 4, seed=0)
    x = simulate_full(g, EPI, 0.5)
    # homogeneous fixed point 1 - B/(kR)
    assert np.allclose(x, 0.75, atol=1e-8)
    assert full_residual(g, EPI, x) <= OPTS.steady_tol


def test_absorbing_zero():
    g = gen_barabasi_albert(50, 2, seed=0)
    assert np.all(simulate_full(g, EPI, 0.0) == 0.0)


def test_isolated_regulatory_decays():
    from degreedyn.graph import Graph
    g = Graph(1, np.zeros((0, 2)))
    x = simulate_full(g, DynamicsModel.default("regulatory"), 3.0)
    assert abs(x[0]) <= OPTS.steady_tol


def test_scalar_examples():
    assert solve_scalar_steady(lambda x: -x + 4 * (1 - x) * x, 0.5) == pytest.approx(0.75, abs=1e-9)
    assert abs(solve_scalar_steady(lambda x: -x, 1.0)) <= OPTS.steady_tol
    assert solve_scalar_steady(lambda x: -x + 4 * (1 - x) * x, 0.0) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(1.01, 30), st.floats(1e-3, 1.0))
def test_epidemic_basin(beta, x0):
    x = solve_scalar_steady(lambda x: -x + beta * (1 - x) * x, x0)
    # the stop rule bounds |dx/dt|; the state error is that over the local slope 1 - beta
    assert x == pytest.approx(1 - 1 / beta, abs=1.01 * OPTS.steady_tol / (beta - 1))


@pytest.mark.parametrize("family", ["epidemic", "regulatory", "ecological"])
def test_residual_guarantee_and_determinism(family):
    from degreedyn.dynamics import initial_state
    g = gen_barabasi_albert(200, 3, seed=5)
    m = DynamicsModel.default(family)
    a = simulate_full(g, m, initial_state(m))
    b = simulate_full(g, m, initial_state(m))
    assert np.array_equal(a, b)
    assert full_residual(g, m, a) <= OPTS.steady_tol
    assert np.all(a >= 0)


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_nonconvergence_and_divergence():
    with pytest.raises(NonConvergenceError) as ei:
        solve_scalar_steady(lambda x: 1.0, 0.0, SolverOptions(t_max=1.0))
    assert ei.value.residual == pytest.approx(1.0)
    with pytest.raises(DivergenceError):
        solve_scalar_steady(lambda x: x * x, 1.0, SolverOptions(t_max=1e6))


def test_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(dt_min=1.0, dt_init=0.1)
    with pytest.raises(ValueError):
        SolverOptions(steady_tol=0)


def test_state_file_roundtrip(tmp_path):
    x = np.random.default_rng(0).random(25) * 7
    p = tmp_path / "s.txt"
    save_states(x, p)
    assert np.array_equal(load_states(p), x)
