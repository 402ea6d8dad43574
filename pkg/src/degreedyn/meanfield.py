"""Mean-field kernel: effective state, per-vertex degree and missing-degree formulas."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import defaults as D
from .dynamics import DynamicsModel
from .solver import SolverOptions, solve_scalar_steady, solve_steady_batch

DEGENERACY_FLOOR = D.DEGENERACY_FLOOR


class DegenerateVertexError(ValueError):
    """|g(x_i*, x_eff)| is too small for the degree to be identifiable."""


@dataclass(frozen=True)
class MeanFieldContext:
    beta: float
    x_eff: float


def solve_xeff(model: DynamicsModel, beta: float, init: float,
               opts: SolverOptions = SolverOptions()) -> float:
    """Steady state of ``dx/dt = f(x) + beta g(x, x)`` reached from ``init``."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")

    def rhs(x):
        return model.f(x) + beta * model.g(x, x)

    return solve_scalar_steady(rhs, init, opts)


def degree_closed_form(model: DynamicsModel, xi_star: float, x_eff: float) -> float:
    """-f(x*) / g(x*, x_eff)."""
    return missing_degree(model, xi_star, (), x_eff)


def missing_degree(model: DynamicsModel, xi_star: float, observed_neighbor_states,
                   x_eff: float) -> float:
    g_eff = float(model.g(xi_star, x_eff))
    if abs(g_eff) < DEGENERACY_FLOOR:
        raise DegenerateVertexError(f"|g(x*={xi_star}, x_eff={x_eff})| = {abs(g_eff):.3e}")
    nb = np.asarray(observed_neighbor_states, dtype=float)
    known = float(np.sum(model.g(xi_star, nb))) if nb.size else 0.0
    return -(float(model.f(xi_star)) + known) / g_eff


def missing_degrees(model: DynamicsModel, states: np.ndarray, rows: np.ndarray,
                    cols: np.ndarray, x_eff: float):
    """Vectorised missing-degree formula over all vertices.

    ``rows``/``cols`` list observed directed edges grouped by row. Returns
    ``(d, degenerate_mask)``; degenerate entries of ``d`` are NaN.
    """
    n = len(states)
    known = np.bincount(rows, weights=model.g(states[rows], states[cols]), minlength=n)
    g_eff = model.g(states, x_eff)
    degenerate = ~(np.abs(g_eff) >= DEGENERACY_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = -(model.f(states) + known) / g_eff
    d[degenerate] = np.nan
    return d, degenerate


def enhanced_steady(model: DynamicsModel, candidate_d: float, observed_neighbor_states,
                    x_eff: float, init: float, opts: SolverOptions = SolverOptions()) -> float:
    """Steady state z*(d) of ``dz/dt = f(z) + sum_j g(z, x_j*) + d g(z, x_eff)``."""
    if candidate_d < 0:
        raise ValueError("candidate_d must be >= 0")
    nb = np.asarray(observed_neighbor_states, dtype=float)

    def rhs(z):
        s = float(np.sum(model.g(z, nb))) if nb.size else 0.0
        return model.f(z) + s + candidate_d * model.g(z, x_eff)

    return solve_scalar_steady(rhs, init, opts)


def enhanced_steady_batch(model: DynamicsModel, vertices: np.ndarray, d: np.ndarray,
                          nbr_ptr: np.ndarray, nbr_idx: np.ndarray, states: np.ndarray,
                          x_eff: float, opts: SolverOptions = SolverOptions()):
    """z*(d) for many (vertex, d) pairs at once, each started at its observed state.

    ``nbr_ptr``/``nbr_idx`` are CSR arrays of the observed adjacency.
    Returns ``(z, converged_mask)``.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    d = np.asarray(d, dtype=float)
    counts = nbr_ptr[vertices + 1] - nbr_ptr[vertices]
    elem = np.repeat(np.arange(len(vertices)), counts)
    starts = np.repeat(nbr_ptr[vertices], counts)
    offs = np.arange(len(elem)) - np.repeat(np.cumsum(counts) - counts, counts)
    nb_states = states[nbr_idx[starts + offs]] if len(elem) else np.zeros(0)
    k = len(vertices)

    def rhs(z):
        s = np.bincount(elem, weights=model.g(z[elem], nb_states), minlength=k)
        return model.f(z) + s + d * model.g(z, x_eff)

    return solve_steady_batch(rhs, states[vertices], opts, raise_on_fail=False)
