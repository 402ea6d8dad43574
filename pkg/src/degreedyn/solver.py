"""Steady-state integration.

Both the coupled network system and batches of independent scalar ODEs are
integrated with classical RK4 under step doubling: a full step is compared
against two half steps, and the step is accepted when the discrepancy is small
relative to the predicted displacement ``dt * |dx/dt|`` at the start of the
step. Past RK4's stability limit the discrepancy outgrows that prediction, so
the rule rejects unstable steps at any distance from equilibrium, where an
absolute local-error bound would let them through once the state is within
the tolerance of a fixed point.

"Steady" means the residual max|dx/dt| is below ``steady_tol``, which can be
re-checked independently on the returned state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import defaults as D
from .dynamics import DynamicsModel
from .graph import Graph


class SteadyStateError(RuntimeError):
    def __init__(self, msg: str, residual: float = float("nan")):
        super().__init__(msg)
        self.residual = residual


class NonConvergenceError(SteadyStateError):
    pass


class DivergenceError(SteadyStateError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    steady_tol: float = D.STEADY_TOL
    t_max: float = D.T_MAX
    dt_init: float = D.DT_INIT
    dt_min: float = D.DT_MIN
    dt_max: float = D.DT_MAX
    step_rtol: float = D.STEP_RTOL
    overflow: float = D.OVERFLOW

    def __post_init__(self):
        if not self.steady_tol > 0:
            raise ValueError("steady_tol must be > 0")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")


def residual(rhs_val: np.ndarray, x: np.ndarray) -> np.ndarray:
    """|dx/dt| with the x >= 0 boundary treated as absorbing."""
    r = np.where(x <= 0.0, np.maximum(rhs_val, 0.0), rhs_val)
    return np.abs(r)


def _rk4(rhs, x, dt, k1):
    # stages are evaluated on the physical domain x >= 0
    k2 = rhs(np.maximum(x + 0.5 * dt * k1, 0.0))
    k3 = rhs(np.maximum(x + 0.5 * dt * k2, 0.0))
    k4 = rhs(np.maximum(x + dt * k3, 0.0))
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_to_steady(rhs: Callable[[np.ndarray], np.ndarray], x0,
                        opts: SolverOptions = SolverOptions(), coupled: bool = True,
                        raise_on_fail: bool = True):
    """Integrate ``dx/dt = rhs(x)`` from ``x0`` until the residual is below tolerance.

    With ``coupled=False`` the components are independent ODEs: each one keeps
    its own clock and step size and is frozen once steady. Returns
    ``(x, converged_mask)``; failures raise unless ``raise_on_fail`` is false.
    """
    x = np.maximum(np.array(x0, dtype=float, copy=True), 0.0)
    n = x.size
    r = rhs(x)
    res = residual(r, x)
    t = np.zeros(n)
    dt = np.full(n, opts.dt_init)
    floor = 1e-15
    while True:
        active = res > opts.steady_tol
        if coupled:
            if not active.any():
                break
            active = np.ones(n, dtype=bool)
        elif not active.any():
            break
        timed_out = active & (t >= opts.t_max)
        if timed_out.any():
            if raise_on_fail:
                raise NonConvergenceError(
                    f"no steady state within t_max={opts.t_max}; residual {res.max():.3e}",
                    float(res.max()))
            active &= ~timed_out
            if not active.any():
                break
        h = dt[:, None] if x.ndim > 1 else dt
        y_full = _rk4(rhs, x, h, r)
        y_mid = _rk4(rhs, x, 0.5 * h, r)
        y_half = _rk4(rhs, y_mid, 0.5 * h, rhs(np.maximum(y_mid, 0.0)))
        err = np.abs(y_half - y_full) / 15.0
        move = dt * np.abs(r)
        if coupled:
            thr = opts.step_rtol * move.max() + floor * (1.0 + np.abs(x).max())
            ok_scalar = err.max() <= thr or dt[0] <= opts.dt_min
            ok = np.full(n, ok_scalar)
            grow = np.full(n, ok_scalar and err.max() <= thr / 16.0)
        else:
            thr = opts.step_rtol * move + floor * (1.0 + np.abs(x))
            ok = (err <= thr) | (dt <= opts.dt_min)
            grow = ok & (err <= thr / 16.0)
        ok &= active
        bad = active & ~ok
        if not np.all(np.isfinite(y_half[ok])) or np.any(np.abs(y_half[ok]) > opts.overflow):
            raise DivergenceError("state exceeded overflow guard", float("inf"))
        x = np.where(ok, np.maximum(y_half, 0.0), x)
        t = np.where(ok, t + dt, t)
        dt = np.where(grow & active, np.minimum(2.0 * dt, opts.dt_max), dt)
        dt = np.where(bad, np.maximum(0.5 * dt, opts.dt_min), dt)
        r = rhs(x)
        res = residual(r, x)
    converged = res <= opts.steady_tol
    return x, converged


def simulate_full(graph: Graph, model: DynamicsModel, x0, opts: SolverOptions = SolverOptions()):
    """Ground-truth steady state of the coupled network dynamics."""
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (graph.n,))
    rows, cols = graph.directed_pairs()

    def rhs(x):
        return model.rhs_full(x, rows, cols)

    x, _ = integrate_to_steady(rhs, x0, opts, coupled=True)
    return x


def solve_scalar_steady(rhs: Callable[[float], float], x0: float,
                        opts: SolverOptions = SolverOptions()) -> float:
    """Steady state of a scalar ODE reached by integrating from ``x0``."""
    def vec(x):
        return np.asarray(rhs(x[0]), dtype=float).reshape(1)

    x, _ = integrate_to_steady(vec, np.array([float(x0)]), opts, coupled=True)
    return float(x[0])


def solve_steady_batch(rhs: Callable[[np.ndarray], np.ndarray], x0,
                       opts: SolverOptions = SolverOptions(), raise_on_fail: bool = True):
    """Steady states of many independent scalar ODEs (elementwise ``rhs``)."""
    return integrate_to_steady(rhs, x0, opts, coupled=False, raise_on_fail=raise_on_fail)


def full_residual(graph: Graph, model: DynamicsModel, x) -> float:
    rows, cols = graph.directed_pairs()
    x = np.asarray(x, dtype=float)
    return float(residual(model.rhs_full(x, rows, cols), x).max())


# ---------------------------------------------------------------- state files

def format_states(x) -> str:
    return "".join(f"{i} {v:.17g}\n" for i, v in enumerate(np.asarray(x, dtype=float)))


def save_states(x, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_states(x))


def load_states(path, n: int | None = None) -> np.ndarray:
    """Read ``vertex_id value`` lines; ids absent from the file become NaN."""
    ids, vals = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.split()
            if len(tok) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'vertex_id value'")
            ids.append(int(tok[0]))
            vals.append(float(tok[1]))
    size = n if n is not None else (max(ids) + 1 if ids else 0)
    out = np.full(size, np.nan)
    out[np.array(ids, dtype=np.int64)] = vals
    return out
