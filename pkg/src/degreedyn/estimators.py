"""Degree estimators: ZeroTopo, TopoPlus and the Round integer refinement.

States are a length-``n`` array; NaN marks a vertex whose state was not
observed (induced-subgraph regime). Only vertices with a finite state are
estimated, and beta / x_eff are fitted self-consistently from those alone.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from . import defaults as D
from .dynamics import DynamicsModel
from .graph import beta_index
from .meanfield import enhanced_steady_batch, missing_degrees, solve_xeff
from .sampling import SampledSubgraph
from .solver import SolverOptions, SteadyStateError

log = logging.getLogger(__name__)


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FixedPointOptions:
    fp_tol: float = D.FP_TOL
    max_iters: int = D.MAX_ITERS
    damping: float = D.DAMPING
    round_max_sweeps: int = D.ROUND_MAX_SWEEPS
    round_cycle_window: int = D.ROUND_CYCLE_WINDOW
    dead_tol: float = D.DEAD_TOL

    def __post_init__(self):
        if not self.fp_tol > 0:
            raise ValueError("fp_tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class EstimateResult:
    """Output of an estimator.

    ``delta_real``/``d_real`` are the continuous fixed-point values;
    ``delta_hat``/``d`` the integer estimates after rounding and flooring.
    Vertices outside ``scope`` (no observed state) carry their sampled degree.
    """

    method: str
    delta_real: np.ndarray
    d_real: np.ndarray
    delta_hat: np.ndarray
    d: np.ndarray
    sampled_degrees: np.ndarray
    scope: np.ndarray
    inestimable: np.ndarray
    x_eff: float
    beta: float
    iterations: int
    converged: bool
    clamped: int = 0
    history: list = field(default_factory=list)

    @property
    def inestimable_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.inestimable)


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def _dead_mask(model: DynamicsModel, x: np.ndarray, known: np.ndarray, tol: float):
    if not model.has_absorbing_zero:
        return np.zeros_like(known)
    return known & (x <= tol)


def _degree_floor(ds, dead, scope):
    """Lowest admissible integer degree per vertex."""
    lo = np.where(dead, ds, np.maximum(ds, 1))
    return np.where(scope, lo, ds)


class _FixedPoint:
    """Shared (beta, x_eff) <-> degree iteration behind ZeroTopo and TopoPlus."""

    def __init__(self, states, sub: SampledSubgraph | None, model: DynamicsModel,
                 fp: FixedPointOptions, solver: SolverOptions):
        states = np.asarray(states, dtype=float)
        if states.ndim != 1 or states.size == 0:
            raise ValueError("states must be a nonempty 1-D array")
        known = np.isfinite(states)
        if np.any(states[known] < 0):
            raise ValueError("states must be nonnegative")
        if not known.any():
            raise ValueError("no observed states")
        n = len(states)
        self.sub = sub if sub is not None else SampledSubgraph.empty(n)
        if self.sub.n != n:
            raise ValueError(f"subgraph has n={self.sub.n}, states have {n}")
        self.model, self.fp, self.solver = model, fp, solver
        self.known = known
        self.x = np.where(known, states, 0.0)
        self.ds = self.sub.degrees()
        rows, cols = self.sub.directed_pairs()
        keep = known[rows] & known[cols]
        self.rows, self.cols = rows[keep], cols[keep]
        self.dead = _dead_mask(model, self.x, known, fp.dead_tol)
        self.live = known & ~self.dead
        self.init = float(np.mean(self.x[known]))
        self.clamped = 0

    def degrees_at(self, x_eff: float):
        """(delta, d, degenerate) with dead vertices at d = 0 and negatives clamped."""
        d, degen = missing_degrees(self.model, self.x, self.rows, self.cols, x_eff)
        degen &= self.live
        neg = self.live & ~degen & (d < 0)
        self.clamped = int(neg.sum())
        d = np.where(self.live & ~degen, np.maximum(d, 0.0), 0.0)
        return self.ds + d, d, degen

    def beta_of(self, delta, degen) -> float:
        use = self.known & ~degen
        if not np.any(delta[use] > 0):
            raise EstimationError("all estimated degrees are zero; beta undefined")
        return beta_index(delta[use])

    def xeff_of(self, beta: float) -> float:
        return solve_xeff(self.model, beta, self.init, self.solver)

    def usable(self, x_eff: float) -> bool:
        if not self.live.any():
            return False
        _, _, degen = self.degrees_at(x_eff)
        return bool(np.any(self.live & ~degen)) and x_eff > self.fp.dead_tol

    def run(self, method: str, warm_start: bool) -> EstimateResult:
        fp = self.fp
        n = len(self.x)
        if not self.live.any():
            # every observed vertex sits at the absorbing zero state
            return self._finish(method, self.ds.astype(float), np.zeros(n),
                                np.zeros(n, dtype=bool), self.init, float("nan"), 0, True)
        if warm_start:
            x_eff = self.init
            delta, d, degen = self.degrees_at(x_eff)
            if not np.any(self.live & ~degen):
                raise EstimationError("all vertices degenerate at the initial x_eff")
        else:
            delta, d, degen = self.ds.astype(float), np.zeros(n), np.zeros(n, dtype=bool)
        history = []
        beta_prev = x_prev = None
        signs: deque = deque(maxlen=3)
        damped = False
        converged = False
        it = 0
        for it in range(1, fp.max_iters + 1):
            beta = self.beta_of(delta, degen)
            if beta_prev is not None:
                step = beta - beta_prev
                signs.append(np.sign(step))
                if not damped and len(signs) == 3 and signs[0] == -signs[1] == signs[2] != 0:
                    damped = True
                    log.debug("damping beta updates after oscillation at iteration %d", it)
                if damped:
                    beta = beta_prev + fp.damping * step
            x_eff = self.xeff_of(beta)
            delta, d, degen = self.degrees_at(x_eff)
            if not np.any(self.live & ~degen):
                raise EstimationError("all vertices degenerate")
            history.append((beta, x_eff))
            if beta_prev is not None and _rel(beta, beta_prev) <= fp.fp_tol \
                    and _rel(x_eff, x_prev) <= fp.fp_tol:
                converged = True
                break
            beta_prev, x_prev = beta, x_eff
        if not converged:
            log.warning("%s did not converge in %d iterations", method, fp.max_iters)
        res = self._finish(method, delta, d, degen, x_eff, beta, it, converged)
        res.history = history
        return res

    def _finish(self, method, delta, d, degen, x_eff, beta, iters, converged):
        scope = self.known
        floor = _degree_floor(self.ds, self.dead, scope)
        d_int = round_half_away(d)
        delta_hat = np.maximum(self.ds + d_int, floor)
        delta_hat = np.where(scope & ~degen, delta_hat, np.where(scope, floor, self.ds))
        return EstimateResult(
            method=method,
            delta_real=np.where(scope, delta, np.nan),
            d_real=np.where(scope, d, np.nan),
            delta_hat=delta_hat.astype(np.int64),
            d=(delta_hat - self.ds).astype(np.int64),
            sampled_degrees=self.ds,
            scope=scope,
            inestimable=degen & scope,
            x_eff=float(x_eff),
            beta=float(beta),
            iterations=iters,
            converged=converged,
            clamped=self.clamped,
        )


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def zero_topo(states, model: DynamicsModel, opts: FixedPointOptions = FixedPointOptions(),
              solver: SolverOptions = SolverOptions()) -> EstimateResult:
    """Degrees from steady states alone, with no observed topology."""
    return _FixedPoint(states, None, model, opts, solver).run("zerotopo", warm_start=True)


def topo_plus(states, sub: SampledSubgraph | None, model: DynamicsModel,
              opts: FixedPointOptions = FixedPointOptions(),
              solver: SolverOptions = SolverOptions()) -> EstimateResult:
    """Sampled degree plus a mean-field estimate of the missing degree.

    Iteration starts from the sampled degrees. When they cannot seed a usable
    mean field (no sampled edges, or beta so small that x_eff collapses to the
    dead state) the ZeroTopo warm start is used instead, which makes an empty
    subgraph reproduce :func:`zero_topo` exactly.
    """
    fpit = _FixedPoint(states, sub, model, opts, solver)
    warm = True
    if fpit.sub.m > 0 and fpit.live.any():
        try:
            delta0 = fpit.ds.astype(float)
            beta0 = fpit.beta_of(delta0, np.zeros(len(delta0), dtype=bool))
            warm = not fpit.usable(fpit.xeff_of(beta0))
        except (EstimationError, SteadyStateError):
            warm = True
    return fpit.run("topoplus", warm_start=warm)


def state_error(z, x):
    """|ln(z/x)| when both are positive, |z - x| otherwise."""
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    pos = (z > 0) & (x > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.abs(np.log(z / x))
    return np.where(pos, lr, np.abs(z - x))


def round_refine(states, sub: SampledSubgraph | None, result: EstimateResult,
                 model: DynamicsModel, opts: FixedPointOptions = FixedPointOptions(),
                 solver: SolverOptions = SolverOptions()) -> EstimateResult:
    """Integer refinement of missing degrees by paired +1/-1 moves.

    Each sweep scores moving ``d_i`` up or down by the change in
    ``|ln z_i*(d_i) / x_i*|``, pairs improving increments with improving
    decrements (most negative gain first), settles vertices that improve
    either way by the larger gain, then refits beta and x_eff.
    """
    fpit = _FixedPoint(states, sub, model, opts, solver)
    x = fpit.x
    ds = fpit.ds
    n = len(x)
    a = fpit.sub.adjacency()
    # drop observed edges to vertices with unknown state
    ptr, idx = _known_csr(a, fpit.known)
    floor = _degree_floor(ds, fpit.dead, fpit.known)
    lower_d = floor - ds
    movable = fpit.live & ~result.inestimable
    d = np.maximum(np.asarray(result.d, dtype=np.int64), lower_d)
    x_eff = result.x_eff
    beta = result.beta
    memo: dict[tuple[int, int], float] = {}
    seen = deque([d.tobytes()], maxlen=opts.round_cycle_window)
    verts = np.flatnonzero(movable)
    converged = False
    unsolved = 0
    sweeps = 0
    history = []

    def eps_of(vs, ds_):
        missing = [(int(v), int(k)) for v, k in zip(vs, ds_) if (int(v), int(k)) not in memo]
        if missing:
            mv = np.array([m[0] for m in missing], dtype=np.int64)
            md = np.array([m[1] for m in missing], dtype=float)
            z, ok = enhanced_steady_batch(model, mv, md, ptr, idx, x, x_eff, solver)
            nonlocal unsolved
            unsolved += int((~ok).sum())
            for (v, k), zz in zip(missing, z):
                memo[(v, k)] = zz
        z = np.array([memo[(int(v), int(k))] for v, k in zip(vs, ds_)])
        return state_error(z, x[vs])

    for sweeps in range(1, opts.round_max_sweeps + 1):
        dv = d[verts]
        e0 = eps_of(verts, dv)
        q_plus = eps_of(verts, dv + 1) - e0
        q_minus = np.full(len(verts), np.inf)
        can_dec = dv - 1 >= lower_d[verts]
        if can_dec.any():
            q_minus[can_dec] = eps_of(verts[can_dec], dv[can_dec] - 1) - e0[can_dec]
        ip = q_plus <= 0
        im = q_minus <= 0
        both = ip & im
        ip &= ~both
        im &= ~both
        new_d = d.copy()
        plus = np.flatnonzero(ip)
        minus = np.flatnonzero(im)
        plus = plus[np.lexsort((verts[plus], q_plus[plus]))]
        minus = minus[np.lexsort((verts[minus], q_minus[minus]))]
        npair = min(len(plus), len(minus))
        new_d[verts[plus[:npair]]] += 1
        new_d[verts[minus[:npair]]] -= 1
        for k in np.flatnonzero(both):
            if abs(q_plus[k]) > abs(q_minus[k]):
                new_d[verts[k]] += 1
            elif abs(q_plus[k]) < abs(q_minus[k]):
                new_d[verts[k]] -= 1
        delta_star = ds + new_d
        use = fpit.known & ~result.inestimable
        beta = beta_index(delta_star[use])
        new_xeff = fpit.xeff_of(beta)
        if new_xeff != x_eff:
            memo.clear()
            x_eff = new_xeff
        history.append((beta, x_eff, int(npair), int(both.sum())))
        if np.array_equal(new_d, d):
            converged = True
            break
        d = new_d
        key = d.tobytes()
        if key in seen:
            log.info("round_refine stopped on a cycle after %d sweeps", sweeps)
            break
        seen.append(key)
    if unsolved:
        log.warning("round_refine: %d enhanced steady-state solves hit t_max", unsolved)
    delta_hat = np.where(fpit.known, ds + d, result.delta_hat)
    return replace(
        result,
        method=result.method + "+round",
        delta_hat=delta_hat.astype(np.int64),
        d=(delta_hat - ds).astype(np.int64),
        x_eff=float(x_eff),
        beta=float(beta),
        iterations=sweeps,
        converged=converged,
        history=history,
    )


def _known_csr(a, known):
    rows = np.repeat(np.arange(a.shape[0]), np.diff(a.indptr))
    keep = known[rows] & known[a.indices]
    counts = np.bincount(rows[keep], minlength=a.shape[0])
    ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return ptr, a.indices[keep].astype(np.int64)


ESTIMATORS = ("zerotopo", "topoplus", "round")


def estimate(name: str, states, sub, model, opts=FixedPointOptions(), solver=SolverOptions(),
             prior: EstimateResult | None = None) -> EstimateResult:
    """Run an estimator by name; ``round`` runs TopoPlus first unless ``prior`` is given."""
    if name == "zerotopo":
        return zero_topo(states, model, opts, solver)
    if name == "topoplus":
        return topo_plus(states, sub, model, opts, solver)
    if name == "round":
        base = prior if prior is not None else topo_plus(states, sub, model, opts, solver)
        return round_refine(states, sub, base, model, opts, solver)
    raise ValueError(f"unknown estimator {name!r}; choose from {ESTIMATORS}")
