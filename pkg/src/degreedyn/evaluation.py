"""Accuracy metrics and the repetition harness for sampling / noise / misspecification grids."""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from . import defaults as D
from .dynamics import DynamicsModel, initial_state, perturb_params
from .estimators import EstimateResult, FixedPointOptions, estimate
from .graph import (Graph, degrees, gen_barabasi_albert, gen_erdos_renyi, gen_regular,
                    load_edge_list)
from .sampling import SAMPLERS, SampledSubgraph, add_state_noise
from .solver import SolverOptions, simulate_full

log = logging.getLogger(__name__)


def relative_error(true_deg, est_deg):
    """|ln(est / true)|."""
    t = np.asarray(true_deg, dtype=float)
    e = np.asarray(est_deg, dtype=float)
    if np.any(t <= 0) or np.any(e <= 0):
        raise ValueError("relative_error needs positive degrees")
    out = np.abs(np.log(e / t))
    return float(out) if out.ndim == 0 else out


def accuracy(true_degs, est_degs, threshold: float = D.ACCURACY_THRESHOLD, mask=None, failed=None) -> float:
    """Fraction of eligible vertices whose estimate is within ``threshold`` in |ln ratio|.

    Vertices with true degree 0 are not eligible. Estimates <= 0 and vertices
    flagged in ``failed`` count as misses.
    """
    t = np.asarray(true_degs, dtype=float)
    e = np.asarray(est_degs, dtype=float)
    if t.shape != e.shape:
        raise ValueError("true and estimated degree arrays differ in length")
    eligible = t >= 1
    if mask is not None:
        eligible &= np.asarray(mask, dtype=bool)
    if not eligible.any():
        raise ValueError("no eligible vertices for accuracy")
    te, ee = t[eligible], e[eligible]
    ok = ee > 0
    hit = np.zeros(len(te), dtype=bool)
    hit[ok] = np.abs(np.log(ee[ok] / te[ok])) <= threshold
    if failed is not None:
        hit &= ~np.asarray(failed, dtype=bool)[eligible]
    return float(hit.mean())


# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    graph: dict
    dynamics: dict
    fractions: list = field(default_factory=lambda: [0.1])
    sampler: str = "uniform"
    sigmas: list = field(default_factory=lambda: [0.0])
    misspec: list = field(default_factory=lambda: [{}])
    estimators: list = field(default_factory=lambda: ["zerotopo", "topoplus", "round"])
    repetitions: int = 10
    seed: int = 0
    threshold: float = D.ACCURACY_THRESHOLD
    x0: float | None = None
    solver: dict = field(default_factory=dict)
    fixed_point: dict = field(default_factory=dict)
    cache_dir: str | None = None
    per_vertex: bool = False

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for name in ("fractions", "sigmas", "misspec", "estimators"):
            if not getattr(self, name):
                raise ValueError(f"{name} grid must be nonempty")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"unknown sampler {self.sampler!r}")
        # validate nested records eagerly
        self.model()
        self.solver_options()
        self.fp_options()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def model(self) -> DynamicsModel:
        return DynamicsModel.from_dict(self.dynamics)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(**self.solver)

    def fp_options(self) -> FixedPointOptions:
        return FixedPointOptions(**self.fixed_point)


def build_graph(spec: dict) -> Graph:
    spec = dict(spec)
    if "path" in spec:
        return load_edge_list(spec["path"])
    kind = spec.pop("generator")
    seed = spec.pop("seed", 0)
    if kind == "ba":
        return gen_barabasi_albert(spec["n"], spec["attach"], seed)
    if kind == "er":
        return gen_erdos_renyi(spec["n"], spec["m"], seed)
    if kind == "regular":
        return gen_regular(spec["n"], spec["k"], seed)
    raise ValueError(f"unknown graph generator {kind!r}")


def ground_truth(graph: Graph, model: DynamicsModel, x0=None, solver=SolverOptions(),
                 cache_dir=None) -> np.ndarray:
    """Simulated steady state, cached on disk by a content hash when ``cache_dir`` is set."""
    x0 = initial_state(model) if x0 is None else x0
    path = None
    if cache_dir:
        h = hashlib.sha256()
        h.update(np.int64(graph.n).tobytes())
        h.update(graph.edges.tobytes())
        h.update(json.dumps([model.to_dict(), float(x0), asdict(solver)], sort_keys=True).encode())
        path = os.path.join(cache_dir, f"steady-{h.hexdigest()[:24]}.npy")
        if os.path.exists(path):
            return np.load(path)
    x = simulate_full(graph, model, x0, solver)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        np.save(path, x)
    return x


# ---------------------------------------------------------------- harness


def rep_seed(base: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(base), *map(int, keys)])


@dataclass
class Report:
    rows: list
    records: list
    config: dict
    meta: dict

    def csv_text(self) -> str:
        return rows_to_csv(self.rows)

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.csv_text())
        if json_path:
            with open(json_path, "w") as fh:
                json.dump({"config": self.config, "meta": self.meta, "records": self.records},
                          fh, indent=1, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def rows_to_csv(rows: list) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in row.items()})
    return buf.getvalue()


def _misspec_label(spec: dict) -> str:
    return ";".join(f"{k}={v:+g}" for k, v in sorted(spec.items())) or "none"


_WORKER: dict = {}


def _init_worker(state):
    _WORKER.clear()
    _WORKER.update(state)


def _run_task(task):
    (fi, frac), (si, sigma), (mi, mis), rep = task
    w = _WORKER
    cfg: ExperimentConfig = w["config"]
    graph, true_deg, truth = w["graph"], w["true_deg"], w["states"]
    solver, fp = w["solver"], w["fp"]
    sampler = SAMPLERS[cfg.sampler]
    sub = sampler(graph, frac, rep_seed(cfg.seed, rep, fi, 0))
    states = add_state_noise(truth, sigma, rep_seed(cfg.seed, rep, 1))
    induced = cfg.sampler == "induced"
    if induced:
        states = np.where(sub.observed, states, np.nan)
    scope = sub.observed if induced else np.ones(graph.n, dtype=bool)
    model = perturb_params(w["model"], mis) if mis else w["model"]
    out = []
    prior = None
    for name in cfg.estimators:
        rec = {"fraction": frac, "sigma": sigma, "misspec": _misspec_label(mis),
               "rep": rep, "estimator": name}
        try:
            if name == "round":
                res = estimate("round", states, sub, model, fp, solver, prior=prior)
            else:
                res = estimate(name, states, sub, model, fp, solver)
                if name == "topoplus":
                    prior = res
            rec.update(_score(res, true_deg, scope, sub, cfg.threshold))
            if cfg.per_vertex:
                rec["delta_hat"] = res.delta_hat.tolist()
            rec["error"] = ""
        except Exception as exc:  # recorded per cell; never aborts the grid
            rec.update(accuracy=float("nan"), accuracy_observed=float("nan"),
                       inestimable=0, converged=False, iterations=0,
                       error=f"{type(exc).__name__}: {exc}")
        out.append(rec)
    return out


def _score(res: EstimateResult, true_deg, scope, sub: SampledSubgraph, threshold):
    acc = accuracy(true_deg, res.delta_hat, threshold, mask=scope, failed=res.inestimable)
    obs = scope & sub.observed
    acc_obs = (accuracy(true_deg, res.delta_hat, threshold, mask=obs, failed=res.inestimable)
               if np.any(obs & (true_deg >= 1)) else float("nan"))
    return {"accuracy": acc, "accuracy_observed": acc_obs,
            "inestimable": int(res.inestimable.sum()), "converged": bool(res.converged),
            "iterations": int(res.iterations)}


def aggregate(records: list, config: ExperimentConfig) -> list:
    rows = []
    keyf = lambda r: (r["fraction"], r["sigma"], r["misspec"], r["estimator"])
    order = []
    groups: dict = {}
    for r in records:
        k = keyf(r)
        if k not in groups:
            groups[k] = []
            order.append(k)
        groups[k].append(r)
    for k in order:
        rs = groups[k]
        ok = [r for r in rs if not r["error"]]
        acc = np.array([r["accuracy"] for r in ok], dtype=float)
        obs = np.array([r["accuracy_observed"] for r in ok], dtype=float)
        rows.append({
            "estimator": k[3], "sampler": config.sampler, "fraction": float(k[0]),
            "sigma": float(k[1]), "misspec": k[2], "repetitions": len(rs),
            "completed": len(ok), "failures": len(rs) - len(ok),
            "accuracy_mean": float(acc.mean()) if len(ok) else float("nan"),
            "accuracy_std": float(acc.std()) if len(ok) else float("nan"),
            "accuracy_observed_mean": float(np.nanmean(obs)) if len(ok) and np.isfinite(obs).any() else float("nan"),
            "inestimable_mean": float(np.mean([r["inestimable"] for r in ok])) if ok else float("nan"),
            "converged_rate": float(np.mean([r["converged"] for r in ok])) if ok else float("nan"),
            "iterations_mean": float(np.mean([r["iterations"] for r in ok])) if ok else float("nan"),
        })
    return rows


def run_experiment(config: ExperimentConfig, jobs: int = 1, graph: Graph | None = None,
                   states=None) -> Report:
    """Run every (fraction, sigma, misspecification) cell for ``repetitions`` reps.

    Each repetition draws one subgraph and one noise realisation and feeds
    them to every estimator. Output is identical for any ``jobs``.
    """
    t0 = time.perf_counter()
    graph = graph if graph is not None else build_graph(config.graph)
    model = config.model()
    solver, fp = config.solver_options(), config.fp_options()
    if states is None:
        states = ground_truth(graph, model, config.x0, solver, config.cache_dir)
    t_sim = time.perf_counter() - t0
    shared = {"config": config, "graph": graph, "true_deg": degrees(graph),
              "states": np.asarray(states, dtype=float), "model": model,
              "solver": solver, "fp": fp}
    tasks = list(itertools.product(enumerate(config.fractions), enumerate(config.sigmas),
                                   enumerate(config.misspec), range(config.repetitions)))
    if jobs <= 1:
        _init_worker(shared)
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(shared,)) as ex:
            results = list(ex.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    records = [r for batch in results for r in batch]
    rows = aggregate(records, config)
    meta = {"version": __version__, "n": graph.n, "m": graph.m,
            "seconds_total": time.perf_counter() - t0, "seconds_simulation": t_sim,
            "jobs": jobs, "dynamics": model.to_dict(),
            "solver": asdict(solver), "fixed_point": asdict(fp)}
    return Report(rows, records, config.to_dict(), meta)
