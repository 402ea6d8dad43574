"""Adamic-Adar and preferential-attachment link prediction with estimated degrees.

Three degree sources are compared:

* naive   -- degrees in the sampled subgraph
* revised -- estimator output (AA additionally scaled by alpha_uv)
* truth   -- true degrees of every vertex whose state is observed

Common neighbourhoods are always taken from the sampled subgraph.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.stats import rankdata

from . import defaults as D
from .dynamics import DynamicsModel
from .estimators import EstimateResult, FixedPointOptions, estimate
from .evaluation import rep_seed, rows_to_csv
from .graph import Graph, degrees, make_rng
from .sampling import SampledSubgraph, fraction_count, sample_edges_uniform
from .solver import SolverOptions

log = logging.getLogger(__name__)

METRICS = ("AA", "PA")
VARIANTS = ("naive", "revised", "truth")


def _aa_weights(deg_source) -> np.ndarray:
    d = np.asarray(deg_source, dtype=float)
    w = np.zeros(len(d))
    big = d > 1
    w[big] = 1.0 / np.log(d[big])
    return w


def aa_score(sub: SampledSubgraph, u: int, v: int, deg_source) -> float:
    """sum over common sampled neighbours w of 1/ln(deg_w); deg_w <= 1 contributes 0."""
    if u == v:
        raise ValueError("u and v must differ")
    common = np.intersect1d(sub.neighbors(u), sub.neighbors(v), assume_unique=True)
    return float(_aa_weights(deg_source)[common].sum())


def pa_score(deg_source, u: int, v: int) -> float:
    if u == v:
        raise ValueError("u and v must differ")
    return float(deg_source[u]) * float(deg_source[v])


def scale_factor(sub: SampledSubgraph, est, u: int, v: int) -> float:
    """min(est_u / sampled_u, est_v / sampled_v); 1 when either sampled degree is 0."""
    delta_hat = est.delta_hat if isinstance(est, EstimateResult) else np.asarray(est)
    ds = sub.degrees()
    if ds[u] == 0 or ds[v] == 0:
        return 1.0
    return float(min(delta_hat[u] / ds[u], delta_hat[v] / ds[v]))


def aa_scores(sub: SampledSubgraph, pairs: np.ndarray, deg_source, alpha=None) -> np.ndarray:
    a = sub.adjacency()
    m = a @ sparse.diags(_aa_weights(deg_source)) @ a
    s = np.asarray(m[pairs[:, 0], pairs[:, 1]]).ravel()
    return s * alpha if alpha is not None else s


def pa_scores(pairs: np.ndarray, deg_source) -> np.ndarray:
    d = np.asarray(deg_source, dtype=float)
    return d[pairs[:, 0]] * d[pairs[:, 1]]


def scale_factors(sub: SampledSubgraph, delta_hat, pairs: np.ndarray) -> np.ndarray:
    ds = sub.degrees().astype(float)
    dh = np.asarray(delta_hat, dtype=float)
    u, v = pairs[:, 0], pairs[:, 1]
    ok = (ds[u] > 0) & (ds[v] > 0)
    alpha = np.ones(len(pairs))
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha[ok] = np.minimum(dh[u[ok]] / ds[u[ok]], dh[v[ok]] / ds[v[ok]])
    return alpha


def auc(positives, negatives, comparisons: int = D.AUC_COMPARISONS, seed=None,
        exact_limit: int = D.AUC_EXACT_LIMIT) -> float:
    """P(random positive outscores random negative), ties counted 1/2."""
    pos = np.asarray(positives, dtype=float)
    neg = np.asarray(negatives, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("auc needs nonempty positive and negative sets")
    if pos.size * neg.size <= exact_limit:
        ranks = rankdata(np.concatenate([pos, neg]))
        u_stat = ranks[:pos.size].sum() - pos.size * (pos.size + 1) / 2.0
        return float(u_stat / (pos.size * neg.size))
    rng = make_rng(seed)
    a = pos[rng.integers(pos.size, size=comparisons)]
    b = neg[rng.integers(neg.size, size=comparisons)]
    return float(np.mean((a > b) + 0.5 * (a == b)))


def sample_non_edges(graph: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform distinct non-adjacent vertex pairs (u < v)."""
    n = graph.n
    total = n * (n - 1) // 2 - graph.m
    count = min(count, total)
    existing = set((graph.edges[:, 0] * n + graph.edges[:, 1]).tolist())
    chosen: dict[int, None] = {}
    while len(chosen) < count:
        k = 2 * (count - len(chosen)) + 16
        u = rng.integers(n, size=k)
        v = rng.integers(n, size=k)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        for a, b in zip(lo.tolist(), hi.tolist()):
            key = a * n + b
            if a != b and key not in existing and key not in chosen:
                chosen[key] = None
                if len(chosen) == count:
                    break
    keys = np.array(list(chosen), dtype=np.int64)
    return np.column_stack([keys // n, keys % n])


def score(metric: str, variant: str, sub: SampledSubgraph, pairs: np.ndarray,
          delta_hat=None, true_deg=None) -> np.ndarray:
    if variant == "naive":
        degs = sub.degrees()
    elif variant == "revised":
        degs = delta_hat
    elif variant == "truth":
        degs = true_deg
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if metric == "PA":
        return pa_scores(pairs, degs)
    if metric == "AA":
        alpha = scale_factors(sub, delta_hat, pairs) if variant == "revised" else None
        return aa_scores(sub, pairs, degs, alpha)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass
class LinkPredReport:
    rows: list
    records: list
    meta: dict

    def csv_text(self) -> str:
        return rows_to_csv(self.rows)

    def auc_of(self, metric: str, variant: str) -> float:
        for r in self.rows:
            if r["metric"] == metric and r["variant"] == variant:
                return r["auc_mean"]
        raise KeyError((metric, variant))


def linkpred_experiment(graph: Graph, states, model: DynamicsModel, p: float = 0.01,
                        estimator: str = "topoplus", metrics=METRICS, variants=VARIANTS,
                        reps: int = 10, seed: int = 0, network: str = "graph",
                        fp: FixedPointOptions = FixedPointOptions(),
                        solver: SolverOptions = SolverOptions(),
                        comparisons: int = D.AUC_COMPARISONS) -> LinkPredReport:
    """Hide ``1 - p`` of the edges, score them against as many non-edges, report mean AUC."""
    if graph.m - fraction_count(p, graph.m) == 0:
        raise ValueError("empty positive set: no held-out edges at this sampling fraction")
    true_deg = degrees(graph)
    states = np.asarray(states, dtype=float)
    known = np.isfinite(states)
    truth_deg = np.where(known, true_deg, 0)
    records = []
    for rep in range(reps):
        sub = sample_edges_uniform(graph, p, rep_seed(seed, rep, 0))
        kept = np.zeros(graph.m, dtype=bool)
        key = graph.edges[:, 0] * graph.n + graph.edges[:, 1]
        kept[np.searchsorted(key, sub.edges[:, 0] * graph.n + sub.edges[:, 1])] = True
        positives = graph.edges[~kept]
        rng = make_rng(rep_seed(seed, rep, 1))
        negatives = sample_non_edges(graph, len(positives), rng)
        try:
            delta_hat = (estimate(estimator, states, sub, model, fp, solver).delta_hat
                         if "revised" in variants else None)
        except Exception as exc:
            log.warning("rep %d: estimator failed: %s", rep, exc)
            records.append({"rep": rep, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for metric in metrics:
            for variant in variants:
                sp = score(metric, variant, sub, positives, delta_hat, truth_deg)
                sn = score(metric, variant, sub, negatives, delta_hat, truth_deg)
                records.append({"rep": rep, "metric": metric, "variant": variant,
                                "auc": auc(sp, sn, comparisons, rep_seed(seed, rep, 2)),
                                "error": ""})
    rows = []
    failures = sum(1 for r in records if r["error"])
    for metric in metrics:
        for variant in variants:
            vals = np.array([r["auc"] for r in records if not r["error"]
                             and r["metric"] == metric and r["variant"] == variant])
            rows.append({"network": network, "metric": metric, "variant": variant,
                         "estimator": estimator, "p": float(p), "repetitions": reps,
                         "completed": len(vals), "failures": failures,
                         "auc_mean": float(vals.mean()) if len(vals) else float("nan"),
                         "auc_std": float(vals.std()) if len(vals) else float("nan")})
    meta = {"n": graph.n, "m": graph.m, "model": model.to_dict(), "seed": seed}
    return LinkPredReport(rows, records, meta)
