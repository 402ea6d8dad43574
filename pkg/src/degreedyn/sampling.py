"""Subgraph samplers (uniform edges, random walk, induced vertices) and state noise."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from . import defaults as D
from .graph import Graph, make_rng


@dataclass(frozen=True, eq=False)
class SampledSubgraph:
    """Observed part of a graph on the full vertex range ``0..n-1``.

    ``observed`` is a boolean mask over all vertices; unobserved vertices have
    sampled degree 0.
    """

    n: int
    edges: np.ndarray
    observed: np.ndarray
    shortfall: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e = np.unique(np.sort(e, axis=1), axis=0) if e.size else e
        obs = np.asarray(self.observed, dtype=bool).copy()
        if len(obs) != self.n:
            raise ValueError("observed mask length must equal n")
        if e.size and not obs[e.ravel()].all():
            raise ValueError("every sampled edge endpoint must be observed")
        e.setflags(write=False)
        obs.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "observed", obs)

    @classmethod
    def empty(cls, n: int) -> "SampledSubgraph":
        return cls(n, np.zeros((0, 2), dtype=np.int64), np.zeros(n, dtype=bool))

    @classmethod
    def from_graph(cls, graph: Graph) -> "SampledSubgraph":
        return cls(graph.n, graph.edges, np.ones(graph.n, dtype=bool))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def observed_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.observed)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)

    def adjacency(self) -> sparse.csr_matrix:
        if "adj" not in self._cache:
            u, v = self.edges[:, 0], self.edges[:, 1]
            a = sparse.csr_matrix(
                (np.ones(2 * len(u)), (np.concatenate([u, v]), np.concatenate([v, u]))),
                shape=(self.n, self.n))
            a.sort_indices()
            self._cache["adj"] = a
        return self._cache["adj"]

    def directed_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.adjacency()
        rows = np.repeat(np.arange(self.n), np.diff(a.indptr))
        return rows, a.indices.astype(np.int64)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency()
        return a.indices[a.indptr[i]:a.indptr[i + 1]]


def fraction_count(p: float, total: int) -> int:
    """round-half-up of ``p * total``."""
    return int(math.floor(p * total + 0.5))


def _check_fraction(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {p}")


def _from_edge_ids(graph: Graph, ids, shortfall=False) -> SampledSubgraph:
    e = graph.edges[np.sort(np.asarray(ids, dtype=np.int64))]
    obs = np.zeros(graph.n, dtype=bool)
    obs[e.ravel()] = True
    return SampledSubgraph(graph.n, e, obs, shortfall=shortfall)


def sample_edges_uniform(graph: Graph, p: float, seed=None) -> SampledSubgraph:
    _check_fraction(p)
    k = fraction_count(p, graph.m)
    rng = make_rng(seed)
    return _from_edge_ids(graph, rng.choice(graph.m, size=k, replace=False))


def sample_random_walk(graph: Graph, p: float, seed=None, budget_factor: int = D.RW_BUDGET_FACTOR,
                       max_walks: int = D.RW_MAX_WALKS) -> SampledSubgraph:
    """Collect edges traversed by a simple random walk.

    Each walk starts at a uniform vertex and runs for at most
    ``budget_factor * m`` steps; a walk that lands on an isolated vertex or
    exhausts its budget restarts elsewhere. After ``max_walks`` walks the
    sample is returned with ``shortfall=True``.
    """
    _check_fraction(p)
    if graph.m == 0:
        raise ValueError("random-walk sampling needs at least one edge")
    target = fraction_count(p, graph.m)
    if target == 0:
        return SampledSubgraph.empty(graph.n)
    rng = make_rng(seed)
    a = graph.adjacency()
    indptr, nbrs = a.indptr, a.indices
    # edge id of each CSR slot so traversals map back to graph.edges rows
    rows, cols = graph.directed_pairs()
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    slot_edge = np.searchsorted(graph.edges[:, 0] * graph.n + graph.edges[:, 1], lo * graph.n + hi)
    got: dict[int, None] = {}
    budget = budget_factor * graph.m
    for _ in range(max_walks):
        v = int(rng.integers(graph.n))
        steps = 0
        while steps < budget and len(got) < target:
            deg = indptr[v + 1] - indptr[v]
            if deg == 0:
                break
            slot = indptr[v] + int(rng.integers(deg))
            got.setdefault(int(slot_edge[slot]), None)
            v = int(nbrs[slot])
            steps += 1
        if len(got) >= target:
            return _from_edge_ids(graph, list(got))
    return _from_edge_ids(graph, list(got), shortfall=True)


def sample_induced(graph: Graph, q: float, seed=None) -> SampledSubgraph:
    _check_fraction(q)
    k = fraction_count(q, graph.n)
    rng = make_rng(seed)
    chosen = np.zeros(graph.n, dtype=bool)
    chosen[rng.choice(graph.n, size=k, replace=False)] = True
    keep = chosen[graph.edges[:, 0]] & chosen[graph.edges[:, 1]]
    return SampledSubgraph(graph.n, graph.edges[keep], chosen)


SAMPLERS = {
    "uniform": sample_edges_uniform,
    "random_walk": sample_random_walk,
    "induced": sample_induced,
}


def add_state_noise(states, sigma: float, seed=None) -> np.ndarray:
    """Multiplicative Gaussian noise ``max(0, x (1 + eps))``, eps ~ N(0, sigma)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    x = np.asarray(states, dtype=float)
    if sigma == 0:
        return x.copy()
    eps = make_rng(seed).normal(0.0, sigma, size=x.shape)
    return np.maximum(x * (1.0 + eps), 0.0)


def save_subgraph(sub: SampledSubgraph, edge_path, vertex_path) -> None:
    with open(edge_path, "w") as fh:
        for u, v in sub.edges:
            fh.write(f"{u} {v}\n")
    with open(vertex_path, "w") as fh:
        fh.write(f"# n={sub.n}\n")
        for v in sub.observed_vertices:
            fh.write(f"{v}\n")


def load_subgraph(edge_path, vertex_path, n: int | None = None) -> SampledSubgraph:
    verts = []
    with open(vertex_path) as fh:
        for line in fh:
            s = line.strip()
            if s.startswith("# n="):
                n = n if n is not None else int(s[4:])
            elif s and not s.startswith("#"):
                verts.append(int(s))
    edges = []
    with open(edge_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.split()
            if len(tok) != 2:
                raise ValueError(f"{edge_path}:{lineno}: expected 2 tokens")
            edges.append((int(tok[0]), int(tok[1])))
    if n is None:
        raise ValueError("vertex count unknown: pass n or include a '# n=' header")
    obs = np.zeros(n, dtype=bool)
    obs[np.array(verts, dtype=np.int64)] = True
    return SampledSubgraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), obs)
