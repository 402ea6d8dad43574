"""Undirected simple graphs, edge-list I/O, synthetic generators and degree statistics.

Generators draw from numpy's PCG64 bit generator seeded with a 64-bit integer,
so a (parameters, seed) pair reproduces the same graph on every platform.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy import sparse


class EdgeListError(ValueError):
    """Malformed or empty edge-list input."""


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``edges`` is an ``(m, 2)`` int array with ``u < v`` in every row, sorted
    lexicographically. ``id_map[i]`` is the original label of vertex ``i``
    when the graph came from a file.
    """

    n: int
    edges: np.ndarray
    id_map: tuple | None = None
    self_loops_dropped: int = 0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge endpoint outside 0..n-1")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], **kw) -> "Graph":
        return cls(n, np.array(list(edges), dtype=np.int64).reshape(-1, 2), **kw)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 CSR adjacency matrix with sorted column indices."""
        if "adj" not in self._cache:
            u, v = self.edges[:, 0], self.edges[:, 1]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            a = sparse.csr_matrix(
                (np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n)
            )
            a.sort_indices()
            self._cache["adj"] = a
        return self._cache["adj"]

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency()
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return degrees(self)

    def directed_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(row, col) arrays listing every edge in both directions, grouped by row."""
        a = self.adjacency()
        rows = np.repeat(np.arange(self.n), np.diff(a.indptr))
        return rows, a.indices.astype(np.int64)

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def degrees(graph: Graph) -> np.ndarray:
    """Vertex degrees as an int array of length ``n``."""
    deg = np.bincount(graph.edges.ravel(), minlength=graph.n)
    return deg.astype(np.int64)


def beta_index(deg) -> float:
    """Resilience index <d^2>/<d>."""
    d = np.asarray(deg, dtype=float)
    total = d.sum()
    if total <= 0:
        raise ValueError("beta_index needs at least one positive degree")
    return float(np.dot(d, d) / total)


# ---------------------------------------------------------------- edge lists

def parse_edge_list(text: str | Iterable[str]) -> Graph:
    """Parse whitespace-separated ``u v`` lines into a :class:`Graph`.

    Lines starting with ``#`` and blank lines are skipped. Labels are
    compacted to ``0..n-1`` in order of first appearance. Self-loops are
    dropped and counted in ``Graph.self_loops_dropped``.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    index: dict[int, int] = {}
    labels: list[int] = []
    pairs: list[tuple[int, int]] = []
    loops = 0
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.split()
        if len(tok) != 2:
            raise EdgeListError(f"line {lineno}: expected 2 tokens, got {len(tok)}")
        try:
            a, b = int(tok[0]), int(tok[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer token in {s!r}") from None
        if a < 0 or b < 0:
            raise EdgeListError(f"line {lineno}: negative vertex id")
        for lab in (a, b):
            if lab not in index:
                index[lab] = len(labels)
                labels.append(lab)
        if a == b:
            loops += 1
            continue
        pairs.append((index[a], index[b]))
    if not labels:
        raise EdgeListError("empty edge list")
    return Graph(len(labels), np.array(pairs, dtype=np.int64).reshape(-1, 2),
                 id_map=tuple(labels), self_loops_dropped=loops)


def load_edge_list(source) -> Graph:
    """Load an edge list from a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return parse_edge_list(fh)
    return parse_edge_list(source)


def format_edge_list(graph: Graph) -> str:
    buf = io.StringIO()
    for u, v in graph.edges:
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def save_edge_list(graph: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(graph))


# ---------------------------------------------------------------- generators

def _unrank_pairs(idx: np.ndarray, n: int) -> np.ndarray:
    """Map linear indices over the upper triangle (row-major) to (u, v) pairs."""
    idx = np.asarray(idx, dtype=np.int64)
    # row u starts at offset u*n - u*(u+1)/2
    u = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    start = u * n - u * (u + 1) // 2
    v = idx - start + u + 1
    return np.column_stack([u, v])


def gen_erdos_renyi(n: int, m: int, seed=None) -> Graph:
    """G(n, m): exactly ``m`` edges drawn uniformly without replacement."""
    total = n * (n - 1) // 2
    if n < 1 or m < 0 or m > total:
        raise ValueError(f"infeasible G(n={n}, m={m}): need 0 <= m <= {total}")
    rng = make_rng(seed)
    idx = np.sort(rng.choice(total, size=m, replace=False))
    return Graph(n, _unrank_pairs(idx, n))


def gen_barabasi_albert(n: int, attach_count: int, seed=None) -> Graph:
    """Preferential attachment grown from a clique on ``attach_count`` vertices.

    Each new vertex links to ``attach_count`` distinct existing vertices
    chosen with probability proportional to degree, so
    ``m = attach_count * (n - attach_count) + attach_count*(attach_count-1)/2``.
    """
    k = attach_count
    if k < 1 or n <= k:
        raise ValueError(f"infeasible BA(n={n}, attach={k}): need 1 <= attach < n")
    rng = make_rng(seed)
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    # endpoint multiset: sampling uniformly from it is degree-proportional
    pool = [v for e in edges for v in e] if k > 1 else [0]
    for new in range(k, n):
        targets: set[int] = set()
        while len(targets) < k:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in sorted(targets):
            edges.append((t, new))
            pool.extend((t, new))
    return Graph(n, np.array(edges, dtype=np.int64))


def gen_regular(n: int, k: int, seed=None) -> Graph:
    """Uniform-ish random k-regular graph (Steger-Wormald pairing via networkx)."""
    if k < 0 or k >= n or (n * k) % 2:
        raise ValueError(f"infeasible regular graph n={n}, k={k}: need k < n and n*k even")
    ss = np.random.SeedSequence(seed)
    py_seed = int(ss.generate_state(1, dtype=np.uint32)[0])
    g = nx.random_regular_graph(k, n, seed=py_seed)
    return Graph(n, np.array(list(g.edges()), dtype=np.int64).reshape(-1, 2))


def gen_star(n: int) -> Graph:
    return Graph(n, np.array([(0, i) for i in range(1, n)], dtype=np.int64).reshape(-1, 2))


def gen_path(n: int) -> Graph:
    return Graph(n, np.array([(i, i + 1) for i in range(n - 1)], dtype=np.int64).reshape(-1, 2))
