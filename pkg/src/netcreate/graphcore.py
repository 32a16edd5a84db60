"""Undirected graphs, BFS distances and neighborhood queries.

Vertices are dense integers ``0..n-1``. Every other module of the package
works on top of :class:`HostGraph` and :class:`DistanceMatrix`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed graphs or edge-list input."""


class _Unreachable:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


UNREACHABLE = _Unreachable()


class Usage(NamedTuple):
    """A usage cost kept as ``(unreachable count, finite distance sum)``.

    Tuples compare lexicographically, so losing connectivity always
    dominates any finite distance change. Differences of usages (benefits and
    losses) use the same representation.
    """

    unreachable: int
    finite: int | Fraction

    def __add__(self, other):  # type: ignore[override]
        return Usage(self.unreachable + other.unreachable, self.finite + other.finite)

    def __sub__(self, other):
        return Usage(self.unreachable - other.unreachable, self.finite - other.finite)

    def __neg__(self):
        return Usage(-self.unreachable, -self.finite)

    @property
    def is_finite(self) -> bool:
        return self.unreachable == 0

    def exceeds(self, price) -> bool:
        """True if this usage amount is strictly larger than a finite price."""
        return self > Usage(0, price)


ZERO_USAGE = Usage(0, 0)


def canonical_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _canonicalize(n: int, edge_list: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    seen: set[Edge] = set()
    for pair in edge_list:
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}): endpoint out of range for n={n}")
        if u == v:
            raise GraphError(f"edge ({u}, {v}): self-loop")
        e = canonical_edge(u, v)
        if e in seen:
            raise GraphError(f"edge ({u}, {v}): duplicate edge")
        seen.add(e)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class Graph:
    """Plain undirected simple graph on vertices ``0..n-1``."""

    n: int
    edges: tuple[Edge, ...]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_edges(cls, n: int, edge_list: Iterable[Sequence[int]]) -> "Graph":
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        return cls(n, _canonicalize(n, edge_list))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, u: int) -> tuple[int, ...]:
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def is_connected(self) -> bool:
        return len(bfs_distances(self, 0)) == self.n

    def bridges(self) -> frozenset[Edge]:
        """Edges whose removal disconnects their endpoints (iterative DFS lowpoints)."""
        n = self.n
        disc = [-1] * n
        low = [0] * n
        out: set[Edge] = set()
        timer = 0
        for root in range(n):
            if disc[root] >= 0:
                continue
            disc[root] = low[root] = timer
            timer += 1
            stack = [(root, -1, iter(self._adj[root]))]
            while stack:
                u, parent, it = stack[-1]
                advanced = False
                for w in it:
                    if w == parent:
                        continue
                    if disc[w] < 0:
                        disc[w] = low[w] = timer
                        timer += 1
                        stack.append((w, u, iter(self._adj[w])))
                        advanced = True
                        break
                    low[u] = min(low[u], disc[w])
                if advanced:
                    continue
                stack.pop()
                if parent >= 0:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        out.add(canonical_edge(parent, u))
        return frozenset(out)


@dataclass(frozen=True)
class HostGraph(Graph):
    """The fixed graph of buildable links, with the uniform link price."""

    alpha: Fraction = Fraction(0)

    def with_alpha(self, alpha) -> "HostGraph":
        return HostGraph(self.n, self.edges, Fraction(alpha))


def build_host_graph(n: int, edge_list: Iterable[Sequence[int]], alpha=0) -> HostGraph:
    """Validate and canonicalize a host graph.

    Raises :class:`GraphError` naming the offending pair for out-of-range
    endpoints, self-loops and duplicates.
    """
    if n < 1:
        raise GraphError(f"vertex count must be positive, got {n}")
    alpha = Fraction(alpha)
    if alpha < 0:
        raise GraphError(f"alpha must be nonnegative, got {alpha}")
    return HostGraph(n, _canonicalize(n, edge_list), alpha)


def complete_host(n: int, alpha=0) -> HostGraph:
    return build_host_graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)], alpha)


def bfs_distances(graph: Graph, source: int, removed: Edge | None = None) -> dict[int, int]:
    """Single-source BFS; returns distances to reachable vertices only.

    ``removed`` drops one edge on the fly, which avoids rebuilding the graph
    when evaluating edge deletions.
    """
    dist = {source: 0}
    queue = deque([source])
    ra, rb = removed if removed is not None else (-1, -1)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in graph.neighbors(u):
            if w in dist or (u == ra and w == rb) or (u == rb and w == ra):
                continue
            dist[w] = du
            queue.append(w)
    return dist


def usage_from(graph: Graph, source: int, removed: Edge | None = None) -> Usage:
    dist = bfs_distances(graph, source, removed)
    return Usage(graph.n - len(dist), sum(dist.values()))


@dataclass(frozen=True)
class DistanceMatrix:
    """All-pairs hop distances of an undirected graph.

    ``array`` holds ``-1`` where no path exists; use :meth:`dist` for the
    public view, which returns :data:`UNREACHABLE` there instead. Aggregates
    are always reported as :class:`Usage` pairs.
    """

    array: np.ndarray
    diameter: int

    @property
    def n(self) -> int:
        return self.array.shape[0]

    @property
    def reachable(self) -> np.ndarray:
        return self.array >= 0

    @property
    def pad(self) -> int:
        """Stand-in for missing paths in :attr:`padded`; exceeds any sum of two distances."""
        return 4 * self.n + 4

    @cached_property
    def padded(self) -> np.ndarray:
        """Internal working copy with :attr:`pad` in place of missing paths."""
        return np.where(self.array >= 0, self.array, self.pad)

    def dist(self, u: int, v: int):
        d = int(self.array[u, v])
        return UNREACHABLE if d < 0 else d

    def usage(self, u: int) -> Usage:
        row = self.array[u]
        fin = row >= 0
        return Usage(int(self.n - fin.sum()), int(row[fin].sum()))

    def usages(self) -> list[Usage]:
        fin = self.array >= 0
        unreach = self.n - fin.sum(axis=1)
        sums = np.where(fin, self.array, 0).sum(axis=1)
        return [Usage(int(a), int(b)) for a, b in zip(unreach, sums)]

    def total_usage(self) -> Usage:
        """Usage summed over all ordered pairs."""
        return self._total_usage

    @cached_property
    def _total_usage(self) -> Usage:
        fin = self.array >= 0
        return Usage(int(fin.size - fin.sum()), int(self.array[fin].sum()))

    def finite_sums(self) -> np.ndarray:
        return np.where(self.array >= 0, self.array, 0).sum(axis=1)

    def unreachable_counts(self) -> np.ndarray:
        return (self.array < 0).sum(axis=1)


def all_pairs_distances(graph: Graph) -> DistanceMatrix:
    """Exact unweighted distances between every pair of vertices.

    Per-source BFS is delegated to scipy's compiled breadth-first search,
    which matters once graphs reach a few thousand vertices.
    """
    n = graph.n
    if graph.m == 0:
        arr = np.full((n, n), -1, dtype=np.int64)
        np.fill_diagonal(arr, 0)
        return DistanceMatrix(arr, 0)
    rows = np.fromiter((e[0] for e in graph.edges), dtype=np.int64, count=graph.m)
    cols = np.fromiter((e[1] for e in graph.edges), dtype=np.int64, count=graph.m)
    adj = csr_matrix((np.ones(graph.m), (rows, cols)), shape=(n, n))
    raw = shortest_path(adj, method="D", directed=False, unweighted=True)
    fin = np.isfinite(raw)
    arr = np.where(fin, raw, -1).astype(np.int64)
    return DistanceMatrix(arr, int(arr.max()))


def neighborhood_size(matrix: DistanceMatrix, u: int, k: int) -> int:
    """Number of vertices within hop distance ``k`` of ``u`` (``u`` included)."""
    row = matrix.array[u]
    return int(((row >= 0) & (row <= k)).sum())


def min_neighborhood_size(matrix: DistanceMatrix, k: int) -> int:
    a = matrix.array
    return int(((a >= 0) & (a <= k)).sum(axis=1).min())


# -- edge-list text format ---------------------------------------------------


def parse_edge_list(text: str) -> tuple[int, list[Edge], list[str]]:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"``.

    Lines starting with ``#`` are collected and returned separately so
    generators can carry metadata in a header comment.
    """
    comments: list[str] = []
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        rows.append(line.split())
    if not rows:
        raise GraphError("edge list is empty")
    try:
        n, m = (int(x) for x in rows[0])
    except ValueError as exc:
        raise GraphError(f"bad header line {rows[0]!r}; expected 'n m'") from exc
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for r in body:
        if len(r) != 2:
            raise GraphError(f"bad edge line {' '.join(r)!r}")
        edges.append((int(r[0]), int(r[1])))
    return n, edges, comments


def read_edge_list(fh: TextIO, alpha=0) -> HostGraph:
    n, edges, _ = parse_edge_list(fh.read())
    return build_host_graph(n, edges, alpha)


def format_edge_list(graph: Graph, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{graph.n} {graph.m}")
    lines.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"
