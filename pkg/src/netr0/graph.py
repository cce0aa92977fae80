"""Simple undirected graph on nodes 0..n-1, plus edge-list serialization."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DisconnectedGraphError, GraphError, ParseError

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


class Graph:
    """Immutable simple undirected graph.

    Edges are stored once each as ``(u, v)`` with ``u < v``, sorted. Construction
    rejects self-loops, duplicate edges and out-of-range node ids; use
    :meth:`from_edges_lenient` to drop them instead.
    """

    def __init__(self, n: int, edges=()):
        n = int(n)
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GraphError("edges must be pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError(f"node id out of range 0..{n - 1}")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise GraphError("self-loop")
        arr = np.sort(arr, axis=1)
        keys = arr[:, 0] * n + arr[:, 1]
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            raise GraphError("duplicate edge")
        arr = arr[order]
        arr.setflags(write=False)
        self._n = n
        self._edges = arr

    @classmethod
    def from_edges_lenient(cls, n: int, edges) -> tuple["Graph", int, int]:
        """Build a graph, dropping self-loops and duplicates.

        Returns ``(graph, n_self_loops, n_duplicates)``.
        """
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        loops = arr[:, 0] == arr[:, 1]
        arr = np.sort(arr[~loops], axis=1)
        uniq = np.unique(arr, axis=0) if arr.size else arr
        return cls(n, uniq), int(loops.sum()), int(len(arr) - len(uniq))

    @property
    def n(self) -> int:
        return self._n

    @property
    def edge_array(self) -> np.ndarray:
        """Read-only ``(E, 2)`` array, rows ``u < v`` in lexicographic order."""
        return self._edges

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self._edges.tolist()))

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self._edges.ravel(), minlength=self._n)
        deg.setflags(write=False)
        return deg

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        csr = self.csr
        return tuple(
            tuple(csr.indices[csr.indptr[v]:csr.indptr[v + 1]].tolist()) for v in range(self._n)
        )

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix (int32), sorted indices."""
        u, v = self._edges[:, 0], self._edges[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.ones(len(rows), dtype=np.int32)
        mat = sp.csr_matrix((data, (rows, cols)), shape=(self._n, self._n))
        mat.sort_indices()
        return mat

    def dense(self, dtype=np.float64) -> np.ndarray:
        return self.csr.toarray().astype(dtype, copy=False)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def relabel(self, perm) -> "Graph":
        """Return the graph with node ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self._n)):
            raise GraphError("relabel needs a permutation of 0..n-1")
        return Graph(self._n, perm[self._edges])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self._n}, edges={self.num_edges})"


def validate_graph(graph: Graph) -> None:
    """Check the Graph invariants from scratch; raise GraphError on violation."""
    n = graph.n
    seen = set()
    for u, v in graph.edge_array.tolist():
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) out of range")
        if u == v:
            raise GraphError(f"self-loop at {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
    adj = graph.adjacency
    if len(adj) != n:
        raise GraphError("adjacency length mismatch")
    for u in range(n):
        for v in adj[u]:
            if u not in adj[v] or (min(u, v), max(u, v)) not in seen:
                raise GraphError(f"adjacency inconsistent at ({u}, {v})")
    if sum(len(a) for a in adj) != 2 * len(seen):
        raise GraphError("adjacency edge count mismatch")


def is_connected(graph: Graph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    if graph.n == 1:
        return True
    csr = graph.csr
    indptr, indices = csr.indptr, csr.indices
    seen = np.zeros(graph.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == graph.n


def require_connected(graph: Graph, what: str = "graph") -> None:
    if not is_connected(graph):
        raise DisconnectedGraphError(f"{what} has more than one component")


# --- edge-list files -------------------------------------------------------


@dataclass(frozen=True)
class IngestReport:
    n: int
    num_edges: int
    self_loops: int
    duplicates: int
    relabeled: bool


def write_edge_list(graph: Graph, path, header: dict | None = None) -> None:
    """Write ``u v`` lines (0-indexed) with a ``#`` header recording n and extra metadata."""
    lines = [f"# n={graph.n} edges={graph.num_edges}"]
    for key, val in (header or {}).items():
        lines.append(f"# {key}={val}")
    lines.extend(f"{u} {v}" for u, v in graph.edge_array.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def parse_edge_list(path) -> tuple[Graph, IngestReport]:
    """Read a whitespace edge list without checking connectivity.

    Only the first two tokens of each line are used (weights/timestamps ignored).
    Ids already forming 0..n-1 as integers are kept; anything else is compacted
    to 0..n-1 in order of first occurrence.
    """
    path = Path(path)
    pairs = []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            tokens = line.split()
            if len(tokens) < 2:
                raise ParseError("expected two node ids", path, lineno)
            pairs.append((tokens[0], tokens[1]))
    if not pairs:
        raise ParseError("no edges found", path)

    order: dict[str, int] = {}
    for a, b in pairs:
        for tok in (a, b):
            if tok not in order:
                order[tok] = len(order)
    n = len(order)
    relabeled = True
    try:
        as_int = {tok: int(tok) for tok in order}
    except ValueError:
        as_int = None
    if as_int is not None and sorted(as_int.values()) == list(range(n)):
        mapping = as_int
        relabeled = False
    else:
        mapping = order
    edges = [(mapping[a], mapping[b]) for a, b in pairs]
    graph, loops, dups = Graph.from_edges_lenient(n, edges)
    return graph, IngestReport(n, graph.num_edges, loops, dups, relabeled)


def load_edge_list(path) -> Graph:
    """Load a real-world network; it must form a single component."""
    graph, report = parse_edge_list(path)
    if report.self_loops or report.duplicates:
        log.info("%s: dropped %d self-loops and %d duplicate edges",
                 path, report.self_loops, report.duplicates)
    require_connected(graph, str(path))
    return graph
