"""The six structural features used as regression inputs."""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import DisconnectedGraphError, ParameterError
from .graph import Graph

FEATURE_NAMES = ("avgdeg", "spl", "cc", "den", "dia", "maxdeg")

# sources per BFS block; bounds the frontier matrix at BFS_CHUNK x n
BFS_CHUNK = 512


@dataclass(frozen=True)
class FeatureVector:
    avgdeg: float
    spl: float
    cc: float
    den: float
    dia: int
    maxdeg: int

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_sequence(cls, values) -> "FeatureVector":
        a, s, c, d, di, m = values
        return cls(float(a), float(s), float(c), float(d), int(round(di)), int(round(m)))


def average_degree(graph: Graph) -> float:
    return 2.0 * graph.num_edges / graph.n


def max_degree(graph: Graph) -> int:
    return int(graph.degrees.max()) if graph.n else 0


def density(graph: Graph) -> float:
    n = graph.n
    if n < 2:
        raise ParameterError("density needs n >= 2")
    return graph.num_edges / (n * (n - 1) / 2)


def clustering_coefficient(graph: Graph) -> float:
    """Global transitivity: 3 * triangles / connected triples (0 if no triples).

    ``trace(A^3) = 6 * triangles`` and the number of connected triples is
    ``sum_v deg(v) * (deg(v) - 1) / 2``, so the ratio is ``trace(A^3) / sum d(d-1)``.
    """
    deg = graph.degrees.astype(np.int64)
    triples2 = int(np.sum(deg * (deg - 1)))
    if triples2 == 0:
        return 0.0
    A = graph.csr.astype(np.int64)
    closed = int((A @ A).multiply(A).sum())  # = trace(A^3)
    return closed / triples2


def average_local_clustering(graph: Graph) -> float:
    """Mean over nodes of local clustering; nodes with degree < 2 count as 0."""
    deg = graph.degrees.astype(np.int64)
    A = graph.csr.astype(np.int64)
    tri2 = np.asarray((A @ A).multiply(A).sum(axis=1)).ravel()
    denom = deg * (deg - 1)
    local = np.divide(tri2, denom, out=np.zeros(graph.n, dtype=float), where=denom > 0)
    return float(local.mean())


def bfs_distances(graph: Graph, sources=None) -> np.ndarray:
    """Hop distances from each source to every node (-1 where unreachable).

    Level-synchronous BFS run for a block of sources at once: the frontier of
    every source advances by one multiplication with the adjacency matrix.
    """
    n = graph.n
    if sources is None:
        sources = np.arange(n)
    sources = np.asarray(sources, dtype=np.int64)
    A = graph.csr.astype(np.float32)
    out = np.full((len(sources), n), -1, dtype=np.int64)
    for start in range(0, len(sources), BFS_CHUNK):
        src = sources[start:start + BFS_CHUNK]
        rows = np.arange(len(src))
        dist = np.full((len(src), n), -1, dtype=np.int64)
        dist[rows, src] = 0
        frontier = np.zeros((len(src), n), dtype=np.float32)
        frontier[rows, src] = 1.0
        level = 0
        while True:
            level += 1
            reach = np.asarray((A @ frontier.T).T) > 0
            new = reach & (dist < 0)
            if not new.any():
                break
            dist[new] = level
            frontier = new.astype(np.float32)
        out[start:start + len(src)] = dist
    return out


def shortest_path_stats(graph: Graph) -> tuple[float, int]:
    """(average shortest path length over unordered pairs, diameter)."""
    n = graph.n
    if n < 2:
        raise ParameterError("shortest paths need n >= 2")
    dist = bfs_distances(graph)
    if np.any(dist < 0):
        raise DisconnectedGraphError("shortest-path metrics are undefined on a disconnected graph")
    total = int(dist.sum())  # ordered pairs; each unordered pair counted twice
    return total / (n * (n - 1)), int(dist.max())


def extract_features(graph: Graph, clustering: str = "transitivity") -> FeatureVector:
    """All six features in the fixed order (avgdeg, spl, cc, den, dia, maxdeg).

    ``clustering="average"`` swaps transitivity for mean local clustering.
    """
    spl, dia = shortest_path_stats(graph)
    if clustering == "transitivity":
        cc = clustering_coefficient(graph)
    elif clustering == "average":
        cc = average_local_clustering(graph)
    else:
        raise ParameterError(f"unknown clustering mode {clustering!r}")
    return FeatureVector(
        avgdeg=average_degree(graph),
        spl=spl,
        cc=cc,
        den=density(graph),
        dia=dia,
        maxdeg=max_degree(graph),
    )
