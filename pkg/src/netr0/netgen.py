"""Random graph generators for the five model-network families.

Every generator is a pure function of its parameters and seed. Randomness comes
from :func:`numpy.random.default_rng`, so the same seed always gives the same
edge set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import GenerationError, ParameterError
from .graph import Graph, is_connected

log = logging.getLogger(__name__)


class Family(str, Enum):
    ER = "ER"
    WS = "WS"
    SF = "SF"
    BA = "BA"
    SBM = "SBM"


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_prob(name, p):
    if not (0.0 <= p <= 1.0) or p != p:
        raise ParameterError(f"{name} must be in [0, 1], got {p}")


def _check_m(n, m):
    if int(m) != m or m < 1 or m >= n:
        raise ParameterError(f"need 1 <= m < n, got m={m}, n={n}")


def _upper_pairs(n):
    return np.triu_indices(n, k=1)


def generate_er(n: int, p: float, seed=None) -> Graph:
    """G(n, p): every pair is an edge independently with probability ``p``."""
    if int(n) != n or n < 2:
        raise ParameterError(f"ER needs n >= 2, got {n}")
    _check_prob("p", p)
    rng = _rng(seed)
    iu, ju = _upper_pairs(n)
    keep = rng.random(len(iu)) < p
    return Graph(n, np.column_stack([iu[keep], ju[keep]]))


def generate_ws(n: int, k_neighbors: int, p_rewire: float, seed=None) -> Graph:
    """Watts-Strogatz small world.

    Starts from a ring where each node links to its ``k_neighbors/2`` nearest
    nodes on each side. Lattice edges ``(u, u+j)`` are visited for
    ``j = 1..k/2`` and ``u = 0..n-1``; each one is moved with probability
    ``p_rewire`` to ``(u, w)`` for a uniform ``w`` that is neither ``u`` nor an
    existing neighbour of ``u``. Edge count is always ``n*k/2``.
    """
    if int(k_neighbors) != k_neighbors or k_neighbors % 2:
        raise ParameterError(f"k_neighbors must be even, got {k_neighbors}")
    if not (2 <= k_neighbors < n):
        raise ParameterError(f"need 2 <= k_neighbors < n, got k={k_neighbors}, n={n}")
    _check_prob("p_rewire", p_rewire)
    rng = _rng(seed)
    half = k_neighbors // 2
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, half + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, half + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() >= p_rewire:
                continue
            if v not in adj[u] or len(adj[u]) >= n - 1:
                continue
            w = int(rng.integers(n))
            while w == u or w in adj[u]:
                w = int(rng.integers(n))
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph(n, edges)


class _Urn:
    """Repeated-nodes list: each node appears once per incident edge end."""

    def __init__(self, items=()):
        self.items = list(items)

    def draw(self, rng) -> int:
        return self.items[int(rng.integers(len(self.items)))]

    def extend(self, items):
        self.items.extend(items)


def generate_powerlaw_cluster(n: int, m: int, p_triangle: float, seed=None) -> Graph:
    """Holme-Kim growth: preferential attachment with triangle closure.

    The process starts from ``m`` isolated nodes which are drawn uniformly until
    they collect edges. Every new node adds exactly ``m`` distinct edges, so the
    graph has ``(n - m) * m`` edges. After each edge, with probability
    ``p_triangle`` the next edge goes to a random neighbour of the last target
    (closing a triangle); otherwise it is a fresh preferential draw.
    """
    _check_m(n, m)
    _check_prob("p_triangle", p_triangle)
    rng = _rng(seed)
    adj = [set() for _ in range(n)]
    urn = _Urn(range(m))
    for source in range(m, n):
        chosen: list[int] = []
        target = urn.draw(rng)
        chosen.append(target)
        adj[source].add(target)
        adj[target].add(source)
        while len(chosen) < m:
            if rng.random() < p_triangle:
                options = sorted(v for v in adj[target] if v != source and v not in adj[source])
                if options:
                    nbr = options[int(rng.integers(len(options)))]
                    chosen.append(nbr)
                    adj[source].add(nbr)
                    adj[nbr].add(source)
                    continue
            target = urn.draw(rng)
            while target in adj[source]:
                target = urn.draw(rng)
            chosen.append(target)
            adj[source].add(target)
            adj[target].add(source)
        urn.extend(chosen)
        urn.extend([source] * m)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph(n, edges)


def generate_ba(n: int, m: int, seed=None, initial: str = "star") -> Graph:
    """Barabasi-Albert preferential attachment.

    ``initial="star"`` seeds with a star on ``m+1`` nodes (node 0 the hub);
    ``initial="clique"`` seeds with a complete graph on ``m`` nodes. Each later
    node attaches to ``m`` distinct existing nodes drawn proportionally to degree.
    """
    _check_m(n, m)
    rng = _rng(seed)
    if initial == "star":
        seed_edges = [(0, v) for v in range(1, m + 1)]
        start = m + 1
    elif initial == "clique":
        if m < 2:
            raise ParameterError("clique seed needs m >= 2")
        seed_edges = [(u, v) for u in range(m) for v in range(u + 1, m)]
        start = m
    else:
        raise ParameterError(f"unknown initial graph {initial!r}")
    edges = list(seed_edges)
    urn = _Urn([x for e in seed_edges for x in e])
    for source in range(start, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(urn.draw(rng))
        picked = sorted(targets)
        edges.extend((t, source) for t in picked)
        urn.extend(picked)
        urn.extend([source] * m)
    return Graph(n, edges)


def generate_sbm(block_sizes, prob_matrix, seed=None) -> Graph:
    """Stochastic block model; nodes are numbered block by block."""
    sizes = [int(s) for s in block_sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise ParameterError(f"block sizes must be positive, got {block_sizes}")
    P = np.asarray(prob_matrix, dtype=float)
    if P.shape != (len(sizes), len(sizes)):
        raise ParameterError("probability matrix must be square with one row per block")
    if not np.array_equal(P, P.T):
        raise ParameterError("probability matrix must be symmetric")
    if np.any(P < 0) or np.any(P > 1) or np.any(np.isnan(P)):
        raise ParameterError("probabilities must be in [0, 1]")
    n = sum(sizes)
    rng = _rng(seed)
    block = np.repeat(np.arange(len(sizes)), sizes)
    iu, ju = _upper_pairs(n)
    keep = rng.random(len(iu)) < P[block[iu], block[ju]]
    return Graph(n, np.column_stack([iu[keep], ju[keep]]))


# --- specs and the connectivity filter --------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """Family + parameters + seed. ``params`` keys per family:

    ER: p; WS: k_neighbors, p_rewire; SF: m, p_triangle; BA: m;
    SBM: block_sizes, prob_matrix.
    """

    family: Family
    n: int
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        self.validate()

    def validate(self) -> None:
        n, p = self.n, self.params
        if int(n) != n or n < 2:
            raise ParameterError(f"n must be >= 2, got {n}")
        fam = self.family
        try:
            if fam is Family.ER:
                _check_prob("p", p["p"])
            elif fam is Family.WS:
                k = p["k_neighbors"]
                if int(k) != k or k % 2 or not (2 <= k < n):
                    raise ParameterError(f"WS k_neighbors must be even with 2 <= k < n, got {k}")
                _check_prob("p_rewire", p["p_rewire"])
            elif fam is Family.SF:
                _check_m(n, p["m"])
                _check_prob("p_triangle", p["p_triangle"])
            elif fam is Family.BA:
                _check_m(n, p["m"])
            elif fam is Family.SBM:
                if sum(p["block_sizes"]) != n:
                    raise ParameterError("SBM block sizes must sum to n")
                P = np.asarray(p["prob_matrix"], dtype=float)
                if not np.array_equal(P, P.T):
                    raise ParameterError("SBM probability matrix must be symmetric")
                if np.any(P < 0) or np.any(P > 1):
                    raise ParameterError("SBM probabilities must be in [0, 1]")
        except KeyError as exc:
            raise ParameterError(f"{fam.value} spec missing parameter {exc}") from None

    def with_seed(self, seed) -> "GeneratorSpec":
        return GeneratorSpec(self.family, self.n, self.params, seed)

    def describe(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family.value}(n={self.n}, {args}, seed={self.seed})"

    def __str__(self):
        return self.describe()


def generate(spec: GeneratorSpec, seed=None) -> Graph:
    """Run the generator named by ``spec`` (``seed`` overrides ``spec.seed``)."""
    s = spec.seed if seed is None else seed
    p = spec.params
    fam = spec.family
    if fam is Family.ER:
        return generate_er(spec.n, p["p"], s)
    if fam is Family.WS:
        return generate_ws(spec.n, p["k_neighbors"], p["p_rewire"], s)
    if fam is Family.SF:
        return generate_powerlaw_cluster(spec.n, p["m"], p["p_triangle"], s)
    if fam is Family.BA:
        return generate_ba(spec.n, p["m"], s, p.get("initial", "star"))
    return generate_sbm(p["block_sizes"], p["prob_matrix"], s)


def attempt_seed(seed, attempt: int):
    """Seed for retry ``attempt``; attempt 0 reuses the spec seed unchanged."""
    if attempt == 0:
        return seed
    base = 0 if seed is None else int(seed)
    return np.random.SeedSequence([base, attempt]).generate_state(1)[0].item()


@dataclass(frozen=True)
class ConnectedGraph:
    graph: Graph
    spec: GeneratorSpec
    retries: int


DEFAULT_MAX_RETRIES = 20


def generate_connected(spec: GeneratorSpec, max_retries: int = DEFAULT_MAX_RETRIES) -> ConnectedGraph:
    """Resample with derived sub-seeds until the graph is a single component.

    ``max_retries`` counts resamples after the first attempt.
    """
    if spec.seed is None:
        raise ParameterError("generate_connected needs a seeded spec for reproducibility")
    for attempt in range(max_retries + 1):
        g = generate(spec, attempt_seed(spec.seed, attempt))
        if is_connected(g):
            if attempt:
                log.debug("%s connected after %d retries", spec, attempt)
            return ConnectedGraph(g, spec, attempt)
    raise GenerationError(spec, max_retries + 1)
