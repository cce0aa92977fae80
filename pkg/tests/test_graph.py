from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complete, cycle, path
from netr0.errors import DisconnectedGraphError, GraphError, ParseError
from netr0.graph import (
    Graph,
    is_connected,
    load_edge_list,
    parse_edge_list,
    validate_graph,
    write_edge_list,
)


@st.composite
def edge_lists(draw, max_n=20):
    n = draw(st.integers(1, max_n))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=60))
    return n, pairs


def test_rejects_self_loops_duplicates_and_range():
    with pytest.raises(GraphError):
        Graph(3, [(1, 1)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph(3, [(0, 3)])
    with pytest.raises(GraphError):
        Graph(0)


@given(edge_lists())
def test_lenient_build_satisfies_invariants(data):
    n, pairs = data
    g, loops, dups = Graph.from_edges_lenient(n, pairs)
    validate_graph(g)
    assert loops == sum(a == b for a, b in pairs)
    assert g.num_edges + loops + dups == len(pairs)
    for u, nbrs in enumerate(g.adjacency):
        for v in nbrs:
            assert u in g.adjacency[v]
            assert g.has_edge(u, v)
    assert g.degrees.sum() == 2 * g.num_edges


@given(edge_lists(), st.randoms(use_true_random=False))
def test_relabel_preserves_degree_multiset(data, rnd):
    n, pairs = data
    g, _, _ = Graph.from_edges_lenient(n, pairs)
    perm = list(range(n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    assert sorted(h.degrees.tolist()) == sorted(g.degrees.tolist())
    assert h.num_edges == g.num_edges


def test_is_connected_examples():
    assert is_connected(complete(5))
    assert not is_connected(Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]))
    assert is_connected(path(100))
    assert is_connected(Graph(1))
    assert not is_connected(Graph(2))


def test_parse_triangle(tmp_path):
    f = tmp_path / "k3.txt"
    f.write_text("0 1\n1 2\n2 0")
    g = load_edge_list(f)
    assert g == complete(3)


def test_parse_drops_and_reports_self_loop(tmp_path):
    f = tmp_path / "loop.txt"
    f.write_text("% comment\n0 1\n5 5\n1 5\n0 1\n")
    g, rep = parse_edge_list(f)
    assert rep.self_loops == 1
    assert rep.duplicates == 1
    assert g.num_edges == 2
    assert rep.relabeled  # ids {0, 1, 5} are not contiguous


def test_parse_compacts_string_ids_in_first_occurrence_order(tmp_path):
    f = tmp_path / "names.txt"
    f.write_text("# header\nalice bob 3.5\nbob carol 1\ncarol alice\n")
    g, rep = parse_edge_list(f)
    assert g == Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert rep.relabeled


def test_empty_file_is_parse_error(tmp_path):
    f = tmp_path / "empty.txt"
    f.write_text("# nothing here\n")
    with pytest.raises(ParseError):
        load_edge_list(f)


def test_single_token_line_names_line(tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("0 1\n2\n")
    with pytest.raises(ParseError, match=":2:"):
        load_edge_list(f)


def test_disconnected_file_rejected(tmp_path):
    f = tmp_path / "two.txt"
    f.write_text("0 1\n2 3\n")
    with pytest.raises(DisconnectedGraphError):
        load_edge_list(f)


@given(st.integers(2, 25), st.integers(0, 2 ** 32 - 1))
def test_edge_list_roundtrip_is_idempotent(tmp_path_factory, n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, i + 1) for i in range(n - 1)]
    extra = rng.integers(0, n, size=(n, 2))
    g, _, _ = Graph.from_edges_lenient(n, edges + [tuple(e) for e in extra.tolist()])
    d = tmp_path_factory.mktemp("rt")
    write_edge_list(g, d / "a.txt", {"family": "test"})
    once = load_edge_list(d / "a.txt")
    write_edge_list(once, d / "b.txt")
    twice = load_edge_list(d / "b.txt")
    assert once == g
    assert twice == once


def test_cycle_and_path_helpers_are_valid():
    for g in (cycle(10), path(4), complete(5)):
        validate_graph(g)
