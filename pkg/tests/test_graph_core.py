"""Bitset graph: construction, counting, connectivity and edge-list I/O."""

from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS, graphs, to_nx

from hamrobust.errors import InputError
from hamrobust.graph_core import (
    Graph,
    bits,
    components,
    edge_count,
    format_edge_list,
    is_connected,
    mask_of,
    minimum_vertex_cut,
    neighbourhood,
    parse_edge_list,
    read_edge_list,
    regular_degree,
    vertex_connectivity,
    write_edge_list,
)


def petersen() -> Graph:
    return Graph(10, nx.petersen_graph().edges())


def test_bits_and_mask_round_trip():
    assert list(bits(0b101001)) == [0, 3, 5]
    assert mask_of([5, 0, 3]) == 0b101001


def test_basic_queries_on_petersen():
    g = petersen()
    assert g.n == 10 and g.m == 15
    assert regular_degree(g) == 3
    assert g.max_degree() == 3
    assert g.neighbours(0) == sorted(nx.petersen_graph()[0])
    assert vertex_connectivity(g) == 3
    assert len(minimum_vertex_cut(g)) == 3


@pytest.mark.parametrize(
    "n, edges",
    [(-1, []), (3, [(0, 3)]), (3, [(1, 1)])],
)
def test_constructor_rejects_bad_input(n, edges):
    with pytest.raises(InputError):
        Graph(n, edges)


def test_from_rows_checks_symmetry():
    with pytest.raises(InputError, match="symmetric"):
        Graph.from_rows([0b10, 0b00])
    with pytest.raises(InputError, match="self-loop"):
        Graph.from_rows([0b1])


def test_remove_vertices_keeps_ids():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    h = g.remove_vertices([1])
    assert h.n == 4
    assert h.edges() == [(2, 3)]
    assert len(components(h)) == 3  # 0, 1 and {2,3}
    assert len(components(h, within=mask_of([0, 2, 3]))) == 2


def test_induced_relabels():
    g = Graph(5, [(0, 4), (4, 2), (1, 3)])
    h, order = g.induced([0, 2, 4])
    assert order == [0, 2, 4]
    assert sorted(h.edges()) == [(0, 2), (1, 2)]


def test_spanning_subgraph_rejects_non_edges():
    g = Graph(3, [(0, 1)])
    with pytest.raises(InputError):
        g.spanning_subgraph([(1, 2)])


@PROPERTY_SETTINGS
@given(graphs(max_n=11), st.data())
def test_edge_counts_match_brute_force(g, data):
    s = data.draw(st.sets(st.integers(0, max(g.n - 1, 0))) if g.n else st.just(set()))
    t = data.draw(st.sets(st.integers(0, max(g.n - 1, 0))) if g.n else st.just(set()))
    inside = sum(1 for u, v in g.edges() if u in s and v in s)
    assert edge_count(g, s) == inside
    # e(S,T): ordered pairs in S x T, edges inside S & T counted once
    between = sum(1 for u, v in g.edges() if (u in s and v in t) or (v in s and u in t))
    assert edge_count(g, s, t) == between


@PROPERTY_SETTINGS
@given(graphs(max_n=11))
def test_handshake_and_neighbourhood(g):
    assert sum(g.degrees()) == 2 * g.m
    if g.n:
        x = list(range(0, g.n, 2))
        expected = {w for v in x for w in g.neighbours(v)}
        assert neighbourhood(g, x) == frozenset(expected)


@PROPERTY_SETTINGS
@given(graphs(max_n=11))
def test_components_and_connectivity_match_networkx(g):
    h = to_nx(g)
    assert sorted(map(sorted, components(g))) == sorted(map(sorted, nx.connected_components(h)))
    if g.n >= 1:
        assert is_connected(g) == nx.is_connected(h)
    if g.n >= 2:
        assert vertex_connectivity(g) == nx.node_connectivity(h)


@PROPERTY_SETTINGS
@given(graphs(min_n=3, max_n=11))
def test_minimum_cut_disconnects(g):
    cut = minimum_vertex_cut(g)
    k = vertex_connectivity(g)
    assert len(cut) == k
    if g.m < g.n * (g.n - 1) // 2:
        rest = g.full_mask & ~mask_of(cut)
        assert not is_connected(g, within=rest)


@PROPERTY_SETTINGS
@given(graphs(max_n=12))
def test_edge_list_round_trip(g):
    assert parse_edge_list(format_edge_list(g)) == g


def test_edge_list_file_round_trip(tmp_path):
    g = petersen()
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "empty"),
        ("3 1\n0 1 2\n", ":2: expected two integers"),
        ("3 2\n0 1\n", "announces 2 edges"),
        ("3 1\n0 5\n", ":2: vertex out of range"),
        ("3 1\n1 1\n", ":2: self-loop"),
        ("3 2\n0 1\n1 0\n", ":3: duplicate edge"),
        ("x 1\n", ":1: expected two integers"),
    ],
)
def test_parse_errors_name_the_line(text, message):
    with pytest.raises(InputError, match=message):
        parse_edge_list(text)


def test_parse_accepts_tabs_and_blank_lines():
    g = parse_edge_list("3\t2\n\n0  1\n1\t2\n")
    assert g.edges() == [(0, 1), (1, 2)]


def test_read_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        read_edge_list(tmp_path / "absent.txt")
