"""Path systems, reduced multigraphs, balance and the builder validators."""

from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS

from hamrobust.errors import InputError, PreconditionError
from hamrobust.generators import random_regular
from hamrobust.graph_core import Graph
from hamrobust.path_system import (
    Character,
    PathSystem,
    balance_defects,
    balance_of,
    ceil_eps,
    character_of,
    check_basic_connector,
    check_d_balanced,
    check_euler_tour,
    check_p123,
    check_two_balanced,
    check_v_tour,
    count_class_paths,
    degree_profile,
    is_euler,
    is_path_system,
    largest_even_at_most,
    reduced_multigraph,
)
from hamrobust.robustness import PartitionSpec

PAIRS = [(u, v) for u in range(9) for v in range(u + 1, 9)]
edge_sets = st.lists(st.sampled_from(PAIRS), unique=True, max_size=10)


def nx_is_linear_forest(edges) -> bool:
    h = nx.Graph(edges)
    return all(d <= 2 for _, d in h.degree()) and nx.is_forest(h) if edges else True


@PROPERTY_SETTINGS
@given(edge_sets)
def test_path_system_validity_matches_networkx(edges):
    assert is_path_system(edges) == nx_is_linear_forest(edges)


@PROPERTY_SETTINGS
@given(edge_sets)
def test_paths_partition_the_edges(edges):
    if not is_path_system(edges):
        return
    p = PathSystem(edges)
    walked = set()
    for walk in p.paths():
        assert walk[0] < walk[-1]
        walked |= {tuple(sorted(e)) for e in itertools.pairwise(walk)}
    assert walked == set(p.edges)
    assert len(p.endpoints()) == 2 * len(p.paths())


def test_path_system_rejections():
    with pytest.raises(InputError, match="loop"):
        PathSystem([(1, 1)])
    with pytest.raises(InputError, match="degree 3"):
        PathSystem([(0, 1), (0, 2), (0, 3)])
    with pytest.raises(InputError, match="cycle"):
        PathSystem([(0, 1), (1, 2), (0, 2)])
    with pytest.raises(InputError, match="malformed"):
        PathSystem.from_json({"edges": [[0]]})


def test_union_minus_and_json():
    p = PathSystem([(0, 1), (2, 3)])
    q = p.union([(1, 2)])
    assert q.paths() == [[0, 1, 2, 3]]
    assert q.minus([(1, 2)]) == p
    assert PathSystem.from_json(q.to_json()) == q


@PROPERTY_SETTINGS
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8))
def test_euler_check_matches_networkx(pairs):
    from hamrobust.path_system import ReducedMultigraph

    edges = tuple(sorted((min(i, j), max(i, j)) for i, j in pairs))
    r = ReducedMultigraph(4, edges)
    h = nx.MultiGraph()
    h.add_nodes_from(range(4))
    h.add_edges_from(edges)
    expected = all(d > 0 for _, d in h.degree()) and nx.is_eulerian(h)
    assert check_euler_tour(r) == expected


def test_reduced_multigraph_and_class_paths():
    classes = [[0, 1, 2], [3, 4, 5], [6, 7]]
    p = PathSystem([(0, 3), (4, 6), (7, 1)])
    r = reduced_multigraph(p, classes)
    assert r.edges == ((0, 1), (0, 2), (1, 2))
    assert is_euler(p, classes)
    assert count_class_paths(p, classes[0], classes[1]) == 1
    with pytest.raises(InputError, match="not covered"):
        reduced_multigraph(PathSystem([(0, 8)]), classes)


@PROPERTY_SETTINGS
@given(edge_sets, st.lists(st.integers(0, 2), min_size=9, max_size=9))
def test_balance_matches_direct_count(edges, labels):
    if not is_path_system(edges):
        return
    p = PathSystem(edges)
    a = [v for v in range(9) if labels[v] == 0]
    b = [v for v in range(9) if labels[v] == 1]
    u = [v for v in range(9) if labels[v] == 2]
    weight = {(0, 0): 1, (1, 1): -1, (0, 2): Fraction(1, 2), (1, 2): Fraction(-1, 2)}
    expected = sum(weight.get(tuple(sorted((labels[x], labels[y]))), 0) for x, y in edges)
    assert balance_of(p, a, b, u) == expected
    ones, twos = degree_profile(p, a)
    assert ones == sum(1 for v in a if p.degree(v) == 1)
    assert twos == sum(1 for v in a if p.degree(v) == 2)


@pytest.mark.parametrize(
    "x, eps, expected",
    [(Fraction(5, 4), Fraction(1, 4), 1), (Fraction(3, 2), Fraction(1, 4), 2), (0, Fraction(1, 4), 0), (2, 0.1, 2)],
)
def test_ceil_eps(x, eps, expected):
    assert ceil_eps(x, eps) == expected


def test_ceil_eps_rejects_bad_eps():
    with pytest.raises(InputError):
        ceil_eps(1, 0)


def test_largest_even_at_most():
    assert [largest_even_at_most(x) for x in range(5)] == [0, 0, 2, 2, 4]


def test_character_values_and_caps():
    # A = {0,1,2} with a path 0-1-2 inside, each A-vertex joined to U = {3,4}
    g = Graph(5, [(0, 1), (1, 2), (0, 3), (1, 4), (2, 3)])
    ch = character_of(g, [0, 1, 2], [3, 4], 2, Fraction(1, 4))
    # e(A)/delta = 1 -> ceil(3/4) = 1; e(A,U)/delta = 3/2 -> ceil(5/4) = 2
    assert (ch.ell_A, ch.m_AU) == (1, 2)
    with pytest.raises(PreconditionError):
        character_of(g, [0, 1, 2], [3, 4], 1, Fraction(1, 4))
    with pytest.raises(InputError):
        Character(1, 3, Fraction(1), Fraction(1, 4))


@PROPERTY_SETTINGS
@given(
    st.integers(5, 20), st.integers(1, 4), st.integers(0, 999), st.lists(st.integers(0, 3), min_size=20, max_size=20)
)
def test_regular_graphs_are_balanced(n, d, seed, labels):
    if d >= n or n * d % 2:
        return
    g = random_regular(n, d, seed)
    sets = [[v for v in range(n) if labels[v] == k] for k in range(4)]
    assert balance_defects(g, *sets, d) == (0, 0)
    assert check_d_balanced(g, *sets, d)


def two_one_spec() -> PartitionSpec:
    return PartitionSpec.make([[0, 1, 2], [3, 4, 5]], [([6, 7], [8])])


def test_basic_connector_validator():
    spec = two_one_spec()
    edges = [(0, 6), (7, 3), (4, 1)]
    g = Graph(9, edges + [(6, 7), (6, 8)])
    # V1 -> A, A -> V2, V2 -> V1; profile (2, 0) and balance 1
    assert check_basic_connector(g, spec, PathSystem(edges)).holds
    inside = check_basic_connector(g, spec, PathSystem([(0, 6), (6, 7), (7, 3), (4, 1)]))
    assert "BC3" in inside.failed
    open_walk = check_basic_connector(g, spec, PathSystem([(0, 6)]))
    assert "BC1" in open_walk.failed
    with pytest.raises(InputError):
        check_basic_connector(g, PartitionSpec.make([range(9)]), PathSystem())


def test_p123_validator_on_cycle_of_classes():
    spec = two_one_spec()
    # paths V1 -> A, A -> V2, V2 -> V1 : a closed walk through the three classes
    edges = [(0, 6), (7, 3), (4, 1)]
    g = Graph(9, edges + [(6, 8), (7, 8)])
    p = PathSystem(edges)
    ch = Character(0, 2, Fraction(1), Fraction(1, 4))
    report = check_p123(g, spec, p, ch)
    # balance: two A-U edges -> 1 = |A| - |B|
    assert report.conditions == {"edges_in_graph": True, "P1": True, "P2": True, "P3": True}
    assert not check_p123(g, spec, PathSystem([(0, 6)]), ch).holds


def test_two_balanced_validator():
    spec = PartitionSpec.make([], [([0, 1], [2]), ([3, 4], [5])])
    g = Graph(6, [(0, 1), (3, 4), (0, 3), (2, 5), (1, 2), (4, 5)])
    report = check_two_balanced(g, spec, PathSystem([(0, 3), (2, 5)]))
    assert report.conditions["W1W2_path"] and report.conditions["even_W1W2_paths"]
    with pytest.raises(InputError):
        check_two_balanced(g, two_one_spec(), PathSystem())


def test_v_tour_validator():
    spec = PartitionSpec.make([[0, 1], [2, 3]])
    g = Graph(4, [(0, 2), (1, 3), (0, 1), (2, 3)])
    p = PathSystem([(0, 2), (1, 3)])
    assert check_v_tour(g, spec, p, Fraction(1, 2)).holds
    tight = check_v_tour(g, spec, p, Fraction(1, 4))
    assert tight.failed == ["contact"]
    bad = check_v_tour(g, spec, PathSystem([(0, 1)]), Fraction(1))
    assert "euler_tour" in bad.failed
