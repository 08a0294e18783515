"""Exact Hamiltonicity, longest cycles, completion and path-system search."""

from __future__ import annotations

import itertools

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS, graphs, to_nx

from hamrobust.errors import Indeterminate, InputError
from hamrobust.generators import build_extremal_gn, random_regular
from hamrobust.graph_core import Graph
from hamrobust.oracles import (
    all_longest_cycles_dominating,
    check_cycle,
    check_dominating,
    complete_to_hamilton,
    exhaustive_path_system,
    find_hamilton,
    is_hamilton_cycle,
    longest_cycle,
    longest_cycle_vertex_sets,
)
from hamrobust.path_system import PathSystem, is_path_system


def brute_hamiltonian(g: Graph, required=()) -> bool:
    if g.n < 3:
        return False
    for rest in itertools.permutations(range(1, g.n)):
        order = (0, *rest)
        if rest[0] > rest[-1]:
            continue
        pairs = {tuple(sorted(e)) for e in zip(order, order[1:] + order[:1])}
        if all(g.has_edge(*e) for e in pairs) and set(required) <= pairs:
            return True
    return False


def brute_cycle_sets(g: Graph) -> tuple[int, set[frozenset[int]]]:
    cycles = [c for c in nx.simple_cycles(to_nx(g)) if len(c) >= 3]
    if not cycles:
        return 0, set()
    best = max(map(len, cycles))
    return best, {frozenset(c) for c in cycles if len(c) == best}


@PROPERTY_SETTINGS
@given(graphs(min_n=3, max_n=8))
def test_find_hamilton_matches_permutations(g):
    cycle = find_hamilton(g)
    assert (cycle is not None) == brute_hamiltonian(g)
    if cycle is not None:
        assert is_hamilton_cycle(g, cycle)


@PROPERTY_SETTINGS
@given(graphs(min_n=3, max_n=9))
def test_longest_cycles_match_networkx(g):
    length, sets = brute_cycle_sets(g)
    if length == 0:
        with pytest.raises(InputError):
            longest_cycle_vertex_sets(g)
        return
    got_length, got_sets = longest_cycle_vertex_sets(g)
    assert got_length == length
    assert set(got_sets) == sets
    cycle = longest_cycle(g)
    check_cycle(g, cycle)
    assert len(cycle) == length


def test_dominating_checks():
    # a 5-cycle with a pendant vertex: the longest cycle misses only that vertex
    g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5)])
    assert check_dominating(g, [0, 1, 2, 3, 4])
    assert all_longest_cycles_dominating(g)
    # two triangles joined by a path of length two: the middle vertex and the far triangle are off the cycle
    h = Graph(7, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 4)])
    assert not check_dominating(h, [0, 1, 2])
    assert not all_longest_cycles_dominating(h)


def test_check_cycle_rejections():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(InputError):
        check_cycle(g, [0, 1])
    with pytest.raises(InputError):
        check_cycle(g, [0, 1, 2, 3])
    assert not is_hamilton_cycle(g, None)


def test_extremal_graphs_are_not_hamiltonian():
    for n in (9, 12, 17):
        g, _ = build_extremal_gn(n)
        assert find_hamilton(g) is None


def test_large_graph_uses_heuristic_then_verifies():
    g = random_regular(40, 6, seed=1)
    cycle = find_hamilton(g)
    assert is_hamilton_cycle(g, cycle)


def test_budget_exhaustion_is_indeterminate():
    g, _ = build_extremal_gn(33)
    with pytest.raises(Indeterminate):
        find_hamilton(g, budget=1_000)


@PROPERTY_SETTINGS
@given(graphs(min_n=3, max_n=7), st.data())
def test_completion_matches_permutations(g, data):
    edges = g.edges()
    chosen = data.draw(st.lists(st.sampled_from(edges), unique=True, max_size=3)) if edges else []
    if not is_path_system(chosen):
        return
    p = PathSystem(chosen)
    cycle = complete_to_hamilton(g, None, p)
    assert (cycle is not None) == brute_hamiltonian(g, p.edges)
    if cycle is not None:
        assert is_hamilton_cycle(g, cycle)
        pairs = {tuple(sorted(e)) for e in zip(cycle, cycle[1:] + cycle[:1])}
        assert p.edges <= pairs


def test_completion_rejects_foreign_edges():
    with pytest.raises(InputError):
        complete_to_hamilton(Graph(3, [(0, 1)]), None, PathSystem([(1, 2)]))


@PROPERTY_SETTINGS
@given(graphs(min_n=2, max_n=6), st.integers(0, 3), st.integers(0, 2))
def test_path_system_search_is_lexicographically_first(g, max_edges, parity):
    def accept(p: PathSystem) -> bool:
        return len(p) >= 1 and len(p.endpoints()) % 4 == 2 * parity % 4

    got = exhaustive_path_system(g, accept, max_edges)
    candidates = []
    for k in range(max_edges + 1):
        for sub in itertools.combinations(g.edges(), k):
            if is_path_system(sub) and accept(PathSystem(sub)):
                candidates.append(tuple(sorted(sub)))
    expected = min(candidates) if candidates else None
    assert (None if got is None else tuple(sorted(got.edges))) == expected


def test_path_system_search_budget_and_candidates():
    g = Graph(6, itertools.combinations(range(6), 2))
    with pytest.raises(Indeterminate):
        exhaustive_path_system(g, lambda p: False, 5, budget=100)
    with pytest.raises(InputError):
        exhaustive_path_system(Graph(3, [(0, 1)]), lambda p: True, 1, candidate_edges=[(1, 2)])
    only = exhaustive_path_system(g, lambda p: len(p) == 2, 2, candidate_edges=[(4, 5), (3, 4)])
    assert only.edges == {(3, 4), (4, 5)}
