"""Maximum matchings, edge-count bounds and the matching-based path-system helpers."""

from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS, bipartite_graphs, graphs, to_nx

from hamrobust.errors import InputError, PreconditionError, StepFailure
from hamrobust.graph_core import Graph, mask_of
from hamrobust.matching_engine import (
    as_matching,
    bipartition,
    blossom_matching,
    extend_matching_casei,
    hopcroft_karp,
    hub_cherries,
    hub_paths,
    is_matching,
    konig_matching,
    matched_vertices,
    matching_extend,
    matching_or_hubs,
    maximum_matching_size,
    sparse_avoiding_matching,
    spread_matching,
    three_matchings,
)
from hamrobust.path_system import count_class_paths


def nx_max_matching(g: Graph) -> int:
    return len(nx.max_weight_matching(to_nx(g), maxcardinality=True))


def assert_matching_of(g: Graph, m) -> None:
    assert is_matching(m)
    assert all(g.has_edge(u, v) for u, v in m)


@PROPERTY_SETTINGS
@given(graphs(max_n=12))
def test_blossom_is_maximum(g):
    m = blossom_matching(g)
    assert_matching_of(g, m)
    assert len(m) == nx_max_matching(g) == maximum_matching_size(g)


@PROPERTY_SETTINGS
@given(bipartite_graphs())
def test_hopcroft_karp_is_maximum(data):
    g, left = data
    m = hopcroft_karp(g, left, g.full_mask & ~left)
    assert_matching_of(g, m)
    assert len(m) == nx_max_matching(g)


@PROPERTY_SETTINGS
@given(graphs(max_n=12), st.randoms(use_true_random=False))
def test_augmenting_keeps_covered_vertices(g, rng):
    edges = g.edges()
    rng.shuffle(edges)
    start, used = [], set()
    for u, v in edges:
        if u not in used and v not in used and rng.random() < 0.5:
            start.append((u, v))
            used |= {u, v}
    m = blossom_matching(g, initial=start)
    assert used <= matched_vertices(m)
    assert len(m) == nx_max_matching(g)


def test_blossom_within_and_target():
    g = Graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)])
    assert len(blossom_matching(g, within=mask_of([0, 1, 2]))) == 1
    assert len(blossom_matching(g, target=1)) == 1


def test_bipartition_detects_odd_cycle():
    left, right = bipartition(Graph(4, [(0, 1), (1, 2), (2, 3)]))
    assert left | right == 0b1111 and not left & right
    with pytest.raises(PreconditionError):
        bipartition(Graph(3, [(0, 1), (1, 2), (0, 2)]))


def test_as_matching_rejects_shared_vertex():
    with pytest.raises(InputError):
        as_matching([(0, 1), (1, 2)])


@PROPERTY_SETTINGS
@given(bipartite_graphs())
def test_konig_matching_meets_edge_colouring_bound(data):
    g, _ = data
    delta = g.max_degree()
    m = konig_matching(g, delta)
    assert_matching_of(g, m)
    assert len(m) == -(-g.m // delta)


@PROPERTY_SETTINGS
@given(bipartite_graphs(), st.randoms(use_true_random=False))
def test_matching_extend_grows_to_target(data, rng):
    g, left = data
    delta = g.max_degree()
    need = -(-g.m // delta)
    start = sorted(hopcroft_karp(g, left, g.full_mask & ~left))
    rng.shuffle(start)
    start = start[: rng.randint(0, need)]
    m = matching_extend(g, start, delta, left=left)
    assert_matching_of(g, m)
    assert len(m) == need
    assert matched_vertices(start) <= matched_vertices(m)


def test_matching_extend_preconditions():
    g = Graph(4, [(0, 2), (1, 3), (0, 3)])
    with pytest.raises(PreconditionError, match="exceeds"):
        matching_extend(g, [], 1)
    with pytest.raises(PreconditionError, match="not in the graph"):
        matching_extend(g, [(1, 2)], 2)
    with pytest.raises(PreconditionError, match="starting matching"):
        matching_extend(g, [(0, 2), (1, 3)], 2, target=1)
    with pytest.raises(StepFailure):
        matching_extend(g, [], 2, target=3)


def test_matching_or_hubs_outcomes():
    star = Graph(7, [(0, v) for v in range(1, 7)])
    hub = matching_or_hubs(star, 1, 6, 3)
    assert hub.kind == "ii" and hub.hubs == (0,) and hub.covers_all_edges
    assert hub.to_json()["outcome"] == "ii"
    path = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    out = matching_or_hubs(path, 1, 2, 1)
    assert out.kind == "i" and len(out.matching) == 2
    assert out.extra_edge[0] not in matched_vertices(out.matching)
    assert out.forced


def test_matching_or_hubs_structured_failure():
    # P4 at ell = 1: maximum matching 2 covers every vertex, and no vertex has degree 3
    with pytest.raises(StepFailure) as err:
        matching_or_hubs(Graph(4, [(0, 1), (0, 2), (1, 3)]), 1, 6, 3)
    assert err.value.step == "lemma_goodmatching2"
    with pytest.raises(PreconditionError):
        matching_or_hubs(Graph(3, [(0, 1)]), 1, 6, 3)


def test_spread_matching_quotas():
    # U = {0,1,2}, V = {3,4}, W = {5,6}
    edges = [(0, 3), (0, 5), (1, 3), (1, 6), (2, 4), (2, 5)]
    g = Graph(7, edges)
    m = spread_matching(g, [0, 1, 2], [3, 4], [5, 6], 2, 1, 2)
    assert_matching_of(g, m)
    assert sum(1 for e in m if {3, 4} & set(e)) == 2
    assert sum(1 for e in m if {5, 6} & set(e)) == 1
    with pytest.raises(PreconditionError):
        spread_matching(g, [0, 1, 2], [3, 4], [5, 6], 3, 1, 2)
    with pytest.raises(InputError):
        spread_matching(g, [0, 1], [1, 3], [5], 1, 0, 2)


@PROPERTY_SETTINGS
@given(graphs(min_n=4, max_n=11), st.data())
def test_sparse_avoiding_matching(g, data):
    cap = g.max_degree()
    if cap == 0 or g.m < 2 * cap:
        return
    k = data.draw(st.sets(st.integers(0, g.n - 1), min_size=2))
    km = mask_of(k)
    try:
        m = sparse_avoiding_matching(g, k, cap, cap)
    except StepFailure:
        # only acceptable when every matching of the required size perfectly matches K
        need = -(-g.m // cap)
        for sub in itertools.combinations(g.edges(), need):
            if is_matching(sub) and not k <= matched_vertices(e for e in sub if set(e) <= k):
                pytest.fail(f"missed matching {sub}")
        return
    assert_matching_of(g, m)
    assert len(m) == -(-g.m // cap)
    inside = {x for e in m if (km >> e[0]) & 1 and (km >> e[1]) & 1 for x in e}
    assert inside != set(k)


def test_three_matchings_links_the_sides():
    # U = {0,1,2,3} with two internal edges, V = {4,5,6,7} likewise, m = {(0,4)}
    g = Graph(8, [(0, 1), (2, 3), (4, 5), (6, 7), (0, 4)])
    p = three_matchings(g, [0, 1, 2, 3], [4, 5, 6, 7], [(0, 4)], 1, 1, 1)
    assert (0, 4) in p.edges
    assert p.count_within(mask_of([0, 1, 2, 3])) == 1
    assert p.count_within(mask_of([4, 5, 6, 7])) == 1
    assert count_class_paths(p, mask_of([0, 1, 2, 3]), mask_of([4, 5, 6, 7])) >= 1
    with pytest.raises(PreconditionError):
        three_matchings(g, [0, 1, 2, 3], [4, 5, 6, 7], [(0, 1)], 0, 0, 1)


def test_extend_matching_casei_creates_two_paths():
    # X = {0,1}, Y = {2,3,4}; m matches X into Y, mprime closes 2-3 so no X-Y path exists yet
    x, y = [0, 1], [2, 3, 4]
    g = Graph(5, [(0, 2), (1, 3), (2, 3), (3, 4)])
    p = extend_matching_casei(g, x, y, [(0, 2), (1, 3)], [(2, 3)], (4, 3))
    assert count_class_paths(p, mask_of(x), mask_of(y)) >= 2
    assert p.count_within(mask_of(y)) == 1
    with pytest.raises(PreconditionError):
        extend_matching_casei(g, x, y, [(0, 2)], [], (3, 4))


def test_hub_cherries_and_paths():
    # hubs 0 and 1 inside Y = everything, each with private leaves
    g = Graph(8, [(0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7)])
    stars = hub_cherries(g, range(8), [0, 1])
    assert len(stars) == 4 and len(matched_vertices(stars)) == 6
    single = hub_cherries(g, range(8), [0, 1], single=mask_of([1]))
    assert len(single) == 3
    with pytest.raises(StepFailure):
        hub_cherries(g, range(8), [0, 1], forbidden=mask_of([2, 3, 4]))
    p = hub_paths(g, [], range(8), [], [0, 1], 1, strict=False)
    assert len(p) == 3
    with pytest.raises(PreconditionError):
        hub_paths(g, [], range(8), [], [0, 1], 1)


def test_spread_matching_accepts_rational_delta():
    # max degree 1, delta = 3/2: ceil(2 / (3/2)) = 2 edges may be requested in total
    g = Graph(4, [(0, 2), (1, 3)])
    m = spread_matching(g, [0, 1], [2], [3], 1, 1, Fraction(3, 2))
    assert m == {(0, 2), (1, 3)}
