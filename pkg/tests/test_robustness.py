"""Robust expansion checks, partition verification and (2,1) refinement."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS, graphs

from hamrobust.errors import InputError, RefinementError
from hamrobust.generators import plant_partitioned, random_regular
from hamrobust.graph_core import Graph
from hamrobust.robustness import (
    PartitionSpec,
    RobustParams,
    aim_degree_conditions,
    check_bipartite_robust_expander,
    check_rho_close_bipartite,
    check_rho_component,
    check_robust_expander,
    check_robust_partition,
    check_weak_robust_partition,
    refine_partition,
    robust_neighbourhood,
)


def first_violator(g, members, params, targets=None, slack_base=None):
    """Lexicographically least violating subset, by plain enumeration."""
    targets = members if targets is None else targets
    base = len(members) + len(targets) if slack_base is None else slack_base
    thr = math.ceil(Fraction(str(params.nu)) * base)
    m = len(members)
    lo = math.ceil(Fraction(str(params.tau)) * m)
    hi = math.floor((1 - Fraction(str(params.tau))) * m)
    bad = []
    for size in range(lo, hi + 1):
        for s in itertools.combinations(members, size):
            reach = sum(1 for t in targets if sum(g.has_edge(t, x) for x in s) >= thr)
            if reach < size + Fraction(str(params.nu)) * base:
                bad.append(s)
    return min(bad) if bad else None


PARAMS = st.sampled_from(
    [
        RobustParams(0.05, 0.1, 0.2),
        RobustParams(0.1, 0.2, 0.3),
        RobustParams(0.05, 0.25, 0.25),
    ]
)


@PROPERTY_SETTINGS
@given(graphs(min_n=1, max_n=10), PARAMS)
def test_expander_check_matches_enumeration(g, params):
    members = list(range(g.n))
    verdict = check_robust_expander(g, members, params)
    expected = first_violator(g, members, params, slack_base=g.n)
    assert verdict.exhaustive
    assert verdict.holds == (expected is None)
    assert verdict.witness == expected


@PROPERTY_SETTINGS
@given(graphs(min_n=2, max_n=11), PARAMS)
def test_bipartite_expander_check_matches_enumeration(g, params):
    half = g.n // 2
    a, b = list(range(half)), list(range(half, g.n))
    verdict = check_bipartite_robust_expander(g, a, b, params)
    expected = first_violator(g, a, params, targets=b, slack_base=g.n) if a else None
    assert verdict.holds == (expected is None)
    assert verdict.witness == expected


def test_sampled_expander_check_flags_disconnected_union():
    g = Graph(
        30,
        [(u, v) for u in range(15) for v in range(u + 1, 15)]
        + [(u, v) for u in range(15, 30) for v in range(u + 1, 30)],
    )
    verdict = check_robust_expander(g, range(30), RobustParams(0.05, 0.1, 0.2), exhaustive_cap=10, samples=2000)
    assert not verdict.exhaustive
    # a sampled violator is genuine even though a pass would only be probabilistic
    if not verdict.holds:
        s = set(verdict.witness)
        rn = robust_neighbourhood(g, s, 0.1)
        assert len(rn) < len(s) + 3


def test_complete_graph_is_expander():
    g = Graph(12, itertools.combinations(range(12), 2))
    assert check_robust_expander(g, range(12), RobustParams(0.05, 0.1, 0.2)).holds


def test_expander_needs_vertices():
    with pytest.raises(InputError):
        check_robust_expander(Graph(3), [], RobustParams(0.1, 0.1, 0.1))


def test_robust_neighbourhood_threshold():
    g = Graph(5, [(0, 1), (0, 2), (3, 1), (3, 2), (4, 1)])
    # ceil(0.4 * 5) = 2 neighbours inside {1, 2}
    assert robust_neighbourhood(g, [1, 2], 0.4) == frozenset({0, 3})


def test_rho_component_and_close_bipartite():
    g = random_regular(20, 4, seed=1)
    comp = check_rho_component(g, range(10), 0.25)
    assert comp.conditions["size"]
    close = check_rho_close_bipartite(g, range(10), range(10, 20), 0.3)
    assert close.conditions["C2"]
    with pytest.raises(InputError):
        check_rho_close_bipartite(g, [0, 1], [1, 2], 0.3)


@pytest.mark.parametrize(
    "args",
    [(0.0, 0.1, 0.2), (0.2, 0.1, 0.3), (0.1, 0.3, 0.2), (0.1, 0.1, 1.0)],
)
def test_params_validation(args):
    with pytest.raises(InputError):
        RobustParams(*args)


def test_params_unordered_allows_loose_hierarchy():
    p = RobustParams(0.3, 0.1, 0.2, ordered=False)
    assert p.to_json()["ordered"] is False


def test_spec_json_round_trip_and_cover():
    spec = PartitionSpec.make([[2, 0, 1]], [([3, 4], [5])], RobustParams(0.1, 0.2, 0.3, 0.4))
    assert PartitionSpec.from_json(spec.to_json()) == spec
    assert spec.classes() == [(0, 1, 2), (3, 4, 5)]
    spec.check_cover(6)
    with pytest.raises(InputError, match="missing"):
        spec.check_cover(7)
    with pytest.raises(InputError, match="outside"):
        spec.check_cover(5)
    with pytest.raises(InputError, match="malformed"):
        PartitionSpec.from_json({"expander": [[0]], "params": {"rho": 0.1}})


def planted_21():
    return plant_partitioned([7, 8], [(6, 5)], 4, cross_edges=6, seed=3, bipartite_side="A")


def test_planted_partition_satisfies_degree_conditions():
    g, spec = planted_21()
    spec = spec.with_params(RobustParams(0.1, 0.1, 0.3, 0.2, ordered=False))
    report = check_robust_partition(g, spec)
    for name in ("D1", "D4", "D5"):
        assert report.conditions[name], name
    assert aim_degree_conditions(g, spec) is None
    weak = check_weak_robust_partition(g, spec)
    assert weak.conditions["D'1"]


def test_weak_partition_requires_eta():
    g, spec = planted_21()
    with pytest.raises(InputError, match="eta"):
        check_weak_robust_partition(g, spec)


def test_partition_check_needs_regular_graph():
    g = Graph(3, [(0, 1)])
    with pytest.raises(InputError):
        check_robust_partition(g, PartitionSpec.make([[0, 1, 2]]))


def test_refinement_moves_a_misplaced_vertex_back():
    g, spec = planted_21()
    (v1, v2), ((a, b),) = spec.expander, spec.bipartite
    stray = b[0]
    rough = PartitionSpec.make([v1 + (stray,), v2], [(a, b[1:])], RobustParams(0.01, 0.01, 0.01))
    refined = refine_partition(g, rough)
    assert refined.spec.bipartite[0][1] == b
    assert refined.moved[stray] == ("V1", "B")
    assert refined.objective_after <= refined.objective_before
    assert aim_degree_conditions(g, refined.spec) is None


def test_refinement_rejects_wrong_shape():
    g, _ = planted_21()
    with pytest.raises(InputError):
        refine_partition(g, PartitionSpec.make([range(g.n)]))


def test_refinement_reports_unfixable_partition():
    g = Graph(
        8,
        itertools.chain.from_iterable([(u, v) for v in range(u + 1, 8)] for u in range(8)),
    )
    rough = PartitionSpec.make([[0, 1], [2, 3]], [([4, 5, 6], [7])], RobustParams(0.5, 0.5, 0.5))
    with pytest.raises(RefinementError):
        refine_partition(g, rough)


def test_aim_conditions_detect_small_classes():
    g, spec = planted_21()
    (v1, v2), ((a, b),) = spec.expander, spec.bipartite
    squeezed = PartitionSpec.make([v1[:1], v2 + v1[1:]], [(a, b)])
    assert aim_degree_conditions(g, squeezed) == "|V1| >= D/2"
