"""Balanced rounding, D-balanced extraction and 2-balanced path systems."""

from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from strategies import PROPERTY_SETTINGS

from hamrobust.balancer import (
    check_rounding,
    connectify_balanced,
    extract_d_balanced,
    round_balanced,
    round_pair,
    two_balanced_system,
)
from hamrobust.errors import HamRobustError, InputError, PreconditionError
from hamrobust.generators import sample_planted
from hamrobust.graph_core import mask_of, regular_degree
from hamrobust.matching_engine import blossom_matching, first_edges
from hamrobust.path_system import ceil_eps, check_d_balanced, check_two_balanced, count_class_paths

fractions = st.fractions(min_value=-6, max_value=6, max_denominator=12)
nonneg = st.fractions(min_value=0, max_value=6, max_denominator=12)


@st.composite
def rounding_inputs(draw):
    """Rational ``a1, a2, b, c`` and integers ``x1, x2 >= 0`` satisfying both identities."""
    b, c = draw(nonneg), draw(nonneg)
    x1, x2 = draw(st.integers(0, 8)), draw(st.integers(0, 8))
    a1 = (2 * x1 - b + c) / 2
    a2 = (2 * x2 - b - c) / 2
    return a1, a2, b, c, x1, x2


@PROPERTY_SETTINGS
@given(rounding_inputs(), st.sampled_from([Fraction(1, 4), Fraction(1, 3), Fraction(1, 10)]))
def test_rounding_constraints_on_random_rationals(args, eps):
    q = round_balanced(*args, eps)
    report = check_rounding(*args, eps, q)
    assert set(report.failed) <= {"signs"}
    a1, a2 = args[0], args[1]
    if "signs" in report.failed:
        # the literal sign clause only breaks where a_i is slightly negative and a_i' = 0
        for value, original in ((q.a1p, a1), (q.a2p, a2)):
            if (value >= 0) != (original >= 0):
                assert value == 0 and original < 0


@pytest.mark.parametrize(
    "args, row",
    [
        ((Fraction(1), Fraction(1), Fraction(0), Fraction(0), 1, 1), "i"),
        ((Fraction(3, 4), Fraction(3, 4), Fraction(1, 2), Fraction(0), 1, 1), "iv"),
    ],
)
def test_rounding_rows(args, row):
    q = round_balanced(*args)
    assert q.row == row
    assert check_rounding(*args, Fraction(1, 4), q).holds
    assert q.to_json()["row"] == row


def test_rounding_rejects_bad_input():
    with pytest.raises(InputError, match="eps"):
        round_balanced(1, 1, 0, 0, 1, 1, eps=Fraction(1, 2))
    with pytest.raises(InputError, match="non-negative"):
        round_balanced(1, 1, -1, 0, 1, 1)
    with pytest.raises(InputError, match="violate"):
        round_balanced(1, 1, 0, 0, 2, 1)
    with pytest.raises(InputError, match="integers"):
        round_balanced(1, 1, 0, 0, Fraction(1, 2), 1)


@PROPERTY_SETTINGS
@given(nonneg, nonneg, st.integers(0, 6))
def test_round_pair(a, b, x):
    assume(2 * a + b >= 2 * x)
    eps = Fraction(1, 4)
    ap, bp = round_pair(a, b, x, eps)
    assert ap == ceil_eps(a, eps)
    assert bp % 2 == 0 and bp <= ceil_eps(b, eps) and bp >= ceil_eps(b, eps) - 1
    assert 2 * ap + bp >= 2 * x


def test_round_pair_example():
    # a' = ceil(2.5 - 1/4) = 3; b' = largest even <= ceil(3.3 - 1/4) = 4
    assert round_pair(2.5, 3.3, 4) == (3, 4)
    with pytest.raises(InputError):
        round_pair(0, 0, 1)


def planted_02(seed):
    g, spec, _ = sample_planted((0, 2), seed)
    return g, spec, regular_degree(g)


@pytest.mark.parametrize("seed", range(8))
def test_extraction_outcomes(seed):
    g, spec, d = planted_02(seed)
    (a1, b1), (a2, b2) = spec.bipartite
    try:
        out = extract_d_balanced(g, a1, b1, a2, b2, d, strict=False)
    except PreconditionError as err:
        assert err.step == "lemma_removeedges"
        return
    if out.kind == "i":
        for m, a, b in zip(out.matchings, (a1, a2), (b1, b2)):
            assert len(m) == len(a) - len(b)
            assert all(set(e) <= set(a) and g.has_edge(*e) for e in m)
    else:
        h = out.graph
        assert check_d_balanced(h, a1, b1, a2, b2, d)
        assert all(g.has_edge(*e) for e in h.edges())
        assert out.to_json()["outcome"] == "ii"


def test_extraction_strict_degree_bound():
    g, spec, d = planted_02(0)
    (a1, b1), (a2, b2) = spec.bipartite
    with pytest.raises(PreconditionError, match="below 20"):
        extract_d_balanced(g, a1, b1, a2, b2, d)
    with pytest.raises(InputError):
        extract_d_balanced(g, a1, b1, a2, b2[1:], d, strict=False)


@pytest.mark.parametrize("seed", range(10))
def test_two_balanced_system(seed):
    g, spec, _ = planted_02(seed)
    try:
        p = two_balanced_system(g, spec, check_hypotheses=False)
    except HamRobustError as err:
        assert err.step is not None
        return
    report = check_two_balanced(g, spec, p)
    assert report.conditions["balanced_W1"] and report.conditions["balanced_W2"]
    (a1, b1), (a2, b2) = spec.bipartite
    w1, w2 = mask_of(a1 + b1), mask_of(a2 + b2)
    if p.count_between(w1, w2):
        assert count_class_paths(p, w1, w2) > 0


@pytest.mark.parametrize("seed", range(10))
def test_connectify_adds_a_crossing_path(seed):
    g, spec, _ = planted_02(seed)
    (a1, b1), (a2, b2) = spec.bipartite
    gap1, gap2 = len(a1) - len(b1), len(a2) - len(b2)
    m1 = first_edges(blossom_matching(g, mask_of(a1)), gap1)
    m2 = first_edges(blossom_matching(g, mask_of(a2)), gap2)
    if len(m1) < gap1 or len(m2) < gap2:
        return
    try:
        p = connectify_balanced(g, spec, m1, m2, check_hypotheses=False)
    except HamRobustError as err:
        assert err.step is not None
        return
    assert check_two_balanced(g, spec, p).holds


def test_rounding_grid_size_bound_is_tight():
    # a slightly negative a_i must round to zero: |a'| <= ceil(1/4 - 1/4) = 0
    args = (Fraction(-1, 4), Fraction(3, 4), Fraction(1, 2), Fraction(0), 0, 1)
    q = round_balanced(*args)
    assert q.a1p == 0
    assert math.copysign(1, args[0]) < 0 and not check_rounding(*args, Fraction(1, 4), q).conditions["signs"]
