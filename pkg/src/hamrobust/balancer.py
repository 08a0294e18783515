"""Balancing for two bipartite-like classes.

The pipeline turns a regular graph with an ordered partition
``(A1, B1, A2, B2)`` (``W_i = A_i + B_i``) into a small path system that is
2-balanced, i.e. satisfies for ``{i, j} = {1, 2}``

    2 e(A_i) - 2 e(B_i) + e(A_i, W_j) - e(B_i, W_j) = 2 (|A_i| - |B_i|).

Steps: exact integer rounding of four rationals, extraction of a sparse
D-balanced subgraph, matchings sized by the rounding, and a repair step that
adds a path between ``W1`` and ``W2`` using 3-connectivity.  Every step either
returns a verified object or raises ``StepFailure`` naming itself.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import InputError, PreconditionError, StepFailure
from .graph_core import Edge, Graph, bits, count_between, count_within, mask_of, vertex_connectivity
from .matching_engine import blossom_matching, first_edges, spread_matching, three_matchings
from .path_system import PathSystem, balance_defects, ceil_eps, count_class_paths, largest_even_at_most
from .reports import Report
from .robustness import PartitionSpec, exact, require_regular

Number = int | float | Fraction

ROUNDING_EPS = Fraction(1, 4)


# ---------------------------------------------------------------------------
# rounding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BalancedQuadruple:
    """Integers ``(a1', a2', b', c')`` with ``2a1'+b'-c' = 2x1`` and ``2a2'+b'+c' = 2x2``."""

    a1p: int
    a2p: int
    bp: int
    cp: int
    row: str = ""

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a1p, self.a2p, self.bp, self.cp)

    def to_json(self) -> dict[str, Any]:
        return {"a1p": self.a1p, "a2p": self.a2p, "bp": self.bp, "cp": self.cp, "row": self.row}


def _floor_half(x: Fraction) -> Fraction:
    """``floor(2x)/2``."""
    return Fraction(math.floor(2 * x), 2)


def round_balanced(
    a1: Number, a2: Number, b: Number, c: Number, x1: int, x2: int, eps: Number = ROUNDING_EPS
) -> BalancedQuadruple:
    """Round ``a1, a2, b, c`` to integers keeping both linear identities exact.

    The five cases are decided by the parities of ``ceil(b+c)`` and
    ``ceil(b-c)`` (and by ``b > 0`` when both are odd).
    """
    a1, a2, b, c, eps = (exact(v) for v in (a1, a2, b, c, eps))
    if not 0 < eps < Fraction(1, 2):
        raise InputError("eps must lie strictly between 0 and 1/2")
    if b < 0 or c < 0:
        raise InputError("b and c must be non-negative")
    if int(x1) != x1 or int(x2) != x2 or x1 < 0 or x2 < 0:
        raise InputError("x1 and x2 must be non-negative integers")
    if 2 * a1 + b - c != 2 * x1 or 2 * a2 + b + c != 2 * x2:
        raise InputError("inputs violate 2a1+b-c = 2x1 or 2a2+b+c = 2x2")
    big_a1, big_a2 = _floor_half(a1), _floor_half(a2)
    plus, minus = math.ceil(b + c), math.ceil(b - c)
    big_b = Fraction(plus + minus, 2)
    big_c = Fraction(plus - minus, 2)
    half = Fraction(1, 2)
    if plus % 2 == 0 and minus % 2 == 0:
        row, out = "i", (big_a1, big_a2, big_b, big_c)
    elif plus % 2 == 0:
        row, out = "ii", (big_a1 + half, big_a2, big_b - half, big_c + half)
    elif minus % 2 == 0:
        row, out = "iii", (big_a1, big_a2 + half, big_b - half, big_c - half)
    elif b > 0:
        row, out = "iv", (big_a1 + half, big_a2 + half, big_b - 1, big_c)
    else:
        row, out = "v", (big_a1 - half, big_a2 + half, big_b, big_c - 1)
    if any(v.denominator != 1 for v in out):  # pragma: no cover - guaranteed by the parity table
        raise RuntimeError(f"rounding row {row} produced a non-integer")
    return BalancedQuadruple(*(int(v) for v in out), row=row)


def check_rounding(
    a1: Number, a2: Number, b: Number, c: Number, x1: int, x2: int, eps: Number, q: BalancedQuadruple
) -> Report:
    """Independent check of every output constraint of ``round_balanced``.

    ``signs`` is the literal clause "``a_i' >= 0`` iff ``a_i >= 0``";
    ``signs_nonzero`` only asks a non-zero ``a_i'`` to carry the sign of
    ``a_i``.  The literal clause cannot always be met: for ``a_i`` in
    ``(-1/2, 0)`` the size bound forces ``a_i' = 0``.
    """
    a1, a2, b, c, eps = (exact(v) for v in (a1, a2, b, c, eps))
    report = Report("rounding")
    report.add("b_range", 0 <= q.bp <= math.ceil(b))
    report.add("c_range", 0 <= q.cp <= math.ceil(c))
    report.add("bc_sum", q.bp + q.cp <= math.ceil(b + c))
    report.add("a1_size", abs(q.a1p) <= ceil_eps(abs(a1), eps))
    report.add("a2_size", abs(q.a2p) <= ceil_eps(abs(a2), eps))
    report.add("signs", (q.a1p >= 0) == (a1 >= 0) and (q.a2p >= 0) == (a2 >= 0))
    report.add("signs_nonzero", all(v == 0 or (v > 0) == (a >= 0) for v, a in ((q.a1p, a1), (q.a2p, a2))))
    report.add("identity_1", 2 * q.a1p + q.bp - q.cp == 2 * x1)
    report.add("identity_2", 2 * q.a2p + q.bp + q.cp == 2 * x2)
    return report


def round_pair(a: Number, b: Number, x: int, eps: Number = ROUNDING_EPS) -> tuple[int, int]:
    """``(ceil_eps(a), largest even <= ceil_eps(b))``, which keeps ``2a'+b' >= 2x``."""
    a, b, eps = exact(a), exact(b), exact(eps)
    if not 0 < eps < Fraction(1, 3):
        raise InputError("eps must lie strictly between 0 and 1/3")
    if a < 0 or b < 0:
        raise InputError("a and b must be non-negative")
    if 2 * a + b < 2 * x:
        raise InputError("inputs violate 2a+b >= 2x")
    return ceil_eps(a, eps), largest_even_at_most(ceil_eps(b, eps))


# ---------------------------------------------------------------------------
# sparse D-balanced subgraph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Extraction:
    """Outcome of ``extract_d_balanced``: ``"i"`` (two matchings) or ``"ii"`` (a sparse subgraph)."""

    kind: str
    matchings: tuple[frozenset[Edge], frozenset[Edge]] = (frozenset(), frozenset())
    graph: Graph | None = None

    def to_json(self) -> dict[str, Any]:
        if self.kind == "i":
            return {"outcome": "i", "matchings": [[list(e) for e in sorted(m)] for m in self.matchings]}
        assert self.graph is not None
        return {"outcome": "ii", "edges": [list(e) for e in self.graph.edges()]}


def _masks(*sets: Iterable[int] | int) -> list[int]:
    return [s if isinstance(s, int) else mask_of(s) for s in sets]


def _check_partition(g: Graph, masks: Sequence[int]) -> None:
    union = 0
    for sm in masks:
        if union & sm:
            raise InputError("the four sets must be disjoint")
        union |= sm
    if union != g.full_mask:
        raise InputError("the four sets must cover every vertex")


def extract_d_balanced(
    g: Graph,
    a1: Iterable[int] | int,
    b1: Iterable[int] | int,
    a2: Iterable[int] | int,
    b2: Iterable[int] | int,
    d: int,
    *,
    strict: bool = True,
) -> Extraction:
    """Either matchings ``M_i`` in ``G[A_i]`` of size ``|A_i|-|B_i|`` or a sparse D-balanced subgraph.

    The subgraph only has edges inside some ``C_1 in {A1, B1}``, inside some
    ``C_2 in {A2, B2}`` and between ``W1`` and ``A2``.  Edge removals cancel
    opposite pairs of edge classes (lowest edges first); the remaining
    surplus is then trimmed according to ``t = e(B1, A2)``.  ``strict``
    enforces ``D >= 20``, which is only needed for the size bound in outcome (i).
    """
    am1, bm1, am2, bm2 = _masks(a1, b1, a2, b2)
    _check_partition(g, (am1, bm1, am2, bm2))
    rows = g.rows
    x = [am1.bit_count() - bm1.bit_count(), am2.bit_count() - bm2.bit_count()]
    if strict and d < 20:
        raise PreconditionError(f"D={d} is below 20", step="lemma_removeedges")
    for i, xi in enumerate(x, start=1):
        if not 0 <= 2 * xi <= d:
            raise PreconditionError(f"|A{i}|-|B{i}| = {xi} is outside [0, D/2]", step="lemma_removeedges")
    if count_between(rows, am1, bm2) > count_between(rows, bm1, am2):
        raise PreconditionError("e(A1,B2) must not exceed e(B1,A2)", step="lemma_removeedges")
    for i, am in enumerate((am1, am2), start=1):
        top = max(((rows[v] & am).bit_count() for v in bits(am)), default=0)
        if 2 * top > d:
            raise PreconditionError(f"maximum degree of G[A{i}] exceeds D/2", step="lemma_removeedges")
    if any(balance_defects(g, bits(am1), bits(bm1), bits(am2), bits(bm2), d)):
        raise PreconditionError("graph is not D-balanced for this partition", step="lemma_removeedges")

    groups = {
        "A1": g.edges_within(am1),
        "B1": g.edges_within(bm1),
        "A2": g.edges_within(am2),
        "B2": g.edges_within(bm2),
        "A1A2": g.edges_between(am1, am2),
        "B1B2": g.edges_between(bm1, bm2),
        "A1B2": g.edges_between(am1, bm2),
        "B1A2": g.edges_between(bm1, am2),
    }
    for one, two in (("A1", "B1"), ("A2", "B2"), ("A1A2", "B1B2"), ("A1B2", "B1A2")):
        k = min(len(groups[one]), len(groups[two]))
        groups[one] = groups[one][k:]
        groups[two] = groups[two][k:]
    h_edges = [e for part in groups.values() for e in part]
    if not groups["B1B2"]:
        return Extraction("ii", graph=g.spanning_subgraph(h_edges))
    # now e_H(A1,A2) = 0, and D-balancedness forces e_H(B1) = 0
    v1, v2 = d * x[0], d * x[1]
    t = len(groups["B1A2"])
    e_a1, e_a2 = groups["A1"], groups["A2"]
    if t >= v2:
        need_a1 = (v1 + v2) // 2
        if (v1 + v2) % 2 or len(e_a1) < need_a1:
            raise StepFailure("not enough edges inside A1", step="lemma_removeedges", need=need_a1)
        chosen = groups["B1A2"][:v2] + e_a1[:need_a1]
        return Extraction("ii", graph=g.spanning_subgraph(chosen))
    if t == 0:
        out = []
        for i, am in enumerate((am1, am2)):
            m = blossom_matching(g, am, target=x[i])
            if len(m) < x[i]:
                raise StepFailure(f"G[A{i + 1}] has no matching of size {x[i]}", step="lemma_removeedges")
            out.append(first_edges(m, x[i]))
        return Extraction("i", matchings=(out[0], out[1]))
    if (v1 + t) % 2 == 0:
        cross, n1, n2 = t, (v1 + t) // 2, (v2 - t) // 2
    else:
        cross, n1, n2 = t - 1, (v1 + t - 1) // 2, (v2 - t + 1) // 2
    if len(e_a1) < n1 or len(e_a2) < n2:
        raise StepFailure("not enough edges inside A1 or A2", step="lemma_removeedges")
    chosen = groups["B1A2"][:cross] + e_a1[:n1] + e_a2[:n2]
    return Extraction("ii", graph=g.spanning_subgraph(chosen))


# ---------------------------------------------------------------------------
# 2-balanced systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Sides:
    """The ordered partition as bitmasks."""

    a1: int
    b1: int
    a2: int
    b2: int

    @property
    def w1(self) -> int:
        return self.a1 | self.b1

    @property
    def w2(self) -> int:
        return self.a2 | self.b2

    def tuple(self) -> tuple[int, int, int, int]:
        return (self.a1, self.b1, self.a2, self.b2)


def _sides_of(spec: PartitionSpec) -> _Sides:
    if spec.shape != (0, 2):
        raise InputError(f"expected a partition of shape (0,2), got {spec.shape}")
    (a1, b1), (a2, b2) = spec.bipartite
    return _Sides(mask_of(a1), mask_of(b1), mask_of(a2), mask_of(b2))


def _is_two_balanced(p: PathSystem, s: _Sides) -> bool:
    return balance_defects(p, bits(s.a1), bits(s.b1), bits(s.a2), bits(s.b2), 2) == (0, 0)


def _try_system(edges: Iterable[Edge], s: _Sides, need_path: bool) -> PathSystem | None:
    try:
        p = PathSystem(edges)
    except InputError:
        return None
    if not _is_two_balanced(p, s):
        return None
    if need_path and count_class_paths(p, s.w1, s.w2) == 0:
        return None
    return p


def _matchings_of_size_two(edges: Sequence[Edge]) -> Iterator[tuple[Edge, Edge]]:
    for e, f in itertools.combinations(edges, 2):
        if not set(e) & set(f):
            yield e, f


def connectify_balanced(
    g: Graph,
    spec: PartitionSpec,
    m1: Iterable[Sequence[int]],
    m2: Iterable[Sequence[int]],
    gamma: Number | None = None,
    *,
    check_hypotheses: bool = True,
    budget: int = 20_000,
) -> PathSystem:
    """Turn the 2-balanced system ``M1 + M2`` into one that also contains a W1W2-path.

    First looks for a balanced pair of crossing edges (``A1A2`` with ``B1B2``,
    or ``A1B2`` with ``B1A2``).  Otherwise picks two independent edges ``N'``
    between some ``C1`` and ``C2`` and repairs the matchings so that balance
    is preserved (Case 1: some matching non-empty; Case 2: both empty).
    Arbitrary choices run in lexicographic order and each candidate is
    verified; ``budget`` caps the number of candidates.
    """
    s = _sides_of(spec)
    rows = g.rows
    m1 = frozenset(tuple(sorted(map(int, e))) for e in m1)
    m2 = frozenset(tuple(sorted(map(int, e))) for e in m2)
    for i, (m, am) in enumerate(((m1, s.a1), (m2, s.a2)), start=1):
        for u, v in m:
            if not (g.has_edge(u, v) and am >> u & 1 and am >> v & 1):
                raise PreconditionError(f"M{i} must consist of edges of G[A{i}]")
    base = _try_system(m1 | m2, s, need_path=False)
    if base is None:
        raise PreconditionError("M1 + M2 is not a 2-balanced path system")
    if check_hypotheses:
        require_regular(g)
        if vertex_connectivity(g) < 3:
            raise PreconditionError("graph is not 3-connected", step="lemma_ensureconnected")
        for i, (m, am) in enumerate(((m1, s.a1), (m2, s.a2)), start=1):
            if len(m) > ceil_eps(Fraction(count_within(rows, am), 5), ROUNDING_EPS):
                raise PreconditionError(f"|M{i}| exceeds ceil(e(A{i})/5) rounded", step="lemma_ensureconnected")
            if gamma is not None and len(m) > exact(gamma) * g.n:
                raise PreconditionError(f"|M{i}| exceeds gamma*n", step="lemma_ensureconnected")
    for p in itertools.islice(_connect_candidates(g, s, m1, m2), budget):
        found = _try_system(p, s, need_path=True)
        if found is not None:
            return found
    raise StepFailure("no balanced repair with a W1W2-path found", step="lemma_ensureconnected")


def _connect_candidates(g: Graph, s: _Sides, m1: frozenset[Edge], m2: frozenset[Edge]) -> Iterator[set[Edge]]:
    """Candidate edge sets in the order of the case analysis."""
    base = set(m1 | m2)
    # a balanced matching: one edge between the A-sides and one between the B-sides, or the mixed pair
    for (x1, x2), (y1, y2) in (((s.a1, s.a2), (s.b1, s.b2)), ((s.a1, s.b2), (s.b1, s.a2))):
        for e in g.edges_between(x1, x2):
            for f in g.edges_between(y1, y2):
                if not set(e) & set(f):
                    yield base | {e, f}
    sides = [(s.a1, s.b1, m1), (s.a2, s.b2, m2)]
    if len(m1) > len(m2):
        sides.reverse()
    (p1, q1, mm1), (p2, q2, mm2) = sides  # |mm1| <= |mm2|
    for c1, c2 in ((p1, p2), (p1, q2), (q1, p2), (q1, q2)):
        other1, other2 = (q1 if c1 == p1 else p1), (q2 if c2 == p2 else p2)
        for pair in _matchings_of_size_two(g.edges_between(c1, c2)):
            n_prime = set(pair)
            touched = {v for e in pair for v in e}
            if mm2:
                yield from _case_one(g, n_prime, touched, (p1, q1, mm1, c1, other1), (p2, q2, mm2, c2, other2))
            else:
                yield from _case_two(g, n_prime, (c1, other1), (c2, other2))


def _repairs(g: Graph, a_side: int, m: frozenset[Edge], c_is_a: bool, touched: set[int]) -> Iterator[set[Edge]]:
    """``M - f`` (when the crossing edges land in the A-side) or ``M + e`` (when they land in the B-side)."""
    if c_is_a:
        spanned = [f for f in sorted(m) if set(f) <= touched]
        for f in spanned + [f for f in sorted(m) if f not in spanned]:
            yield set(m) - {f}
    else:
        for e in g.edges_within(a_side):
            if e not in m:
                yield set(m) | {e}


def _case_one(g: Graph, n_prime: set[Edge], touched: set[int], first: tuple, second: tuple) -> Iterator[set[Edge]]:
    p1, _, mm1, c1, other1 = first
    p2, _, mm2, c2, _ = second
    for r2 in _repairs(g, p2, mm2, c2 == p2, touched):
        if mm1:
            for r1 in _repairs(g, p1, mm1, c1 == p1, touched):
                yield n_prime | r1 | r2
        else:
            for e in g.edges_within(other1):
                yield n_prime | r2 | {e}
    if not mm1:
        for e12 in g.edges_between(other1, c2):
            for e12p in sorted(n_prime):
                if set(e12) & set(e12p):
                    continue
                ends = {v for v in e12 + e12p if p2 >> v & 1}
                spanned = [f for f in sorted(mm2) if set(f) <= ends]
                if c2 == p2:
                    for f in spanned + [f for f in sorted(mm2) if f not in spanned]:
                        yield (set(mm2) | {e12, e12p}) - {f}
                else:
                    yield set(mm2) | {e12, e12p}


def _case_two(g: Graph, n_prime: set[Edge], first: tuple[int, int], second: tuple[int, int]) -> Iterator[set[Edge]]:
    (c1, y1), (c2, y2) = first, second
    in_y1, in_y2 = g.edges_within(y1), g.edges_within(y2)
    for e1 in in_y1:
        for e2 in in_y2:
            yield n_prime | {e1, e2}
    for inside, y_other, c_this in ((in_y1, y2, c1), (in_y2, y1, c2)):
        for e in inside:
            for cross in g.edges_between(y_other, c_this):
                for keep in sorted(n_prime):
                    if not set(keep) & set(cross):
                        yield {e, keep, cross}


def two_balanced_system(
    g: Graph, spec: PartitionSpec, *, check_hypotheses: bool = True, budget: int = 200_000
) -> PathSystem:
    """A 2-balanced path system whose ``W_i``-interiors are single-side matchings.

    Orchestrates ``extract_d_balanced``, ``round_balanced`` (with
    ``Delta = D/2``), ``spread_matching`` between ``W2`` and ``W1`` and
    ``three_matchings``.  If the result has a crossing edge it has a
    W1W2-path.  Class names are swapped internally where the construction
    assumes ``|A_i| >= |B_i|`` and ``e(A1,B2) <= e(B1,A2)``.
    """
    s = _sides_of(spec)
    d = require_regular(g)
    rows = g.rows
    # orient so that |A_i| >= |B_i| and e(A1,B2) <= e(B1,A2)
    a1, b1, a2, b2 = s.tuple()
    if a1.bit_count() < b1.bit_count():
        a1, b1 = b1, a1
    if a2.bit_count() < b2.bit_count():
        a2, b2 = b2, a2
    if count_between(rows, a1, b2) > count_between(rows, b1, a2):
        a1, b1, a2, b2 = a2, b2, a1, b1
    work = _Sides(a1, b1, a2, b2)
    delta = Fraction(d, 2)
    if check_hypotheses:
        for name, mask in (("A1", a1), ("B1", b1), ("A2", a2), ("B2", b2)):
            top = max(((rows[v] & mask).bit_count() for v in bits(mask)), default=0)
            if top > delta:
                raise PreconditionError(f"maximum degree inside {name} exceeds D/2", step="lemma_2balanced")
        cross_top = max(
            [(rows[v] & work.w2).bit_count() for v in bits(work.w1)]
            + [(rows[v] & work.w1).bit_count() for v in bits(work.w2)],
            default=0,
        )
        if cross_top > delta:
            raise PreconditionError("maximum degree between W1 and W2 exceeds D/2", step="lemma_2balanced")
    try:
        ext = extract_d_balanced(g, a1, b1, a2, b2, d, strict=check_hypotheses)
    except PreconditionError as exc:
        if check_hypotheses:
            raise
        raise StepFailure(str(exc), step="lemma_removeedges") from exc
    if ext.kind == "i":
        p = PathSystem(ext.matchings[0] | ext.matchings[1])
    else:
        h = ext.graph
        assert h is not None
        hrows = h.rows
        f1 = count_within(hrows, a1) - count_within(hrows, b1)
        f2 = count_within(hrows, a2) - count_within(hrows, b2)
        e_a1a2 = count_between(hrows, a1, a2)
        e_b1a2 = count_between(hrows, b1, a2)
        x1, x2 = a1.bit_count() - b1.bit_count(), a2.bit_count() - b2.bit_count()
        q = round_balanced(f1 / delta, f2 / delta, e_a1a2 / delta, e_b1a2 / delta, x1, x2, ROUNDING_EPS)
        try:
            m = spread_matching(h, work.w2, a1, b1, q.bp, q.cp, delta)
            p = three_matchings(h, work.w1, work.w2, m, abs(q.a1p), abs(q.a2p), delta, budget=budget)
        except PreconditionError as exc:
            raise StepFailure(str(exc), step="lemma_2balanced") from exc
    if not _is_two_balanced(p, work):
        raise StepFailure("assembled system is not 2-balanced", step="lemma_2balanced")
    if p.count_between(work.w1, work.w2) and not count_class_paths(p, work.w1, work.w2):
        raise StepFailure("crossing edges without a W1W2-path", step="lemma_2balanced")
    return p
