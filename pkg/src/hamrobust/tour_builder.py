"""Case pipelines that assemble small path systems into tours.

Three partition shapes are handled: four expander classes (``tour_40``),
two bipartite classes (``tour_02``), and two expander classes ``V1, V2``
plus one bipartite class ``W = A + B`` (``build_p123``).  For the last shape
the target is a path system with

* (P1) at most ``ell + m + 6`` edges, where ``(ell, m)`` is the character
  of ``G`` with ``Delta = D/2``;
* (P2) balance ``e(A) - e(B) + (e(A,U) - e(B,U))/2`` equal to ``|A| - |B|``;
* (P3) an Euler tour in the reduced multigraph over ``{V1, V2, W}``.

Builders re-validate what they return with the validators of
``path_system``, which share no code with the constructions.  A sub-step
that cannot be carried out raises ``StepFailure`` naming it; a search that
runs out of nodes raises ``Indeterminate``.  Where a construction leaves a
choice open (which edge to drop, which connector to extend) the candidates
are tried in lexicographic order and the first one that validates is used.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .balancer import connectify_balanced, two_balanced_system
from .errors import (
    Indeterminate,
    InputError,
    PreconditionError,
    SearchFailure,
    StepFailure,
)
from .graph_core import Edge, Graph, bits, count_between, count_within, mask_of, norm_edge, vertex_connectivity
from .matching_engine import (
    as_matching,
    extend_matching_casei,
    hopcroft_karp,
    hub_cherries,
    hub_paths,
    matched_vertices,
    matching_or_hubs,
    spread_matching,
)
from .oracles import complete_to_hamilton, longest_cycle
from .path_system import (
    PathSystem,
    character_of,
    check_p123,
    check_two_balanced,
    check_v_tour,
    count_class_paths,
    is_euler,
    reduced_multigraph,
)
from .reports import Report
from .robustness import PartitionSpec, aim_degree_conditions, exact, refine_partition, require_regular

Number = int | float | Fraction

DEFAULT_BUDGET = 200_000
SEARCH_BUDGET = 2_000_000
TOUR_CONTACT = 33
MATCHING_THRESHOLD = 6
COMPLETION_LIMIT = 16


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectorReport:
    """A basic connector with its balance and the degree profile it leaves on ``A``."""

    system: PathSystem
    balance: Fraction
    profile: tuple[int, int]
    ones: frozenset[int] = frozenset()
    twos: frozenset[int] = frozenset()

    def to_json(self) -> dict[str, Any]:
        return {
            "system": self.system.to_json(),
            "balance": str(self.balance),
            "profile": list(self.profile),
            "A1": sorted(self.ones),
            "A2": sorted(self.twos),
        }


@dataclass(frozen=True)
class AccBound:
    """Lower bound on what ``G[A]`` accommodates, the case that gave it and a witness."""

    bound: int
    witness: PathSystem
    case: str
    hubs: tuple[int, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {"bound": self.bound, "case": self.case, "witness": self.witness.to_json(), "hubs": list(self.hubs)}


@dataclass
class Construction:
    """A validated path system together with the step that produced it."""

    system: PathSystem
    step: str
    report: Report
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "system": self.system.to_json(),
            "validator_report": self.report.to_json(),
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }


@dataclass
class PipelineOutcome:
    """What ``hamiltonicity_pipeline`` achieved.

    ``outcome`` is one of ``"hamilton_cycle"``, ``"validated_system"``
    (no completion attempted), ``"not_completed"`` (completion proved
    impossible) or ``"unsupported"``.
    """

    outcome: str
    shape: tuple[int, int]
    system: PathSystem | None = None
    cycle: list[int] | None = None
    step: str | None = None
    report: Report | None = None
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "shape": list(self.shape),
            "step": self.step,
            "system": self.system.to_json() if self.system is not None else None,
            "cycle": self.cycle,
            "validator_report": self.report.to_json() if self.report is not None else None,
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------


def _try_paths(edges: Iterable[Sequence[int]]) -> PathSystem | None:
    try:
        return PathSystem(edges)
    except InputError:
        return None


@dataclass(frozen=True)
class _Parts:
    """``V1, V2, A, B`` as bitmasks."""

    v1: int
    v2: int
    a: int
    b: int

    @property
    def u(self) -> int:
        return self.v1 | self.v2

    @property
    def w(self) -> int:
        return self.a | self.b

    def classes(self) -> list[list[int]]:
        return [list(bits(self.v1)), list(bits(self.v2)), list(bits(self.w))]

    def swapped(self) -> _Parts:
        return _Parts(self.v2, self.v1, self.a, self.b)

    def balance(self, p: PathSystem) -> Fraction:
        inner = p.count_within(self.a) - p.count_within(self.b)
        cross = p.count_between(self.a, self.u) - p.count_between(self.b, self.u)
        return Fraction(inner) + Fraction(cross, 2)

    def accepts(self, p: PathSystem, want: Fraction | int) -> bool:
        return self.balance(p) == want and is_euler(p, self.classes())


def _parts_of(spec: PartitionSpec) -> _Parts:
    if spec.shape != (2, 1):
        raise InputError(f"expected a partition of shape (2,1), got {spec.shape}")
    v1, v2 = (mask_of(c) for c in spec.expander)
    a, b = (mask_of(c) for c in spec.bipartite[0])
    return _Parts(v1, v2, a, b)


def _first_valid(candidates: Iterable[Iterable[Edge]], parts: _Parts, want: Fraction | int) -> PathSystem | None:
    for edges in candidates:
        p = _try_paths(edges)
        if p is not None and parts.accepts(p, want):
            return p
    return None


def _side_edges(m: Iterable[Edge], side: int) -> list[Edge]:
    return sorted(e for e in m if (side >> e[0]) & 1 or (side >> e[1]) & 1)


def _inside(g: Graph, mask: int) -> Graph:
    return g.spanning_subgraph(g.edges_within(mask))


def _path_subsets(
    cands: Sequence[Edge],
    max_size: int,
    budget: int,
    group: Sequence[int] | None = None,
    load_cap: int | None = None,
    twos_cap: int | None = None,
    step: str = "path_search",
) -> Iterator[list[Edge]]:
    """Every path system made of at most ``max_size`` candidate edges, in preorder.

    With ``group`` (a class label per vertex, ``-1`` for none) the degree sum
    of each class is kept at most ``load_cap`` and its number of degree-two
    vertices at most ``twos_cap``.  Raises ``Indeterminate`` after ``budget``
    nodes.
    """
    deg: dict[int, int] = {}
    other: dict[int, int] = {}
    chosen: list[Edge] = []
    load: dict[int, int] = {}
    twos: dict[int, int] = {}
    nodes = 0

    def grouped(v: int) -> int:
        return group[v] if group is not None else -1

    def rec(start: int) -> Iterator[list[Edge]]:
        nonlocal nodes
        for i in range(start, len(cands)):
            a, b = cands[i]
            da, db = deg.get(a, 0), deg.get(b, 0)
            if da >= 2 or db >= 2:
                continue
            ea, eb = other.get(a, a), other.get(b, b)
            if ea == b:
                continue
            ga, gb = grouped(a), grouped(b)
            if group is not None:
                new_load = dict(load)
                new_twos = dict(twos)
                for gv, dv in ((ga, da), (gb, db)):
                    if gv < 0:
                        continue
                    new_load[gv] = new_load.get(gv, 0) + 1
                    if dv == 1:
                        new_twos[gv] = new_twos.get(gv, 0) + 1
                if load_cap is not None and any(x > load_cap for x in new_load.values()):
                    continue
                if twos_cap is not None and any(x > twos_cap for x in new_twos.values()):
                    continue
            nodes += 1
            if nodes > budget:
                raise Indeterminate("edge-subset search budget exhausted", step=step, budget=budget)
            saved = (other.get(a), other.get(b), other.get(ea), other.get(eb))
            saved_load, saved_twos = dict(load), dict(twos)
            if group is not None:
                load.clear(), load.update(new_load)
                twos.clear(), twos.update(new_twos)
            deg[a], deg[b] = da + 1, db + 1
            other.pop(a, None)
            other.pop(b, None)
            other[ea], other[eb] = eb, ea
            chosen.append((a, b))
            yield list(chosen)
            if len(chosen) < max_size:
                yield from rec(i + 1)
            chosen.pop()
            deg[a], deg[b] = da, db
            for key, val in zip((ea, eb, a, b), (saved[2], saved[3], saved[0], saved[1])):
                if val is None:
                    other.pop(key, None)
                else:
                    other[key] = val
            load.clear(), load.update(saved_load)
            twos.clear(), twos.update(saved_twos)

    yield from rec(0)


# ---------------------------------------------------------------------------
# tours over three parts and joining a split part
# ---------------------------------------------------------------------------


def _part_masks(g: Graph, parts: Sequence[Iterable[int] | int]) -> list[int]:
    masks = [p if isinstance(p, int) else mask_of(p) for p in parts]
    seen = 0
    for m in masks:
        if m & seen:
            raise InputError("parts must be disjoint")
        if m >> g.n:
            raise InputError("a part mentions a vertex outside the graph")
        seen |= m
    return masks


def clique_tour_search(g: Graph, parts: Sequence[Iterable[int] | int], *, budget: int = DEFAULT_BUDGET) -> PathSystem:
    """A path system of at most four edges between distinct parts of a three-way partition
    whose reduced multigraph has an Euler tour, with ``c1 + 2*c2`` in ``{2, 4}`` and
    ``c2 <= 1`` for every part (``c_i`` = vertices of the part with degree ``i``).

    Subsets are enumerated in lexicographic order; the first qualifying one is
    returned.  ``SearchFailure`` when none exists, ``Indeterminate`` on budget.
    """
    masks = _part_masks(g, parts)
    if len(masks) != 3:
        raise InputError("clique_tour_search needs exactly three parts")
    if any(m.bit_count() < 3 for m in masks):
        raise InputError("every part needs at least three vertices")
    label = [-1] * g.n
    for i, m in enumerate(masks):
        for v in bits(m):
            label[v] = i
    cross = sorted((u, v) for u, v in g.edges() if label[u] >= 0 and label[v] >= 0 and label[u] != label[v])
    classes = [list(bits(m)) for m in masks]
    for chosen in _path_subsets(cross, 4, budget, label, 4, 1, step="lemma_cliquetour"):
        if len(chosen) < 3:
            continue
        p = PathSystem(chosen)
        loads = [sum(p.degree(v) for v in c) for c in classes]
        if all(x in (2, 4) for x in loads) and is_euler(p, classes):
            return p
    raise SearchFailure("no cross-edge path system with an Euler tour exists", step="lemma_cliquetour")


def join_components(
    g: Graph,
    partition: PartitionSpec | Sequence[Iterable[int]],
    p_prime: PathSystem,
    merged: tuple[int, int],
    m: Iterable[Sequence[int]],
) -> PathSystem:
    """Extend a tour over the partition with classes ``merged`` united to a tour over
    the refined partition, adding one edge of ``m`` (odd degrees) or two (even).

    ``m`` must be a matching between the two merged classes with at least
    ``|V(p_prime) & (U+V)| + 2`` edges.
    """
    classes = [list(c) for c in (partition.classes() if isinstance(partition, PartitionSpec) else partition)]
    i, j = merged
    if i == j or not (0 <= i < len(classes) and 0 <= j < len(classes)):
        raise InputError(f"bad merged pair {merged}")
    um, vm = mask_of(classes[i]), mask_of(classes[j])
    coarse = [c for k, c in enumerate(classes) if k not in (i, j)] + [sorted(classes[i] + classes[j])]
    if not is_euler(p_prime, coarse):
        raise PreconditionError("p_prime is not a tour over the merged partition", step="prop_plusmatching")
    matching = sorted(as_matching(m))
    for a, b in matching:
        if not g.has_edge(a, b) or not (((um >> a) & 1 and (vm >> b) & 1) or ((um >> b) & 1 and (vm >> a) & 1)):
            raise PreconditionError(f"{(a, b)} is not an edge between the merged classes", step="prop_plusmatching")
    touched = p_prime.vertex_mask
    need = (touched & (um | vm)).bit_count() + 2
    if len(matching) < need:
        raise PreconditionError(f"matching has {len(matching)} edges, need at least {need}", step="prop_plusmatching")
    free = [e for e in matching if not (touched >> e[0]) & 1 and not (touched >> e[1]) & 1]
    degrees = reduced_multigraph(p_prime, classes).degrees()
    added = free[:1] if degrees[i] % 2 else free[:2]
    p = p_prime.union(added)
    if not is_euler(p, classes):
        raise StepFailure("joined system is not a tour over the refined partition", step="prop_plusmatching")
    return p


# ---------------------------------------------------------------------------
# four expander classes
# ---------------------------------------------------------------------------


def _common_hypotheses(g: Graph, step: str) -> int:
    d = require_regular(g)
    if 4 * d < g.n:
        raise PreconditionError(f"degree {d} is below n/4", step=step)
    if vertex_connectivity(g) < 3:
        raise PreconditionError("graph is not 3-connected", step=step)
    return d


def tour_40(
    g: Graph,
    spec: PartitionSpec,
    *,
    contact: int = TOUR_CONTACT,
    check_hypotheses: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> PathSystem:
    """A tour for a partition into four expander classes with at most ``contact``
    vertices of contact per class.

    Case 1: some pair of classes spans a matching of at least six edges;
    merge that pair, run ``clique_tour_search`` on the three resulting parts
    and split the pair again with ``join_components``.  Case 2: strip the
    edges inside classes from a longest cycle supplied by the oracle module.
    """
    if spec.shape != (4, 0):
        raise InputError(f"expected a partition of shape (4,0), got {spec.shape}")
    spec.check_cover(g.n)
    if check_hypotheses:
        _common_hypotheses(g, "lemma_(4,0)")
    gamma = Fraction(contact, g.n)
    masks = spec.class_masks()
    for i, j in itertools.combinations(range(4), 2):
        m = hopcroft_karp(g, masks[i], masks[j])
        if len(m) < MATCHING_THRESHOLD:
            continue
        merged = [masks[k] for k in range(4) if k not in (i, j)] + [masks[i] | masks[j]]
        try:
            p_prime = clique_tour_search(g, merged, budget=budget)
        except SearchFailure:
            continue
        p = join_components(g, spec, p_prime, (i, j), m)
        if check_v_tour(g, spec, p, gamma).holds:
            return p
    cycle = longest_cycle(g, budget)
    label = spec.class_index(g.n)
    ring = list(zip(cycle, cycle[1:] + cycle[:1]))
    kept = [norm_edge(a, b) for a, b in ring if label[a] != label[b]]
    if len(kept) == len(ring):
        raise StepFailure("longest cycle has no edge inside a class", step="lemma_(4,0)")
    p = PathSystem(kept)
    report = check_v_tour(g, spec, p, gamma)
    if not report.holds:
        raise StepFailure("stripped longest cycle is not a tour", step="lemma_(4,0)", failed=report.failed)
    return p


# ---------------------------------------------------------------------------
# two bipartite classes
# ---------------------------------------------------------------------------


def _oriented_02(spec: PartitionSpec) -> PartitionSpec:
    if spec.shape != (0, 2):
        raise InputError(f"expected a partition of shape (0,2), got {spec.shape}")
    sides = [(a, b) if len(a) >= len(b) else (b, a) for a, b in spec.bipartite]
    return PartitionSpec.make([], sides, spec.params)


def tour_02(
    g: Graph, spec: PartitionSpec, *, check_hypotheses: bool = True, budget: int = DEFAULT_BUDGET
) -> PathSystem:
    """A 2-balanced path system containing a W1W2-path.

    Runs ``two_balanced_system``; when the result has no path between the
    two classes, ``connectify_balanced`` repairs it using the edges of the
    result inside ``A1`` and ``A2`` (the larger sides).
    """
    spec.check_cover(g.n)
    oriented = _oriented_02(spec)
    if check_hypotheses:
        _common_hypotheses(g, "lemma_(0,2)")
    p = two_balanced_system(g, oriented, check_hypotheses=check_hypotheses, budget=budget)
    (a1, b1), (a2, b2) = oriented.bipartite
    w1, w2 = mask_of(a1 + b1), mask_of(a2 + b2)
    if count_class_paths(p, w1, w2) == 0:
        m1 = [e for e in p if mask_of(a1) >> e[0] & 1 and mask_of(a1) >> e[1] & 1]
        m2 = [e for e in p if mask_of(a2) >> e[0] & 1 and mask_of(a2) >> e[1] & 1]
        if len(m1) + len(m2) != len(p):
            raise StepFailure("balanced system has edges outside G[A1] + G[A2]", step="lemma_ensureconnected")
        try:
            p = connectify_balanced(g, oriented, m1, m2, check_hypotheses=check_hypotheses, budget=budget)
        except PreconditionError as exc:
            raise StepFailure(str(exc), step="lemma_ensureconnected") from exc
    report = check_two_balanced(g, spec, p)
    if not report.holds:
        raise StepFailure("assembled system is not 2-balanced and connected", step="lemma_(0,2)", failed=report.failed)
    return p


# ---------------------------------------------------------------------------
# basic connectors and accommodation
# ---------------------------------------------------------------------------


def _connector_candidates(g: Graph, parts: _Parts) -> list[Edge]:
    """Cross edges ordered A-U first, then V1-V2, then B-U (high balance first)."""
    return g.edges_between(parts.a, parts.u) + g.edges_between(parts.v1, parts.v2) + g.edges_between(parts.b, parts.u)


def _connectors(g: Graph, parts: _Parts, budget: int) -> Iterator[ConnectorReport]:
    """All basic connectors, in the enumeration order of ``_connector_candidates``."""
    classes = parts.classes()
    cands = _connector_candidates(g, parts)
    for chosen in _path_subsets(cands, 4, budget, step="prop_BC"):
        if len(chosen) < 2:
            continue
        to_a = sum(1 for e in chosen if (parts.a >> e[0]) & 1 or (parts.a >> e[1]) & 1)
        to_b = sum(1 for e in chosen if (parts.b >> e[0]) & 1 or (parts.b >> e[1]) & 1)
        bal = Fraction(to_a - to_b, 2)
        if abs(bal) > 2:
            continue
        p = PathSystem(chosen)
        ones = frozenset(v for v in bits(parts.a & p.vertex_mask) if p.degree(v) == 1)
        twos = frozenset(v for v in bits(parts.a & p.vertex_mask) if p.degree(v) == 2)
        a1, a2 = len(ones), len(twos)
        if a2 > 1 or bal not in (a1 + 2 * a2 - 2, a1 + 2 * a2 - 1):
            continue
        if not is_euler(p, classes):
            continue
        yield ConnectorReport(p, bal, (a1, a2), ones, twos)


def basic_connector_search(
    g: Graph, spec: PartitionSpec, *, balance: Number | None = None, budget: int = DEFAULT_BUDGET
) -> ConnectorReport:
    """A basic connector maximising the balance and then ``a1``.

    With ``balance`` given, only connectors of exactly that balance qualify.
    The search stops at the best possible score ``(2, 4)``; when the node
    budget runs out the best connector seen so far is returned, and
    ``Indeterminate`` is raised only if none was seen.
    """
    parts = _parts_of(spec)
    want = None if balance is None else exact(balance)
    best: ConnectorReport | None = None
    try:
        for c in _connectors(g, parts, budget):
            if want is not None and c.balance != want:
                continue
            if best is None or (c.balance, c.profile[0]) > (best.balance, best.profile[0]):
                best = c
            if best.profile[0] == 4 and (want is not None or best.balance == 2):
                break
    except Indeterminate:
        if best is None:
            raise
    if best is None:
        raise SearchFailure("no basic connector exists", step="prop_BC", balance=None if want is None else str(want))
    return best


def _accommodates(p: PathSystem, ones: int, twos: int) -> bool:
    if p.vertex_mask & twos:
        return False
    if any(p.degree(v) > 1 for v in bits(ones & p.vertex_mask)):
        return False
    return not any((ones >> w[0]) & 1 and (ones >> w[-1]) & 1 for w in p.paths())


def acc_bound(
    g_a: Graph,
    ones: Iterable[int],
    twos: Iterable[int],
    ell: int,
    k: int,
    delta: Number,
    delta_prime: Number,
) -> AccBound:
    """Lower bound on the accommodation number of ``g_a`` for ``(A1, A2) = (ones, twos)``.

    ``g_a`` holds the edges of ``G[A]`` (vertex ids as in the host graph).
    Case I: bound ``ell - a1 - 2*a2 + k + 2``; case II (``k = 1``, profile
    ``(1, 0)``): ``ell + 1``; case III (``k = 1``, few vertices, all edges at
    ``ell`` hubs): ``ell - a2``.  The witness accommodates ``(A1, A2)`` and
    has at least ``bound`` edges.
    """
    om, tm = mask_of(ones), mask_of(twos)
    if om & tm:
        raise InputError("A1 and A2 must be disjoint")
    a1, a2 = om.bit_count(), tm.bit_count()
    delta_q, delta_p = exact(delta), exact(delta_prime)
    if k not in (0, 1):
        raise InputError("k must be 0 or 1")
    if ell + k < 2:
        raise PreconditionError("need ell + k >= 2", step="lemma_accommodation")
    if a1 < k:
        raise PreconditionError("need a1 >= k", step="lemma_accommodation")
    if delta_p < 3 * ell + a1 + a2:
        raise PreconditionError("need delta' >= 3 ell + a1 + a2", step="lemma_accommodation")
    outcome = matching_or_hubs(g_a, ell, delta_q, delta_p)
    if outcome.kind == "i":
        m = sorted(outcome.matching)
        kept = [e for e in m if not (om >> e[0] & 1 and om >> e[1] & 1) and not (tm >> e[0] & 1 or tm >> e[1] & 1)]
        if math.ceil(a1 / 2) + a2 >= k + 1:
            return AccBound(ell - a1 - 2 * a2 + k + 2, PathSystem(kept), "I")
        if k == 0:
            return AccBound(ell + 2, PathSystem(m + [outcome.extra_edge]), "I")
        return AccBound(ell + 1, PathSystem(kept), "II")
    hubs = outcome.hubs
    stars = hub_cherries(g_a, g_a.full_mask, hubs, single=om, skip=tm, forbidden=om | tm)
    witness = PathSystem(stars)
    if max(ell, a1 + a2) >= k + 2:
        return AccBound(ell - a1 - 2 * a2 + k + 2, witness, "I", hubs)
    if not outcome.covers_all_edges:
        raise StepFailure("hub vertices do not cover G[A]", step="lemma_accommodation")
    return AccBound(ell - a2, witness, "III", hubs)


def _accommodate(g: Graph, side: int, ones: int, twos: int, t: int, budget: int) -> PathSystem | None:
    """A path system of exactly ``t`` edges inside ``side`` accommodating ``(ones, twos)``."""
    if t == 0:
        return PathSystem()
    cands = [e for e in g.edges_within(side & ~twos)]
    deg: dict[int, int] = {}
    other: dict[int, int] = {}
    chosen: list[Edge] = []
    nodes = 0

    def cap(v: int) -> int:
        return 1 if (ones >> v) & 1 else 2

    def rec(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == t:
            return True
        if len(cands) - start < t - len(chosen):
            return False
        for i in range(start, len(cands)):
            a, b = cands[i]
            da, db = deg.get(a, 0), deg.get(b, 0)
            if da >= cap(a) or db >= cap(b):
                continue
            ea, eb = other.get(a, a), other.get(b, b)
            if ea == b or ((ones >> ea) & 1 and (ones >> eb) & 1):
                continue
            nodes += 1
            if nodes > budget:
                raise Indeterminate("accommodation search budget exhausted", step="prop_addpaths", budget=budget)
            saved = (other.get(a), other.get(b), other.get(ea), other.get(eb))
            deg[a], deg[b] = da + 1, db + 1
            other.pop(a, None)
            other.pop(b, None)
            other[ea], other[eb] = eb, ea
            chosen.append((a, b))
            if rec(i + 1):
                return True
            chosen.pop()
            deg[a], deg[b] = da, db
            for key, val in zip((ea, eb, a, b), (saved[2], saved[3], saved[0], saved[1])):
                if val is None:
                    other.pop(key, None)
                else:
                    other[key] = val
        return False

    return PathSystem(chosen) if rec(0) else None


def _trim(p: PathSystem, t: int) -> PathSystem:
    """Drop edges (pendant ones first, highest first) until ``t`` remain."""
    edges = set(p.edges)
    while len(edges) > t:
        q = PathSystem(edges)
        ends = set(q.endpoints())
        pendant = sorted((e for e in edges if e[0] in ends or e[1] in ends), reverse=True)
        edges.discard(pendant[0])
    return PathSystem(edges)


def extend_connector(
    g: Graph,
    spec: PartitionSpec,
    connector: ConnectorReport,
    t: int,
    *,
    witness: PathSystem | None = None,
    budget: int = DEFAULT_BUDGET,
) -> PathSystem:
    """Connector plus ``|t|`` accommodating edges inside ``A`` (``t >= 0``) or ``B`` (``t < 0``).

    The balance moves by exactly ``t`` and the Euler tour is kept.  A
    ``witness`` (for example from ``acc_bound``) is trimmed to size when it
    has enough edges; otherwise the edges are found by a budgeted search.
    """
    parts = _parts_of(spec)
    p0 = connector.system
    side = parts.a if t >= 0 else parts.b
    vm = p0.vertex_mask & side
    ones = mask_of(v for v in bits(vm) if p0.degree(v) == 1)
    twos = mask_of(v for v in bits(vm) if p0.degree(v) == 2)
    need = abs(t)
    extra: PathSystem | None = None
    if witness is not None:
        if not witness.in_graph(g) or witness.vertex_mask & ~side:
            raise InputError("witness must lie inside the chosen side")
        if not _accommodates(witness, ones, twos):
            raise PreconditionError("witness does not accommodate the connector", step="prop_addpaths")
        if len(witness) >= need:
            extra = _trim(witness, need)
    if extra is None:
        extra = _accommodate(g, side, ones, twos, need, budget)
    if extra is None:
        raise PreconditionError(f"G[{'A' if t >= 0 else 'B'}] does not accommodate {need} edges", step="prop_addpaths")
    p = p0.union(extra)
    if not parts.accepts(p, connector.balance + t):
        raise StepFailure("extended connector lost the tour or the balance", step="prop_addpaths")
    return p


# ---------------------------------------------------------------------------
# the dense case: a large matching between A and V1 + V2
# ---------------------------------------------------------------------------


@dataclass
class _Dense:
    """Shared data of the dense constructions."""

    g: Graph
    parts: _Parts
    ell: int
    delta: Fraction
    delta_prime: Fraction
    g_a: Graph

    def hubs_or_matching(self, ell: int | None = None):
        ell = self.ell if ell is None else ell
        try:
            return matching_or_hubs(self.g_a, ell, self.delta, self.delta_prime)
        except PreconditionError as exc:
            raise StepFailure(str(exc), step="lemma_goodmatching2") from exc

    def with_parts(self, parts: _Parts) -> _Dense:
        return _Dense(self.g, parts, self.ell, self.delta, self.delta_prime, self.g_a)


def _hub_paths(dense: _Dense, m: Iterable[Edge], hubs: Sequence[int], r: int) -> PathSystem | None:
    try:
        return hub_paths(dense.g, dense.parts.u, dense.parts.a, m, hubs, r, strict=False)
    except (PreconditionError, StepFailure, InputError):
        return None


def _lemma_22(dense: _Dense, m: Iterable[Edge]) -> PathSystem:
    """``M`` (even, positive on both sides) plus ``ell`` edges of ``G[A]``; balance ``ell + |M|/2``."""
    parts, ell = dense.parts, dense.ell
    m = sorted(as_matching(m))
    m1, m2 = _side_edges(m, parts.v1), _side_edges(m, parts.v2)
    if not m1 or not m2 or len(m1) % 2 or len(m2) % 2:
        raise PreconditionError("both sides of M must be even and positive", step="lemma_2,2")
    want = ell + Fraction(len(m), 2)
    outcome = dense.hubs_or_matching()
    if outcome.kind == "i":
        mp = sorted(outcome.matching)
        u, v = outcome.extra_edge
        base = set(m) | set(mp)
        with_v = sorted(itertools.combinations(mp, 2), key=lambda fs: (v not in fs[0] + fs[1], fs))
        cands = itertools.chain(
            (base - {f} for f in mp),
            ((base | {norm_edge(u, v)}) - set(fs) for fs in with_v),
        )
        p = _first_valid(cands, parts, want)
    else:
        p = _hub_paths(dense, m, outcome.hubs, 0)
        if p is not None and not parts.accepts(p, want):
            p = None
    if p is None:
        raise StepFailure("no extension of M by edges of G[A] is a tour", step="lemma_2,2")
    return p


def _lemma_33(dense: _Dense, m: Iterable[Edge]) -> PathSystem:
    """``M`` with both sides odd and at least three; balance ``ell + |M|/2``."""
    g, parts, ell = dense.g, dense.parts, dense.ell
    m = sorted(as_matching(m))
    m1, m2 = _side_edges(m, parts.v1), _side_edges(m, parts.v2)
    if len(m1) < 3 or len(m2) < 3 or len(m1) % 2 == 0 or len(m2) % 2 == 0:
        raise PreconditionError("both sides of M must be odd and at least three", step="lemma_3,3")
    want = ell + Fraction(len(m), 2)
    pairs = list(itertools.product(m1, m2))
    if ell == 0:
        spare = [e for e in g.edges_between(parts.u, parts.a) if e not in set(m)]

        def flips() -> Iterator[set[Edge]]:
            for plus in spare:
                minus_side = m2 if (parts.v1 >> plus[0] & 1 or parts.v1 >> plus[1] & 1) else m1
                for minus in minus_side:
                    yield (set(m) | {plus}) - {minus}

        p = _first_valid(flips(), parts, want)
    else:
        outcome = dense.hubs_or_matching()
        if outcome.kind == "i":
            base = set(m) | set(outcome.matching)
            p = _first_valid((base - {e1, e2} for e1, e2 in pairs), parts, want)
        else:
            hub_mask = mask_of(outcome.hubs)
            order = sorted(pairs, key=lambda pr: (-sum(1 for e in pr for x in e if hub_mask >> x & 1), pr))
            p = None
            for e1, e2 in order:
                rest = set(m) - {e1, e2}
                if not hub_mask & ~mask_of(matched_vertices(rest)):
                    continue
                q = _hub_paths(dense, rest, outcome.hubs, 1)
                if q is not None and parts.accepts(q, want):
                    p = q
                    break
    if p is None:
        raise StepFailure("no admissible pair of matching edges to remove", step="lemma_3,3")
    return p


def _lemma_13(dense: _Dense, m2: Iterable[Edge], e1: Edge) -> PathSystem:
    """``M2`` (odd, at least three, on the ``V2`` side) plus one ``V1A`` edge ``e1``."""
    g, parts, ell = dense.g, dense.parts, dense.ell
    m2 = sorted(as_matching(m2))
    e1 = norm_edge(*e1)
    m_size = len(m2) + 1
    want = ell + Fraction(m_size, 2)
    outside = g.full_mask & ~parts.v1
    links = [e for e in g.edges_between(parts.v1, outside) if not set(e) & set(e1)]
    for link in links:
        v1, v = (link[0], link[1]) if parts.v1 >> link[0] & 1 else (link[1], link[0])
        p = None
        if parts.a >> v & 1:
            at_v = [e for e in m2 if v in e]
            for e2 in at_v + [e for e in m2 if e not in at_v]:
                try:
                    p = _lemma_22(dense, (set(m2) | {e1, norm_edge(v1, v)}) - {e2})
                except (StepFailure, PreconditionError):
                    continue
                if parts.accepts(p, want):
                    break
                p = None
        elif parts.v2 >> v & 1:
            at_v = [e for e in m2 if v in e]
            for e2 in at_v + [e for e in m2 if e not in at_v]:
                v2 = e2[0] if parts.v2 >> e2[0] & 1 else e2[1]
                moved = (1 << v) | (1 << v2)
                shifted = dense.with_parts(_Parts(parts.v1 | moved, parts.v2 & ~moved, parts.a, parts.b))
                try:
                    q = _lemma_22(shifted, set(m2) | {e1})
                except (StepFailure, PreconditionError):
                    continue
                q = _try_paths(set(q.edges) | {norm_edge(v1, v)})
                if q is not None and parts.accepts(q, want):
                    p = q
                    break
        else:
            p = _lemma_13_b_side(dense, m2, e1, norm_edge(v1, v), want)
        if p is not None:
            return p
    raise StepFailure("no edge out of V1 completes the tour", step="lemma_1,3")


def _lemma_13_b_side(dense: _Dense, m2: list[Edge], e1: Edge, link: Edge, want: Fraction) -> PathSystem | None:
    g, parts, ell = dense.g, dense.parts, dense.ell
    outcome = dense.hubs_or_matching()
    if outcome.kind == "i":
        try:
            p0 = extend_matching_casei(g, parts.u, parts.a, set(m2) | {e1}, outcome.matching, outcome.extra_edge)
        except (StepFailure, PreconditionError):
            return None
        return _first_valid(((set(p0.edges) | {link}) - {e} for e in m2), parts, want)
    spare = [e for e in g.edges_between(parts.v2, parts.a) if e not in set(m2)]
    covered = mask_of(matched_vertices(set(m2) | {e1}))
    if ell == 0:
        return _first_valid((set(m2) | {e1, link, e} for e in spare), parts, want)
    if ell == 1:
        x1 = outcome.hubs[0]
        leaves = [y for y in bits(g.rows[x1] & parts.a & ~covered) if y != x1]
        cands: list[set[Edge]] = []
        if x1 not in e1:
            at_x = [e for e in m2 if x1 in e]
            for e2 in at_x + [e for e in m2 if e not in at_x]:
                for w1, y1 in itertools.combinations(leaves, 2):
                    cands.append((set(m2) | {e1, link, norm_edge(w1, x1), norm_edge(x1, y1)}) - {e2})
        else:
            for e in spare:
                for y1 in leaves:
                    cands.append(set(m2) | {e1, link, e, norm_edge(x1, y1)})
        return _first_valid(cands, parts, want)
    hub_mask = mask_of(outcome.hubs)
    for e2 in m2:
        rest = (set(m2) | {e1}) - {e2}
        if not hub_mask & ~mask_of(matched_vertices(rest)):
            continue
        p0 = _hub_paths(dense, rest, outcome.hubs, 1)
        if p0 is None:
            continue
        p = _try_paths(set(p0.edges) | {link})
        if p is not None and parts.accepts(p, want):
            return p
    return None


def _quota_pairs(m_size: int, cap1: int, cap2: int) -> list[tuple[int, int]]:
    """Splits ``b1 + b2 = m_size`` within the caps, in the preference order of the case analysis."""
    pairs = [(b1, m_size - b1) for b1 in range(m_size + 1) if b1 <= cap1 and m_size - b1 <= cap2]

    def rank(pair: tuple[int, int]) -> tuple[int, int]:
        lo, hi = min(pair), max(pair)
        if lo > 0 and lo % 2 == 0 and hi % 2 == 0:
            kind = 0
        elif lo >= 3 and lo % 2 and hi % 2:
            kind = 1
        elif lo == 1:
            kind = 2
        else:
            kind = 3
        return kind, pair[0]

    return sorted(pairs, key=rank)


def _lemma_04(dense: _Dense, m_size: int) -> tuple[PathSystem, str]:
    """Tour with balance ``ell + m_size/2`` from a matching spread over ``V1`` and ``V2``."""
    g, parts = dense.g, dense.parts
    rows = g.rows
    delta = dense.delta
    e1_count = count_between(rows, parts.a, parts.v1)
    e2_count = count_between(rows, parts.a, parts.v2)
    caps = (math.ceil(Fraction(e1_count) / delta), math.ceil(Fraction(e2_count) / delta))
    notes: list[str] = []
    for b1, b2 in _quota_pairs(m_size, *caps):
        try:
            m = spread_matching(g, parts.a, parts.v1, parts.v2, b1, b2, delta)
        except (PreconditionError, StepFailure) as exc:
            notes.append(f"{b1},{b2}: {exc}")
            continue
        local = dense if b1 <= b2 else dense.with_parts(parts.swapped())
        lo, hi = min(b1, b2), max(b1, b2)
        lp = local.parts
        try:
            if lo > 0 and lo % 2 == 0 and hi % 2 == 0:
                return _lemma_22(local, m), "lemma_2,2"
            if lo >= 3 and lo % 2 and hi % 2:
                return _lemma_33(local, m), "lemma_3,3"
            side1, side2 = _side_edges(m, lp.v1), _side_edges(m, lp.v2)
            if lo == 1:
                return _lemma_13(local, side2, side1[0]), "lemma_1,3"
            other = g.edges_between(lp.a, lp.v1)
            if other:
                e = other[0]
                rest = [f for f in side2 if not set(f) & set(e)][: m_size - 1]
                return _lemma_13(local, rest, e), "lemma_1,3"
            return _lemma_04_isolated(local, m), "lemma_0,4"
        except (StepFailure, PreconditionError) as exc:
            notes.append(f"{b1},{b2}: {exc}")
    raise StepFailure("no quota split yields a tour", step="lemma_0,4", attempts=notes)


def _lemma_04_isolated(dense: _Dense, m: frozenset[Edge]) -> PathSystem:
    """The case ``e(A, V1) = 0``: route through two edges leaving ``V1``."""
    g, parts, ell = dense.g, dense.parts, dense.ell
    m = sorted(m)
    want = ell + Fraction(len(m), 2)
    v2_end = {e: (e[0] if parts.v2 >> e[0] & 1 else e[1]) for e in m}
    for mstar in _small_matchings(g.edges_between(parts.v1, parts.v2)):
        star_v = {x for e in mstar for x in e}
        order = sorted(itertools.combinations(m, 2), key=lambda pr: (-len({v2_end[pr[0]], v2_end[pr[1]]} & star_v), pr))
        for e2, e2p in order:
            moved = (1 << v2_end[e2]) | (1 << v2_end[e2p])
            shifted = dense.with_parts(_Parts(parts.v1 | moved, parts.v2 & ~moved, parts.a, parts.b))
            try:
                q = _lemma_22(shifted, m)
            except (StepFailure, PreconditionError):
                continue
            p = _try_paths(set(q.edges) | set(mstar))
            if p is not None and parts.accepts(p, want):
                return p
    for mstar in _small_matchings(g.edges_between(parts.v1, parts.b)):
        p = _isolated_via_b(dense, m, set(mstar), want)
        if p is not None:
            return p
    raise StepFailure("no two independent edges leave V1 usefully", step="lemma_0,4")


def _small_matchings(edges: Sequence[Edge]) -> Iterator[tuple[Edge, Edge]]:
    for e, f in itertools.combinations(edges, 2):
        if not set(e) & set(f):
            yield e, f


def _isolated_via_b(dense: _Dense, m: list[Edge], mstar: set[Edge], want: Fraction) -> PathSystem | None:
    g, parts, ell = dense.g, dense.parts, dense.ell
    outcome = dense.hubs_or_matching()
    if outcome.kind == "i":
        try:
            p0 = extend_matching_casei(g, parts.u, parts.a, m, outcome.matching, outcome.extra_edge)
        except (StepFailure, PreconditionError):
            return None
        p = _try_paths(set(p0.edges) | mstar)
        return p if p is not None and parts.accepts(p, want) else None
    hub_mask = mask_of(outcome.hubs)
    if ell >= 2:
        for e1, e2 in itertools.combinations(m, 2):
            rest = set(m) - {e1, e2}
            if (hub_mask & ~mask_of(matched_vertices(rest))).bit_count() < 2:
                continue
            p0 = _hub_paths(dense, rest, outcome.hubs, 2)
            if p0 is None:
                continue
            p = _try_paths(set(p0.edges) | mstar)
            if p is not None and parts.accepts(p, want):
                return p
        return None
    covered = mask_of(matched_vertices(m))
    plus_pool = [
        e
        for e in g.edges_between(parts.a, parts.v2)
        if e not in set(m) and ((covered >> e[0] & 1) == 0 or (covered >> e[1] & 1) == 0)
    ]
    for plus in _small_matchings(plus_pool):
        if ell == 0:
            p = _try_paths(set(m) | set(plus) | mstar)
            if p is not None and parts.accepts(p, want):
                return p
            continue
        x1 = outcome.hubs[0]
        for e in sorted(plus, key=lambda f: (x1 not in f, f)):
            for ep in sorted(m, key=lambda f: (x1 not in f, f)):
                base = (set(m) | set(plus)) - {e, ep}
                used = mask_of(matched_vertices(base)) | mask_of(x for f in base for x in f)
                leaves = [y for y in bits(g.rows[x1] & parts.a & ~used)]
                for w1, y1 in itertools.combinations(leaves, 2):
                    p = _try_paths(base | mstar | {norm_edge(w1, x1), norm_edge(x1, y1)})
                    if p is not None and parts.accepts(p, want):
                        return p
    return None


def _dense_targets(ell: int, m: int, target: int) -> tuple[int, int]:
    """``(ell', m')`` with ``ell' <= ell``, even ``4 <= m' <= m`` and ``ell' + m'/2 = target``;
    ``m'`` is lowered first (in steps of two), then ``ell'``."""
    ell_p, m_p = ell, m
    while ell_p + m_p // 2 > target:
        if m_p > 4:
            m_p -= 2
        else:
            ell_p -= 1
    if ell_p + m_p // 2 != target or ell_p < 0:
        raise StepFailure("character too small for the target balance", step="lemma_aim", ell=ell, m=m)
    return ell_p, m_p


# ---------------------------------------------------------------------------
# the (2,1) builder
# ---------------------------------------------------------------------------


def p123_candidate_edges(g: Graph, spec: PartitionSpec) -> list[Edge]:
    """Edges a minimal (P1)-(P3) system can use: inside ``A``, inside ``B``, between
    ``A+B`` and ``V1+V2``, and between ``V1`` and ``V2``.

    Edges inside a ``V_i`` or between ``A`` and ``B`` never change the balance,
    and deleting them from a system keeps the tour, so they can be ignored.
    """
    parts = _parts_of(spec)
    found = set(g.edges_within(parts.a)) | set(g.edges_within(parts.b))
    found |= set(g.edges_between(parts.w, parts.u)) | set(g.edges_between(parts.v1, parts.v2))
    return sorted(found)


def _p123_search(g: Graph, parts: _Parts, bound: int, target: int, budget: int) -> PathSystem | None:
    """Smallest (P1)-(P3) system over the candidate edges, by iterative deepening.

    Each edge moves twice the balance by ``+2`` (inside A), ``-2`` (inside
    B), ``+1`` (A to U), ``-1`` (B to U) or ``0`` (V1 to V2); branches that
    cannot reach twice the target with the remaining edges are cut.
    """
    spec_like = PartitionSpec.make([bits(parts.v1), bits(parts.v2)], [(bits(parts.a), bits(parts.b))])
    cands = p123_candidate_edges(g, spec_like)
    weight = [sum((parts.a >> x & 1) - (parts.b >> x & 1) for x in e) for e in cands]
    need = 2 * target
    classes = parts.classes()
    nodes = 0
    deg: dict[int, int] = {}
    other: dict[int, int] = {}
    chosen: list[Edge] = []
    suffix_max = [0] * (len(cands) + 1)
    suffix_min = [0] * (len(cands) + 1)
    for i in range(len(cands) - 1, -1, -1):
        suffix_max[i] = max(suffix_max[i + 1], weight[i])
        suffix_min[i] = min(suffix_min[i + 1], weight[i])

    def rec(start: int, size: int, total: int) -> bool:
        nonlocal nodes
        left = size - len(chosen)
        if left == 0:
            return total == need and is_euler(PathSystem(chosen), classes)
        if total + left * suffix_max[start] < need or total + left * suffix_min[start] > need:
            return False
        for i in range(start, len(cands) - left + 1):
            a, b = cands[i]
            da, db = deg.get(a, 0), deg.get(b, 0)
            if da >= 2 or db >= 2:
                continue
            ea, eb = other.get(a, a), other.get(b, b)
            if ea == b:
                continue
            nodes += 1
            if nodes > budget:
                raise Indeterminate("(P1)-(P3) search budget exhausted", step="lemma_aim", budget=budget)
            saved = (other.get(a), other.get(b), other.get(ea), other.get(eb))
            deg[a], deg[b] = da + 1, db + 1
            other.pop(a, None)
            other.pop(b, None)
            other[ea], other[eb] = eb, ea
            chosen.append((a, b))
            if rec(i + 1, size, total + weight[i]):
                return True
            chosen.pop()
            deg[a], deg[b] = da, db
            for key, val in zip((ea, eb, a, b), (saved[2], saved[3], saved[0], saved[1])):
                if val is None:
                    other.pop(key, None)
                else:
                    other[key] = val
        return False

    for size in range(1, min(bound, len(cands)) + 1):
        if rec(0, size, 0):
            return PathSystem(chosen)
    return None


def _aim_hypotheses(g: Graph, spec: PartitionSpec, d: int) -> None:
    if 4 * d < g.n:
        raise PreconditionError(f"degree {d} is below n/4", step="lemma_aim")
    if vertex_connectivity(g) < 3:
        raise PreconditionError("graph is not 3-connected", step="lemma_aim")
    failure = aim_degree_conditions(g, spec, d)
    if failure is not None:
        raise PreconditionError(f"degree condition fails: {failure}", step="lemma_aim")


def construct_p123(
    g: Graph,
    spec: PartitionSpec,
    eps: Number = Fraction(1, 4),
    *,
    check_hypotheses: bool = True,
    budget: int = SEARCH_BUDGET,
    connector_limit: int = 4000,
) -> Construction:
    """``build_p123`` with the producing step and the validator report attached.

    Order of attempts: the dense constructions when ``|A|-|B| >= 2`` and
    ``m >= 4``; then basic connectors extended inside ``A`` or ``B`` (using
    the accommodation bound when its hypotheses hold); finally an exhaustive
    search over ``p123_candidate_edges``.  Every attempt is validated with
    ``check_p123``.
    """
    spec.check_cover(g.n)
    parts = _parts_of(spec)
    d = require_regular(g)
    if check_hypotheses:
        _aim_hypotheses(g, spec, d)
    delta = Fraction(d, 2)
    ch = character_of(g, bits(parts.a), bits(parts.u), delta, eps)
    target = parts.a.bit_count() - parts.b.bit_count()
    attempts: dict[str, str] = {}
    rows = g.rows
    e_a = count_within(rows, parts.a)

    def accept(p: PathSystem | None, step: str) -> Construction | None:
        if p is None:
            return None
        report = check_p123(g, spec, p, ch)
        if report.holds:
            return Construction(p, step, report, {"character": ch.to_json(), "attempts": dict(attempts)})
        attempts[step] = f"output failed {report.failed}"
        return None

    if target >= 2 and ch.m_AU >= 4:
        try:
            ell_p, m_p = _dense_targets(ch.ell_A, ch.m_AU, target)
            delta_prime = max(Fraction(1), Fraction(e_a) - (ell_p - 1) * delta)
            dense = _Dense(g, parts, ell_p, delta, delta_prime, _inside(g, parts.a))
            p, step = _lemma_04(dense, m_p)
            done = accept(p, step)
            if done is not None:
                return done
        except (StepFailure, PreconditionError) as exc:
            attempts["dense"] = f"{exc.step}: {exc}"

    try:
        done = _connector_route(g, spec, parts, ch, target, e_a, delta, budget, connector_limit, accept, attempts)
        if done is not None:
            return done
    except Indeterminate as exc:
        attempts["connectors"] = str(exc)

    bound = ch.ell_A + ch.m_AU + 6
    p = _p123_search(g, parts, bound, target, budget)
    done = accept(p, "lemma_aim_search")
    if done is not None:
        return done
    raise SearchFailure(
        "no path system with at most ell+m+6 candidate edges satisfies (P1)-(P3)",
        step="lemma_aim",
        attempts=attempts,
        bound=bound,
    )


def _connector_route(g, spec, parts, ch, target, e_a, delta, budget, limit, accept, attempts):
    connectors = list(itertools.islice(_connectors(g, parts, budget), limit))
    if not connectors:
        attempts["prop_BC"] = "no basic connector found"
        return None
    connectors.sort(key=lambda c: (-c.balance, -c.profile[0], sorted(c.system.edges)))
    k = ch.m_AU // 2
    g_a = None
    for c in connectors:
        t = target - c.balance
        if t.denominator != 1:
            continue
        t = int(t)
        if t > 0 and k <= 1 and ch.ell_A + k >= 2 and c.profile[0] >= k:
            if g_a is None:
                g_a = _inside(g, parts.a)
            delta_prime = Fraction(e_a) - (ch.ell_A - 1) * delta
            try:
                acc = acc_bound(g_a, c.ones, c.twos, ch.ell_A, k, delta, delta_prime)
                if acc.bound >= t:
                    p = extend_connector(g, spec, c, t, witness=acc.witness)
                    done = accept(p, "lemma_accommodation")
                    if done is not None:
                        return done
            except (PreconditionError, StepFailure):
                pass
        try:
            p = extend_connector(g, spec, c, t, budget=budget)
        except (PreconditionError, StepFailure):
            continue
        done = accept(p, "prop_addpaths" if t else "prop_BC")
        if done is not None:
            return done
    attempts["prop_addpaths"] = f"{len(connectors)} connectors tried"
    return None


def build_p123(
    g: Graph,
    spec: PartitionSpec,
    eps: Number = Fraction(1, 4),
    *,
    check_hypotheses: bool = True,
    budget: int = SEARCH_BUDGET,
) -> PathSystem:
    """A path system satisfying (P1)-(P3) for a (2,1) partition; see ``construct_p123``."""
    return construct_p123(g, spec, eps, check_hypotheses=check_hypotheses, budget=budget).system


# ---------------------------------------------------------------------------
# the desk-scale pipeline
# ---------------------------------------------------------------------------


def hamiltonicity_pipeline(
    g: Graph,
    spec: PartitionSpec,
    *,
    complete: bool = True,
    completion_limit: int = COMPLETION_LIMIT,
    check_hypotheses: bool = True,
    refine: bool = True,
    budget: int | None = None,
) -> PipelineOutcome:
    """Dispatch on the partition shape, build the tour object and, for small
    graphs, complete it to a Hamilton cycle with the exhaustive oracle.

    Shapes other than ``(4,0)``, ``(0,2)`` and ``(2,1)`` give an
    ``"unsupported"`` outcome.  Builder failures propagate as exceptions.
    """
    shape = spec.shape
    spec.check_cover(g.n)
    notes: dict[str, Any] = {}
    if shape == (4, 0):
        p = tour_40(g, spec, check_hypotheses=check_hypotheses)
        step, report = "lemma_(4,0)", check_v_tour(g, spec, p, Fraction(TOUR_CONTACT, g.n))
    elif shape == (0, 2):
        p = tour_02(g, spec, check_hypotheses=check_hypotheses)
        step, report = "lemma_(0,2)", check_two_balanced(g, spec, p)
    elif shape == (2, 1):
        work = spec
        if refine:
            refined = refine_partition(g, spec)
            work = refined.spec
            notes["moved"] = {str(k): list(v) for k, v in sorted(refined.moved.items())}
        built = construct_p123(
            g, work, check_hypotheses=check_hypotheses, budget=SEARCH_BUDGET if budget is None else budget
        )
        p, step, report = built.system, built.step, built.report
        notes["character"] = built.notes.get("character")
    else:
        return PipelineOutcome("unsupported", shape, notes={"reason": f"shape {shape} is not handled"})
    if not complete or g.n > completion_limit:
        return PipelineOutcome("validated_system", shape, p, None, step, report, notes)
    cycle = complete_to_hamilton(g, spec, p, budget)
    if cycle is None:
        return PipelineOutcome("not_completed", shape, p, None, step, report, notes)
    return PipelineOutcome("hamilton_cycle", shape, p, cycle, step, report, notes)


__all__ = [
    "AccBound",
    "ConnectorReport",
    "Construction",
    "PipelineOutcome",
    "acc_bound",
    "basic_connector_search",
    "build_p123",
    "clique_tour_search",
    "construct_p123",
    "extend_connector",
    "hamiltonicity_pipeline",
    "join_components",
    "p123_candidate_edges",
    "tour_02",
    "tour_40",
]
