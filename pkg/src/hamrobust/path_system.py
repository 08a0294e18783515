"""Path systems and the bookkeeping built on top of them.

A path system is a set of edges forming vertex-disjoint non-trivial paths:
every vertex has degree at most two and there is no cycle.  Relative to a
partition of the vertex set, each path contributes one edge of the *reduced
multigraph* joining the classes of its two endpoints (a loop when both ends
lie in the same class).  Most validators in this package reduce to questions
about that multigraph plus a few edge counts.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import InputError, PreconditionError
from .graph_core import Edge, Graph, bits, mask_of, norm_edge
from .reports import Report
from .robustness import PartitionSpec, exact

Number = int | float | Fraction


class PathSystem:
    """Immutable edge set of vertex-disjoint paths."""

    __slots__ = ("_adj", "edges")

    def __init__(self, edges: Iterable[Sequence[int]] = ()):
        normal = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InputError(f"loop {u}-{v} cannot be part of a path system")
            normal.add(norm_edge(u, v))
        adj: dict[int, list[int]] = {}
        for u, v in normal:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        for v, nb in adj.items():
            if len(nb) > 2:
                raise InputError(f"vertex {v} has degree {len(nb)} in the path system", vertex=v)
        if _has_cycle(normal):
            raise InputError("edge set contains a cycle")
        self.edges: frozenset[Edge] = frozenset(normal)
        self._adj = {v: tuple(sorted(nb)) for v, nb in adj.items()}

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PathSystem) and self.edges == other.edges

    def __hash__(self) -> int:
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"PathSystem({sorted(self.edges)})"

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self._adj)

    @property
    def vertex_mask(self) -> int:
        return mask_of(self._adj)

    def degree(self, v: int) -> int:
        return len(self._adj.get(v, ()))

    def endpoints(self) -> list[int]:
        return sorted(v for v, nb in self._adj.items() if len(nb) == 1)

    def paths(self) -> list[list[int]]:
        """Maximal paths as vertex sequences, each starting at its smaller endpoint."""
        seen: set[int] = set()
        out = []
        for start in self.endpoints():
            if start in seen:
                continue
            walk = [start]
            prev, cur = -1, start
            while True:
                nxt = [w for w in self._adj[cur] if w != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                walk.append(cur)
            seen.update(walk)
            out.append(walk)
        return out

    def count_within(self, s: Iterable[int] | int) -> int:
        sm = s if isinstance(s, int) else mask_of(s)
        return sum(1 for u, v in self.edges if (sm >> u) & 1 and (sm >> v) & 1)

    def count_between(self, s: Iterable[int] | int, t: Iterable[int] | int) -> int:
        """Edges with one end in ``s`` and the other in ``t`` (edges inside ``s & t`` once)."""
        sm = s if isinstance(s, int) else mask_of(s)
        tm = t if isinstance(t, int) else mask_of(t)
        count = 0
        for u, v in self.edges:
            if ((sm >> u) & 1 and (tm >> v) & 1) or ((sm >> v) & 1 and (tm >> u) & 1):
                count += 1
        return count

    def union(self, other: Iterable[Sequence[int]]) -> PathSystem:
        return PathSystem(set(self.edges) | {norm_edge(int(e[0]), int(e[1])) for e in other})

    def minus(self, other: Iterable[Sequence[int]]) -> PathSystem:
        drop = {norm_edge(int(e[0]), int(e[1])) for e in other}
        return PathSystem(self.edges - drop)

    def in_graph(self, g: Graph) -> bool:
        return all(0 <= u < g.n and 0 <= v < g.n and g.has_edge(u, v) for u, v in self.edges)

    def to_json(self) -> dict[str, Any]:
        return {"edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> PathSystem:
        try:
            edges = [(int(e[0]), int(e[1])) for e in data["edges"]]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"malformed path system: {exc}") from None
        return cls(edges)


def is_path_system(edges: Iterable[Sequence[int]]) -> bool:
    try:
        PathSystem(edges)
    except InputError:
        return False
    return True


def _has_cycle(edges: Iterable[Edge]) -> bool:
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != root:
            parent[x], x = root, parent[x]
        return root

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return True
        parent[ru] = rv
    return False


# ---------------------------------------------------------------------------
# reduced multigraph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedMultigraph:
    """Class-level multigraph: one edge per path, loops allowed."""

    class_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for i, j in self.edges:
            if not (0 <= i < self.class_count and 0 <= j < self.class_count):
                raise InputError(f"multigraph edge {(i, j)} outside 0..{self.class_count - 1}")

    def degrees(self) -> list[int]:
        deg = [0] * self.class_count
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def to_json(self) -> dict[str, Any]:
        return {"class_count": self.class_count, "edges": [list(e) for e in self.edges]}


def _class_lookup(classes: PartitionSpec | Sequence[Iterable[int]]) -> tuple[dict[int, int], int]:
    groups = classes.classes() if isinstance(classes, PartitionSpec) else [list(c) for c in classes]
    lookup: dict[int, int] = {}
    for i, c in enumerate(groups):
        for v in c:
            lookup[int(v)] = i
    return lookup, len(groups)


def reduced_multigraph(p: PathSystem, classes: PartitionSpec | Sequence[Iterable[int]]) -> ReducedMultigraph:
    """One multigraph edge per maximal path, joining the classes of its endpoints."""
    lookup, count = _class_lookup(classes)
    edges = []
    for walk in p.paths():
        try:
            i, j = lookup[walk[0]], lookup[walk[-1]]
        except KeyError as exc:
            raise InputError(f"path endpoint {exc.args[0]} is not covered by the partition") from None
        edges.append((min(i, j), max(i, j)))
    return ReducedMultigraph(count, tuple(sorted(edges)))


def check_euler_tour(r: ReducedMultigraph) -> bool:
    """True iff every class has positive even degree and the multigraph is connected."""
    deg = r.degrees()
    if r.class_count == 0 or any(d == 0 or d % 2 for d in deg):
        return False
    parent = list(range(r.class_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in r.edges:
        parent[find(i)] = find(j)
    return len({find(i) for i in range(r.class_count)}) == 1


def is_euler(p: PathSystem, classes: PartitionSpec | Sequence[Iterable[int]]) -> bool:
    return check_euler_tour(reduced_multigraph(p, classes))


def has_class_path(p: PathSystem, x: Iterable[int] | int, y: Iterable[int] | int) -> bool:
    """Does some path of ``p`` have one endpoint in ``x`` and the other in ``y``?"""
    return count_class_paths(p, x, y) > 0


def count_class_paths(p: PathSystem, x: Iterable[int] | int, y: Iterable[int] | int) -> int:
    xm = x if isinstance(x, int) else mask_of(x)
    ym = y if isinstance(y, int) else mask_of(y)
    count = 0
    for walk in p.paths():
        s, t = walk[0], walk[-1]
        if ((xm >> s) & 1 and (ym >> t) & 1) or ((xm >> t) & 1 and (ym >> s) & 1):
            count += 1
    return count


# ---------------------------------------------------------------------------
# profiles, balance and character
# ---------------------------------------------------------------------------


def degree_profile(p: PathSystem, a: Iterable[int]) -> tuple[int, int]:
    """Numbers of vertices of ``a`` with path-system degree one and two."""
    ones = twos = 0
    for v in set(a):
        d = p.degree(v)
        if d == 1:
            ones += 1
        elif d == 2:
            twos += 1
    return ones, twos


def balance_of(p: PathSystem, a: Iterable[int], b: Iterable[int], u: Iterable[int]) -> Fraction:
    """``e(A) - e(B) + (e(A,U) - e(B,U))/2`` over the edges of ``p``, exactly."""
    am, bm, um = mask_of(a), mask_of(b), mask_of(u)
    inner = p.count_within(am) - p.count_within(bm)
    cross = p.count_between(am, um) - p.count_between(bm, um)
    return Fraction(inner) + Fraction(cross, 2)


def ceil_eps(x: Number, eps: Number) -> int:
    """``ceil(x - eps)``, evaluated exactly."""
    eps_q = exact(eps)
    if not 0 < eps_q < 1:
        raise InputError(f"eps must lie in (0,1), got {eps}")
    return math.ceil(exact(x) - eps_q)


def largest_even_at_most(x: int) -> int:
    return x - (x % 2)


@dataclass(frozen=True)
class Character:
    """Rounded matching capacities of ``G[A]`` (``ell_A``) and ``G[A,U]`` (``m_AU``)."""

    ell_A: int
    m_AU: int
    delta: Fraction
    eps: Fraction

    def __post_init__(self) -> None:
        if self.ell_A < 0 or self.m_AU < 0 or self.m_AU % 2:
            raise InputError(f"invalid character ({self.ell_A}, {self.m_AU})")

    def to_json(self) -> dict[str, Any]:
        return {"ell_A": self.ell_A, "m_AU": self.m_AU, "delta": str(self.delta), "eps": str(self.eps)}


def character_of(g: Graph, a: Iterable[int], u: Iterable[int], delta: Number, eps: Number) -> Character:
    """``ell_A = ceil_eps(e(A)/delta)``; ``m_AU`` the largest even integer at most ``ceil_eps(e(A,U)/delta)``."""
    am, um = mask_of(a), mask_of(u)
    delta_q, eps_q = exact(delta), exact(eps)
    if delta_q <= 0:
        raise InputError("delta must be positive")
    rows = g.rows
    for v in bits(am):
        if (rows[v] & am).bit_count() > delta_q:
            raise PreconditionError(f"vertex {v} has more than {delta} neighbours inside A", vertex=v)
        if (rows[v] & um).bit_count() > delta_q:
            raise PreconditionError(f"vertex {v} has more than {delta} neighbours in U", vertex=v)
    for v in bits(um):
        if (rows[v] & am).bit_count() > delta_q:
            raise PreconditionError(f"vertex {v} of U has more than {delta} neighbours in A", vertex=v)
    e_a = sum((rows[v] & am).bit_count() for v in bits(am)) // 2
    e_au = sum((rows[v] & um).bit_count() for v in bits(am))
    ell = max(0, ceil_eps(Fraction(e_a) / delta_q, eps_q))
    m = max(0, largest_even_at_most(ceil_eps(Fraction(e_au) / delta_q, eps_q)))
    return Character(ell, m, delta_q, eps_q)


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------


def _system_checks(report: Report, g: Graph, p: PathSystem) -> bool:
    return report.add("edges_in_graph", p.in_graph(g))


def check_v_tour(g: Graph, spec: PartitionSpec, p: PathSystem, gamma: Number) -> Report:
    """Tour conditions: Euler reduced multigraph, contact ``<= gamma*n`` per class,
    equal leftovers and equal positive endpoint counts on both sides of every bipartite class."""
    report = Report("v_tour")
    _system_checks(report, g, p)
    r = reduced_multigraph(p, spec)
    report.add("euler_tour", check_euler_tour(r), degrees=r.degrees())
    limit = exact(gamma) * g.n
    vm = p.vertex_mask
    contacts = [(vm & cm).bit_count() for cm in spec.class_masks()]
    report.add("contact", all(c <= limit for c in contacts), counts=contacts, limit=str(limit))
    ends = mask_of(p.endpoints())
    for j, (a, b) in enumerate(spec.bipartite, start=1):
        am, bm = mask_of(a), mask_of(b)
        left_a, left_b = (am & ~vm).bit_count(), (bm & ~vm).bit_count()
        report.add(f"leftover_W{j}", left_a == left_b, A=left_a, B=left_b)
        end_a, end_b = (ends & am).bit_count(), (ends & bm).bit_count()
        report.add(f"endpoints_W{j}", end_a == end_b and end_a > 0, A=end_a, B=end_b)
    return report


def _two_one_sets(spec: PartitionSpec) -> tuple[int, int, int, int, int]:
    if spec.shape != (2, 1):
        raise InputError(f"expected a partition of shape (2,1), got {spec.shape}")
    v1, v2 = (mask_of(c) for c in spec.expander)
    a, b = (mask_of(c) for c in spec.bipartite[0])
    return v1, v2, a, b, v1 | v2


def check_basic_connector(g: Graph, spec: PartitionSpec, p: PathSystem) -> Report:
    """Conditions BC1 (Euler tour), BC2 (at most 4 edges, |bal| <= 2), BC3 (no edge
    inside A+B) and BC4 (balance in {a1+2a2-2, a1+2a2-1}, a2 <= 1)."""
    _, _, a, b, u = _two_one_sets(spec)
    report = Report("basic_connector")
    _system_checks(report, g, p)
    bal = balance_of(p, bits(a), bits(b), bits(u))
    report.add("BC1", is_euler(p, spec))
    report.add("BC2", len(p) <= 4 and abs(bal) <= 2, edges=len(p), balance=str(bal))
    report.add("BC3", p.count_within(a | b) == 0)
    a1, a2 = degree_profile(p, bits(a))
    report.add("BC4", bal in (a1 + 2 * a2 - 2, a1 + 2 * a2 - 1) and a2 <= 1, profile=(a1, a2))
    return report


def check_d_balanced(
    gsub: Graph, a1: Iterable[int], b1: Iterable[int], a2: Iterable[int], b2: Iterable[int], d: int
) -> bool:
    """Both balancing identities ``2e(A_i)-2e(B_i)+e(A_i,W_j)-e(B_i,W_j) = d(|A_i|-|B_i|)``."""
    return all(x == 0 for x in balance_defects(gsub, a1, b1, a2, b2, d))


def balance_defects(
    gsub: Graph | PathSystem,
    a1: Iterable[int],
    b1: Iterable[int],
    a2: Iterable[int],
    b2: Iterable[int],
    t: int,
) -> tuple[int, int]:
    """Left minus right side of the two balancing identities, for a graph or a path system."""
    sets = [mask_of(x) for x in (a1, b1, a2, b2)]
    if isinstance(gsub, PathSystem):
        within, between = gsub.count_within, gsub.count_between
    else:
        rows = gsub.rows

        def within(sm: int) -> int:
            return sum((rows[v] & sm).bit_count() for v in bits(sm)) // 2

        def between(sm: int, tm: int) -> int:
            return sum((rows[v] & tm).bit_count() for v in bits(sm)) - within(sm & tm)

    out = []
    for i in (0, 1):
        am, bm = sets[2 * i], sets[2 * i + 1]
        other = sets[2 - 2 * i] | sets[3 - 2 * i]
        lhs = 2 * within(am) - 2 * within(bm) + between(am, other) - between(bm, other)
        out.append(lhs - t * (am.bit_count() - bm.bit_count()))
    return out[0], out[1]


def check_two_balanced(g: Graph, spec: PartitionSpec, p: PathSystem) -> Report:
    """2-balanced with respect to ``(A1,B1,A2,B2)`` plus a W1W2-path when the system crosses."""
    if spec.shape != (0, 2):
        raise InputError(f"expected a partition of shape (0,2), got {spec.shape}")
    (a1, b1), (a2, b2) = spec.bipartite
    report = Report("two_balanced")
    _system_checks(report, g, p)
    defects = balance_defects(p, a1, b1, a2, b2, 2)
    report.add("balanced_W1", defects[0] == 0, defect=defects[0])
    report.add("balanced_W2", defects[1] == 0, defect=defects[1])
    w1, w2 = mask_of(a1 + b1), mask_of(a2 + b2)
    crossing = p.count_between(w1, w2)
    paths = count_class_paths(p, w1, w2)
    report.add("W1W2_path", paths > 0, crossing_edges=crossing, paths=paths)
    report.add("even_W1W2_paths", paths % 2 == 0)
    return report


def check_p123(g: Graph, spec: PartitionSpec, p: PathSystem, ch: Character) -> Report:
    """P1: at most ``ell+m+6`` edges; P2: balance equals ``|A|-|B|``; P3: Euler tour."""
    _, _, a, b, u = _two_one_sets(spec)
    report = Report("p123")
    _system_checks(report, g, p)
    bound = ch.ell_A + ch.m_AU + 6
    report.add("P1", len(p) <= bound, edges=len(p), bound=bound)
    bal = balance_of(p, bits(a), bits(b), bits(u))
    target = a.bit_count() - b.bit_count()
    report.add("P2", bal == target, balance=str(bal), target=target)
    report.add("P3", is_euler(p, spec))
    return report
