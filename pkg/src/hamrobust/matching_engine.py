"""Matchings: maximum-matching engines and the matching constructions built on them.

Two engines are provided.  ``hopcroft_karp`` handles bipartite graphs in
layered phases; ``blossom_matching`` (Edmonds) handles general graphs.  Both
accept a starting matching and only ever grow it along augmenting paths, so
every vertex covered by the starting matching stays covered.  That property
is exactly what ``matching_extend`` needs.

Ties are always broken towards the lowest vertex or edge index, so every
function is deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import InputError, PreconditionError, StepFailure
from .graph_core import Edge, Graph, bits, mask_of, norm_edge
from .path_system import PathSystem, ceil_eps, count_class_paths

Matching = frozenset  # frozenset[Edge] of pairwise disjoint edges
VertexSetLike = Iterable[int] | int


def _m(s: VertexSetLike) -> int:
    return s if isinstance(s, int) else mask_of(s)


def as_matching(edges: Iterable[Sequence[int]]) -> frozenset[Edge]:
    """Normalise ``edges`` and check they are pairwise vertex-disjoint."""
    out = set()
    seen: set[int] = set()
    for e in edges:
        u, v = norm_edge(int(e[0]), int(e[1]))
        if u == v or u in seen or v in seen:
            raise InputError(f"edge {(u, v)} breaks the matching property")
        seen.update((u, v))
        out.add((u, v))
    return frozenset(out)


def is_matching(edges: Iterable[Sequence[int]]) -> bool:
    try:
        as_matching(edges)
    except InputError:
        return False
    return True


def matched_vertices(m: Iterable[Edge]) -> set[int]:
    return {v for e in m for v in e}


def _mate_from(n: int, m: Iterable[Edge]) -> list[int]:
    mate = [-1] * n
    for u, v in as_matching(m):
        mate[u], mate[v] = v, u
    return mate


def _edges_of_mate(mate: Sequence[int]) -> frozenset[Edge]:
    return frozenset((v, w) for v, w in enumerate(mate) if w > v)


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------


def bipartition(g: Graph, within: int | None = None) -> tuple[int, int]:
    """Two-colouring ``(left, right)`` of the non-isolated part of ``g[within]``.

    The colour of each component's lowest vertex is ``left``.  Raises
    ``PreconditionError`` if an odd cycle exists.
    """
    rows = g.rows
    mask = g.full_mask if within is None else within
    colour: dict[int, int] = {}
    for s in bits(mask):
        if s in colour or not rows[s] & mask:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in bits(rows[v] & mask):
                if w not in colour:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    raise PreconditionError("graph is not bipartite", odd_edge=norm_edge(v, w))
    left = mask_of(v for v, c in colour.items() if c == 0)
    right = mask_of(v for v, c in colour.items() if c == 1)
    return left, right


def hopcroft_karp(
    g: Graph,
    left: int,
    right: int,
    initial: Iterable[Edge] = (),
    target: int | None = None,
    allowed: int | None = None,
) -> frozenset[Edge]:
    """Maximum matching between the vertex masks ``left`` and ``right``.

    Starts from ``initial`` and grows it along shortest augmenting paths; when
    ``target`` is given it stops as soon as the matching has that many edges.
    ``allowed`` (a vertex mask) restricts which vertices may be used.
    """
    rows = g.rows
    if allowed is not None:
        left &= allowed
        right &= allowed
    mate = _mate_from(g.n, initial)
    size = sum(1 for v in bits(left) if mate[v] >= 0)
    lefts = list(bits(left))
    adj = {u: list(bits(rows[u] & right)) for u in lefts}
    inf = math.inf
    while target is None or size < target:
        dist: dict[int, float] = {}
        queue = deque()
        for u in lefts:
            if mate[u] < 0:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                x = mate[w]
                if x < 0:
                    found = True
                elif x not in dist:
                    dist[x] = dist[u] + 1
                    queue.append(x)
        if not found:
            break
        progress = False
        for u in lefts:
            if mate[u] >= 0:
                continue
            if target is not None and size >= target:
                break
            path = _hk_dfs(u, adj, mate, dist, inf)
            if path:
                size += 1
                progress = True
        if not progress:
            break
    return _edges_of_mate(mate)


def _hk_dfs(root: int, adj: dict[int, list[int]], mate: list[int], dist: dict[int, float], inf: float) -> bool:
    """Iterative layered DFS; augments along the first path found."""
    stack = [(root, iter(adj[root]))]
    trail: list[tuple[int, int]] = []
    while stack:
        u, it = stack[-1]
        advanced = False
        for w in it:
            x = mate[w]
            if x < 0:
                trail.append((u, w))
                for a, b in trail:
                    mate[a], mate[b] = b, a
                return True
            if dist.get(x, inf) == dist[u] + 1:
                trail.append((u, w))
                stack.append((x, iter(adj[x])))
                advanced = True
                break
        if not advanced:
            dist[u] = inf
            stack.pop()
            if trail:
                trail.pop()
    return False


def blossom_matching(
    g: Graph,
    within: int | None = None,
    initial: Iterable[Edge] = (),
    target: int | None = None,
) -> frozenset[Edge]:
    """Maximum matching of ``g[within]`` by Edmonds' blossom algorithm.

    Grows ``initial`` along augmenting paths, stopping early at ``target``.
    """
    n = g.n
    mask = g.full_mask if within is None else within
    rows = g.rows
    adj = [list(bits(rows[v] & mask)) if (mask >> v) & 1 else [] for v in range(n)]
    mate = _mate_from(n, initial)
    size = sum(1 for v in range(n) if mate[v] > v)

    def find_augmenting(root: int) -> int:
        parent = [-1] * n
        base = list(range(n))
        used = [False] * n
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if mate[a] < 0:
                    break
                a = parent[mate[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[mate[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[mate[v]]] = True
                parent[v] = child
                child = mate[v]
                v = parent[mate[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] >= 0 and parent[mate[to]] >= 0):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] < 0:
                    parent[to] = v
                    if mate[to] < 0:
                        return _flip(to, parent)
                    used[mate[to]] = True
                    queue.append(mate[to])
        return -1

    def _flip(v: int, parent: list[int]) -> int:
        while v >= 0:
            pv = parent[v]
            nxt = mate[pv]
            mate[v], mate[pv] = pv, v
            v = nxt
        return 1

    progress = True
    while progress and (target is None or size < target):
        progress = False
        for root in range(n):
            if target is not None and size >= target:
                break
            if mate[root] < 0 and adj[root] and find_augmenting(root) > 0:
                size += 1
                progress = True
    return _edges_of_mate(mate)


def maximum_matching_size(g: Graph, within: int | None = None) -> int:
    return len(blossom_matching(g, within))


def first_edges(m: Iterable[Edge], k: int, prefer: Sequence[Edge] = ()) -> frozenset[Edge]:
    """``k`` edges of ``m``: the ``prefer`` ones first, then the lowest."""
    pool = sorted(m)
    chosen = [e for e in prefer if e in m][:k]
    chosen += [e for e in pool if e not in chosen][: k - len(chosen)]
    return frozenset(chosen)


def _max_degree_of(edges: Iterable[Edge]) -> int:
    deg: dict[int, int] = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return max(deg.values(), default=0)


def _target(e: int, delta: int | Fraction) -> int:
    """``ceil(e/delta)`` computed exactly; ``delta`` may be a rational such as ``D/2``."""
    if delta <= 0:
        raise InputError("delta must be positive")
    return math.ceil(Fraction(e) / Fraction(delta))


# ---------------------------------------------------------------------------
# bipartite constructions
# ---------------------------------------------------------------------------


def konig_matching(g: Graph, delta: int) -> frozenset[Edge]:
    """A matching of exactly ``ceil(e(g)/delta)`` edges in a bipartite ``g`` with max degree at most ``delta``."""
    if g.max_degree() > delta:
        raise PreconditionError(f"maximum degree {g.max_degree()} exceeds {delta}")
    left, right = bipartition(g)
    need = _target(g.m, delta)
    m = hopcroft_karp(g, left, right, target=need)
    if len(m) < need:
        raise StepFailure("maximum matching smaller than the edge-colouring bound", step="konig_matching")
    return first_edges(m, need)


def matching_extend(
    g: Graph, m: Iterable[Edge], delta: int, target: int | None = None, left: int | None = None
) -> frozenset[Edge]:
    """Grow ``m`` by augmenting paths to exactly ``ceil(e(g)/delta)`` edges (or ``target``).

    Every vertex covered by ``m`` stays covered.
    """
    m = as_matching(m)
    if g.max_degree() > delta:
        raise PreconditionError(f"maximum degree {g.max_degree()} exceeds delta={delta}")
    for u, v in m:
        if not g.has_edge(u, v):
            raise PreconditionError(f"starting edge {(u, v)} is not in the graph")
    need = _target(g.m, delta) if target is None else target
    if len(m) > need:
        raise PreconditionError(f"starting matching has {len(m)} > {need} edges")
    if left is None:
        left, right = bipartition(g)
    else:
        right = g.full_mask & ~left
    out = hopcroft_karp(g, left, right, initial=m, target=need)
    if len(out) < need:
        raise StepFailure(f"no matching of size {need} exists", step="matching_extend", found=len(out))
    return out


def _max_flow(cap: dict[Any, dict[Any, int]], source: Any, sink: Any, limit: int | None = None) -> int:
    """Edmonds-Karp on a small explicit network; ``cap`` is updated to the residual."""
    flow = 0
    while limit is None or flow < limit:
        prev = {source: None}
        queue = deque([source])
        while queue and sink not in prev:
            x = queue.popleft()
            for y, c in cap[x].items():
                if c > 0 and y not in prev:
                    prev[y] = x
                    queue.append(y)
        if sink not in prev:
            break
        push = math.inf
        y = sink
        while prev[y] is not None:
            push = min(push, cap[prev[y]][y])
            y = prev[y]
        if limit is not None:
            push = min(push, limit - flow)
        y = sink
        while prev[y] is not None:
            x = prev[y]
            cap[x][y] -= push
            cap[y].setdefault(x, 0)
            cap[y][x] += push
            y = x
        flow += int(push)
    return flow


def _quota_matching(
    g: Graph, u: int, groups: Sequence[tuple[int, int]], allowed: int | None = None
) -> frozenset[Edge] | None:
    """Matching from the vertex mask ``u`` with exactly ``quota`` edges into each group mask.

    Groups must be disjoint from each other and from ``u``.  Solved as a flow:
    source -> u-vertices -> group vertices -> group node (capacity = quota)
    -> sink.  Returns ``None`` if the quotas cannot all be met.
    """
    rows = g.rows
    if allowed is not None:
        u &= allowed
        groups = [(gm & allowed, q) for gm, q in groups]
    cap: dict[Any, dict[Any, int]] = {"s": {}, "t": {}}
    for x in bits(u):
        cap["s"][("u", x)] = 1
        cap[("u", x)] = {}
    for k, (gm, quota) in enumerate(groups):
        cap[("g", k)] = {"t": quota}
        for w in bits(gm):
            cap[("w", w)] = {("g", k): 1}
            for x in bits(rows[w] & u):
                cap[("u", x)][("w", w)] = 1
    need = sum(q for _, q in groups)
    if _max_flow(cap, "s", "t", need) < need:
        return None
    out = []
    for x in bits(u):
        for node, c in cap[("u", x)].items():
            if node[0] == "w" and c == 0:
                out.append(norm_edge(x, node[1]))
    return frozenset(out)


def spread_matching(
    g: Graph, u: VertexSetLike, v: VertexSetLike, w: VertexSetLike, bv: int, bw: int, delta: int | Fraction
) -> frozenset[Edge]:
    """Matching with exactly ``bv`` edges from ``u`` into ``v`` and ``bw`` into ``w``.

    Only edges between ``u`` and ``v+w`` are used.  The caps of the
    construction are checked: ``bv+bw <= ceil(e/delta)`` and each of
    ``bv``, ``bw`` at most the rounded-up share of its side.
    """
    um, vm, wm = _m(u), _m(v), _m(w)
    if um & (vm | wm) or vm & wm:
        raise InputError("u, v, w must be disjoint")
    rows = g.rows
    e_uv = sum((rows[x] & vm).bit_count() for x in bits(um))
    e_uw = sum((rows[x] & wm).bit_count() for x in bits(um))
    deg_cap = max(
        [(rows[x] & (vm | wm)).bit_count() for x in bits(um)] + [(rows[x] & um).bit_count() for x in bits(vm | wm)],
        default=0,
    )
    if deg_cap > delta:
        raise PreconditionError(f"maximum degree {deg_cap} of the bipartite graph exceeds {delta}")
    if bv < 0 or bw < 0:
        raise PreconditionError("quotas must be non-negative")
    if bv + bw > _target(e_uv + e_uw, delta):
        raise PreconditionError("bv + bw exceeds ceil(e/delta)", bv=bv, bw=bw)
    if bv > _target(e_uv, delta) or bw > _target(e_uw, delta):
        raise PreconditionError("a quota exceeds the rounded-up share of its side", bv=bv, bw=bw)
    out = _quota_matching(g, um, [(vm, bv), (wm, bw)])
    if out is None:
        raise StepFailure("no matching meets both quotas", step="lemma_spreadmatching", bv=bv, bw=bw)
    return out


def _covers_internally(m: Iterable[Edge], km: int) -> bool:
    """Is ``m[K]`` a perfect matching of a non-empty ``K``?"""
    if not km:
        return False
    covered = 0
    for a, b in m:
        if (km >> a) & 1 and (km >> b) & 1:
            covered |= (1 << a) | (1 << b)
    return covered == km


def sparse_avoiding_matching(g: Graph, k: VertexSetLike, delta_cap: int, delta: int) -> frozenset[Edge]:
    """Matching of exactly ``ceil(e/delta)`` edges such that ``M[K]`` is not a perfect matching of ``K``.

    An oversized matching is built first; one edge inside ``K`` (if any) is then
    dropped, which leaves two vertices of ``K`` uncovered.
    """
    km = _m(k)
    if g.max_degree() > delta_cap:
        raise PreconditionError(f"maximum degree {g.max_degree()} exceeds the cap {delta_cap}")
    if delta_cap > delta:
        raise PreconditionError("the degree cap must not exceed delta")
    if g.m < 2 * delta_cap:
        raise PreconditionError(f"need at least {2 * delta_cap} edges, got {g.m}")
    need = _target(g.m, delta)
    big = blossom_matching(g)
    if len(big) < need:
        raise StepFailure("maximum matching smaller than ceil(e/delta)", step="prop_sparsematching")
    if len(big) >= need + 1:
        inside = sorted(e for e in big if (km >> e[0]) & 1 and (km >> e[1]) & 1)
        pool = first_edges(big, need + 1, prefer=inside)
        inside = sorted(e for e in pool if (km >> e[0]) & 1 and (km >> e[1]) & 1)
        drop = inside[0] if inside else max(pool)
        out = pool - {drop}
        if not _covers_internally(out, km):
            return out
    out = first_edges(big, need)
    if not _covers_internally(out, km):
        return out
    for x in bits(km):
        alt = blossom_matching(g, g.full_mask & ~(1 << x), target=need)
        if len(alt) >= need:
            return first_edges(alt, need)
    raise StepFailure("every large matching perfectly matches K", step="prop_sparsematching")


# ---------------------------------------------------------------------------
# path systems from matchings
# ---------------------------------------------------------------------------


def _matching_in(g: Graph, mask: int, size: int, avoid: int) -> frozenset[Edge]:
    """``size`` matching edges inside ``mask``, using vertices of ``avoid`` only when needed."""
    safe = blossom_matching(g, mask & ~avoid, target=size)
    if len(safe) >= size:
        return first_edges(safe, size)
    grown = blossom_matching(g, mask, initial=safe, target=size)
    return first_edges(grown, size, prefer=sorted(safe))


def three_matchings(
    g: Graph,
    u: VertexSetLike,
    v: VertexSetLike,
    m: Iterable[Edge],
    a_u: int,
    a_v: int,
    delta: int | Fraction,
    rho: float | None = None,
    budget: int = 200_000,
) -> PathSystem:
    """Path system ``m + M_U + M_V`` with matchings of sizes ``a_u`` in ``G[U]`` and ``a_v`` in ``G[V]``.

    If ``m`` is non-empty the result contains a path from ``U`` to ``V``.
    Matching edges are first taken away from ``V(m)``, which can never close a
    cycle; if that is impossible a bounded search over the remaining choices
    is run.  ``rho`` enables the size-hierarchy preconditions.
    """
    um, vm = _m(u), _m(v)
    m = as_matching(m)
    rows = g.rows
    for a, b in m:
        if not g.has_edge(a, b) or not (((um >> a) & 1 and (vm >> b) & 1) or ((um >> b) & 1 and (vm >> a) & 1)):
            raise PreconditionError(f"edge {(a, b)} of m is not a U-V edge of g")
    for side, sm in (("U", um), ("V", vm)):
        top = max(((rows[x] & sm).bit_count() for x in bits(sm)), default=0)
        if top > delta:
            raise PreconditionError(f"maximum degree of G[{side}] is {top} > {delta}")
    e_u = sum((rows[x] & um).bit_count() for x in bits(um)) // 2
    e_v = sum((rows[x] & vm).bit_count() for x in bits(vm)) // 2
    if (
        a_u < 0
        or a_v < 0
        or a_u > max(0, ceil_eps(_frac(e_u, delta), 0.25))
        or a_v > max(0, ceil_eps(_frac(e_v, delta), 0.25))
    ):
        raise PreconditionError("requested matching sizes exceed the rounded capacities", a_u=a_u, a_v=a_v)
    if rho is not None:
        if len(m) > rho * delta:
            raise PreconditionError("e(m) exceeds rho*delta")
        if max(e_u, e_v) > rho * delta * delta:
            raise PreconditionError("e(U) or e(V) exceeds rho*delta^2")
    covered = mask_of(matched_vertices(m))

    def acceptable(mu: Iterable[Edge], mv: Iterable[Edge]) -> PathSystem | None:
        try:
            p = PathSystem(set(m) | set(mu) | set(mv))
        except InputError:
            return None
        if m and count_class_paths(p, um, vm) == 0:
            return None
        return p

    mu = _matching_in(g, um, a_u, covered)
    mv = _matching_in(g, vm, a_v, covered)
    if len(mu) == a_u and len(mv) == a_v:
        p = acceptable(mu, mv)
        if p is not None:
            return p
    found = _search_matching_pair(g, um, vm, a_u, a_v, covered, acceptable, budget)
    if found is None:
        raise StepFailure("no admissible pair of matchings found", step="lemma_threematchings", a_u=a_u, a_v=a_v)
    return found


def _frac(a: int, b: int) -> Fraction:
    return Fraction(a, b)


def _search_matching_pair(g, um, vm, a_u, a_v, covered, acceptable, budget):
    """Backtracking over matchings of the two sides, safest edges first."""
    rank = lambda e: (((covered >> e[0]) & 1) + ((covered >> e[1]) & 1), e)
    cand_u = sorted(g.edges_within(um), key=rank)
    cand_v = sorted(g.edges_within(vm), key=rank)
    nodes = 0

    def matchings(cands, size):
        chosen: list[Edge] = []
        used = 0

        def rec(start):
            nonlocal used, nodes
            nodes += 1
            if nodes > budget:
                return
            if len(chosen) == size:
                yield list(chosen)
                return
            for i in range(start, len(cands)):
                a, b = cands[i]
                if (used >> a) & 1 or (used >> b) & 1:
                    continue
                chosen.append((a, b))
                used |= (1 << a) | (1 << b)
                yield from rec(i + 1)
                chosen.pop()
                used &= ~((1 << a) | (1 << b))

        yield from rec(0)

    for mu in matchings(cand_u, a_u):
        for mv in matchings(cand_v, a_v):
            p = acceptable(mu, mv)
            if p is not None:
                return p
            if nodes > budget:
                return None
        if nodes > budget:
            return None
    return None


@dataclass
class HubOutcome:
    """Result of ``matching_or_hubs``: outcome ``"i"`` (matching + extra edge) or ``"ii"`` (hubs)."""

    kind: str
    matching: frozenset[Edge] = frozenset()
    extra_edge: Edge | None = None
    hubs: tuple[int, ...] = ()
    covers_all_edges: bool | None = None
    forced: bool = False
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"outcome": self.kind, "forced": self.forced}
        if self.kind == "i":
            out["matching"] = [list(e) for e in sorted(self.matching)]
            out["extra_edge"] = list(self.extra_edge) if self.extra_edge else None
        else:
            out["hubs"] = list(self.hubs)
            out["covers_all_edges"] = self.covers_all_edges
        return out


def matching_or_hubs(g: Graph, ell: int, delta: int, delta_prime: int) -> HubOutcome:
    """Either a matching of ``ell+1`` edges plus an edge ``uv`` with ``u`` uncovered (outcome i),
    or ``ell`` vertices of degree at least ``delta_prime`` (outcome ii).

    Outcome (i) is decided exactly with a maximum matching, so it is returned
    whenever it exists; in particular whenever ``e >= ell*delta + 1``
    (``ell >= 1``) or ``e >= 2`` (``ell = 0``).
    """
    if ell < 0:
        raise InputError("ell must be non-negative")
    if g.max_degree() > delta:
        raise PreconditionError(f"maximum degree {g.max_degree()} exceeds delta={delta}")
    if g.m < (ell - 1) * delta + delta_prime:
        raise PreconditionError(f"need at least {(ell - 1) * delta + delta_prime} edges, got {g.m}")
    forced = (ell >= 1 and g.m >= ell * delta + 1) or (ell == 0 and g.m >= 2)
    big = blossom_matching(g)
    if len(big) >= ell + 2:
        pool = sorted(big)
        return HubOutcome("i", frozenset(pool[: ell + 1]), pool[ell + 1], forced=forced)
    if len(big) == ell + 1:
        covered = mask_of(matched_vertices(big))
        for x in range(g.n):
            if not (covered >> x) & 1 and g.rows[x]:
                y = min(g.neighbours(x))
                return HubOutcome("i", big, (x, y), forced=forced)
    degs = g.degrees()
    heavy = sorted((x for x in range(g.n) if degs[x] >= delta_prime), key=lambda x: (-degs[x], x))
    if len(heavy) < ell or forced:
        raise StepFailure(
            "neither a large matching nor enough high-degree vertices",
            step="lemma_goodmatching2",
            max_matching=len(big),
            heavy=len(heavy),
        )
    hubs = tuple(sorted(heavy[:ell]))
    hub_mask = mask_of(hubs)
    covers = all((hub_mask >> a) & 1 or (hub_mask >> b) & 1 for a, b in g.edges())
    return HubOutcome("ii", hubs=hubs, covers_all_edges=covers)


def extend_matching_casei(
    g: Graph,
    x: VertexSetLike,
    y: VertexSetLike,
    m: Iterable[Edge],
    mprime: Iterable[Edge],
    uv: Sequence[int],
) -> PathSystem:
    """Path system inside ``m + mprime + {uv}`` with ``P[X,Y] = m``, ``e_P(Y) = |mprime|``
    and at least two X-Y paths."""
    xm, ym = _m(x), _m(y)
    m, mprime = as_matching(m), as_matching(mprime)
    u, v = int(uv[0]), int(uv[1])
    if not m or len(m) % 2:
        raise PreconditionError("m must be a non-empty matching of even size")
    for a, b in m:
        if not (((xm >> a) & 1 and (ym >> b) & 1) or ((xm >> b) & 1 and (ym >> a) & 1)):
            raise PreconditionError(f"edge {(a, b)} of m is not an X-Y edge")
    for a, b in list(mprime) + [norm_edge(u, v)]:
        if not ((ym >> a) & 1 and (ym >> b) & 1) or not g.has_edge(a, b):
            raise PreconditionError(f"edge {(a, b)} is not an edge of G[Y]")
    if u in matched_vertices(mprime):
        raise PreconditionError("u must be uncovered by mprime")
    base = PathSystem(set(m) | set(mprime))
    if count_class_paths(base, xm, ym) > 0:
        return base
    inner = ym & mask_of(matched_vertices(m))
    perfect = sorted(e for e in mprime if (inner >> e[0]) & 1 and (inner >> e[1]) & 1)
    with_v = [e for e in perfect if v in e]
    if not perfect:
        raise StepFailure("no repair edge available", step="prop_casei")
    f = with_v[0] if with_v else perfect[0]
    p = PathSystem((set(m) | set(mprime) | {norm_edge(u, v)}) - {f})
    if count_class_paths(p, xm, ym) < 2:
        raise StepFailure("repair did not create two X-Y paths", step="prop_casei")
    return p


def hub_cherries(
    g: Graph,
    y: VertexSetLike,
    hubs: Sequence[int],
    single: VertexSetLike = 0,
    skip: VertexSetLike = 0,
    forbidden: VertexSetLike = 0,
) -> frozenset[Edge]:
    """Vertex-disjoint stars at the hubs inside ``G[Y]``.

    Each hub receives two edges (a path of length two centred at it), one
    edge if it is in ``single``, none if it is in ``skip``.  Leaves are
    distinct, lie in ``Y`` and avoid ``forbidden`` and all hubs.  Leaves are
    assigned by a flow so the choice succeeds whenever any choice does.
    """
    ym, sm, km, fm = _m(y), _m(single), _m(skip), _m(forbidden)
    hub_mask = mask_of(hubs)
    cap: dict[Any, dict[Any, int]] = {"s": {}, "t": {}}
    need = 0
    rows = g.rows
    for h in hubs:
        if (km >> h) & 1:
            continue
        want = 1 if (sm >> h) & 1 else 2
        need += want
        cap["s"][("h", h)] = want
        cap[("h", h)] = {}
        for w in bits(rows[h] & ym & ~fm & ~hub_mask):
            cap[("h", h)][("w", w)] = 1
            cap.setdefault(("w", w), {"t": 1})
    if _max_flow(cap, "s", "t", need) < need:
        raise StepFailure("hubs do not have enough free neighbours", step="prop_2paths", need=need)
    out = []
    for h in hubs:
        for node, c in cap.get(("h", h), {}).items():
            if node[0] == "w" and c == 0:
                out.append(norm_edge(h, node[1]))
    return frozenset(out)


def hub_paths(
    g: Graph,
    x: VertexSetLike,
    y: VertexSetLike,
    m: Iterable[Edge],
    hubs: Sequence[int],
    r: int,
    *,
    strict: bool = True,
) -> PathSystem:
    """``m`` plus length-two paths at the hubs, trimmed so that ``e_P(Y) = len(hubs) + r``.

    Hubs already covered by ``m`` get a single pendant edge.  Every edge of
    ``m`` ends up on its own X-Y path.  With ``strict`` the degree hypothesis
    ``d_Y(hub) >= 3*len(hubs) + e(m)`` is enforced up front.
    """
    ym = _m(y)
    m = as_matching(m)
    hubs = sorted(set(hubs))
    ell = len(hubs)
    covered = mask_of(matched_vertices(m))
    free_hubs = [h for h in hubs if not (covered >> h) & 1]
    if len(free_hubs) < r:
        raise PreconditionError(f"only {len(free_hubs)} hubs avoid m, need {r}")
    if strict:
        for h in hubs:
            if (g.rows[h] & ym).bit_count() < 3 * ell + len(m):
                raise PreconditionError(f"hub {h} has too few neighbours in Y", hub=h)
    stars = hub_cherries(g, ym, hubs, single=covered & mask_of(hubs), forbidden=covered)
    by_hub: dict[int, list[Edge]] = {h: sorted(e for e in stars if h in e) for h in hubs}
    excess = len(stars) - (ell + r)
    if excess < 0:
        raise StepFailure("not enough hub edges", step="prop_2paths")
    drop: list[Edge] = []
    for h in free_hubs:
        if excess <= len(drop):
            break
        drop.append(by_hub[h][-1])
    for h in hubs:
        if excess <= len(drop):
            break
        for e in by_hub[h]:
            if e not in drop and excess > len(drop):
                drop.append(e)
    return PathSystem(set(m) | (set(stars) - set(drop[:excess])))
