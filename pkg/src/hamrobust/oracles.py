"""Brute-force ground truth used to cross-check every constructive routine.

Nothing here imports a builder: the oracles only know graphs, path systems
and validators, so agreement between a builder and an oracle is meaningful.

Hamiltonicity and longest cycles use a subset dynamic programme over
"reachable endpoint" bitsets, vectorised with numpy one popcount layer at a
time.  Larger inputs first try a seeded rotation-extension heuristic (a
found cycle is always verified) and then fall back to a depth-first
branch-and-bound with an explicit node budget; running out of budget raises
``Indeterminate``, which is distinct from a definitive negative answer.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterable, Sequence

import numpy as np

from .errors import Indeterminate, InputError
from .graph_core import Edge, Graph, bits, mask_of, norm_edge
from .path_system import PathSystem

DP_LIMIT = 24
COMPLETION_DP_LIMIT = 20
DEFAULT_BUDGET = 2_000_000

Cycle = list[int]


# ---------------------------------------------------------------------------
# cycle validation
# ---------------------------------------------------------------------------


def check_cycle(g: Graph, cycle: Sequence[int]) -> None:
    """Raise ``InputError`` unless ``cycle`` is a cycle of ``g`` (at least 3 distinct vertices)."""
    if len(cycle) < 3 or len(set(cycle)) != len(cycle):
        raise InputError("a cycle needs at least three distinct vertices")
    for i, v in enumerate(cycle):
        w = cycle[(i + 1) % len(cycle)]
        if not (0 <= v < g.n and 0 <= w < g.n and g.has_edge(v, w)):
            raise InputError(f"{v}-{w} is not an edge", edge=(v, w))


def is_hamilton_cycle(g: Graph, cycle: Sequence[int] | None) -> bool:
    if cycle is None or len(cycle) != g.n:
        return False
    try:
        check_cycle(g, cycle)
    except InputError:
        return False
    return True


def check_dominating(g: Graph, cycle: Sequence[int]) -> bool:
    """True iff the vertices off the cycle form an independent set."""
    check_cycle(g, cycle)
    return _dominating_mask(g, mask_of(cycle))


def _dominating_mask(g: Graph, on_cycle: int) -> bool:
    rest = g.full_mask & ~on_cycle
    rows = g.rows
    return all(not rows[v] & rest for v in bits(rest))


# ---------------------------------------------------------------------------
# subset dynamic programme
# ---------------------------------------------------------------------------


def _reachable_table(local_adj: Sequence[int], start_nbrs: int) -> np.ndarray:
    """``table[mask]`` = bitset of ``v`` such that a path leaves the start, visits exactly ``mask`` and ends at ``v``.

    Vertices are ``0..k-1`` in local numbering; the start vertex is implicit.
    """
    k = len(local_adj)
    size = 1 << k
    dtype = np.uint32 if k <= 32 else np.uint64
    table = np.zeros(size, dtype=dtype)
    for v in range(k):
        if (start_nbrs >> v) & 1:
            table[1 << v] = 1 << v
    if k == 0:
        return table
    masks = np.arange(size, dtype=np.int64)
    pop = np.bitwise_count(masks.astype(np.uint64)).astype(np.int8)
    nbr = [dtype(a) for a in local_adj]
    for layer in range(1, k):
        idx = masks[pop == layer]
        reach = table[idx]
        live = reach != 0
        idx, reach = idx[live], reach[live]
        if idx.size == 0:
            continue
        for v in range(k):
            bit = 1 << v
            sel = ((idx & bit) == 0) & ((reach & nbr[v]) != 0)
            if sel.any():
                table[idx[sel] | bit] |= dtype(bit)
    return table


def _walk_back(table: np.ndarray, local_adj: Sequence[int], start_nbrs: int, mask: int, end: int) -> list[int]:
    """Recover one path (local vertices, start omitted) ending at ``end`` covering ``mask``."""
    path = [end]
    while mask != (1 << end):
        prev_mask = mask & ~(1 << end)
        options = int(table[prev_mask]) & local_adj[end]
        nxt = (options & -options).bit_length() - 1
        path.append(nxt)
        mask, end = prev_mask, nxt
    path.reverse()
    return path


def _hamilton_dp(g: Graph) -> Cycle | None:
    n = g.n
    if n < 3:
        return None
    rows = g.rows
    # vertex 0 is the start; local index i stands for vertex i+1
    local_adj = [rows[v] >> 1 for v in range(1, n)]
    start = rows[0] >> 1
    table = _reachable_table(local_adj, start)
    full = (1 << (n - 1)) - 1
    closing = int(table[full]) & start
    if not closing:
        return None
    end = (closing & -closing).bit_length() - 1
    path = _walk_back(table, local_adj, start, full, end)
    return [0] + [v + 1 for v in path]


def _hamilton_search(g: Graph, budget: int) -> Cycle | None:
    """Depth-first extension of a path from vertex 0 with degree pruning."""
    n = g.n
    rows = g.rows
    if n < 3 or any(r.bit_count() < 2 for r in rows):
        return None
    path = [0]
    visited = 1
    nodes = 0
    full = g.full_mask

    def feasible(visited: int, head: int) -> bool:
        unvisited = full & ~visited
        open_ends = (1 << head) | 1
        for v in bits(unvisited):
            if (rows[v] & (unvisited | open_ends)).bit_count() < 2:
                return False
        return True

    def rec(head: int) -> bool:
        nonlocal visited, nodes
        nodes += 1
        if nodes > budget:
            raise Indeterminate("Hamilton search budget exhausted", step="find_hamilton", budget=budget)
        if len(path) == n:
            return bool(rows[head] & 1)
        unvisited = full & ~visited
        cand = list(bits(rows[head] & unvisited))
        cand.sort(key=lambda w: ((rows[w] & unvisited).bit_count(), w))
        for w in cand:
            visited |= 1 << w
            path.append(w)
            if feasible(visited, w) and rec(w):
                return True
            path.pop()
            visited &= ~(1 << w)
        return False

    return list(path) if rec(0) else None


def _rotation_extension(g: Graph, seed: int, steps: int) -> Cycle | None:
    """Randomised rotation-extension heuristic; returns a verified cycle or ``None``."""
    rng = random.Random(seed)
    n = g.n
    rows = g.rows
    path = [rng.randrange(n)]
    where = {path[0]: 0}
    for _ in range(steps):
        end = path[-1]
        fresh = [w for w in bits(rows[end]) if w not in where]
        if fresh:
            w = rng.choice(fresh)
            where[w] = len(path)
            path.append(w)
            continue
        if len(path) == n and rows[end] >> path[0] & 1:
            return path
        pivots = [w for w in bits(rows[end]) if where[w] < len(path) - 2]
        if not pivots:
            path.reverse()
            where = {v: i for i, v in enumerate(path)}
            continue
        i = where[rng.choice(pivots)]
        path[i + 1 :] = path[:i:-1]
        for j in range(i + 1, len(path)):
            where[path[j]] = j
    return None


def find_hamilton(g: Graph, budget: int | None = None) -> Cycle | None:
    """A Hamilton cycle, or ``None`` when none exists.

    Exact by dynamic programming for ``n <= 24``.  Beyond that a seeded
    rotation-extension heuristic runs first and a budgeted exact search
    afterwards; exhausting the budget raises ``Indeterminate``.
    """
    if g.n <= DP_LIMIT:
        return _hamilton_dp(g)
    if all(r.bit_count() >= 2 for r in g.rows):
        for seed in range(4):
            cyc = _rotation_extension(g, seed, 50 * g.n * g.n)
            if cyc is not None:
                return cyc
    return _hamilton_search(g, DEFAULT_BUDGET if budget is None else budget)


# ---------------------------------------------------------------------------
# longest cycles
# ---------------------------------------------------------------------------


def _longest_by_dp(g: Graph) -> tuple[int, list[int]]:
    """Length of a longest cycle and the vertex masks of every longest cycle.

    Each cycle is counted from its smallest vertex ``s``, so the programme
    for ``s`` only uses vertices above ``s``.
    """
    n = g.n
    rows = g.rows
    best, sets = 0, []
    for s in range(n - 2):
        if n - s < max(best, 3):
            break
        shift = s + 1
        local_adj = [rows[v] >> shift for v in range(shift, n)]
        start = rows[s] >> shift
        table = _reachable_table(local_adj, start)
        idx = np.nonzero((table & table.dtype.type(start)) != 0)[0]
        pops = np.bitwise_count(idx.astype(np.uint64))
        keep = pops >= 2
        idx, pops = idx[keep], pops[keep]
        if idx.size == 0:
            continue
        top = int(pops.max()) + 1
        if top < best:
            continue
        chosen = [(int(x) << shift) | (1 << s) for x in idx[pops == top - 1]]
        if top > best:
            best, sets = top, chosen
        else:
            sets.extend(chosen)
    return best, sorted(set(sets))


def _cycle_on(g: Graph, vertex_mask: int) -> Cycle:
    """A Hamilton cycle of ``g[vertex_mask]`` (which must exist)."""
    verts = list(bits(vertex_mask))
    sub, order = g.induced(verts)
    cyc = _hamilton_dp(sub)
    if cyc is None:
        raise RuntimeError("vertex set does not carry a cycle")
    return [order[i] for i in cyc]


def longest_cycle(g: Graph, budget: int | None = None) -> Cycle:
    """A maximum-length cycle (exact up to 24 vertices; budgeted search beyond)."""
    if g.n <= DP_LIMIT:
        length, sets = _longest_by_dp(g)
        if length == 0:
            raise InputError("graph has no cycle")
        return _cycle_on(g, sets[0])
    ham = find_hamilton(g, budget)
    if ham is not None:
        return ham
    raise Indeterminate("longest cycle beyond the exact range", step="longest_cycle")


def longest_cycle_vertex_sets(g: Graph) -> tuple[int, list[frozenset[int]]]:
    """Length of a longest cycle and the vertex sets of all longest cycles (exact, n <= 24)."""
    if g.n > DP_LIMIT:
        raise Indeterminate("enumeration of longest cycles is exact only up to 24 vertices")
    length, sets = _longest_by_dp(g)
    if length == 0:
        raise InputError("graph has no cycle")
    return length, [frozenset(bits(s)) for s in sets]


def all_longest_cycles_dominating(g: Graph) -> bool:
    """Every longest cycle of ``g`` is dominating (domination depends only on the vertex set)."""
    _, sets = longest_cycle_vertex_sets(g)
    return all(_dominating_mask(g, mask_of(s)) for s in sets)


# ---------------------------------------------------------------------------
# completion of a path system to a Hamilton cycle
# ---------------------------------------------------------------------------


def complete_to_hamilton(g: Graph, spec: object, p: PathSystem, budget: int | None = None) -> Cycle | None:
    """A Hamilton cycle of ``g`` containing every edge of ``p``, or ``None`` if none exists.

    Each path of ``p`` is contracted to a unit entered at one end and left at
    the other; uncovered vertices are one-vertex units.  A subset programme
    over units decides existence exactly for up to 21 units; more units
    use a budgeted search.  ``spec`` is
    accepted for interface symmetry with the builders and is not needed.
    """
    if not p.in_graph(g):
        raise InputError("path system uses edges outside the graph")
    n = g.n
    rows = g.rows
    units: list[list[int]] = [walk for walk in p.paths()]
    covered = p.vertex_mask
    units += [[v] for v in bits(g.full_mask & ~covered)]
    units.sort(key=lambda w: min(w[0], w[-1]))
    k = len(units)
    if n < 3:
        return None
    if k == 1:
        walk = units[0]
        return list(walk) if len(walk) == n and g.has_edge(walk[0], walk[-1]) else None
    if k - 1 > COMPLETION_DP_LIMIT:
        return _complete_search(g, units, DEFAULT_BUDGET if budget is None else budget)
    first = units[0]
    head, tail = first[0], first[-1]  # the cycle starts at head and leaves the first unit at tail
    rest = units[1:]
    ends = [(w[0], w[-1]) for w in rest]
    size = 1 << (k - 1)
    # table[mask] = bitset of vertices at which a walk through exactly the units in mask can stop
    table = [0] * size

    def exits(reach: int, j: int) -> int:
        a, b = ends[j]
        out = 0
        if rows[a] & reach:
            out |= 1 << b
        if a != b and rows[b] & reach:
            out |= 1 << a
        return out

    for mask in range(size):
        reach = (1 << tail) if mask == 0 else table[mask]
        if not reach:
            continue
        for j in bits((size - 1) & ~mask):
            add = exits(reach, j)
            if add:
                table[mask | (1 << j)] |= add
    final = table[size - 1] & rows[head]
    if not final:
        return None
    order: list[list[int]] = []
    mask, exit_v = size - 1, (final & -final).bit_length() - 1
    while mask:
        for j in bits(mask):
            a, b = ends[j]
            prev = mask & ~(1 << j)
            prev_reach = (1 << tail) if prev == 0 else table[prev]
            if exit_v == b and rows[a] & prev_reach:
                order.append(rest[j])
                entry = a
            elif exit_v == a and a != b and rows[b] & prev_reach:
                order.append(rest[j][::-1])
                entry = b
            else:
                continue
            options = rows[entry] & prev_reach
            mask, exit_v = prev, (options & -options).bit_length() - 1
            break
        else:  # pragma: no cover - the table guarantees a predecessor
            raise RuntimeError("completion reconstruction failed")
    cycle = list(first)
    for walk in reversed(order):
        cycle.extend(walk)
    return cycle


def _complete_search(g: Graph, units: list[list[int]], budget: int) -> Cycle | None:
    rows = g.rows
    k = len(units)
    ends_of = {}
    for j, w in enumerate(units):
        ends_of[w[0]] = (j, w[-1])
        ends_of[w[-1]] = (j, w[0])
    used = [False] * k
    used[0] = True
    seq = [units[0]]
    nodes = 0

    def rec(exit_v: int, count: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise Indeterminate("completion budget exhausted", step="complete_to_hamilton")
        if count == k:
            return bool(rows[exit_v] >> units[0][0] & 1)
        for y in bits(rows[exit_v]):
            if y not in ends_of:
                continue
            j, other = ends_of[y]
            if used[j]:
                continue
            used[j] = True
            seq.append(units[j] if units[j][0] == y else list(reversed(units[j])))
            if rec(other, count + 1):
                return True
            seq.pop()
            used[j] = False
        return False

    if not rec(units[0][-1], 1):
        return None
    out: list[int] = []
    for w in seq:
        out.extend(w)
    return out


# ---------------------------------------------------------------------------
# exhaustive path-system search
# ---------------------------------------------------------------------------


def exhaustive_path_system(
    g: Graph,
    predicate: Callable[[PathSystem], bool],
    max_edges: int,
    candidate_edges: Iterable[Sequence[int]] | None = None,
    budget: int | None = None,
) -> PathSystem | None:
    """Lexicographically first path system of at most ``max_edges`` edges accepted by ``predicate``.

    Edge sets are visited in preorder over the sorted candidate list, which
    is lexicographic order on sorted edge sequences.  Acyclicity is kept in
    constant time per step through an ``other_end`` map from each path
    endpoint to the opposite endpoint.  Returns ``None`` (definitive) when
    the whole space was searched; raises ``Indeterminate`` on budget.
    """
    if candidate_edges is None:
        cands = g.edges()
    else:
        cands = sorted({norm_edge(int(e[0]), int(e[1])) for e in candidate_edges})
        for u, v in cands:
            if not g.has_edge(u, v):
                raise InputError(f"candidate {(u, v)} is not an edge of the graph")
    limit = DEFAULT_BUDGET * 10 if budget is None else budget
    deg = [0] * g.n
    other_end: dict[int, int] = {}
    chosen: list[Edge] = []
    nodes = 0

    def visit(start: int) -> PathSystem | None:
        nonlocal nodes
        nodes += 1
        if nodes > limit:
            raise Indeterminate("path-system search budget exhausted", step="exhaustive_path_system", budget=limit)
        system = PathSystem(chosen)
        if predicate(system):
            return system
        if len(chosen) >= max_edges:
            return None
        for i in range(start, len(cands)):
            a, b = cands[i]
            if deg[a] >= 2 or deg[b] >= 2:
                continue
            ea, eb = other_end.get(a, a), other_end.get(b, b)
            if ea == b:
                continue  # would close a cycle
            saved = (other_end.get(a), other_end.get(b), other_end.get(ea), other_end.get(eb))
            deg[a] += 1
            deg[b] += 1
            other_end.pop(a, None)
            other_end.pop(b, None)
            other_end[ea], other_end[eb] = eb, ea
            chosen.append((a, b))
            found = visit(i + 1)
            chosen.pop()
            deg[a] -= 1
            deg[b] -= 1
            for key, val in zip((ea, eb, a, b), (saved[2], saved[3], saved[0], saved[1])):
                if val is None:
                    other_end.pop(key, None)
                else:
                    other_end[key] = val
            if found is not None:
                return found
        return None

    return visit(0)
