"""Graph families: extremal non-Hamiltonian examples and synthetic inputs.

* ``build_extremal_gn`` realises the D-regular, non-1-tough graphs ``G_n``
  showing the degree bound ``D >= n/4`` cannot be lowered.
* ``build_three_clique`` is the (3k-1)-regular, 2-connected, non-Hamiltonian
  example showing 3-connectivity cannot be dropped.
* ``random_regular`` and ``plant_partitioned`` supply test inputs; the latter
  returns a regular graph together with the robust partition it was built
  around.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from .errors import ConstructionError, InputError
from .graph_core import Edge, Graph, norm_edge
from .robustness import PartitionSpec, RobustParams

# n mod 8 -> (D, |V1|, |V2|, |A1| odd?, |A2| odd?) written for n = 8k + r,
# with D, |V1|, |V2| given as offsets (coefficient of k is 2 in every entry).
EXTREMAL_TABLE: dict[int, tuple[int, int, int, bool, bool]] = {
    1: (0, 1, 1, False, False),
    2: (0, 2, 1, False, False),
    3: (0, 2, 2, False, False),
    4: (0, 3, 2, False, False),
    5: (0, 3, 3, False, False),
    6: (1, 3, 2, True, False),
    7: (0, 4, 4, False, False),
    0: (1, 4, 3, False, True),  # the row n = 8k + 8
}


def extremal_degree(n: int) -> int:
    """Largest ``D <= ceil(n/4) - 1`` with ``n*D`` even."""
    d = -(-n // 4) - 1
    if (n * d) % 2:
        d -= 1
    return d


@dataclass(frozen=True)
class ExtremalDescriptor:
    n: int
    D: int
    sizes: tuple[int, int, int, int]  # |V1|, |V2|, |A|, |B|
    split: tuple[int, int]  # |A1|, |A2|
    V1: tuple[int, ...]
    V2: tuple[int, ...]
    A1: tuple[int, ...]
    A2: tuple[int, ...]
    B: tuple[int, ...]
    V1_prime: tuple[int, ...]
    V2_prime: tuple[int, ...]

    @property
    def A(self) -> tuple[int, ...]:
        return self.A1 + self.A2

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "D": self.D, "sizes": list(self.sizes), "split": list(self.split)}

    def natural_spec(self, params: RobustParams | None = None) -> PartitionSpec:
        """The (2,1) partition ``V1, V2, (A, B)`` the construction is built around."""
        return PartitionSpec.make([self.V1, self.V2], [(self.A, self.B)], params)


def extremal_table_row(n: int) -> tuple[int, int, int, bool, bool]:
    """``(D, |V1|, |V2|, |A1| odd, |A2| odd)`` read off the table for ``n``."""
    r = n % 8
    k = n // 8 if r else n // 8 - 1
    dd, v1, v2, odd1, odd2 = EXTREMAL_TABLE[r]
    return 2 * k + dd, 2 * k + v1, 2 * k + v2, odd1, odd2


def extremal_split(d: int, odd1: bool, odd2: bool) -> tuple[int, int]:
    """``(|A1|, |A2|)`` summing to ``d`` with the given parities, ``| d/2 - |A1| |`` minimal.

    Ties go to the larger ``|A1|``.
    """
    best = None
    for a1 in range(d + 1):
        a2 = d - a1
        if a1 % 2 != int(odd1) or a2 % 2 != int(odd2):
            continue
        key = (abs(d - 2 * a1), -a1)
        if best is None or key < best[0]:
            best = (key, (a1, a2))
    if best is None:
        raise ConstructionError(f"no parity-feasible split of |A| = {d}", odd1=odd1, odd2=odd2)
    return best[1]


def _even_block(m: int, d: int, a: int) -> tuple[list[Edge], list[int]]:
    """D-regular circulant on ``range(m)`` minus ``a/2`` disjoint chords.

    Returns the edges and the ``a`` vertices left one short (``V_i'``).
    """
    half = d // 2
    edges = {norm_edge(j, (j + s) % m) for j in range(m) for s in range(1, half + 1)}
    removed = [(2 * t, 2 * t + 1) for t in range(a // 2)]
    for e in removed:
        edges.discard(e)
    return sorted(edges), list(range(a))


def _odd_block(m: int, d: int, a: int) -> tuple[list[Edge], list[int]]:
    """Graph on ``range(m)`` with degree ``d-1`` on ``a`` vertices and ``d`` elsewhere (``d`` odd)."""
    half = (d - 1) // 2
    edges = {norm_edge(j, (j + s) % m) for j in range(m) for s in range(1, half + 1)}
    extra = (m - a) // 2
    if m % 2 == 0:
        pairs = [(j, j + m // 2) for j in range(extra)]
    else:
        step = (m - 1) // 2
        seq = [(t * step) % m for t in range(m)]
        pairs = [(seq[2 * t], seq[2 * t + 1]) for t in range(extra)]
    covered = set()
    for u, v in pairs:
        edges.add(norm_edge(u, v))
        covered |= {u, v}
    short = [v for v in range(m) if v not in covered]
    return sorted(edges), short


def build_extremal_gn(n: int) -> tuple[Graph, ExtremalDescriptor]:
    """The non-Hamiltonian D-regular graph ``G_n`` with ``D = extremal_degree(n)``.

    Vertex layout: ``V1``, then ``V2``, then ``A1``, ``A2``, then ``B``.
    """
    if n < 9:
        raise ConstructionError(
            f"n = {n} is below 9: the table row gives |B| = D - 1 < 1 or an empty class",
            n=n,
            D=max(extremal_degree(n), 0) if n > 0 else 0,
        )
    d = extremal_degree(n)
    d_table, s1, s2, odd1, odd2 = extremal_table_row(n)
    if d_table != d:
        raise ConstructionError(f"table degree {d_table} disagrees with the degree rule {d}", n=n)
    na, nb = d, d - 1
    if s1 + s2 + na + nb != n:
        raise ConstructionError(f"class sizes do not add up to n = {n}", n=n)
    for s in (s1, s2):
        if s < d + 1:
            raise ConstructionError(f"|V_i| = {s} < D + 1 = {d + 1}", n=n)
    a1, a2 = extremal_split(d, odd1, odd2)
    v1 = list(range(s1))
    v2 = list(range(s1, s1 + s2))
    a1_ids = list(range(s1 + s2, s1 + s2 + a1))
    a2_ids = list(range(s1 + s2 + a1, s1 + s2 + na))
    b_ids = list(range(s1 + s2 + na, n))
    edges: list[Edge] = [(x, y) for x in a1_ids + a2_ids for y in b_ids]
    primes = []
    for base, size, a_ids in ((0, s1, a1_ids), (s1, s2, a2_ids)):
        if d % 2 == 0:
            block, short = _even_block(size, d, len(a_ids))
        else:
            block, short = _odd_block(size, d, len(a_ids))
        edges += [(base + u, base + v) for u, v in block]
        prime = [base + v for v in short]
        edges += list(zip(prime, a_ids))
        primes.append(tuple(prime))
    g = Graph(n, edges)
    desc = ExtremalDescriptor(
        n=n,
        D=d,
        sizes=(s1, s2, na, nb),
        split=(a1, a2),
        V1=tuple(v1),
        V2=tuple(v2),
        A1=tuple(a1_ids),
        A2=tuple(a2_ids),
        B=tuple(b_ids),
        V1_prime=primes[0],
        V2_prime=primes[1],
    )
    return g, desc


@dataclass(frozen=True)
class ThreeCliqueDescriptor:
    k: int
    cliques: tuple[tuple[int, ...], ...]
    A: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]
    a: int
    b: int


def build_three_clique(k: int) -> tuple[Graph, ThreeCliqueDescriptor]:
    """Three ``3k``-cliques glued through two extra vertices ``a`` and ``b``.

    Clique ``i`` loses a perfect matching between ``A_i`` and ``B_i``
    (``|A_1| = |A_3| = k``, ``|A_2| = k - 1``); ``a`` is joined to every
    ``A_i`` and ``b`` to every ``B_i``.  Clique ``i`` occupies ids
    ``3k*i .. 3k*i + 3k - 1`` with ``A_i`` first, then ``B_i``;
    ``a = 9k`` and ``b = 9k + 1``.
    """
    if k < 1:
        raise InputError(f"k must be at least 1, got {k}")
    size = 3 * k
    n = 9 * k + 2
    a, b = n - 2, n - 1
    edges: list[Edge] = []
    cliques, a_sets, b_sets = [], [], []
    for i, s in enumerate((k, k - 1, k)):
        ids = list(range(size * i, size * (i + 1)))
        a_ids, b_ids = ids[:s], ids[s : 2 * s]
        removed = set(zip(a_ids, b_ids))
        edges += [(u, v) for x, u in enumerate(ids) for v in ids[x + 1 :] if (u, v) not in removed]
        edges += [(a, u) for u in a_ids] + [(b, v) for v in b_ids]
        cliques.append(tuple(ids))
        a_sets.append(tuple(a_ids))
        b_sets.append(tuple(b_ids))
    return Graph(n, edges), ThreeCliqueDescriptor(k, tuple(cliques), tuple(a_sets), tuple(b_sets), a, b)


# ---------------------------------------------------------------------------
# random regular graphs
# ---------------------------------------------------------------------------


def random_regular(n: int, d: int, seed: int | None = 0, *, restarts: int = 200) -> Graph:
    """A random simple ``d``-regular graph on ``n`` vertices.

    Points are paired one at a time, each time choosing uniformly among the
    pairs that keep the graph simple; a dead end restarts the pairing.  Dense
    requests (``d > (n-1)/2``) are served as complements of sparse ones.  The
    result depends only on ``(n, d, seed)``.
    """
    if n < 0 or d < 0:
        raise InputError("n and d must be non-negative")
    if d >= n and not (n == 0 and d == 0):
        raise InputError(f"a {d}-regular graph needs more than {d} vertices (n = {n})")
    if (n * d) % 2:
        raise InputError(f"n*d must be even (n = {n}, d = {d})")
    if 2 * d > n - 1:
        sparse = random_regular(n, n - 1 - d, seed, restarts=restarts)
        full = (1 << n) - 1
        return Graph.from_rows([full & ~row & ~(1 << v) for v, row in enumerate(sparse.rows)], check=False)
    rng = random.Random(seed)
    for _ in range(restarts):
        rows = _pairing_attempt(n, d, rng)
        if rows is not None:
            return Graph.from_rows(rows, check=False)
    raise ConstructionError(f"pairing failed {restarts} times for n = {n}, d = {d}", n=n, d=d)


def _pairing_attempt(n: int, d: int, rng: random.Random) -> list[int] | None:
    rows = [0] * n
    free = [d] * n
    open_vertices = [v for v in range(n) if d > 0]
    while open_vertices:
        total = sum(free[v] for v in open_vertices)
        # draw two points proportional to remaining stubs; retry a few times
        for _ in range(50):
            u = _weighted_pick(open_vertices, free, total, rng)
            v = _weighted_pick(open_vertices, free, total, rng)
            if u != v and not rows[u] >> v & 1:
                break
        else:
            candidates = [
                (u, v) for i, u in enumerate(open_vertices) for v in open_vertices[i + 1 :] if not rows[u] >> v & 1
            ]
            if not candidates:
                return None
            u, v = rng.choice(candidates)
        rows[u] |= 1 << v
        rows[v] |= 1 << u
        free[u] -= 1
        free[v] -= 1
        open_vertices = [w for w in open_vertices if free[w]]
    return rows


def _weighted_pick(items: Sequence[int], weights: Sequence[int], total: int, rng: random.Random) -> int:
    r = rng.randrange(total)
    for v in items:
        r -= weights[v]
        if r < 0:
            return v
    return items[-1]


# ---------------------------------------------------------------------------
# planted robust partitions
# ---------------------------------------------------------------------------


def _havel_hakimi(ids: Sequence[int], demand: dict[int, int]) -> list[Edge]:
    """Realise ``demand`` as a simple graph on ``ids`` (deterministic)."""
    left = {v: demand[v] for v in ids}
    edges: list[Edge] = []
    while True:
        order = sorted((v for v in ids if left[v] > 0), key=lambda v: (-left[v], v))
        if not order:
            return edges
        v = order[0]
        need = left[v]
        rest = order[1:]
        if len(rest) < need:
            raise ConstructionError("degree sequence is not graphical", vertex=v, demand=need)
        for w in rest[:need]:
            edges.append(norm_edge(v, w))
            left[w] -= 1
        left[v] = 0


def _gale_ryser(
    a_ids: Sequence[int], b_ids: Sequence[int], need_a: dict[int, int], need_b: dict[int, int]
) -> list[Edge]:
    """Realise a bipartite degree sequence; each ``b`` takes the ``a`` with most remaining need."""
    if sum(need_a[a] for a in a_ids) != sum(need_b[b] for b in b_ids):
        raise ConstructionError("bipartite degree sums differ")
    left = dict(need_a)
    edges: list[Edge] = []
    for b in sorted(b_ids, key=lambda v: (-need_b[v], v)):
        order = sorted((a for a in a_ids if left[a] > 0), key=lambda v: (-left[v], v))
        if len(order) < need_b[b]:
            raise ConstructionError("bipartite degree sequence is not realisable", vertex=b)
        for a in order[: need_b[b]]:
            edges.append((a, b))
            left[a] -= 1
    return edges


def _shuffle_edges(
    edges: list[Edge], rng: random.Random, rounds: int, bipartite_left: set[int] | None = None
) -> list[Edge]:
    """Degree-preserving double-edge swaps; bipartite blocks keep their sides."""
    if len(edges) < 2:
        return edges
    edges = [tuple(e) for e in edges]
    present = {norm_edge(*e) for e in edges}
    for _ in range(rounds):
        i, j = rng.randrange(len(edges)), rng.randrange(len(edges))
        if i == j:
            continue
        (a, b), (c, d) = edges[i], edges[j]
        if bipartite_left is None and rng.random() < 0.5:
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        e1, e2 = norm_edge(a, d), norm_edge(c, b)
        if e1 in present or e2 in present:
            continue
        present -= {norm_edge(a, b), norm_edge(c, d)}
        present |= {e1, e2}
        edges[i], edges[j] = (a, d), (c, b)
    return [norm_edge(*e) for e in edges]


def plant_partitioned(
    expander_sizes: Sequence[int],
    bipartite_sizes: Sequence[tuple[int, int]],
    degree: int,
    cross_edges: int | dict[tuple[int, int], int] = 0,
    seed: int | None = 0,
    *,
    params: RobustParams | None = None,
    bipartite_side: str = "mixed",
    shuffle_rounds: int = 10,
) -> tuple[Graph, PartitionSpec]:
    """A ``degree``-regular graph built around a known robust partition.

    Classes are laid out in order: the expander classes, then for each
    bipartite class its ``A`` side followed by its ``B`` side.  Cross edges
    join consecutive classes around a cycle (an int total is spread evenly;
    a dict ``{(i, j): count}`` prescribes counts per class pair).  Inside an
    expander class the remaining degrees are realised and then randomised
    by edge swaps; in a bipartite class ``B`` stays independent and ``A``
    receives exactly the internal edges that regularity forces.
    ``bipartite_side`` chooses where cross edges land in a bipartite class:
    ``"A"``, ``"B"`` or ``"mixed"`` (alternating).
    """
    if degree < 1:
        raise InputError("degree must be positive")
    if bipartite_side not in ("A", "B", "mixed"):
        raise InputError("bipartite_side must be 'A', 'B' or 'mixed'")
    rng = random.Random(seed)
    classes: list[list[int]] = []
    sides: list[tuple[list[int], list[int]] | None] = []
    nxt = 0
    for s in expander_sizes:
        if s < degree + 1:
            raise ConstructionError(f"expander class of size {s} cannot carry degree {degree}")
        classes.append(list(range(nxt, nxt + s)))
        sides.append(None)
        nxt += s
    for sa, sb in bipartite_sizes:
        if sa < sb:
            raise InputError(f"bipartite classes need |A| >= |B|, got {sa} < {sb}")
        a_ids, b_ids = list(range(nxt, nxt + sa)), list(range(nxt + sa, nxt + sa + sb))
        classes.append(a_ids + b_ids)
        sides.append((a_ids, b_ids))
        nxt += sa + sb
    n = nxt
    count = len(classes)
    if isinstance(cross_edges, int):
        pairs = [(i, (i + 1) % count) for i in range(count)] if count > 2 else ([(0, 1)] if count == 2 else [])
        plan: dict[tuple[int, int], int] = {}
        for t in range(cross_edges if pairs else 0):
            p = pairs[t % len(pairs)]
            plan[p] = plan.get(p, 0) + 1
    else:
        plan = dict(cross_edges)
    cross: list[Edge] = []
    cross_deg = [0] * n
    for (i, j), c in sorted(plan.items()):
        if i == j or not (0 <= i < count and 0 <= j < count):
            raise InputError(f"bad cross-edge class pair {(i, j)}")
        ends_i = _cross_endpoints(classes[i], sides[i], c, cross_deg, bipartite_side, rng)
        ends_j = _cross_endpoints(classes[j], sides[j], c, cross_deg, bipartite_side, rng)
        for u, v in zip(ends_i, ends_j):
            cross.append(norm_edge(u, v))
            cross_deg[u] += 1
            cross_deg[v] += 1
    if len(set(cross)) != len(cross):
        raise ConstructionError("cross edges collided; request fewer cross edges")
    edges: list[Edge] = list(cross)
    for ids, side in zip(classes, sides):
        demand = {v: degree - cross_deg[v] for v in ids}
        if any(x < 0 for x in demand.values()):
            raise ConstructionError("a vertex received more cross edges than its degree")
        if side is None:
            if sum(demand.values()) % 2:
                raise ConstructionError(
                    "odd residual degree sum inside an expander class; change the cross-edge count",
                    size=len(ids),
                )
            block = _havel_hakimi(ids, demand)
            edges += _shuffle_edges(block, rng, shuffle_rounds * len(block))
        else:
            edges += _bipartite_block(side[0], side[1], demand, rng, shuffle_rounds)
    g = Graph(n, edges)
    if any(dv != degree for dv in g.degrees()):
        raise ConstructionError("planted graph is not regular")
    spec = PartitionSpec.make(
        [c for c, s in zip(classes, sides) if s is None],
        [s for s in sides if s is not None],
        params,
    )
    return g, spec


def _cross_endpoints(
    ids: list[int],
    side: tuple[list[int], list[int]] | None,
    count: int,
    cross_deg: list[int],
    where: str,
    rng: random.Random,
) -> list[int]:
    """Pick ``count`` endpoints in a class, spreading them over distinct vertices first."""
    if side is None:
        pools = [ids]
    elif where == "A":
        pools = [side[0]]
    elif where == "B":
        pools = [side[1]]
    else:
        pools = [side[0], side[1]]
    out = []
    for t in range(count):
        pool = pools[t % len(pools)]
        low = min(cross_deg[v] + out.count(v) for v in pool)
        choices = [v for v in pool if cross_deg[v] + out.count(v) == low]
        out.append(rng.choice(choices))
    return out


def _bipartite_block(
    a_ids: list[int], b_ids: list[int], demand: dict[int, int], rng: random.Random, rounds: int
) -> list[Edge]:
    """Edges of a bipartite class: all of ``B``'s degree goes to ``A``, ``A``'s surplus stays inside ``A``."""
    to_a_from_b = sum(demand[b] for b in b_ids)
    inside = sum(demand[a] for a in a_ids) - to_a_from_b  # = 2 e(A)
    if inside < 0 or inside % 2:
        raise ConstructionError(
            "bipartite class cannot be completed: 2e(A) = |A|D - d(B) must be even and non-negative",
            surplus=inside,
        )
    # spread the internal degree of A as evenly as possible
    internal = {a: 0 for a in a_ids}
    order = sorted(a_ids, key=lambda v: (-demand[v], v))
    t = 0
    while inside > 0:
        a = order[t % len(order)]
        if internal[a] < demand[a]:
            internal[a] += 1
            inside -= 1
        t += 1
        if t > 10 * len(order) * (max(demand.values()) + 1):
            raise ConstructionError("cannot distribute internal degree of A")
    if sum(internal.values()) % 2:
        raise ConstructionError("internal degree of A has odd sum")
    need_a = {a: demand[a] - internal[a] for a in a_ids}
    need_b = {b: demand[b] for b in b_ids}
    cross = _gale_ryser(a_ids, b_ids, need_a, need_b)
    cross = _shuffle_edges(cross, rng, rounds * len(cross), bipartite_left=set(a_ids))
    inner = _havel_hakimi(a_ids, internal) if any(internal.values()) else []
    inner = _shuffle_edges(inner, rng, rounds * len(inner))
    return cross + inner


PLANTED_SHAPES: tuple[tuple[int, int], ...] = ((4, 0), (0, 2), (2, 1))


def _draw_planted(shape: tuple[int, int], lo: int, hi: int, rng: random.Random) -> dict[str, Any] | None:
    """Random arguments for ``plant_partitioned``; ``None`` when the draw misses ``[lo, hi]``."""
    if shape == (4, 0):
        d = rng.randint(3, max(3, hi // 4 - 1))
        expander = [rng.randint(d + 1, d + 5) for _ in range(4)]
        bipartite: list[tuple[int, int]] = []
        cross = rng.randint(4, 3 * d)
    elif shape == (0, 2):
        d = rng.randint(3, max(3, hi // 4))
        expander = []
        bipartite = []
        for _ in range(2):
            b = rng.randint(d, d + 4)
            bipartite.append((b + rng.randint(0, 2), b))
        cross = rng.randint(2, 2 * d)
    elif shape == (2, 1):
        d = rng.randint(3, max(3, hi // 5))
        expander = [rng.randint(d + 1, d + 4) for _ in range(2)]
        b = rng.randint(d, d + 4)
        bipartite = [(b + rng.randint(0, 3), b)]
        cross = rng.randint(2, 3 * d)
    else:
        raise InputError(f"no planted sampler for shape {shape}")
    n = sum(expander) + sum(a + b for a, b in bipartite)
    if not lo <= n <= hi:
        return None
    return {
        "expander_sizes": expander,
        "bipartite_sizes": bipartite,
        "degree": d,
        "cross_edges": cross,
        "bipartite_side": rng.choice(["A", "B", "mixed"]),
    }


def sample_planted(
    shape: tuple[int, int],
    seed: int,
    n_range: tuple[int, int] = (30, 80),
    *,
    attempts: int = 500,
) -> tuple[Graph, PartitionSpec, dict[str, Any]]:
    """A planted instance of the given shape with ``n`` in ``n_range``.

    Sizes, degree, cross-edge count and cross-edge side are drawn from a
    generator seeded by ``(shape, seed)``; infeasible draws are redrawn.
    Returns the graph, its partition and the arguments that produced it.
    """
    shape = (int(shape[0]), int(shape[1]))
    lo, hi = n_range
    rng = random.Random(f"planted-{shape[0]}{shape[1]}-{seed}")
    for _ in range(attempts):
        draw = _draw_planted(shape, lo, hi, rng)
        if draw is None:
            continue
        draw["seed"] = rng.randrange(2**32)
        try:
            g, spec = plant_partitioned(**draw)
        except ConstructionError:
            continue
        return g, spec, draw
    raise ConstructionError(f"no feasible planted {shape} instance in {attempts} draws", n_range=list(n_range))
