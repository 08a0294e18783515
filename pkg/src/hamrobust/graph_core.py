"""Dense undirected simple graphs with bitset adjacency rows.

Vertices are the integers ``0..n-1``.  Row ``v`` of the adjacency is a Python
integer whose bit ``u`` is set exactly when ``uv`` is an edge, so set algebra
on neighbourhoods is a handful of machine-word operations even for the
few-hundred-vertex graphs this package targets.

Edge counts follow one convention throughout: ``edge_count(g, S)`` is the
number of edges with both ends in ``S`` and ``edge_count(g, S, T)`` is the
number of edges with one end in ``S`` and the other in ``T``, where an edge
lying inside ``S & T`` is counted once.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .errors import InputError

VertexSet = Iterable[int]
Edge = tuple[int, int]


def bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    """Bitmask with the given positions set (no range check)."""
    out = 0
    for v in vertices:
        out |= 1 << v
    return out


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph on ``range(n)``."""

    __slots__ = ("_hash", "_rows", "n")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise InputError(f"vertex count must be non-negative, got {n}")
        rows = [0] * n
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        self.n = n
        self._rows = tuple(rows)
        self._hash: int | None = None

    @classmethod
    def from_rows(cls, rows: Sequence[int], *, check: bool = True) -> Graph:
        """Build a graph from adjacency bitmasks, validating symmetry unless told not to."""
        n = len(rows)
        if check:
            full = (1 << n) - 1
            for v, row in enumerate(rows):
                if row & ~full:
                    raise InputError(f"row {v} references a vertex outside 0..{n - 1}")
                if row >> v & 1:
                    raise InputError(f"self-loop at vertex {v}")
                for u in bits(row):
                    if not rows[u] >> v & 1:
                        raise InputError(f"adjacency is not symmetric at ({v},{u})")
        g = cls.__new__(cls)
        g.n = n
        g._rows = tuple(rows)
        g._hash = None
        return g

    @property
    def rows(self) -> tuple[int, ...]:
        return self._rows

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._rows[u] >> v & 1)

    def neighbours(self, v: int) -> list[int]:
        return list(bits(self._rows[v]))

    def degree(self, v: int, within: int | None = None) -> int:
        """Degree of ``v``, optionally counting only neighbours inside the bitmask ``within``."""
        row = self._rows[v]
        return (row if within is None else row & within).bit_count()

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self._rows]

    def max_degree(self) -> int:
        return max((row.bit_count() for row in self._rows), default=0)

    @property
    def m(self) -> int:
        return sum(row.bit_count() for row in self._rows) // 2

    def edges(self) -> list[Edge]:
        """All edges as ``(u, v)`` with ``u < v``, in lexicographic order."""
        out = []
        for u, row in enumerate(self._rows):
            for v in bits(row >> (u + 1)):
                out.append((u, u + 1 + v))
        return out

    def edges_within(self, mask: int) -> list[Edge]:
        out = []
        for u in bits(mask):
            for v in bits(self._rows[u] & mask & ~((2 << u) - 1)):
                out.append((u, v))
        return out

    def edges_between(self, s: int, t: int) -> list[Edge]:
        """Edges with one end in ``s`` and the other in ``t`` (bitmasks), normalised and sorted."""
        found = set()
        for u in bits(s):
            for v in bits(self._rows[u] & t):
                if u != v:
                    found.add(norm_edge(u, v))
        return sorted(found)

    def induced(self, vertices: VertexSet) -> tuple[Graph, list[int]]:
        """Induced subgraph relabelled to ``0..k-1``; returns it with the old ids in order."""
        order = sorted(set(check_vertices(self, vertices)))
        index = {v: i for i, v in enumerate(order)}
        rows = []
        for v in order:
            r = 0
            for u in bits(self._rows[v]):
                i = index.get(u)
                if i is not None:
                    r |= 1 << i
            rows.append(r)
        return Graph.from_rows(rows, check=False), order

    def spanning_subgraph(self, edges: Iterable[Sequence[int]]) -> Graph:
        """Graph on the same vertex set containing exactly ``edges`` (each must be an edge here)."""
        rows = [0] * self.n
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not self.has_edge(u, v):
                raise InputError(f"({u},{v}) is not an edge of the host graph")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph.from_rows(rows, check=False)

    def remove_vertices(self, vertices: VertexSet) -> Graph:
        """Same vertex ids, with every edge at the given vertices deleted."""
        drop = mask_of(check_vertices(self, vertices))
        keep = ~drop
        rows = [0 if drop >> v & 1 else row & keep for v, row in enumerate(self._rows)]
        return Graph.from_rows(rows, check=False)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def check_vertices(g: Graph, vertices: VertexSet) -> list[int]:
    """Materialise a vertex collection, rejecting ids outside the graph."""
    out = []
    for v in vertices:
        v = int(v)
        if not 0 <= v < g.n:
            raise InputError(f"vertex {v} is outside 0..{g.n - 1}")
        out.append(v)
    return out


def to_mask(g: Graph, vertices: VertexSet) -> int:
    return mask_of(check_vertices(g, vertices))


def edge_count(g: Graph, s: VertexSet, t: VertexSet | None = None) -> int:
    """``e(S)`` when ``t`` is omitted, otherwise ``e(S, T)``.

    For overlapping sets an edge with both ends in ``S & T`` is counted once;
    an edge from ``S - T`` to ``S & T`` is also counted once.
    """
    sm = to_mask(g, s)
    rows = g.rows
    if t is None:
        return sum((rows[v] & sm).bit_count() for v in bits(sm)) // 2
    tm = to_mask(g, t)
    return count_between(rows, sm, tm)


def count_within(rows: Sequence[int], sm: int) -> int:
    return sum((rows[v] & sm).bit_count() for v in bits(sm)) // 2


def count_between(rows: Sequence[int], sm: int, tm: int) -> int:
    total = sum((rows[v] & tm).bit_count() for v in bits(sm))
    return total - count_within(rows, sm & tm)


def neighbourhood(g: Graph, x: VertexSet) -> frozenset[int]:
    """Union of the neighbourhoods of the vertices in ``x``."""
    out = 0
    for v in check_vertices(g, x):
        out |= g.rows[v]
    return frozenset(bits(out))


def regular_degree(g: Graph) -> int | None:
    """The common degree if the graph is regular, else ``None`` (``0`` for the empty graph)."""
    degs = {row.bit_count() for row in g.rows}
    if len(degs) > 1:
        return None
    return degs.pop() if degs else 0


def components(g: Graph, within: int | None = None) -> list[list[int]]:
    """Connected components of ``g[within]`` (all of ``g`` by default), sorted by least vertex."""
    remaining = g.full_mask if within is None else within & g.full_mask
    rows = g.rows
    out = []
    while remaining:
        low = remaining & -remaining
        comp = low
        frontier = low
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= rows[v]
            nxt &= remaining & ~comp
            comp |= nxt
            frontier = nxt
        remaining &= ~comp
        out.append(list(bits(comp)))
    return out


def is_connected(g: Graph, within: int | None = None) -> bool:
    return len(components(g, within)) <= 1


class _SplitNetwork:
    """Vertex-split flow network: ``2v`` is v-in, ``2v+1`` is v-out, v-in -> v-out has capacity 1."""

    def __init__(self, g: Graph):
        n = g.n
        big = n + 1
        src, dst, cap = [], [], []
        for v in range(n):
            src.append(2 * v)
            dst.append(2 * v + 1)
            cap.append(1)
        for u, v in g.edges():
            src += [2 * u + 1, 2 * v + 1]
            dst += [2 * v, 2 * u]
            cap += [big, big]
        self.n = n
        self.matrix = csr_matrix((np.array(cap, dtype=np.int32), (np.array(src), np.array(dst))), shape=(2 * n, 2 * n))

    def local(self, s: int, t: int) -> int:
        """Maximum number of internally vertex-disjoint s-t paths (s, t non-adjacent)."""
        return int(maximum_flow(self.matrix, 2 * s + 1, 2 * t).flow_value)

    def separator(self, s: int, t: int) -> list[int]:
        result = maximum_flow(self.matrix, 2 * s + 1, 2 * t)
        # the flow matrix is antisymmetric, so cap - flow is the residual
        # capacity on forward and reverse arcs alike
        res = self.matrix.toarray() - result.flow.toarray()
        seen = np.zeros(2 * self.n, dtype=bool)
        stack = [2 * s + 1]
        seen[2 * s + 1] = True
        while stack:
            x = stack.pop()
            for y in np.nonzero(res[x] > 0)[0]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        return [v for v in range(self.n) if seen[2 * v] and not seen[2 * v + 1]]


def _connectivity_pairs(g: Graph) -> Iterator[tuple[int, int]]:
    """Vertex pairs whose local connectivities determine the global one.

    With ``v`` of minimum degree, every minimum separator either misses ``v``
    (so it separates ``v`` from some non-neighbour) or contains it (so it
    separates two non-adjacent neighbours of ``v``).
    """
    degs = g.degrees()
    v = min(range(g.n), key=lambda x: (degs[x], x))
    row = g.rows[v]
    for w in range(g.n):
        if w != v and not row >> w & 1:
            yield v, w
    nbrs = list(bits(row))
    for i, x in enumerate(nbrs):
        for y in nbrs[i + 1 :]:
            if not g.has_edge(x, y):
                yield x, y


def minimum_vertex_cut(g: Graph) -> list[int]:
    """A minimum separating vertex set; for complete graphs, any ``n-1`` vertices."""
    if g.n < 2:
        raise InputError("vertex connectivity needs at least two vertices")
    comps = components(g)
    if len(comps) > 1:
        return []
    best_pair = None
    best = g.n - 1
    net = _SplitNetwork(g)
    for s, t in _connectivity_pairs(g):
        k = net.local(s, t)
        if k < best:
            best, best_pair = k, (s, t)
            if best == 0:
                break
    if best_pair is None:
        return list(range(g.n - 1))
    return net.separator(*best_pair)


def vertex_connectivity(g: Graph) -> int:
    """Minimum number of vertices whose removal disconnects ``g`` or leaves one vertex."""
    if g.n < 2:
        raise InputError("vertex connectivity needs at least two vertices")
    if not is_connected(g):
        return 0
    net = _SplitNetwork(g)
    best = min(g.max_degree(), g.n - 1)
    degs = g.degrees()
    best = min(best, min(degs))
    for s, t in _connectivity_pairs(g):
        k = net.local(s, t)
        best = min(best, k)
    return best


_SEP = re.compile(r"[ \t]+")


def parse_edge_list(text: str, source: str = "<string>") -> Graph:
    """Parse ``n m`` followed by ``m`` lines ``u v``; runs of spaces/tabs separate fields.

    Blank lines are ignored; every error names the offending line.
    """
    lines = [(i + 1, ln.strip(" \t\r")) for i, ln in enumerate(text.split("\n"))]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise InputError(f"{source}: empty edge list")

    def ints(lineno: int, line: str) -> tuple[int, int]:
        parts = _SEP.split(line)
        if len(parts) != 2:
            raise InputError(f"{source}:{lineno}: expected two integers, got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"{source}:{lineno}: expected two integers, got {line!r}") from None
        return a, b

    n, m = ints(*lines[0])
    if n < 0 or m < 0:
        raise InputError(f"{source}:{lines[0][0]}: negative header value")
    body = lines[1:]
    if len(body) != m:
        raise InputError(f"{source}: header announces {m} edges but {len(body)} edge lines follow")
    seen = set()
    edges = []
    for lineno, line in body:
        u, v = ints(lineno, line)
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"{source}:{lineno}: vertex out of range 0..{n - 1}")
        if u == v:
            raise InputError(f"{source}:{lineno}: self-loop at {u}")
        e = norm_edge(u, v)
        if e in seen:
            raise InputError(f"{source}:{lineno}: duplicate edge {e}")
        seen.add(e)
        edges.append(e)
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | Path) -> Graph:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"{p}: cannot read ({exc.strerror})") from None
    return parse_edge_list(text, str(p))


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))
