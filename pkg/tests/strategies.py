"""Hypothesis strategies shared by the unit tests."""

from __future__ import annotations

import networkx as nx
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from hamrobust.graph_core import Graph

PROPERTY_SETTINGS = settings(
    max_examples=120,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


@st.composite
def graphs(draw: st.DrawFn, min_n: int = 0, max_n: int = 12) -> Graph:
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, chosen)


@st.composite
def bipartite_graphs(draw: st.DrawFn, max_side: int = 8) -> tuple[Graph, int]:
    """A bipartite graph with sides ``0..left-1`` and ``left..n-1``, plus the left mask."""
    left = draw(st.integers(1, max_side))
    right = draw(st.integers(1, max_side))
    n = left + right
    pairs = [(u, v) for u in range(left) for v in range(left, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, min_size=1))
    return Graph(n, chosen), (1 << left) - 1


@st.composite
def vertex_subsets(draw: st.DrawFn, n: int) -> list[int]:
    return sorted(draw(st.sets(st.integers(0, n - 1), max_size=n))) if n else []


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h
