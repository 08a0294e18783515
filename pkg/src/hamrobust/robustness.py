"""Robust expansion, near-bipartite components and robust partitions.

Every check here is a decision procedure for one of the expansion notions
used by the tour builders, plus the refinement step that turns a rough
(2,1)-shaped partition into one satisfying the stronger degree conditions the
(2,1) builder relies on.

Two conventions are fixed here:

* "at least ``x * N`` neighbours" is evaluated as ``>= ceil(x * N)`` with exact
  rational arithmetic (floats are read through their decimal representation),
  so ``0.05 * 20`` is exactly ``1``.
* Inside a class ``X`` the robust-neighbourhood threshold uses ``|X|`` as the
  vertex count (``RN`` computed in ``G[X]`` as a graph in its own right).
  Passing ``ambient_threshold=True`` uses ``|V(G)|`` instead.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import InputError, PreconditionError, RefinementError
from .graph_core import Graph, bits, check_vertices, count_between, count_within, mask_of, regular_degree
from .reports import Report

EXHAUSTIVE_CAP = 22
DEFAULT_SAMPLES = 100_000


def exact(x: float | Fraction) -> Fraction:
    """Exact rational value of a parameter, reading floats by their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def ceil_times(x: float | Fraction, k: int) -> int:
    return math.ceil(exact(x) * k)


def floor_times(x: float | Fraction, k: int) -> int:
    return math.floor(exact(x) * k)


@dataclass(frozen=True)
class RobustParams:
    """Expansion parameters ``0 < rho <= nu <= tau < 1`` and optional ``tau <= eta < 1``.

    ``ordered=False`` keeps the range checks but skips ``rho <= nu`` and
    ``tau <= eta``, for parameter sets whose tolerances are deliberately
    looser than the hierarchy (handy on small test graphs).
    """

    rho: float
    nu: float
    tau: float
    eta: float | None = None
    ordered: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        for name in ("rho", "nu", "tau"):
            if not 0 < getattr(self, name) < 1:
                raise InputError(f"{name} must lie strictly between 0 and 1, got {getattr(self, name)}")
        if not self.nu <= self.tau or (self.ordered and not self.rho <= self.nu):
            raise InputError(
                f"parameters must satisfy 0 < rho <= nu <= tau < 1, got rho={self.rho}, nu={self.nu}, tau={self.tau}"
            )
        if self.eta is not None and not (0 < self.eta < 1 and (self.tau <= self.eta or not self.ordered)):
            raise InputError(f"eta must satisfy tau <= eta < 1, got eta={self.eta}")

    def to_json(self) -> dict[str, Any]:
        out = {"rho": self.rho, "nu": self.nu, "tau": self.tau}
        if self.eta is not None:
            out["eta"] = self.eta
        if not self.ordered:
            out["ordered"] = False
        return out


@dataclass(frozen=True)
class PartitionSpec:
    """Expander classes ``V_1..V_k`` and bipartite classes ``W_j = A_j + B_j``."""

    expander: tuple[tuple[int, ...], ...]
    bipartite: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    params: RobustParams

    @classmethod
    def make(
        cls,
        expander: Iterable[Iterable[int]] = (),
        bipartite: Iterable[tuple[Iterable[int], Iterable[int]]] = (),
        params: RobustParams | None = None,
    ) -> PartitionSpec:
        exp = tuple(tuple(sorted(int(v) for v in cls_)) for cls_ in expander)
        bip = tuple((tuple(sorted(int(v) for v in a)), tuple(sorted(int(v) for v in b))) for a, b in bipartite)
        return cls(exp, bip, params or RobustParams(0.01, 0.01, 0.01))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.expander), len(self.bipartite)

    def classes(self) -> list[tuple[int, ...]]:
        """The partition classes: the ``V_i`` first, then each ``W_j = A_j + B_j``."""
        out = [tuple(c) for c in self.expander]
        out += [tuple(sorted(a + b)) for a, b in self.bipartite]
        return out

    def class_masks(self) -> list[int]:
        return [mask_of(c) for c in self.classes()]

    def class_index(self, n: int) -> list[int]:
        """``index[v]`` is the class of ``v``; ``-1`` for uncovered vertices."""
        index = [-1] * n
        for i, c in enumerate(self.classes()):
            for v in c:
                if 0 <= v < n:
                    index[v] = i
        return index

    def check_cover(self, n: int) -> None:
        """Raise ``InputError`` unless the classes are disjoint and cover ``0..n-1``."""
        seen: set[int] = set()
        for c in self.classes():
            for v in c:
                if not 0 <= v < n:
                    raise InputError(f"partition mentions vertex {v} outside 0..{n - 1}")
                if v in seen:
                    raise InputError(f"vertex {v} appears in two partition classes")
                seen.add(v)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)[:5]
            raise InputError(f"partition does not cover the vertex set (missing e.g. {missing})")

    def with_params(self, params: RobustParams) -> PartitionSpec:
        return replace(self, params=params)

    def to_json(self) -> dict[str, Any]:
        return {
            "expander": [list(c) for c in self.expander],
            "bipartite": [{"A": list(a), "B": list(b)} for a, b in self.bipartite],
            "params": self.params.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> PartitionSpec:
        try:
            expander = [[int(v) for v in c] for c in data.get("expander", [])]
            bipartite = [([int(v) for v in w["A"]], [int(v) for v in w["B"]]) for w in data.get("bipartite", [])]
            p = data.get("params", {})
            params = RobustParams(
                float(p["rho"]),
                float(p["nu"]),
                float(p["tau"]),
                None if p.get("eta") is None else float(p["eta"]),
                ordered=bool(p.get("ordered", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed partition spec: {exc}") from None
        return cls.make(expander, bipartite, params)


# ---------------------------------------------------------------------------
# robust neighbourhoods and expansion
# ---------------------------------------------------------------------------


def robust_neighbourhood(g: Graph, s: Iterable[int], nu: float) -> frozenset[int]:
    """Vertices of ``g`` with at least ``ceil(nu * n)`` neighbours in ``s``."""
    sm = mask_of(check_vertices(g, s))
    thr = ceil_times(nu, g.n)
    return frozenset(v for v in range(g.n) if (g.rows[v] & sm).bit_count() >= thr)


@dataclass
class ExpansionVerdict:
    """Outcome of a subset-quantified expansion check."""

    holds: bool
    witness: tuple[int, ...] | None
    exhaustive: bool
    checked: int
    threshold: int
    note: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "witness": None if self.witness is None else list(self.witness),
            "exhaustive": self.exhaustive,
            "checked": self.checked,
            "threshold": self.threshold,
            "note": self.note,
        }


def _lex_first(masks: np.ndarray) -> int:
    """The mask whose sorted member list is lexicographically least."""
    cand = masks.astype(np.uint64)
    prefix = np.uint64(0)
    while True:
        rest = cand & ~prefix
        if np.any(rest == 0):
            return int(prefix)
        low = rest & (~rest + np.uint64(1))
        m = low.min()
        cand = cand[low == m]
        prefix |= m


def _expansion_scan(
    local_rows: Sequence[int],
    targets: Sequence[int],
    m: int,
    smin: int,
    smax: int,
    thr: int,
    slack: Fraction,
    chunk: int = 1 << 18,
) -> tuple[int | None, int]:
    """Exhaustively test all subsets ``S`` of ``range(m)`` with ``smin <= |S| <= smax``.

    ``targets[i]`` is the neighbourhood (as a bitmask over ``range(m)``) of the
    i-th vertex that may land in the robust neighbourhood.  A subset violates
    expansion when ``|RN(S)| < |S| + slack``.  Returns (first violator or
    None, number of subsets examined).
    """
    nbr = np.array(targets, dtype=np.uint64)
    need_extra = math.ceil(slack)
    violators = []
    checked = 0
    for start in range(0, 1 << m, chunk):
        masks = np.arange(start, min(start + chunk, 1 << m), dtype=np.uint64)
        sizes = np.bitwise_count(masks)
        keep = (sizes >= smin) & (sizes <= smax)
        masks, sizes = masks[keep], sizes[keep]
        if masks.size == 0:
            continue
        checked += int(masks.size)
        rn = np.zeros(masks.size, dtype=np.int32)
        for row in nbr:
            rn += np.bitwise_count(masks & row) >= thr
        bad = rn < sizes.astype(np.int32) + need_extra
        if np.any(bad):
            violators.append(masks[bad])
    if not violators:
        return None, checked
    return _lex_first(np.concatenate(violators)), checked


def _expansion_sample(
    adjacency: np.ndarray,
    m: int,
    smin: int,
    smax: int,
    thr: int,
    slack: Fraction,
    samples: int,
    seed: int,
    target_filter: np.ndarray | None = None,
) -> tuple[tuple[int, ...] | None, int]:
    """Randomised version for large classes: ``samples`` draws per size band."""
    rng = np.random.default_rng(seed)
    need_extra = math.ceil(slack)
    sizes = list(range(smin, smax + 1))
    nbands = min(8, len(sizes))
    bands = [list(b) for b in np.array_split(sizes, nbands)] if sizes else []
    checked = 0
    for band in bands:
        remaining = samples
        while remaining > 0:
            batch = min(remaining, 4096)
            remaining -= batch
            keys = rng.random((batch, m))
            order = np.argsort(keys, axis=1)
            ks = rng.integers(band[0], band[-1] + 1, size=batch)
            member = np.zeros((batch, m), dtype=np.int32)
            ranks = np.empty_like(order)
            np.put_along_axis(ranks, order, np.arange(m)[None, :].repeat(batch, 0), axis=1)
            member = (ranks < ks[:, None]).astype(np.int32)
            counts = member @ adjacency
            hit = counts >= thr
            if target_filter is not None:
                hit &= target_filter[None, :]
            rn = hit.sum(axis=1)
            bad = np.nonzero(rn < ks + need_extra)[0]
            checked += batch
            if bad.size:
                row = member[bad[0]]
                return tuple(int(i) for i in np.nonzero(row)[0]), checked
    return None, checked


def check_robust_expander(
    g: Graph,
    u: Iterable[int],
    params: RobustParams,
    *,
    exhaustive_cap: int = EXHAUSTIVE_CAP,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    ambient_threshold: bool = False,
) -> ExpansionVerdict:
    """Is ``G[U]`` a robust ``(nu, tau)``-expander?

    Every ``S`` inside ``U`` with ``tau|U| <= |S| <= (1-tau)|U|`` must have at
    least ``|S| + nu|U|`` vertices of ``U`` with ``ceil(nu|U|)`` neighbours in
    ``S``.  The witness (ids of ``g``) is the lexicographically first violating
    set when the check is exhaustive, otherwise the first sampled violator.
    """
    members = sorted(set(check_vertices(g, u)))
    m = len(members)
    if m < 1:
        raise InputError("robust expansion needs a non-empty vertex set")
    sub, order = g.induced(members)
    count = g.n if ambient_threshold else m
    thr = ceil_times(params.nu, count)
    slack = exact(params.nu) * m
    smin = math.ceil(exact(params.tau) * m)
    smax = math.floor((1 - exact(params.tau)) * m)
    if smin > smax:
        return ExpansionVerdict(True, None, True, 0, thr, "no subset sizes in range")
    if m <= exhaustive_cap:
        bad, checked = _expansion_scan(sub.rows, sub.rows, m, smin, smax, thr, slack)
        witness = None if bad is None else tuple(order[i] for i in bits(bad))
        return ExpansionVerdict(bad is None, witness, True, checked, thr)
    adjacency = np.array([[(row >> j) & 1 for j in range(m)] for row in sub.rows], dtype=np.int32)
    bad_local, checked = _expansion_sample(adjacency, m, smin, smax, thr, slack, samples, seed)
    witness = None if bad_local is None else tuple(order[i] for i in bad_local)
    note = f"sampled {checked} subsets over {min(8, smax - smin + 1)} size bands; a pass is probabilistic"
    return ExpansionVerdict(bad_local is None, witness, False, checked, thr, note)


def check_bipartite_robust_expander(
    g: Graph,
    a: Iterable[int],
    b: Iterable[int],
    params: RobustParams,
    *,
    exhaustive_cap: int = EXHAUSTIVE_CAP,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    ambient_threshold: bool = False,
) -> ExpansionVerdict:
    """Is ``H = G[A+B]`` a bipartite robust ``(nu, tau)``-expander with bipartition ``A, B``?

    Only subsets of ``A`` are tested; they must robustly reach at least
    ``|S| + nu|A+B|`` vertices of ``B``.
    """
    a_list = sorted(set(check_vertices(g, a)))
    b_list = sorted(set(check_vertices(g, b)))
    if set(a_list) & set(b_list):
        raise InputError("bipartition classes must be disjoint")
    ma = len(a_list)
    h = ma + len(b_list)
    count = g.n if ambient_threshold else h
    thr = ceil_times(params.nu, count)
    slack = exact(params.nu) * h
    smin = math.ceil(exact(params.tau) * ma)
    smax = math.floor((1 - exact(params.tau)) * ma)
    if ma == 0 or smin > smax:
        return ExpansionVerdict(True, None, True, 0, thr, "no subset sizes in range")
    a_index = {v: i for i, v in enumerate(a_list)}
    b_rows = []
    for v in b_list:
        r = 0
        for w in bits(g.rows[v]):
            i = a_index.get(w)
            if i is not None:
                r |= 1 << i
        b_rows.append(r)
    if ma <= exhaustive_cap:
        bad, checked = _expansion_scan([], b_rows, ma, smin, smax, thr, slack)
        witness = None if bad is None else tuple(a_list[i] for i in bits(bad))
        return ExpansionVerdict(bad is None, witness, True, checked, thr)
    adjacency = np.array([[(r >> i) & 1 for r in b_rows] for i in range(ma)], dtype=np.int32)
    bad_local, checked = _expansion_sample(adjacency, ma, smin, smax, thr, slack, samples, seed)
    witness = None if bad_local is None else tuple(a_list[i] for i in bad_local)
    note = f"sampled {checked} subsets; a pass is probabilistic"
    return ExpansionVerdict(bad_local is None, witness, False, checked, thr, note)


# ---------------------------------------------------------------------------
# components
# ---------------------------------------------------------------------------


def check_rho_component(g: Graph, u: Iterable[int], rho: float) -> Report:
    """``|U| >= sqrt(rho) n`` and ``e(U, complement) <= rho n^2``.

    For regular graphs the report also records whether ``|U| >= D - sqrt(rho) n``,
    the size bound every rho-component of a D-regular graph satisfies.
    """
    um = mask_of(check_vertices(g, u))
    n = g.n
    size = um.bit_count()
    boundary = count_between(g.rows, um, g.full_mask & ~um)
    r = exact(rho)
    report = Report("rho_component")
    # |U| >= sqrt(rho) n  <=>  |U|^2 >= rho n^2 (both sides non-negative)
    report.add("size", Fraction(size * size) >= r * n * n, size=size)
    report.add("boundary", boundary <= r * n * n, value=boundary)
    d = regular_degree(g)
    if d is not None:
        report.details["degree_bound"] = size >= d - math.sqrt(float(r)) * n
    return report


def check_rho_close_bipartite(g: Graph, u1: Iterable[int], u2: Iterable[int], rho: float) -> Report:
    """Conditions (C1)-(C3) for ``G[U1 + U2]`` being rho-close to bipartite."""
    m1 = mask_of(check_vertices(g, u1))
    m2 = mask_of(check_vertices(g, u2))
    if m1 & m2:
        raise InputError("the two sides must be disjoint")
    n = g.n
    r = exact(rho)
    s1, s2 = m1.bit_count(), m2.bit_count()
    full = g.full_mask
    leak = count_between(g.rows, m1, full & ~m2) + count_between(g.rows, m2, full & ~m1)
    report = Report("rho_close_bipartite")
    report.add("C1", min(s1, s2) ** 2 >= r * n * n, sizes=(s1, s2))
    report.add("C2", abs(s1 - s2) <= r * n, gap=abs(s1 - s2))
    report.add("C3", leak <= r * n * n, value=leak)
    return report


# ---------------------------------------------------------------------------
# robust partitions
# ---------------------------------------------------------------------------


def _common_checks(
    g: Graph, spec: PartitionSpec, report: Report, tag: str, expansion_kw: dict[str, Any]
) -> tuple[list[int], list[tuple[int, int]]]:
    """(D1), (D2), (D3) in their plain or primed forms; returns class masks."""
    try:
        spec.check_cover(g.n)
        report.add(f"{tag}1", True)
    except InputError as exc:
        report.add(f"{tag}1", False, reason=str(exc))
    p = spec.params
    ok2 = True
    for i, cls_ in enumerate(spec.expander):
        comp = check_rho_component(g, cls_, p.rho)
        exp = check_robust_expander(g, cls_, p, **expansion_kw)
        report.details[f"{tag}2.V{i + 1}"] = {"component": comp.conditions, "expander": exp.to_json()}
        ok2 &= comp.holds and exp.holds
    report.add(f"{tag}2", ok2)
    ok3 = True
    for j, (a, b) in enumerate(spec.bipartite):
        close = check_rho_close_bipartite(g, a, b, p.rho)
        exp = check_bipartite_robust_expander(g, a, b, p, **expansion_kw)
        report.details[f"{tag}3.W{j + 1}"] = {"close": close.conditions, "expander": exp.to_json()}
        ok3 &= close.holds and exp.holds
    report.add(f"{tag}3", ok3)
    return spec.class_masks(), [(mask_of(a), mask_of(b)) for a, b in spec.bipartite]


def check_robust_partition(g: Graph, spec: PartitionSpec, **expansion_kw: Any) -> Report:
    """Conditions (D1)-(D7) for a D-regular graph; the verdict is their conjunction."""
    d = regular_degree(g)
    if d is None:
        raise InputError("robust partitions are defined for regular graphs")
    report = Report("robust_partition")
    masks, bips = _common_checks(g, spec, report, "D", expansion_kw)
    rows = g.rows
    n = g.n
    rho = exact(spec.params.rho)
    bad4 = None
    for x_mask in masks:
        for x in bits(x_mask):
            own = (rows[x] & x_mask).bit_count()
            if bad4 is None and any((rows[x] & other).bit_count() > own for other in masks if other != x_mask):
                bad4 = x
    report.add("D4", bad4 is None, witness=bad4)
    bad5 = None
    for am, bm in bips:
        for x in bits(am):
            if bad5 is None and (rows[x] & bm).bit_count() < (rows[x] & am).bit_count():
                bad5 = x
        for x in bits(bm):
            if bad5 is None and (rows[x] & am).bit_count() < (rows[x] & bm).bit_count():
                bad5 = x
    report.add("D5", bad5 is None, witness=bad5)
    k, ell = spec.shape
    if d == 0:
        report.add("D6", False, reason="degree zero")
    else:
        bound = math.floor((1 + float(rho) ** (1 / 3)) * n / d)
        report.add("D6", k + 2 * ell <= bound, bound=bound)
    ok7 = True
    for x_mask in masks:
        low = sum(1 for x in bits(x_mask) if (rows[x] & x_mask).bit_count() < d - rho * n)
        ok7 &= low <= rho * n
    report.add("D7", ok7)
    return report


def check_weak_robust_partition(g: Graph, spec: PartitionSpec, **expansion_kw: Any) -> Report:
    """Conditions (D1')-(D5'); requires ``params.eta``."""
    eta = spec.params.eta
    if eta is None:
        raise InputError("weak robust partitions need the parameter eta")
    report = Report("weak_robust_partition")
    masks, bips = _common_checks(g, spec, report, "D'", expansion_kw)
    rows = g.rows
    bound = exact(eta) * g.n
    min_inside = min(((rows[x] & xm).bit_count() for xm in masks for x in bits(xm)), default=0)
    report.add("D'4", min_inside >= bound, min_degree=min_inside)
    ok5 = True
    for am, bm in bips:
        for x in bits(am):
            ok5 &= (rows[x] & bm).bit_count() >= bound / 2
        for x in bits(bm):
            ok5 &= (rows[x] & am).bit_count() >= bound / 2
    report.add("D'5", ok5)
    return report


# ---------------------------------------------------------------------------
# refinement of a rough (2,1) partition
# ---------------------------------------------------------------------------


@dataclass
class Refinement:
    spec: PartitionSpec
    moved: dict[int, tuple[str, str]] = field(default_factory=dict)
    objective_before: tuple[int, int] = (0, 0)
    objective_after: tuple[int, int] = (0, 0)
    search: str = "exhaustive"


_LABELS = ("V1", "V2", "A", "B")


def _objective(rows: Sequence[int], parts: Sequence[int]) -> tuple[int, int]:
    v1, v2, a, b = parts
    first = count_between(rows, a | b, v1 | v2)
    second = count_between(rows, v1, v2) + count_within(rows, a) + count_within(rows, b)
    return first, second


def refine_partition(g: Graph, rough: PartitionSpec, *, exhaustive_limit: int = 9) -> Refinement:
    """Move boundary vertices of a rough (2,1) partition to satisfy the (2,1) degree conditions.

    Vertices of an expander class with more than ``rho n`` neighbours outside
    it, and bipartite-side vertices with at least ``sqrt(rho) n`` neighbours
    off the opposite side, are pooled and reassigned to minimise first the
    number of edges between ``A+B`` and ``V1+V2``, then
    ``e(V1,V2) + e(A) + e(B)``; ties keep vertices where they were.  The
    result is re-verified and a ``RefinementError`` names the first failing
    condition.
    """
    if rough.shape != (2, 1):
        raise InputError(f"refinement expects a (2,1) partition, got {rough.shape}")
    d = regular_degree(g)
    if d is None:
        raise InputError("refinement needs a regular graph")
    rough.check_cover(g.n)
    rows = g.rows
    n = g.n
    rho = exact(rough.params.rho)
    sqrt_rho_n = math.sqrt(float(rho)) * n
    u1, u2 = (mask_of(c) for c in rough.expander)
    a0, b0 = (mask_of(c) for c in rough.bipartite[0])
    full = g.full_mask
    pool: list[int] = []
    for um in (u1, u2):
        pool += [x for x in bits(um) if (rows[x] & (full & ~um)).bit_count() > rho * n]
    pool += [x for x in bits(a0) if (rows[x] & (full & ~b0)).bit_count() >= sqrt_rho_n]
    pool += [x for x in bits(b0) if (rows[x] & (full & ~a0)).bit_count() >= sqrt_rho_n]
    pool = sorted(set(pool))
    original = [u1, u2, a0, b0]
    home = {x: next(i for i, m in enumerate(original) if m >> x & 1) for x in pool}
    pool_mask = mask_of(pool)
    base = [m & ~pool_mask for m in original]

    def assemble(assign: Sequence[int]) -> list[int]:
        parts = list(base)
        for x, c in zip(pool, assign):
            parts[c] |= 1 << x
        return parts

    before = _objective(rows, original)
    search = "exhaustive"
    if len(pool) <= exhaustive_limit:
        best_key, best_assign = None, tuple(home[x] for x in pool)
        for assign in itertools.product(range(4), repeat=len(pool)):
            obj = _objective(rows, assemble(assign))
            moves = sum(1 for x, c in zip(pool, assign) if c != home[x])
            key = (obj, moves, assign)
            if best_key is None or key < best_key:
                best_key, best_assign = key, assign
    else:
        # coordinate descent from the original assignment
        search = "local"
        best_assign = [home[x] for x in pool]
        improved = True
        while improved:
            improved = False
            for i in range(len(pool)):
                cur = _objective(rows, assemble(best_assign))
                for c in range(4):
                    if c == best_assign[i]:
                        continue
                    trial = list(best_assign)
                    trial[i] = c
                    if _objective(rows, assemble(trial)) < cur:
                        best_assign, improved = trial, True
                        break
        best_assign = tuple(best_assign)
    v1, v2, a, b = assemble(best_assign)
    after = _objective(rows, [v1, v2, a, b])
    if a.bit_count() < b.bit_count():
        a, b = b, a
    moved = {x: (_LABELS[home[x]], _LABELS[c]) for x, c in zip(pool, best_assign) if c != home[x]}
    spec = PartitionSpec.make([list(bits(v1)), list(bits(v2))], [(list(bits(a)), list(bits(b)))], rough.params)
    failure = aim_degree_conditions(g, spec, d)
    if failure is not None:
        raise RefinementError(f"refined partition violates: {failure}", step="refine_partition", moved=moved)
    return Refinement(spec, moved, before, after, search)


def aim_degree_conditions(g: Graph, spec: PartitionSpec, d: int | None = None) -> str | None:
    """First violated degree condition required by the (2,1) builder, or ``None``.

    Checked: ``|V_i| >= D/2``; every vertex of ``A`` has at most ``D/2``
    neighbours in ``V1+V2``; vertices of ``V_i`` have at least as many
    neighbours in ``V_i`` as in the other ``V_j``; ``d_A(a) <= d_B(a)`` on ``A``.
    """
    if d is None:
        d = regular_degree(g)
        if d is None:
            return "graph is not regular"
    rows = g.rows
    v1, v2 = (mask_of(c) for c in spec.expander)
    a, b = (mask_of(c) for c in spec.bipartite[0])
    u = v1 | v2
    for i, vm in enumerate((v1, v2)):
        if 2 * vm.bit_count() < d:
            return f"|V{i + 1}| >= D/2"
    for x in bits(a):
        if 2 * (rows[x] & u).bit_count() > d:
            return f"max degree of G[A, V1+V2] <= D/2 (vertex {x})"
    for vm, other, name in ((v1, v2, "V1"), (v2, v1, "V2")):
        for x in bits(vm):
            if (rows[x] & vm).bit_count() < (rows[x] & other).bit_count():
                return f"majority degree inside {name} (vertex {x})"
    for x in bits(a):
        if (rows[x] & a).bit_count() > (rows[x] & b).bit_count():
            return f"d_A(a) <= d_B(a) (vertex {x})"
    return None


def require_regular(g: Graph) -> int:
    d = regular_degree(g)
    if d is None:
        raise PreconditionError("graph is not regular")
    return d
