"""Total orders on integer intervals and their coloring combinatorics.

A total order is stored as a rank vector: rank 1 marks the earliest site.
From the order we derive, for each site, its nearest earlier-ranked
neighbors on each side (the sites it "saw" when it was inserted), the
founder set (sites with no earlier-ranked neighbor on one side), and the
directed graph those neighbor maps induce.  Coloring a fixed order site by
site along any linear extension of that graph yields the exact conditional
coloring law.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CapacityError
from .pmf import ExactPmf
from .rng import Stream

DEFAULT_CONDITIONAL_STATE_GUARD = 1_000_000


@dataclass(frozen=True)
class TotalOrder:
    """A total order on the integer interval [a, b], as a rank bijection."""

    interval: tuple[int, int]
    ranks: tuple[int, ...]

    def __post_init__(self):
        a, b = self.interval
        n = b - a + 1
        if n < 1:
            raise ValueError(f"empty interval {self.interval}")
        if sorted(self.ranks) != list(range(1, n + 1)):
            raise ValueError(f"ranks {self.ranks} are not a bijection onto 1..{n}")

    @property
    def n(self) -> int:
        return len(self.ranks)

    def sites(self) -> range:
        a, b = self.interval
        return range(a, b + 1)

    def rank_of(self, site: int) -> int:
        return self.ranks[site - self.interval[0]]

    def by_rank(self) -> list[int]:
        """Sites listed from earliest to latest."""
        return sorted(self.sites(), key=self.rank_of)

    def restrict(self, window: tuple[int, int]) -> "TotalOrder":
        """The induced order on a subinterval, re-ranked to 1..m."""
        a, b = self.interval
        lo, hi = window
        if not (a <= lo <= hi <= b):
            raise ValueError(f"window {window} not inside {self.interval}")
        sub = self.ranks[lo - a:hi - a + 1]
        rank_sorted = sorted(sub)
        return TotalOrder(window, tuple(rank_sorted.index(r) + 1 for r in sub))

    @classmethod
    def random(cls, interval: tuple[int, int], stream: Stream) -> "TotalOrder":
        n = interval[1] - interval[0] + 1
        ranks = list(range(1, n + 1))
        stream.shuffle(ranks)
        return cls(interval, tuple(ranks))

    def to_json_dict(self) -> dict:
        return {"interval": list(self.interval), "ranks": list(self.ranks)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "TotalOrder":
        return cls(tuple(d["interval"]), tuple(d["ranks"]))


def restrict_ranks(ranks: Sequence[int], i: int, j: int) -> tuple[int, ...]:
    """Re-ranked restriction of a rank vector to positions [i, j)."""
    sub = ranks[i:j]
    order = sorted(sub)
    return tuple(order.index(r) + 1 for r in sub)


@dataclass(frozen=True)
class NeighborMaps:
    """Nearest earlier-ranked site on each side; None plays infinity."""

    interval: tuple[int, int]
    left: tuple["int | None", ...]
    right: tuple["int | None", ...]

    def left_of(self, site: int) -> "int | None":
        return self.left[site - self.interval[0]]

    def right_of(self, site: int) -> "int | None":
        return self.right[site - self.interval[0]]


def _neighbor_positions(ranks: Sequence[int]) -> tuple[list, list]:
    """Position-indexed nearest-smaller-rank maps via monotone stacks."""
    n = len(ranks)
    left: list = [None] * n
    right: list = [None] * n
    stack: list[int] = []
    for i in range(n):
        while stack and ranks[stack[-1]] > ranks[i]:
            stack.pop()
        if stack:
            left[i] = stack[-1]
        stack.append(i)
    stack.clear()
    for i in range(n - 1, -1, -1):
        while stack and ranks[stack[-1]] > ranks[i]:
            stack.pop()
        if stack:
            right[i] = stack[-1]
        stack.append(i)
    return left, right


def neighbor_maps(order: TotalOrder) -> NeighborMaps:
    a = order.interval[0]
    left, right = _neighbor_positions(order.ranks)
    return NeighborMaps(
        order.interval,
        tuple(None if p is None else a + p for p in left),
        tuple(None if p is None else a + p for p in right),
    )


def founder_positions(ranks: Sequence[int]) -> tuple[int, ...]:
    """0-based positions whose rank beats everything to one side.

    Equivalently the positions whose left or right neighbor map is infinite;
    both characterizations are exercised in tests.
    """
    n = len(ranks)
    out = []
    best = None
    left_f = [False] * n
    for i in range(n):
        if best is None or ranks[i] < best:
            left_f[i] = True
            best = ranks[i]
    best = None
    for i in range(n - 1, -1, -1):
        right_f = best is None or ranks[i] < best
        if right_f or left_f[i]:
            out.append(i)
        if best is None or ranks[i] < best:
            best = ranks[i]
    return tuple(sorted(out))


def founder_count(ranks: Sequence[int]) -> int:
    return len(founder_positions(ranks))


def founders(order: TotalOrder) -> frozenset[int]:
    """The sites inserted at an interval endpoint (first site included)."""
    a = order.interval[0]
    return frozenset(a + p for p in founder_positions(order.ranks))


@dataclass(frozen=True)
class DirectedGraph:
    """Edges from each site to its two earlier-ranked neighbors."""

    interval: tuple[int, int]
    edges: tuple[tuple[int, int], ...]

    def out_degree(self, site: int) -> int:
        return sum(1 for s, _ in self.edges if s == site)


def build_graph(order: TotalOrder) -> DirectedGraph:
    nm = neighbor_maps(order)
    edges = []
    for site in order.sites():
        for nb in (nm.left_of(site), nm.right_of(site)):
            if nb is not None:
                edges.append((site, nb))
    return DirectedGraph(order.interval, tuple(edges))


def to_dot(graph: DirectedGraph, name: str = "order") -> str:
    """DOT text export of the neighbor graph (edge list only)."""
    lines = [f"digraph {name} {{"]
    a, b = graph.interval
    for site in range(a, b + 1):
        lines.append(f'  "{site}";')
    for s, t in graph.edges:
        lines.append(f'  "{s}" -> "{t}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def is_linear_extension(order: TotalOrder, sequence: Sequence[int]) -> bool:
    """True iff every site appears after its finite L/R neighbors."""
    if sorted(sequence) != list(order.sites()):
        return False
    nm = neighbor_maps(order)
    seen: set[int] = set()
    for site in sequence:
        for nb in (nm.left_of(site), nm.right_of(site)):
            if nb is not None and nb not in seen:
                return False
        seen.add(site)
    return True


def random_linear_extension(order: TotalOrder, stream: Stream) -> list[int]:
    """A uniform-ish random topological processing sequence of the graph."""
    nm = neighbor_maps(order)
    pending = set(order.sites())
    placed: set[int] = set()
    seq: list[int] = []
    while pending:
        ready = sorted(
            s for s in pending
            if (nm.left_of(s) is None or nm.left_of(s) in placed)
            and (nm.right_of(s) is None or nm.right_of(s) in placed)
        )
        site = ready[stream.randrange(len(ready))]
        pending.remove(site)
        placed.add(site)
        seq.append(site)
    return seq


def conditional_coloring_pmf(order: TotalOrder, q: int,
                             sequence: Sequence[int] | None = None,
                             max_states: int = DEFAULT_CONDITIONAL_STATE_GUARD,
                             ) -> ExactPmf:
    """Exact law of the coloring given the insertion order.

    Sites are processed along ``sequence`` (default: by rank, which is
    always a linear extension); site i takes each color outside
    {X_L(i), X_R(i)} with equal mass.  The result does not depend on the
    choice of linear extension.
    """
    if q < 3:
        raise ValueError(f"need q >= 3, got {q}")
    n = order.n
    bound = q * max(q - 1, 1) ** max(n - 1, 0)
    if bound > max_states:
        raise CapacityError("conditional coloring support", bound, max_states)
    if sequence is None:
        sequence = order.by_rank()
    elif not is_linear_extension(order, sequence):
        raise ValueError("sequence is not a linear extension of the order graph")
    nm = neighbor_maps(order)
    a = order.interval[0]
    partial: dict[tuple, Fraction] = {(None,) * n: Fraction(1)}
    for site in sequence:
        i = site - a
        lpos = nm.left_of(site)
        rpos = nm.right_of(site)
        nxt: dict[tuple, Fraction] = {}
        for colors, m in partial.items():
            forbid = set()
            if lpos is not None:
                forbid.add(colors[lpos - a])
            if rpos is not None:
                forbid.add(colors[rpos - a])
            allowed = [c for c in range(1, q + 1) if c not in forbid]
            share = m / len(allowed)
            for c in allowed:
                nk = colors[:i] + (c,) + colors[i + 1:]
                nxt[nk] = nxt.get(nk, Fraction(0)) + share
        partial = nxt
    return ExactPmf(kind="coloring", interval=order.interval, mass=partial, q=q)


def check_markov_window(order_a: TotalOrder, order_b: TotalOrder,
                        window: tuple[int, int], q: int,
                        max_states: int = DEFAULT_CONDITIONAL_STATE_GUARD,
                        ) -> Fraction:
    """Exact TV between the two conditional coloring laws on a window.

    Zero whenever the orders agree on the window and the restricted order's
    founders are exactly the window endpoints (or the window avoids the
    restriction's founders entirely).
    """
    if order_a.interval != order_b.interval:
        raise ValueError("orders live on different intervals")
    pa = conditional_coloring_pmf(order_a, q, max_states=max_states)
    pb = conditional_coloring_pmf(order_b, q, max_states=max_states)
    return pa.restrict_coloring(window).tv(pb.restrict_coloring(window))
