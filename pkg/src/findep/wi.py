"""The weighted-insertion model on finite integer intervals.

Starting from a single uniformly random color, a coloring of [1..n] is grown
by n-1 insertion steps: an insertion point, biased by a weight w at the two
ends, then a uniformly random color differing from the insertion point's
neighbors.  Recording where each step inserted gives a random total order
(the insertion history).

This module provides the forward sampler, the exact rational law of the
coloring (via the deletion recurrence), the exact law of the order
(proportional to w^#founders), and a brute-force joint enumerator that the
rest of the package uses as its oracle.

The critical weight (q-1)/(q-2) makes the interval laws consistent under
restriction; weight 1 makes the order uniform.  Both facts are verified
exactly in the lab module and the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterator

from .errors import CapacityError
from .orders import TotalOrder, _neighbor_positions, founder_count
from .pmf import ExactPmf
from .rng import Stream

# q(q-1)^(n-1) states; allows n=12 at q=4.
DEFAULT_COLORING_STATE_GUARD = 750_000
# n! orders; allows n=9.
DEFAULT_ORDER_GUARD = 362_880
# n! orders with full color trees; allows n=7.
DEFAULT_JOINT_ORDER_GUARD = 5_040


@dataclass(frozen=True)
class WiParams:
    """Model parameters: q colors (q >= 3) and an exact positive weight."""

    q: int
    w: Fraction

    def __post_init__(self):
        if self.q < 3:
            raise ValueError(f"need q >= 3, got q={self.q}")
        w = Fraction(self.w)
        if w <= 0:
            raise ValueError(f"need weight w > 0, got w={self.w}")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class Coloring:
    """A proper coloring of an integer interval; properness is enforced."""

    interval: tuple[int, int]
    colors: tuple[int, ...]

    def __post_init__(self):
        a, b = self.interval
        if len(self.colors) != b - a + 1:
            raise ValueError("length does not match interval")
        for x, y in zip(self.colors, self.colors[1:]):
            if x == y:
                raise ValueError(f"not a proper coloring: {self.colors}")

    @property
    def n(self) -> int:
        return len(self.colors)


@dataclass(frozen=True)
class InsertionStep:
    """One growth step: a slot in [1..m+1] and the color put there.

    The color must differ from the slot's current neighbors; replaying a
    step against a configuration that violates this raises.
    """

    position: int
    color: int

    def apply(self, colors: list[int], ranks: list[int]) -> None:
        m = len(colors)
        if not 1 <= self.position <= m + 1:
            raise ValueError(f"slot {self.position} outside 1..{m + 1}")
        pos = self.position - 1
        left = colors[pos - 1] if pos > 0 else None
        right = colors[pos] if pos < m else None
        if self.color in (left, right):
            raise ValueError(f"color {self.color} collides at slot "
                             f"{self.position}")
        colors.insert(pos, self.color)
        ranks.insert(pos, m + 1)


def w_star(q: int) -> Fraction:
    """The critical weight (q-1)/(q-2) at which restriction is consistent."""
    if q < 3:
        raise ValueError(f"need q >= 3, got q={q}")
    return Fraction(q - 1, q - 2)


def insertion_point_pmf(params: WiParams, n: int) -> tuple[Fraction, ...]:
    """Law of the insertion point into a length-n configuration.

    Positions 1 and n+1 carry mass w/(2w+n-1); positions 2..n carry
    1/(2w+n-1).
    """
    if n < 1:
        raise ValueError(f"need current length n >= 1, got {n}")
    denom = 2 * params.w + n - 1
    end = params.w / denom
    mid = Fraction(1) / denom
    return (end,) + (mid,) * (n - 1) + (end,)


def proper_colorings(q: int, n: int) -> Iterator[tuple[int, ...]]:
    """All q(q-1)^(n-1) proper colorings of [1..n], lexicographically."""
    if n == 0:
        yield ()
        return
    for head in proper_colorings(q, n - 1):
        for c in range(1, q + 1):
            if n == 1 or head[-1] != c:
                yield head + (c,)


def sample_wi(params: WiParams, n: int, stream: Stream,
              ) -> tuple[Coloring, TotalOrder]:
    """Draw one (coloring, insertion order) pair on [1..n].

    The insertion point is drawn exactly: with w = p/r, endpoint positions
    get integer weight p and interior positions weight r, and a uniform
    integer below the total is decoded into a position.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    colors = [stream.randrange(params.q) + 1]
    ranks = [1]
    for step in _insertion_steps(params, n, colors, stream):
        step.apply(colors, ranks)
    return (Coloring((1, n), tuple(colors)),
            TotalOrder((1, n), tuple(ranks)))


def _insertion_steps(params: WiParams, n: int, colors: list[int],
                     stream: Stream):
    """Yield the n-1 growth steps, watching the evolving configuration."""
    q = params.q
    p, r = params.w.numerator, params.w.denominator
    for m in range(1, n):
        total = 2 * p + (m - 1) * r
        j = stream.randrange(total)
        if j < p:
            pos = 0
        elif j < p + (m - 1) * r:
            pos = 1 + (j - p) // r
        else:
            pos = m
        left = colors[pos - 1] if pos > 0 else None
        right = colors[pos] if pos < m else None
        allowed = [c for c in range(1, q + 1) if c != left and c != right]
        yield InsertionStep(pos + 1, allowed[stream.randrange(len(allowed))])


def exact_coloring_pmf(params: WiParams, n: int,
                       max_states: int = DEFAULT_COLORING_STATE_GUARD,
                       ) -> ExactPmf:
    """Exact law of the length-n coloring, built bottom-up.

    Deleting one site from a length-m coloring and reading the insertion
    law backwards gives, for proper x,

        P(x) = [ w/(q-1) * (P(x del first) + P(x del last))
                 + 1/(q-2) * sum over interior deletions ] / (2w + m - 2),

    with deletions that break properness contributing zero.  Tables are
    grown from length 1 upward so shared subproblems are computed once.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    q, w = params.q, params.w
    states = q * (q - 1) ** (n - 1)
    if states > max_states:
        raise CapacityError(f"coloring table (q={q}, n={n})", states, max_states)
    table: dict[tuple[int, ...], Fraction] = {
        (c,): Fraction(1, q) for c in range(1, q + 1)
    }
    for m in range(2, n + 1):
        norm = Fraction(1) / (2 * w + m - 2)
        end_coef = norm * w / (q - 1)
        mid_coef = norm / (q - 2)
        nxt: dict[tuple[int, ...], Fraction] = {}
        zero = Fraction(0)
        for x in proper_colorings(q, m):
            acc = end_coef * (table.get(x[1:], zero) + table.get(x[:-1], zero))
            mid = zero
            for i in range(1, m - 1):
                mid += table.get(x[:i] + x[i + 1:], zero)
            nxt[x] = acc + mid_coef * mid
        table = nxt
    return ExactPmf(kind="coloring", interval=(1, n), mass=table, q=q, w=w)


def exact_order_pmf(w: Fraction, n: int,
                    max_orders: int = DEFAULT_ORDER_GUARD) -> ExactPmf:
    """Exact law of the insertion order: mass proportional to w^#founders."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    w = Fraction(w)
    if w <= 0:
        raise ValueError("need w > 0")
    size = 1
    for i in range(2, n + 1):
        size *= i
    if size > max_orders:
        raise CapacityError(f"order support (n={n})", size, max_orders)
    weights = {ranks: w ** founder_count(ranks)
               for ranks in permutations(range(1, n + 1))}
    z = sum(weights.values())
    return ExactPmf(kind="order", interval=(1, n),
                    mass={k: v / z for k, v in weights.items()}, w=w)


def _color_leaves(ranks: tuple[int, ...], q: int) -> list[tuple[int, ...]]:
    """All colorings reachable along the order; each is equally likely."""
    n = len(ranks)
    left, right = _neighbor_positions(ranks)
    by_rank = sorted(range(n), key=lambda i: ranks[i])
    leaves: list[tuple[int, ...]] = []
    blank: tuple = (0,) * n
    stack = [(blank, 0)]
    while stack:
        colors, depth = stack.pop()
        if depth == n:
            leaves.append(colors)
            continue
        i = by_rank[depth]
        cl = colors[left[i]] if left[i] is not None else 0
        cr = colors[right[i]] if right[i] is not None else 0
        for c in range(1, q + 1):
            if c != cl and c != cr:
                stack.append((colors[:i] + (c,) + colors[i + 1:], depth + 1))
    return leaves


@dataclass(frozen=True)
class _OrderCell:
    weight_int: int          # p^F r^(n-F): integer order weight
    founders: int
    unit: Fraction           # conditional mass of each reachable coloring
    leaves: frozenset


class JointLaw:
    """Exact joint law of (order, coloring) on [1..n].

    Stored per order: the order weight and the set of reachable colorings,
    each carrying the same conditional mass 1/(q (q-1)^(F-1) (q-2)^(n-F)).
    Marginals are accumulated in integer arithmetic over a common
    denominator and reduced once at the end.
    """

    def __init__(self, params: WiParams, n: int,
                 max_orders: int = DEFAULT_JOINT_ORDER_GUARD):
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        size = 1
        for i in range(2, n + 1):
            size *= i
        if size > max_orders:
            raise CapacityError(f"joint enumeration (n={n})", size, max_orders)
        self.params = params
        self.n = n
        self.interval = (1, n)
        q, w = params.q, params.w
        p, r = w.numerator, w.denominator
        self._zint = 0
        self._cells: dict[tuple[int, ...], _OrderCell] = {}
        for ranks in permutations(range(1, n + 1)):
            f = founder_count(ranks)
            wint = p ** f * r ** (n - f)
            unit = Fraction(1, q * (q - 1) ** (f - 1) * (q - 2) ** (n - f))
            leaves = frozenset(_color_leaves(ranks, q))
            self._cells[ranks] = _OrderCell(wint, f, unit, leaves)
            self._zint += wint

    def order_mass(self, ranks: tuple[int, ...]) -> Fraction:
        cell = self._cells.get(tuple(ranks))
        return Fraction(cell.weight_int, self._zint) if cell else Fraction(0)

    def mass(self, ranks: tuple[int, ...], colors: tuple[int, ...]) -> Fraction:
        cell = self._cells.get(tuple(ranks))
        if cell is None or tuple(colors) not in cell.leaves:
            return Fraction(0)
        return Fraction(cell.weight_int, self._zint) * cell.unit

    def items(self) -> Iterator[tuple[tuple, tuple, Fraction]]:
        for ranks, cell in self._cells.items():
            m = Fraction(cell.weight_int, self._zint) * cell.unit
            for colors in cell.leaves:
                yield ranks, colors, m

    def order_marginal(self) -> ExactPmf:
        mass = {ranks: Fraction(cell.weight_int, self._zint)
                for ranks, cell in self._cells.items()}
        return ExactPmf(kind="order", interval=self.interval, mass=mass,
                        w=self.params.w)

    def coloring_marginal(self) -> ExactPmf:
        q, n = self.params.q, self.n
        # common denominator Z * q (q-1)^(n-1) (q-2)^(n-1)
        denom = self._zint * q * (q - 1) ** (n - 1) * (q - 2) ** (n - 1)
        acc: dict[tuple[int, ...], int] = {}
        for cell in self._cells.values():
            scale = (cell.weight_int
                     * (q - 1) ** (n - cell.founders)
                     * (q - 2) ** (cell.founders - 1))
            for colors in cell.leaves:
                acc[colors] = acc.get(colors, 0) + scale
        mass = {k: Fraction(v, denom) for k, v in acc.items()}
        return ExactPmf(kind="coloring", interval=self.interval, mass=mass,
                        q=q, w=self.params.w)


def enumerate_joint(params: WiParams, n: int,
                    max_orders: int = DEFAULT_JOINT_ORDER_GUARD) -> JointLaw:
    """Brute-force exact joint law of (order, coloring); the oracle."""
    return JointLaw(params, n, max_orders=max_orders)
