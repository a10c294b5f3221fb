"""Verification lab: exact identity checks and Monte Carlo experiments.

The identity checks (restriction consistency, k-dependence factorization,
founder marginals) run in rational arithmetic end to end and return exact
Fractions; a float appearing in one of them would be a defect.  The Monte
Carlo side (goodness of fit for the samplers, convergence of window laws,
tail of the coding radius) reports plain floats plus the sample counts that
produced them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from . import factor, wi
from .errors import CapacityError
from .orders import _neighbor_positions, founder_positions, restrict_ranks
from .pmf import ExactPmf, tv_distance
from .rng import Stream

DEFAULT_BATCH = 50_000


# ---------------------------------------------------------------------------
# exact identities
# ---------------------------------------------------------------------------

def check_consistency(q: int, w: Fraction, n: int,
                      max_states: int = wi.DEFAULT_COLORING_STATE_GUARD,
                      ) -> Fraction:
    """Exact TV between the one-site restrictions of the length-n law and
    the length-(n-1) law; the maximum over dropping the last or first site.

    Zero for every n exactly at the critical weight.  Away from it the
    first nonzero value appears at n = 4: length-2 marginals are uniform
    over ordered proper pairs by color symmetry for every weight, so n = 3
    is degenerately consistent as well.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    big = wi.exact_coloring_pmf(wi.WiParams(q, w), n, max_states=max_states)
    small = wi.exact_coloring_pmf(wi.WiParams(q, w), n - 1, max_states=max_states)
    tv_left = big.restrict_coloring((1, n - 1)).tv(small)
    shifted = big.pushforward(lambda k: k[1:], interval=(1, n - 1))
    tv_right = shifted.tv(small)
    return max(tv_left, tv_right)


@dataclass(frozen=True)
class DependenceReport:
    """Worst factorization error over admissible index-set splits."""

    q: int
    w: Fraction
    n: int
    k: int
    max_discrepancy: Fraction
    witness_sets: tuple[tuple[int, ...], tuple[int, ...]] | None
    witness_outcome: tuple[tuple[int, ...], tuple[int, ...]] | None

    def to_json_dict(self) -> dict:
        return {
            "q": self.q,
            "w": f"{self.w.numerator}/{self.w.denominator}",
            "n": self.n,
            "k": self.k,
            "max_discrepancy": (f"{self.max_discrepancy.numerator}/"
                                f"{self.max_discrepancy.denominator}"),
            "witness_sets": ([list(s) for s in self.witness_sets]
                             if self.witness_sets else None),
            "witness_outcome": ([list(s) for s in self.witness_outcome]
                                if self.witness_outcome else None),
        }


def _admissible_splits(n: int, k: int) -> Iterable[tuple[tuple, tuple]]:
    """All unordered pairs of disjoint nonempty site sets with every
    cross-pair more than k apart.  Sets need not be contiguous."""
    for assign in product((0, 1, 2), repeat=n):
        a = tuple(i + 1 for i in range(n) if assign[i] == 1)
        b = tuple(i + 1 for i in range(n) if assign[i] == 2)
        if not a or not b:
            continue
        if min(a) > min(b):
            continue
        if any(abs(x - y) <= k for x in a for y in b):
            continue
        yield a, b


def check_k_dependence(q: int, w: Fraction, n: int, k: int,
                       max_states: int = wi.DEFAULT_COLORING_STATE_GUARD,
                       ) -> DependenceReport:
    """Exhaustive exact factorization check on the length-n window.

    Zero certifies that variables on sets separated by more than k look
    independent on this window.  The stationary law at the critical weight
    has zero for (q=4, k=1) and (q=3, k=2), and a strictly positive
    discrepancy appears for other q at small n already.
    """
    pmf = wi.exact_coloring_pmf(wi.WiParams(q, w), n, max_states=max_states)
    zero = Fraction(0)
    best = zero
    arg_sets = None
    arg_out = None
    for a, b in _admissible_splits(n, k):
        ja: dict = {}
        jb: dict = {}
        jj: dict = {}
        ia = tuple(i - 1 for i in a)
        ib = tuple(i - 1 for i in b)
        for x, m in pmf.mass.items():
            xa = tuple(x[i] for i in ia)
            xb = tuple(x[i] for i in ib)
            ja[xa] = ja.get(xa, zero) + m
            jb[xb] = jb.get(xb, zero) + m
            jj[(xa, xb)] = jj.get((xa, xb), zero) + m
        for xa, pa in ja.items():
            for xb, pb in jb.items():
                d = abs(jj.get((xa, xb), zero) - pa * pb)
                if d > best:
                    best = d
                    arg_sets = (a, b)
                    arg_out = (xa, xb)
    return DependenceReport(q, Fraction(w), n, k, best, arg_sets, arg_out)


def find_dependence_violation(q: int, w: Fraction, k: int, n_max: int,
                              ) -> DependenceReport | None:
    """Smallest-n window (n <= n_max) with a positive discrepancy, if any."""
    for n in range(2, n_max + 1):
        rep = check_k_dependence(q, w, n, k)
        if rep.max_discrepancy > 0:
            return rep
    return None


# ---------------------------------------------------------------------------
# founder statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FounderTable:
    """Exact founder-membership marginals p_{n,k} and their sum s_n."""

    w: Fraction
    n: int
    p: tuple[Fraction, ...]
    s: Fraction

    def to_csv_rows(self) -> list[tuple]:
        rows = [("p", self.n, k + 1,
                 f"{v.numerator}/{v.denominator}", float(v))
                for k, v in enumerate(self.p)]
        rows.append(("s", self.n, "",
                     f"{self.s.numerator}/{self.s.denominator}", float(self.s)))
        return rows


def founder_recurrences(w: Fraction, n_max: int,
                        keep: Sequence[int] | None = None,
                        check: bool = True) -> dict[int, FounderTable]:
    """Exact founder tables for n = 1..n_max from the two recurrences.

    p_{n,1} = p_{n,n} = 1 and, splitting on where the last insertion lands,

        p_{n+1,k} = [ (w+k-2) p_{n,k-1} + (w+n-k) p_{n,k} ] / (2w+n-1)

    for 2 <= k <= n (an insertion at k itself makes k a non-founder), with
    s_{n+1} = s_n + 2w/(2w+n-1).  Rows are carried as integer numerators
    over the running denominator prod(2p+(j-1)r), which avoids gcd work.

    check=True verifies symmetry, unimodality toward the middle, and
    p = 1 at the ends on every computed row.
    """
    if n_max < 1:
        raise ValueError("need n_max >= 1")
    w = Fraction(w)
    if w <= 0:
        raise ValueError("need w > 0")
    keep_set = set(keep) if keep is not None else None
    p_num, r_den = w.numerator, w.denominator
    out: dict[int, FounderTable] = {}
    num = [1]                      # integer numerators of the current row
    den = 1                        # common denominator
    s = Fraction(1)
    if keep_set is None or 1 in keep_set:
        out[1] = FounderTable(w, 1, (Fraction(1),), Fraction(1))
    for n in range(1, n_max):
        step = 2 * p_num + (n - 1) * r_den
        new = [0] * (n + 1)
        new[0] = den * step
        new[n] = den * step
        for k in range(2, n + 1):
            new[k - 1] = ((p_num + (k - 2) * r_den) * num[k - 2]
                          + (p_num + (n - k) * r_den) * num[k - 1])
        num = new
        den *= step
        s = s + 2 * w / (2 * w + n - 1)
        m = n + 1
        if check:
            assert num[0] == den and num[m - 1] == den
            for k in range(m // 2):
                assert num[k] == num[m - 1 - k], f"symmetry fails at n={m}"
            for k in range(0, (m - 1) // 2):
                assert num[k] >= num[k + 1], f"unimodality fails at n={m}"
        if keep_set is None or m in keep_set:
            row = tuple(Fraction(v, den) for v in num)
            table = FounderTable(w, m, row, s)
            if check:
                assert sum(row, Fraction(0)) == s
            out[m] = table
    return out


def founder_sum_series(w: Fraction, n_max: int) -> list[Fraction]:
    """s_n for n = 1..n_max (expected founder counts), exact."""
    w = Fraction(w)
    out = [Fraction(1)]
    for n in range(1, n_max):
        out.append(out[-1] + 2 * w / (2 * w + n - 1))
    return out


def founder_membership_by_enumeration(w: Fraction, n: int) -> tuple[Fraction, ...]:
    """p_{n,k} computed directly from the exact order law; the oracle."""
    pmf = wi.exact_order_pmf(w, n)
    acc = [Fraction(0)] * n
    for ranks, m in pmf.mass.items():
        for pos in founder_positions(ranks):
            acc[pos] += m
    return tuple(acc)


def founder_avoidance_lower_bound(w: Fraction, n: int, m: int) -> Fraction:
    """Union-bound lower estimate of P(no founder in the center window).

    1 - sum of p_{2n+1,k} over the 2m+1 central positions; its increase
    toward 1 is the mechanism behind the uniform-order limit.
    """
    if m > n:
        raise ValueError("window exceeds the interval")
    length = 2 * n + 1
    table = founder_recurrences(w, length, keep=[length], check=False)[length]
    center = n + 1
    total = sum((table.p[k - 1] for k in range(center - m, center + m + 1)),
                Fraction(0))
    return 1 - total


# ---------------------------------------------------------------------------
# convergence of window laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergencePoint:
    n: int
    tv: float
    exact: Fraction | None
    mode: str                  # "exact" or "mc"
    samples: int | None


def convergence_coloring(q: int, w: Fraction, m: int, n_list: Sequence[int],
                         samples: int = 0, seed: int = 0,
                         max_states: int = wi.DEFAULT_COLORING_STATE_GUARD,
                         ) -> list[ConvergencePoint]:
    """TV between the center window of the [-n, n] law and the critical law.

    Exact where the table guard allows, else a plug-in Monte Carlo estimate
    from the forward sampler (raw, no bias correction; the sample count is
    part of the report).
    """
    target = wi.exact_coloring_pmf(wi.WiParams(q, wi.w_star(q)), 2 * m + 1)
    out = []
    for n in n_list:
        if n < m:
            raise ValueError(f"n={n} smaller than window half-width m={m}")
        length = 2 * n + 1
        states = q * (q - 1) ** (length - 1)
        if states <= max_states:
            big = wi.exact_coloring_pmf(wi.WiParams(q, w), length,
                                        max_states=max_states)
            # center window [-m, m] sits at offsets n-m .. n+m
            restricted = big.pushforward(
                lambda key: key[n - m:n + m + 1], interval=(1, 2 * m + 1))
            tv = restricted.tv(target)
            out.append(ConvergencePoint(n, float(tv), tv, "exact", None))
        else:
            if samples <= 0:
                raise CapacityError(f"exact convergence table (n={n})",
                                    states, max_states)
            counts: Counter = Counter()
            stream = Stream(seed, 10, n)
            for _ in range(samples):
                coloring, _order = wi.sample_wi(wi.WiParams(q, w), length, stream)
                counts[coloring.colors[n - m:n + m + 1]] += 1
            emp = {key: Fraction(c, samples) for key, c in counts.items()}
            tv = tv_distance(emp, target.mass)
            out.append(ConvergencePoint(n, float(tv), None, "mc", samples))
    return out


def convergence_order(w: Fraction, m: int, n_list: Sequence[int],
                      max_orders: int = wi.DEFAULT_ORDER_GUARD,
                      ) -> list[ConvergencePoint]:
    """TV between the center-window restriction of the order law and the
    uniform order, exactly (window restriction via re-ranking)."""
    length_small = 2 * m + 1
    uniform = wi.exact_order_pmf(Fraction(1), length_small)
    out = []
    for n in n_list:
        if n < m:
            raise ValueError(f"n={n} smaller than window half-width m={m}")
        length = 2 * n + 1
        big = wi.exact_order_pmf(w, length, max_orders=max_orders)
        restricted = big.pushforward(
            lambda key: restrict_ranks(key, n - m, n + m + 1),
            interval=(1, length_small))
        tv = restricted.tv(uniform)
        out.append(ConvergencePoint(n, float(tv), tv, "exact", None))
    return out


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------

def gof_chi_square(counts: Mapping[tuple, int], expected: ExactPmf,
                   min_ratio: int = 50) -> float:
    """Pearson p-value of observed counts against an exact law.

    Requires every observed outcome to carry positive expected mass and a
    total of at least min_ratio counts per support point.
    """
    total = sum(counts.values())
    support = list(expected.support())
    if total < min_ratio * len(support):
        raise ValueError(f"need >= {min_ratio} counts per support point, "
                         f"got {total} for {len(support)} outcomes")
    for key in counts:
        if expected.mass_of(key) == 0:
            raise ValueError(f"observed outcome {key} has zero expected mass")
    chi2 = 0.0
    for key in support:
        e = float(expected.mass_of(key)) * total
        o = counts.get(key, 0)
        chi2 += (o - e) ** 2 / e
    return float(stats.chi2.sf(chi2, len(support) - 1))


def wi_sampler_counts(q: int, w: Fraction, n: int, samples: int, seed: int,
                      ) -> Counter:
    """Outcome counts from the forward sampler under a fixed seed."""
    stream = Stream(seed, 11, n)
    counts: Counter = Counter()
    params = wi.WiParams(q, w)
    for _ in range(samples):
        coloring, _ = wi.sample_wi(params, n, stream)
        counts[coloring.colors] += 1
    return counts


# ---------------------------------------------------------------------------
# Monte Carlo drivers over the factor engine
# ---------------------------------------------------------------------------

def truncated_window_counts(q: int, n: int, seeds: int, seed0: int = 0,
                            window: tuple[int, int] | None = None,
                            batch: int = DEFAULT_BATCH) -> Counter:
    """Counts of the (sub)window coloring of solve_truncated over seeds.

    Seeds are seed0, seed0+1, ...; aggregation is order-independent so any
    batching (or distribution across workers) yields identical counts.
    """
    lo, hi = window if window is not None else (-n, n)
    if not -n <= lo <= hi <= n:
        raise ValueError("window outside the solved interval")
    counts: Counter = Counter()
    done = 0
    while done < seeds:
        m = min(batch, seeds - done)
        sd = np.arange(seed0 + done, seed0 + done + m, dtype=np.uint64)
        colors = factor.batch_truncated_colors(sd, q, n)
        sub = colors[:, lo + n:hi + n + 1]
        keys, cnt = np.unique(sub, axis=0, return_counts=True)
        for key, c in zip(keys, cnt):
            counts[tuple(int(x) for x in key)] += int(c)
        done += m
    return counts


def pair_joint_counts(q: int, t_max: int, decided_target: int,
                      sites: tuple[int, int] = (0, 2), seed0: int = 0,
                      batch: int = DEFAULT_BATCH, max_seeds: int = 200_000_000,
                      ) -> tuple[np.ndarray, int, int]:
    """Joint color counts at two sites over witness-decided seeds.

    Consumes seeds seed0, seed0+1, ... until decided_target seeds decide at
    both sites (a seed decides at a site when a sealing pair within t_max
    covers it).  Returns (q x q count matrix, decided seeds, seeds used).
    """
    cells = np.zeros((q, q), dtype=np.int64)
    decided_total = 0
    used = 0
    while decided_total < decided_target:
        if used >= max_seeds:
            raise RuntimeError(
                f"exceeded {max_seeds} seeds with {decided_total} decided")
        sd = np.arange(seed0 + used, seed0 + used + batch, dtype=np.uint64)
        decided, colors = factor.batch_decided_colors(sd, q, t_max, sites)
        both = decided.all(axis=1)
        x0 = colors[both, 0].astype(np.int64) - 1
        x1 = colors[both, 1].astype(np.int64) - 1
        np.add.at(cells, (x0, x1), 1)
        decided_total += int(both.sum())
        used += batch
    return cells, decided_total, used


@dataclass(frozen=True)
class TailCurve:
    q: int
    seeds: int
    t_max: int
    grid: tuple[int, ...]
    survival: tuple[float, ...]       # fraction with radius > t (undecided counts)
    undecided: float
    radii: tuple[int, ...] = field(repr=False, default=())

    def to_csv_rows(self) -> list[tuple]:
        return [(t, s, self.undecided) for t, s in zip(self.grid, self.survival)]

    def loglog_slope(self) -> float | None:
        """Fitted slope of log survival against log t on the decided range."""
        pts = [(t, s) for t, s in zip(self.grid, self.survival)
               if s > self.undecided and t > 0]
        if len(pts) < 2:
            return None
        xs = np.log([p[0] for p in pts])
        ys = np.log([p[1] for p in pts])
        return float(np.polyfit(xs, ys, 1)[0])


def tail_curve(q: int, seeds: int, t_max: int, seed0: int = 0,
               grid: Sequence[int] | None = None,
               batch: int = 2_000) -> TailCurve:
    """Empirical survival of the minimal witness radius over seeds.

    Undecided seeds (no witness within t_max) count as radius > t for every
    grid point and are also reported separately.
    """
    if grid is None:
        grid = []
        t = 1
        while t < t_max:
            grid.append(t)
            t *= 2
        grid.append(t_max)
    radii: list[int] = []
    done = 0
    while done < seeds:
        m = min(batch, seeds - done)
        sd = np.arange(seed0 + done, seed0 + done + m, dtype=np.uint64)
        radii.extend(int(r) for r in factor.batch_min_radius(sd, q, t_max))
        done += m
    arr = np.array(radii, dtype=np.int64)
    undecided = float((arr == 0).mean())
    survival = tuple(float(((arr > t) | (arr == 0)).mean()) for t in grid)
    return TailCurve(q, seeds, t_max, tuple(grid), survival, undecided,
                     tuple(radii))


def spiral_record_frequencies(seeds: int, positions: int, seed0: int = 0,
                              batch: int = DEFAULT_BATCH) -> np.ndarray:
    """Empirical probability of a record at each spiral position."""
    acc = np.zeros(positions, dtype=np.int64)
    done = 0
    while done < seeds:
        m = min(batch, seeds - done)
        sd = np.arange(seed0 + done, seed0 + done + m, dtype=np.uint64)
        acc += factor.batch_spiral_records(sd, positions).sum(axis=0)
        done += m
    return acc / seeds


# ---------------------------------------------------------------------------
# the 3-color window structure
# ---------------------------------------------------------------------------

def q3_solution_count(seed: int, n: int) -> int:
    """Number of distinct window colorings obtained by permuting the color
    classes of the 3-color truncated solve, each verified against the
    window's neighbor constraints.

    The neighbor constraints never consult the preference orders away from
    the window founders, so all 3! permutations solve them and the count is
    6 whenever at least two classes are populated.
    """
    src = factor.SiteSource(seed, 3)
    base = factor.solve_truncated(src, n)
    sites = list(range(-n, n + 1))
    ranks = _ranks_of(src, sites)
    left, right = _neighbor_positions(ranks)
    solutions = set()
    for perm in _perms3():
        candidate = tuple(perm[c - 1] for c in base.colors)
        if _solves_window(candidate, left, right):
            solutions.add(candidate)
    return len(solutions)


def _ranks_of(src, sites: list[int]) -> list[int]:
    order = sorted(range(len(sites)), key=lambda p: src.key(sites[p]))
    ranks = [0] * len(sites)
    for r, p in enumerate(order, start=1):
        ranks[p] = r
    return ranks


def _perms3():
    return [(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)]


def _solves_window(colors: tuple[int, ...], left: list, right: list) -> bool:
    for p, c in enumerate(colors):
        if left[p] is not None and colors[left[p]] == c:
            return False
        if right[p] is not None and colors[right[p]] == c:
            return False
    return True


# ---------------------------------------------------------------------------
# the dyadic block event from the existence proof, as a diagnostic
# ---------------------------------------------------------------------------

def dyadic_block_event(src, n: int) -> bool:
    """Whether the block event at scale n holds for this site source.

    The event asks for exactly five absolute records a, b, c, d, e in the
    union of the dyadic annuli at scales 5n..5n+5 (positive a, b, e at
    scales 5n, 5n+1, 5n+4; negative c, d at 5n+2, 5n+3), with preference
    orders tying a and c into a lucky pair.  Its probability is uniformly
    positive across scales, which is what drives the power-law tail bound;
    the constants make it astronomically rare, so this predicate exists for
    planted-configuration tests, never as a search path.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    lo_abs = 2 ** (5 * n)
    hi_abs = 2 ** (5 * n + 5)
    best = min(src.key(factor.spiral_site(j))
               for j in range(1, factor.spiral_position(lo_abs)))
    records = []
    for j in range(factor.spiral_position(lo_abs),
                   factor.spiral_position(hi_abs - 1) + 1):
        site_ = factor.spiral_site(j)
        k = src.key(site_)
        if k < best:
            if lo_abs <= abs(site_) < hi_abs:
                records.append(site_)
            best = k
    if len(records) != 5:
        return False
    pos = sorted(s for s in records if s > 0)
    neg = sorted((s for s in records if s < 0), key=abs)
    if len(pos) != 3 or len(neg) != 2:
        return False
    a, b, e = pos
    c, d = neg
    scales = [2 ** (5 * n + i) for i in range(6)]
    if not (scales[0] <= a < scales[1] <= b < scales[2]):
        return False
    if not (scales[2] <= -c < scales[3] <= -d < scales[4]):
        return False
    if not (scales[4] <= e < scales[5]):
        return False
    phi = src.phi
    return (phi(c)[3] == phi(a)[0] == phi(b)[3]
            and phi(d)[3] == phi(c)[0] == phi(e)[3])
