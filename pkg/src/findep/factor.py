"""Coloring the integer line as a finitary function of per-site randomness.

Every site i carries an arrival value u(i) (a 64-bit word read as a uniform
on [0,1)) and a preference permutation phi(i) of the q colors, both derived
deterministically from (seed, i).  Sites compare by the key (u, i), so the
arrival order on any finite window is total and window extension never
perturbs it.

Writing L(i) and R(i) for the nearest sites on each side that arrive before
i, the color equations say each site takes its favorite color among those
not held by L(i) and R(i) at its arrival.  With q >= 4 a site never needs
worse than its third favorite, so a site whose favorite is the 4th favorite
of both arrival neighbors is "lucky": its color is forced regardless of
everything else.  A pair of lucky sites A < B whose arrival values beat the
whole interior between them seals [A, B]: the colors inside are determined
by that window alone.  This is what makes the map finitary; the minimal
sealing pair around a site measures its coding radius.

Scalar operations work through a SiteSource (any object with u64/key/phi
methods, so tests can plant configurations); batch_* functions are numpy
engines over seed vectors that reproduce the scalar results bit for bit and
power the Monte Carlo drivers in the lab module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import WitnessIntegrityError
from .orders import _neighbor_positions
from .rng import MASK64, factorial, perm_from_index, prf64, prf64_np

_U_STREAM = 0
_PHI_STREAM = 1 << 32


@dataclass(frozen=True)
class SiteRandomness:
    """The i.i.d. payload of one site: arrival word and preference order."""

    u: int
    phi: tuple[int, ...]


class SiteSource:
    """Deterministic per-site randomness for a (seed, q) pair.

    u64 and phi are pure functions of (seed, site); values are cached since
    window solves revisit sites constantly.
    """

    def __init__(self, seed: int, q: int):
        if q < 3:
            raise ValueError(f"need q >= 3, got q={q}")
        self.seed = seed & MASK64
        self.q = q
        self._u: dict[int, int] = {}
        self._phi: dict[int, tuple[int, ...]] = {}
        qf = factorial(q)
        self._qf = qf
        self._limit = (1 << 64) - ((1 << 64) % qf)

    def u64(self, i: int) -> int:
        v = self._u.get(i)
        if v is None:
            v = prf64(self.seed, i, _U_STREAM)
            self._u[i] = v
        return v

    def key(self, i: int):
        """Arrival comparator; the site index breaks exact 64-bit ties."""
        return (self.u64(i), i)

    def phi(self, i: int) -> tuple[int, ...]:
        p = self._phi.get(i)
        if p is None:
            ctr = 0
            while True:
                r = prf64(self.seed, i, _PHI_STREAM | ctr)
                if r < self._limit:
                    break
                ctr += 1
            p = perm_from_index(r % self._qf, self.q)
            self._phi[i] = p
        return p

    def site(self, i: int) -> SiteRandomness:
        return SiteRandomness(self.u64(i), self.phi(i))

    def shifted(self, offset: int) -> "_ShiftedSource":
        return _ShiftedSource(self, offset)


class _ShiftedSource:
    """View of a source with all site indices offset; used for equivariance."""

    def __init__(self, base, offset: int):
        self._base = base
        self._offset = offset
        self.q = base.q

    def u64(self, i: int) -> int:
        return self._base.u64(i + self._offset)

    def key(self, i: int):
        return self._base.key(i + self._offset)

    def phi(self, i: int) -> tuple[int, ...]:
        return self._base.phi(i + self._offset)

    def site(self, i: int) -> SiteRandomness:
        return self._base.site(i + self._offset)

    def shifted(self, offset: int) -> "_ShiftedSource":
        return _ShiftedSource(self._base, self._offset + offset)


class MappingSource:
    """Planted per-site randomness for tests; falls back to a real source."""

    def __init__(self, q: int, u: dict[int, int] | None = None,
                 phi: dict[int, Sequence[int]] | None = None,
                 fallback: SiteSource | None = None):
        self.q = q
        self._u = dict(u or {})
        self._phi = {i: tuple(p) for i, p in (phi or {}).items()}
        self._fallback = fallback

    def u64(self, i: int) -> int:
        if i in self._u:
            return self._u[i]
        if self._fallback is None:
            raise KeyError(f"no planted arrival value for site {i}")
        return self._fallback.u64(i)

    def key(self, i: int):
        return (self.u64(i), i)

    def phi(self, i: int) -> tuple[int, ...]:
        if i in self._phi:
            return self._phi[i]
        if self._fallback is None:
            raise KeyError(f"no planted preference order for site {i}")
        return self._fallback.phi(i)

    def site(self, i: int) -> SiteRandomness:
        return SiteRandomness(self.u64(i), self.phi(i))


def _as_source(src, q: int | None = None):
    if isinstance(src, int):
        if q is None:
            raise ValueError("q is required when passing a bare seed")
        return SiteSource(src, q)
    return src


def site(seed: int, i: int, q: int) -> SiteRandomness:
    """Per-site randomness; identical on every re-query."""
    return SiteSource(seed, q).site(i)


def scan_lr(src, i: int, cap: int, q: int | None = None,
            ) -> tuple[int | None, int | None]:
    """Nearest site on each side arriving before i, scanning at most cap.

    None means "not found within cap": a truncation marker, not an error.
    """
    if cap < 1:
        raise ValueError(f"need cap >= 1, got {cap}")
    src = _as_source(src, q)
    ki = src.key(i)
    left = next((j for j in range(i - 1, i - cap - 1, -1) if src.key(j) < ki), None)
    right = next((j for j in range(i + 1, i + cap + 1) if src.key(j) < ki), None)
    return left, right


def spiral_site(position: int) -> int:
    """The site at 1-based position j of the spiral 0, 1, -1, 2, -2, ..."""
    if position < 1:
        raise ValueError("spiral positions are 1-based")
    if position == 1:
        return 0
    half, odd = divmod(position, 2)
    return -half if odd else half


def spiral_position(i: int) -> int:
    return 1 if i == 0 else (2 * i if i > 0 else -2 * i + 1)


def absolute_record(src, i: int, q: int | None = None) -> bool:
    """True iff u(i) beats every site preceding i in the spiral order."""
    src = _as_source(src, q if q is not None else 4)
    ki = src.key(i)
    return all(src.key(spiral_site(j)) > ki
               for j in range(1, spiral_position(i)))


def is_lucky(src, i: int, cap: int, q: int | None = None) -> bool | None:
    """Whether site i's favorite is the 4th favorite of both arrival
    neighbors; None when a truncated scan leaves the answer open.

    The rank-4 condition needs at least 4 colors: with 3 colors a site has
    no choice and no local shortcut exists.
    """
    src = _as_source(src, q)
    if src.q < 4:
        raise ValueError("luckiness needs q >= 4")
    left, right = scan_lr(src, i, cap)
    fav = src.phi(i)[0]
    if left is not None and src.phi(left)[3] != fav:
        return False
    if right is not None and src.phi(right)[3] != fav:
        return False
    if left is None or right is None:
        return None
    return True


@dataclass(frozen=True)
class LuckyWitness:
    """A sealing pair: lucky sites a < b whose arrivals beat the interior.

    radius is the reach of the four neighbor scans measured from center;
    it is what the coding radius of the factor counts.
    """

    center: int
    a: int
    b: int
    left_a: int
    right_a: int
    left_b: int
    right_b: int
    radius: int

    def sort_key(self):
        return (self.radius,
                abs(self.a - self.center) + abs(self.b - self.center),
                self.b - self.center)


def _first_below(src, start: int, step: int, threshold, bound_lo: int,
                 bound_hi: int) -> int | None:
    """First site from start (inclusive) in direction step whose key is
    below threshold, or None when the walk leaves [bound_lo, bound_hi]."""
    j = start
    while bound_lo <= j <= bound_hi:
        if src.key(j) < threshold:
            return j
        j += step
    return None


def find_witness(src, m: int, t_max: int, center: int = 0,
                 q: int | None = None) -> LuckyWitness | None:
    """Minimal sealing pair around [center-m, center+m], or None.

    A pair (a, b) with a <= center-m <= center+m <= b beats its interior
    iff the later-arriving endpoint sees the other as its first earlier
    arrival across the window.  Walking candidates outward (they are the
    running arrival records as seen from the window) visits every such
    pair; radius >= |a-center|+1 bounds the walk, so the returned witness
    is exactly minimal under (radius, |a-c|+|b-c|, b-c).
    """
    if m < 0 or t_max < 1:
        raise ValueError("need m >= 0 and t_max >= 1")
    src = _as_source(src, q)
    if src.q < 4:
        raise ValueError("witness search needs q >= 4")
    best: LuckyWitness | None = None

    def consider(a: int, b: int, bound: int):
        nonlocal best
        blo, bhi = center - bound, center + bound
        ka, kb = src.key(a), src.key(b)
        left_a = _first_below(src, a - 1, -1, ka, blo, bhi)
        if left_a is None:
            return
        right_b = _first_below(src, b + 1, +1, kb, blo, bhi)
        if right_b is None:
            return
        if kb < ka:
            right_a = b
            # everything in (left_a, a) exceeds ka > kb, so skip it
            left_b = _first_below(src, left_a, -1, kb, blo, bhi)
            if left_b is None:
                return
        else:
            left_b = a
            right_a = _first_below(src, right_b, +1, ka, blo, bhi)
            if right_a is None:
                return
        fav_a, fav_b = src.phi(a)[0], src.phi(b)[0]
        if src.phi(left_a)[3] != fav_a or src.phi(right_a)[3] != fav_a:
            return
        if src.phi(left_b)[3] != fav_b or src.phi(right_b)[3] != fav_b:
            return
        radius = max(abs(left_a - center), abs(right_a - center),
                     abs(left_b - center), abs(right_b - center))
        cand = LuckyWitness(center, a, b, left_a, right_a, left_b, right_b,
                            radius)
        if best is None or cand.sort_key() < best.sort_key():
            best = cand

    inner = min((src.key(j) for j in range(center - m + 1, center + m)),
                default=None)

    for side in (-1, +1):
        # the candidate endpoint walks outward on this side and must beat
        # everything between itself and the far edge of the inner window
        run = inner
        x = center + side * m
        while True:
            if abs(x - center) + 1 > t_max:
                break
            if best is not None and abs(x - center) + 1 > best.radius:
                break
            kx = src.key(x)
            if run is None or kx < run:
                bound = t_max if best is None else min(t_max, best.radius)
                start = max(x + 1, center + m) if side < 0 else min(x - 1, center - m)
                partner = _first_below(src, start, -side, kx,
                                       center - bound, center + bound)
                if partner is None:
                    # further candidates arrive even earlier and push the
                    # partner further out still: nothing more on this side
                    break
                if side < 0:
                    consider(x, partner, bound)
                else:
                    consider(partner, x, bound)
            if (side < 0 and x < center + m) or (side > 0 and x > center - m):
                run = kx if run is None else min(run, kx)
            x += side
    return best


def coding_radius(src, t_max: int, q: int | None = None) -> int | None:
    """Minimal witness radius around the origin; None beyond t_max."""
    w = find_witness(src, 0, t_max, center=0, q=q)
    return None if w is None else w.radius


def verify_witness(src, w: LuckyWitness, q: int | None = None) -> bool:
    """Re-check a witness from scratch against its source."""
    src = _as_source(src, q)
    ka, kb = src.key(w.a), src.key(w.b)
    if not w.a < w.b:
        return False
    for i in range(w.a + 1, w.b):
        if src.key(i) < max(ka, kb):
            return False
    for site_, left, right in ((w.a, w.left_a, w.right_a),
                               (w.b, w.left_b, w.right_b)):
        k = src.key(site_)
        if not (left < site_ < right):
            return False
        if not (src.key(left) < k and src.key(right) < k):
            return False
        for j in range(left + 1, site_):
            if src.key(j) < k:
                return False
        for j in range(site_ + 1, right):
            if src.key(j) < k:
                return False
        fav = src.phi(site_)[0]
        if src.phi(left)[3] != fav or src.phi(right)[3] != fav:
            return False
    return True


@dataclass(frozen=True)
class WindowColoring:
    """A solved window; resolved marks sites stable under window extension."""

    interval: tuple[int, int]
    colors: tuple[int, ...]
    resolved: tuple[bool, ...]

    def __post_init__(self):
        for x, y in zip(self.colors, self.colors[1:]):
            if x == y:
                raise ValueError("window coloring is not proper")

    def color_at(self, i: int) -> int:
        return self.colors[i - self.interval[0]]

    def resolved_at(self, i: int) -> bool:
        return self.resolved[i - self.interval[0]]


def _ranks_by_key(src, sites: list[int]) -> list[int]:
    order = sorted(range(len(sites)), key=lambda p: src.key(sites[p]))
    ranks = [0] * len(sites)
    for r, p in enumerate(order, start=1):
        ranks[p] = r
    return ranks


def _fill_window(src, sites: list[int], left: list, right: list,
                 preset: dict[int, int] | None = None) -> list[int]:
    """Color sites in arrival order; each takes its best allowed favorite.

    left/right are position-indexed neighbor positions (None for absent).
    No site ever needs worse than its third favorite, which is asserted.
    """
    order = sorted(range(len(sites)), key=lambda p: src.key(sites[p]))
    colors: list[int] = [0] * len(sites)
    preset = preset or {}
    for p in order:
        s = sites[p]
        if s in preset:
            colors[p] = preset[s]
            continue
        forbid = set()
        if left[p] is not None:
            forbid.add(colors[left[p]])
        if right[p] is not None:
            forbid.add(colors[right[p]])
        for rank, c in enumerate(src.phi(s), start=1):
            if c not in forbid:
                assert rank <= 3, "a site needed worse than its 3rd favorite"
                colors[p] = c
                break
    return colors


def solve_window(src, witness: LuckyWitness, q: int | None = None,
                 ) -> WindowColoring:
    """Colors on [a, b] forced by a sealing pair.

    The endpoints take their favorites (their luck guarantees both are
    consistent), then the interior fills in arrival order; the sealing
    condition keeps every interior site's neighbors inside the window.
    """
    src = _as_source(src, q)
    if not verify_witness(src, witness):
        raise WitnessIntegrityError(f"witness {witness} failed re-verification")
    sites = list(range(witness.a, witness.b + 1))
    ranks = _ranks_by_key(src, sites)
    left, right = _neighbor_positions(ranks)
    preset = {witness.a: src.phi(witness.a)[0],
              witness.b: src.phi(witness.b)[0]}
    colors = _fill_window(src, sites, left, right, preset)
    return WindowColoring((witness.a, witness.b), tuple(colors),
                          (True,) * len(sites))


def solve_truncated(src, n: int, q: int | None = None) -> WindowColoring:
    """Solve the color equations restricted to [-n, n].

    Neighbor maps come from the window's own arrival order; a site missing
    a neighbor on one side simply drops that constraint.  The full output
    is distributed like the weighted-insertion coloring at weight 1.  A
    site is flagged resolved when some sealing pair certifiable inside the
    window covers it, in which case its color agrees with any extension.
    """
    if n < 0:
        raise ValueError("need n >= 0")
    src = _as_source(src, q)
    sites = list(range(-n, n + 1))
    ranks = _ranks_by_key(src, sites)
    left, right = _neighbor_positions(ranks)
    colors = _fill_window(src, sites, left, right)
    resolved = [False] * len(sites)
    if src.q >= 4:
        for lo, hi in _sealed_position_ranges(src, sites, left, right):
            for p in range(lo, hi + 1):
                resolved[p] = True
    return WindowColoring((-n, n), tuple(colors), tuple(resolved))


def _sealed_position_ranges(src, sites: list[int], left: list, right: list,
                            ) -> Iterable[tuple[int, int]]:
    """Position ranges sealed by an in-window lucky pair.

    Every nearest-earlier-arrival pair (left[p], p) and (p, right[p]) beats
    its interior by construction, so those are exactly the candidate pairs;
    a pair certifies when both endpoints' own neighbors lie inside the
    window and the luck conditions hold.
    """
    fav1 = [src.phi(s)[0] for s in sites]
    fav4 = [src.phi(s)[3] for s in sites]
    for p in range(len(sites)):
        for a, b in ((left[p], p), (p, right[p])):
            if a is None or b is None:
                continue
            la, ra = left[a], right[a]
            lb, rb = left[b], right[b]
            if la is None or ra is None or lb is None or rb is None:
                continue
            if fav4[la] == fav1[a] == fav4[ra] and fav4[lb] == fav1[b] == fav4[rb]:
                yield a, b


def color_at(src, i: int, t_max: int, q: int | None = None) -> int | None:
    """The line coloring at site i, or None if no witness within t_max."""
    src = _as_source(src, q)
    w = find_witness(src, 0, t_max, center=i)
    if w is None:
        return None
    return solve_window(src, w).color_at(i)


# ---------------------------------------------------------------------------
# numpy batch engines
#
# These reproduce the scalar semantics over vectors of seeds, bit for bit
# (covered by tests), because the Monte Carlo acceptance checks need
# 1e6..1e7 independent seeds on a single core.
# ---------------------------------------------------------------------------

def _perm_tables(q: int) -> tuple[int, np.ndarray]:
    qf = factorial(q)
    if qf > 720:
        raise ValueError("batch engines support q <= 6")
    tab = np.array([perm_from_index(i, q) for i in range(qf)], dtype=np.uint8)
    return qf, tab


def batch_u(seeds: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """(len(seeds), hi-lo+1) arrival words; matches SiteSource.u64."""
    sites = np.arange(lo, hi + 1, dtype=np.int64).astype(np.uint64)
    return prf64_np(seeds.astype(np.uint64)[:, None], sites[None, :], _U_STREAM)


def _phi_raw_fixup(raw: np.ndarray, seeds: np.ndarray, sites, q: int) -> None:
    """Replace the ~2^-60 rejection cases with the scalar result in place."""
    qf, tab = _perm_tables(q)
    limit = np.uint64((1 << 64) - ((1 << 64) % qf))
    bad = raw >= limit
    if not bad.any():
        return
    rank = {tuple(int(c) for c in tab[i]): i for i in range(qf)}
    where = np.nonzero(bad)
    for pos in zip(*where):
        seed = int(seeds[pos[0]])
        site_ = int(sites[pos[-1]]) if raw.ndim > 1 else int(sites[pos[0]])
        p = SiteSource(seed, q).phi(site_)
        raw[pos] = np.uint64(rank[p])


def batch_perm_idx(seeds: np.ndarray, lo: int, hi: int, q: int) -> np.ndarray:
    """(B, W) permutation indices in [0, q!); matches SiteSource.phi."""
    qf, _ = _perm_tables(q)
    sites = np.arange(lo, hi + 1, dtype=np.int64)
    raw = prf64_np(seeds.astype(np.uint64)[:, None],
                   sites.astype(np.uint64)[None, :], _PHI_STREAM)
    _phi_raw_fixup(raw, seeds, sites, q)
    return (raw % np.uint64(qf)).astype(np.int32)


def _fav_at(seeds: np.ndarray, sites: np.ndarray, q: int, rank: int,
            ) -> np.ndarray:
    """rank-th favorite color at per-seed sites (flat arrays)."""
    qf, tab = _perm_tables(q)
    raw = prf64_np(seeds.astype(np.uint64),
                   sites.astype(np.int64).astype(np.uint64), _PHI_STREAM)
    _phi_raw_fixup(raw, seeds, sites, q)
    idx = (raw % np.uint64(qf)).astype(np.int32)
    return tab[:, rank - 1].astype(np.int16)[idx]


def _batch_order_and_neighbors(u: np.ndarray):
    """Ascending arrival order plus nearest-earlier-arrival maps.

    Deletion trick: removing sites from a doubly linked list in reverse
    arrival order exposes, at each removal, exactly the removed site's
    nearest earlier arrivals.  Returned maps are padded-index arrays where
    slot p+1 holds position p and 0 means "absent on that side".
    """
    b, w = u.shape
    asc = np.argsort(u, axis=1, kind="stable").astype(np.int32)
    rows = np.arange(b)
    prev = np.tile(np.arange(-1, w + 1, dtype=np.int32), (b, 1))
    nxt = np.tile(np.arange(1, w + 3, dtype=np.int32), (b, 1))
    lnb = np.zeros((b, w + 2), dtype=np.int32)
    rnb = np.zeros((b, w + 2), dtype=np.int32)
    for t in range(w - 1, -1, -1):
        p = asc[:, t] + 1
        pl = prev[rows, p]
        pr = nxt[rows, p]
        lnb[rows, p] = pl
        rnb[rows, p] = pr
        nxt[rows, pl] = pr
        prev[rows, pr] = pl
    rnb[rnb == w + 1] = 0
    return asc, lnb, rnb


def batch_truncated_colors_window(seeds: np.ndarray, q: int, lo: int, hi: int,
                                  ) -> np.ndarray:
    """(B, W) colors of the truncated solve over an arbitrary window."""
    qf, tab = _perm_tables(q)
    u = batch_u(seeds, lo, hi)
    pidx = batch_perm_idx(seeds, lo, hi, q)
    asc, lnb, rnb = _batch_order_and_neighbors(u)
    b, w = u.shape
    rows = np.arange(b)
    colors = np.zeros((b, w + 2), dtype=np.uint8)
    favs = tab[pidx]
    for t in range(w):
        p = asc[:, t] + 1
        xl = colors[rows, lnb[rows, p]]
        xr = colors[rows, rnb[rows, p]]
        f = favs[rows, p - 1]
        chosen = f[:, 0].copy()
        undone = (chosen == xl) | (chosen == xr)
        for k in range(1, q):
            if not undone.any():
                break
            cand = f[:, k]
            take = undone & (cand != xl) & (cand != xr)
            chosen[take] = cand[take]
            undone &= ~take
        assert not undone.any()
        colors[rows, p] = chosen
    return colors[:, 1:w + 1]


def batch_truncated_colors(seeds: np.ndarray, q: int, n: int) -> np.ndarray:
    """(B, 2n+1) colors of solve_truncated for every seed."""
    return batch_truncated_colors_window(seeds, q, -n, n)


def _records_outward(u: np.ndarray, center_col: int, step: int, count: int,
                     max_slots: int):
    """Strict running arrival records walking outward from a column.

    dist[b, k] is the 1-based offset of the k-th record (0 pads), val its
    arrival word; n counts records, capped at max_slots with the excess
    flagged in overflow.  Record values strictly decrease along slots and
    val pads with 0, so counting entries at or above a threshold finds the
    first record below it.
    """
    b = u.shape[0]
    cols = center_col + step * np.arange(1, count + 1)
    seq = u[:, cols]
    runmin = np.minimum.accumulate(seq, axis=1)
    mask = np.empty((b, count), dtype=bool)
    mask[:, 0] = True
    mask[:, 1:] = seq[:, 1:] < runmin[:, :-1]
    counts = mask.sum(axis=1)
    rr, cc = np.nonzero(mask)          # row-major, so slots are consecutive
    starts = np.concatenate([[0], np.cumsum(counts[:-1])])
    ss = np.arange(rr.size) - starts[rr]
    keep = ss < max_slots
    overflow = np.zeros(b, dtype=bool)
    overflow[rr[~keep]] = True
    rr, cc, ss = rr[keep], cc[keep], ss[keep]
    dist = np.zeros((b, max_slots), dtype=np.int64)
    val = np.zeros((b, max_slots), dtype=np.uint64)
    dist[rr, ss] = cc + 1
    val[rr, ss] = seq[rr, cc]
    n = np.minimum(mask.sum(axis=1), max_slots).astype(np.int64)
    return dist, val, n, overflow


def _first_slot_below(vals: np.ndarray, counts: np.ndarray,
                      threshold: np.ndarray):
    """Index of the first record arriving before threshold, plus validity.

    vals strictly decrease along slots (padded with UINT64_MAX), so the
    first slot below the threshold is the count of slots at or above it.
    """
    idx = (vals >= threshold[:, None]).sum(axis=1)
    return np.minimum(idx, vals.shape[1] - 1), idx < counts


def batch_decided_colors(seeds: np.ndarray, q: int, t_max: int,
                         targets: Sequence[int] = (0, 2),
                         max_slots: int | None = None):
    """Witness-decided flags and colors at target sites, vectorised.

    decided[s, j] is True exactly when color_at(seed, targets[j], t_max)
    would decide, and colors[s, j] is then that color.  Candidate sealing
    pairs around a target c are enumerated as in find_witness: the later
    endpoint x is an arrival record as seen from c (or c itself), its
    partner y is x's first earlier arrival across c, and the remaining
    neighbor reads resolve through the two record lists.  The preference
    checks run cheapest-first so the searches mostly touch short subsets.
    Rows whose record lists overflow max_slots fall back to the scalar
    path (vanishingly rare).
    """
    if q < 4:
        raise ValueError("witness search needs q >= 4")
    if max_slots is None:
        max_slots = max(12, int(3.0 * np.log(max(t_max, 2))) + 6)
    b = len(seeds)
    lo = min(targets) - t_max
    hi = max(targets) + t_max
    u = batch_u(seeds, lo, hi)
    decided = np.zeros((b, len(targets)), dtype=bool)
    overflow_all = np.zeros(b, dtype=bool)
    slots = np.arange(max_slots)

    def favs(rows_sel, sites, rank):
        return _fav_at(seeds[rows_sel], sites, q, rank)

    for ti, c in enumerate(targets):
        cc = c - lo
        uc = u[:, cc]
        rec = {}
        for side in (-1, +1):
            d, v, n, ov_flag = _records_outward(u, cc, side, t_max, max_slots)
            # one pad column so idx+1 gathers stay in bounds
            d = np.concatenate([d, np.zeros((b, 1), dtype=np.int64)], axis=1)
            v = np.concatenate([v, np.zeros((b, 1), dtype=np.uint64)], axis=1)
            rec[side] = (d, v, n)
            overflow_all |= ov_flag

        for side in (-1, +1):
            sd_, sv_, ns_ = rec[side]          # candidate side
            od_, ov_, no_ = rec[-side]         # partner side
            # hoisted center-threshold searches
            sc_i, sc_ok = _first_slot_below(sv_[:, :max_slots], ns_, uc)
            oc_i, oc_ok = _first_slot_below(ov_[:, :max_slots], no_, uc)

            def settle(rows_f, xd, xv, nsx_d, ok):
                """Resolve partner and remaining neighbors for flat pairs.

                rows_f: seed row per pair; xd/xv: candidate offset and
                value; nsx_d: offset of the candidate's same-side
                neighbor; ok: validity so far.  Sets decided for winners.
                """
                keep = np.nonzero(ok)[0]
                if keep.size == 0:
                    return
                rows_f, xd, xv, nsx_d = (rows_f[keep], xd[keep], xv[keep],
                                         nsx_d[keep])
                x_site = c + side * xd
                f1x = favs(rows_f, x_site, 1)
                good = favs(rows_f, c + side * nsx_d, 4) == f1x
                keep = np.nonzero(good)[0]
                if keep.size == 0:
                    return
                rows_f, xd, xv, f1x = (rows_f[keep], xd[keep], xv[keep],
                                       f1x[keep])
                # partner y: the center if it arrived before x, else the
                # first record across arriving before x
                y_is_c = (xd > 0) & (uc[rows_f] < xv)
                o_i, o_ok = _first_slot_below(ov_[rows_f][:, :max_slots],
                                              no_[rows_f], xv)
                ok2 = y_is_c | o_ok
                yd = np.where(y_is_c, 0, od_[rows_f, o_i])
                yv = np.where(y_is_c, uc[rows_f], ov_[rows_f, o_i])
                good = ok2 & (favs(rows_f, c - side * yd, 4) == f1x)
                keep = np.nonzero(good)[0]
                if keep.size == 0:
                    return
                rows_f, yd, yv, y_is_c, o_i = (rows_f[keep], yd[keep],
                                               yv[keep], y_is_c[keep],
                                               o_i[keep])
                # y's far neighbor: the next record past it
                noy_d = np.where(y_is_c, od_[rows_f, oc_i[rows_f]],
                                 od_[rows_f, o_i + 1])
                noy_ok = np.where(y_is_c, oc_ok[rows_f],
                                  (o_i + 1) < no_[rows_f])
                # y's near neighbor: first candidate-side record below yv
                s_i, s_ok = _first_slot_below(sv_[rows_f][:, :max_slots],
                                              ns_[rows_f], yv)
                nsy_d = sd_[rows_f, s_i]
                ok3 = noy_ok.astype(bool) & s_ok
                f1y = favs(rows_f, c - side * yd, 1)
                win = (ok3 & (favs(rows_f, c - side * noy_d, 4) == f1y)
                       & (favs(rows_f, c + side * nsy_d, 4) == f1y))
                decided[rows_f[win], ti] = True

            # candidate x = the center itself
            settle(np.arange(b), np.zeros(b, dtype=np.int64), uc,
                   sd_[np.arange(b), sc_i], sc_ok)
            # candidates x = records on this side; same-side neighbor is
            # simply the next record
            mask = slots[None, :] < ns_[:, None]
            rows_f, ss = np.nonzero(mask)
            settle(rows_f, sd_[rows_f, ss], sv_[rows_f, ss],
                   sd_[rows_f, ss + 1], (ss + 1) < ns_[rows_f])

    colors = np.zeros((b, len(targets)), dtype=np.uint8)
    fully = decided.any(axis=1) & ~overflow_all
    if fully.any():
        sub = np.nonzero(fully)[0]
        cols = batch_truncated_colors_window(seeds[sub], q, lo, hi)
        for ti, c in enumerate(targets):
            colors[sub, ti] = cols[:, c - lo]
    for bi in np.nonzero(overflow_all)[0]:
        s = SiteSource(int(seeds[bi]), q)
        for ti, c in enumerate(targets):
            col = color_at(s, c, t_max)
            decided[bi, ti] = col is not None
            colors[bi, ti] = col or 0
    return decided, colors


def batch_min_radius(seeds: np.ndarray, q: int, t_max: int) -> np.ndarray:
    """Minimal witness radius per seed, 0 where undecided within t_max.

    Works from the full neighbor maps of the window, so memory grows with
    t_max; intended for tail curves at moderate seed counts.
    """
    if q < 4:
        raise ValueError("witness search needs q >= 4")
    qf, tab = _perm_tables(q)
    fav1 = tab[:, 0].astype(np.int16)
    fav4 = tab[:, 3].astype(np.int16)
    u = batch_u(seeds, -t_max, t_max)
    pidx = batch_perm_idx(seeds, -t_max, t_max, q)
    _, lnb, rnb = _batch_order_and_neighbors(u)
    b, w = u.shape
    f1 = fav1[pidx]
    f4 = fav4[pidx]
    best = np.zeros(b, dtype=np.int64)
    pads = np.tile(np.arange(1, w + 1, dtype=np.int32), (b, 1))

    def site_of(pad):
        return pad - 1 - t_max

    def gather(arr, pad):
        return np.take_along_axis(arr, np.clip(pad, 1, w) - 1, axis=1)

    def inwin(pad):
        return (pad >= 1) & (pad <= w)

    for a_pad, b_pad in ((lnb[:, 1:w + 1], pads), (pads, rnb[:, 1:w + 1])):
        la = np.take_along_axis(lnb, np.clip(a_pad, 1, w), 1)
        ra = np.take_along_axis(rnb, np.clip(a_pad, 1, w), 1)
        lb = np.take_along_axis(lnb, np.clip(b_pad, 1, w), 1)
        rb = np.take_along_axis(rnb, np.clip(b_pad, 1, w), 1)
        ok = (inwin(a_pad) & inwin(b_pad) & inwin(la) & inwin(ra)
              & inwin(lb) & inwin(rb)
              & (site_of(a_pad) <= 0) & (site_of(b_pad) >= 0))
        fa1 = gather(f1, a_pad)
        fb1 = gather(f1, b_pad)
        lucky = ((gather(f4, la) == fa1) & (gather(f4, ra) == fa1)
                 & (gather(f4, lb) == fb1) & (gather(f4, rb) == fb1))
        rad = np.maximum.reduce([np.abs(site_of(np.clip(x, 1, w)))
                                 for x in (la, ra, lb, rb)])
        ok &= lucky & (rad <= t_max)
        rad_masked = np.where(ok, rad.astype(np.int64), t_max + 1)
        row_min = rad_masked.min(axis=1)
        hit = row_min <= t_max
        upd = hit & ((best == 0) | (row_min < best))
        best[upd] = row_min[upd]
    return best


def batch_spiral_records(seeds: np.ndarray, positions: int) -> np.ndarray:
    """(B, positions) record indicators along the spiral 0, 1, -1, 2, ..."""
    sites = np.array([spiral_site(j) for j in range(1, positions + 1)],
                     dtype=np.int64)
    su = sites.astype(np.uint64)[None, :]
    u = prf64_np(seeds.astype(np.uint64)[:, None], su, _U_STREAM)
    runmin = np.minimum.accumulate(u, axis=1)
    rec = np.empty(u.shape, dtype=bool)
    rec[:, 0] = True
    rec[:, 1:] = u[:, 1:] < runmin[:, :-1]
    return rec


def batch_lucky_frequency(seed: int, q: int, site_count: int,
                          margin: int = 2_000, strip: int = 20_000,
                          ) -> tuple[int, int]:
    """(lucky sites, evaluable sites) among 1..site_count for one seed.

    Sites are scanned in strips with a margin; a site whose neighbor scan
    leaves its strip is skipped.  Skipping is arrival-value driven and so
    cannot bias the preference test: luck given the neighbor positions
    depends on the preference orders alone.
    """
    if q < 4:
        raise ValueError("luckiness needs q >= 4")
    qf, tab = _perm_tables(q)
    fav1 = tab[:, 0].astype(np.int16)
    fav4 = tab[:, 3].astype(np.int16)
    seeds = np.array([seed], dtype=np.uint64)
    lucky = 0
    evaluable = 0
    start = 1
    while start <= site_count:
        stop = min(start + strip - 1, site_count)
        lo, hi = start - margin, stop + margin
        u = batch_u(seeds, lo, hi)
        pidx = batch_perm_idx(seeds, lo, hi, q)
        _, lnb, rnb = _batch_order_and_neighbors(u)
        w = hi - lo + 1
        f1 = fav1[pidx[0]]
        f4 = fav4[pidx[0]]
        lnb0 = lnb[0, 1:w + 1]
        rnb0 = rnb[0, 1:w + 1]
        sel = np.arange(start - lo, stop - lo + 1)
        has = (lnb0[sel] >= 1) & (rnb0[sel] >= 1)
        sel = sel[has]
        evaluable += sel.size
        la = lnb0[sel] - 1
        ra = rnb0[sel] - 1
        lucky += int(((f4[la] == f1[sel]) & (f4[ra] == f1[sel])).sum())
        start = stop + 1
    return lucky, evaluable
