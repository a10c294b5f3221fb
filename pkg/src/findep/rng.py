"""Counter-based deterministic randomness.

Everything stochastic in this package is a pure function of a 64-bit seed
plus integer coordinates (site index, stream id, counter).  Re-querying any
coordinate yields the same bits, which is what makes window extension, batch
evaluation and multi-worker runs reproducible bit for bit.

The mixer is the splitmix64 finalizer.  The scalar and numpy paths compute
the identical chain and are tested against each other.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_MC1 = 0xBF58476D1CE4E5B9
_MC2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer; bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MC1) & MASK64
    z = ((z ^ (z >> 27)) * _MC2) & MASK64
    return z ^ (z >> 31)


def prf64(seed: int, *words: int) -> int:
    """Keyed pseudorandom function of a seed and integer words.

    Each word is absorbed through a bijective step, so distinct word tuples
    of equal length never collide trivially.  Negative words are reduced to
    their two's-complement 64-bit image.
    """
    h = mix64((seed ^ _GOLD) & MASK64)
    for w in words:
        h = mix64((h + ((w & MASK64) * _MC1)) & MASK64)
    return h


def mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MC1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MC2)
    return z ^ (z >> np.uint64(31))


def prf64_np(seed: np.ndarray, *words: "np.ndarray | int") -> np.ndarray:
    """Vectorised prf64; broadcasting counterpart of the scalar chain."""
    h = mix64_np(seed.astype(np.uint64) ^ np.uint64(_GOLD))
    for w in words:
        if isinstance(w, (int, np.integer)):
            h = mix64_np(h + np.uint64((int(w) * _MC1) & MASK64))
        else:
            h = mix64_np(h + w.astype(np.uint64) * np.uint64(_MC1))
    return h


class Stream:
    """A deterministic stream of draws keyed by integers.

    Used wherever the code needs "a fresh random number": the weighted
    insertion sampler, randomized test drivers, seed derivation in the CLI.
    """

    def __init__(self, seed: int, *key: int):
        self._seed = seed & MASK64
        self._key = tuple(k & MASK64 for k in key)
        self._ctr = 0

    def u64(self) -> int:
        v = prf64(self._seed, *self._key, self._ctr)
        self._ctr += 1
        return v

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), exact via rejection."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.u64()
            if v < limit:
                return v % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        for k in range(len(items) - 1, 0, -1):
            j = self.randrange(k + 1)
            items[k], items[j] = items[j], items[k]


def perm_from_index(idx: int, q: int) -> tuple[int, ...]:
    """Fisher-Yates permutation of [1..q] decoded from an index in [0, q!).

    The swap indices are the mixed-radix digits of ``idx``, so a uniform
    index yields a uniform permutation.
    """
    perm = list(range(1, q + 1))
    for k in range(q - 1, 0, -1):
        j = idx % (k + 1)
        idx //= k + 1
        perm[k], perm[j] = perm[j], perm[k]
    return tuple(perm)


def factorial(q: int) -> int:
    f = 1
    for i in range(2, q + 1):
        f *= i
    return f
