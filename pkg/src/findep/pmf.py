"""Exact rational probability tables.

Keys are tuples of small integers: a coloring is the tuple of colors along
its interval, a total order is the tuple of ranks.  Masses are
``fractions.Fraction`` throughout; no float ever enters an identity check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def parse_rational(s: str) -> Fraction:
    """Parse "num/den" (or a bare integer string) into an exact Fraction."""
    f = Fraction(s)
    return f


def format_rational(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def coloring_key(colors: tuple[int, ...]) -> str:
    """Canonical key: one base-q digit per site, color c encoded as c-1."""
    return "".join(_DIGITS[c - 1] for c in colors)


def parse_coloring_key(key: str) -> tuple[int, ...]:
    return tuple(_DIGITS.index(ch) + 1 for ch in key)


def order_key(ranks: tuple[int, ...]) -> str:
    """Canonical key for a total order: comma-joined rank vector."""
    return ",".join(str(r) for r in ranks)


def parse_order_key(key: str) -> tuple[int, ...]:
    return tuple(int(p) for p in key.split(","))


@dataclass(frozen=True)
class ExactPmf:
    """A finite exact distribution over colorings or total orders.

    ``kind`` is "coloring" or "order"; ``interval`` the integer interval the
    keys live on.  ``q``/``w`` record the parameters the table was built
    from, where applicable.  Masses must sum to exactly 1.
    """

    kind: str
    interval: tuple[int, int]
    mass: Mapping[tuple[int, ...], Fraction]
    q: int | None = None
    w: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("coloring", "order"):
            raise ValueError(f"unknown pmf kind {self.kind!r}")
        total = sum(self.mass.values())
        if total != 1:
            raise ValueError(f"masses sum to {total}, not 1")
        if any(m < 0 for m in self.mass.values()):
            raise ValueError("negative mass")

    def __len__(self) -> int:
        return len(self.mass)

    def support(self):
        return self.mass.keys()

    def mass_of(self, key: tuple[int, ...]) -> Fraction:
        return self.mass.get(tuple(key), Fraction(0))

    def tv(self, other: "ExactPmf") -> Fraction:
        if self.kind != other.kind:
            raise ValueError("cannot compare pmfs of different kinds")
        return tv_distance(self.mass, other.mass)

    def pushforward(self, keymap: Callable, kind: str | None = None,
                    interval: tuple[int, int] | None = None) -> "ExactPmf":
        """Image distribution under a key mapping (marginalization etc.)."""
        out: dict = {}
        for k, m in self.mass.items():
            nk = keymap(k)
            out[nk] = out.get(nk, Fraction(0)) + m
        return ExactPmf(kind=kind or self.kind,
                        interval=interval or self.interval,
                        mass=out, q=self.q, w=self.w)

    def restrict_coloring(self, window: tuple[int, int]) -> "ExactPmf":
        """Marginal of a coloring pmf on a subinterval."""
        a, b = self.interval
        lo, hi = window
        if not (a <= lo <= hi <= b):
            raise ValueError(f"window {window} not inside {self.interval}")
        i, j = lo - a, hi - a + 1
        return self.pushforward(lambda k: k[i:j], interval=window)

    def _key_str(self, key: tuple[int, ...]) -> str:
        return coloring_key(key) if self.kind == "coloring" else order_key(key)

    def to_json_dict(self) -> dict:
        entries = sorted((self._key_str(k), format_rational(m))
                         for k, m in self.mass.items())
        return {
            "kind": self.kind,
            "interval": list(self.interval),
            "q": self.q,
            "w": format_rational(self.w) if self.w is not None else None,
            "entries": [{"key": k, "mass": m} for k, m in entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ": "))

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExactPmf":
        kind = d["kind"]
        parse = parse_coloring_key if kind == "coloring" else parse_order_key
        mass = {parse(e["key"]): parse_rational(e["mass"]) for e in d["entries"]}
        w = parse_rational(d["w"]) if d.get("w") is not None else None
        return cls(kind=kind, interval=tuple(d["interval"]), mass=mass,
                   q=d.get("q"), w=w)


def tv_distance(p: Mapping, q: Mapping) -> Fraction:
    """Exact total variation distance between two mass mappings."""
    keys = set(p) | set(q)
    zero = Fraction(0)
    return sum((abs(p.get(k, zero) - q.get(k, zero)) for k in keys), zero) / 2
