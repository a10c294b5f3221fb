"""Delimited output and figure rendering for the CLI report paths.

CSV writers keep exact rationals as "num/den" strings and emit LF line
endings unconditionally, so identical inputs produce identical bytes.
Figures are a side channel for the same data: each render_* function takes
the rows a command just wrote and draws them to an image file.
"""

from __future__ import annotations

import io
from fractions import Fraction
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(x) for x in row) + "\n")
    return buf.getvalue()


def _cell(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def render_tail_figure(grid: Sequence[int], survival: Sequence[float],
                       undecided: float, path: str) -> None:
    """Log-log survival of the minimal witness radius."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(grid, survival, marker="o", lw=1.2, label="radius survival")
    ax.axhline(undecided, color="gray", ls="--", lw=0.8,
               label=f"undecided mass {undecided:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("fraction with radius > t")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_founder_figure(n: int, p_row: Sequence[Fraction],
                          s_series: Sequence[Fraction], path: str) -> None:
    """Final founder-membership profile plus the expected-count growth."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.semilogy(range(1, n + 1), [float(v) for v in p_row], lw=1.0)
    ax1.set_xlabel("position k")
    ax1.set_ylabel(f"P(k is a founder), n={n}")
    ns = np.arange(1, len(s_series) + 1)
    ax2.plot(ns, [float(v) for v in s_series], lw=1.0, label="expected founders")
    guide = [float(s_series[-1]) * np.log(x) / np.log(len(s_series))
             for x in ns]
    ax2.plot(ns, guide, ls="--", lw=0.8, color="gray", label="c log n guide")
    ax2.set_xscale("log")
    ax2.set_xlabel("interval length n")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_convergence_figure(ns: Sequence[int], tvs: Sequence[float],
                              path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, tvs, marker="o", lw=1.2)
    ax.set_xlabel("half-width n")
    ax.set_ylabel("TV to the critical-window law")
    ax.set_yscale("log" if all(v > 0 for v in tvs) else "linear")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
