"""Finitely dependent proper colorings of the integers.

Three layers:

* ``wi`` and ``orders``: the weighted-insertion interval model and its
  total-order combinatorics, with exact rational laws.
* ``factor``: the line construction, where each site's color is a finitary
  function of i.i.d. per-site randomness.
* ``lab``: exact identity checks and Monte Carlo experiments tying the two
  together.
"""

from .errors import CapacityError, WitnessIntegrityError
from .pmf import ExactPmf, format_rational, parse_rational, tv_distance
from .wi import (Coloring, InsertionStep, JointLaw, WiParams, enumerate_joint,
                 exact_coloring_pmf, exact_order_pmf, insertion_point_pmf,
                 proper_colorings, sample_wi, w_star)
from .orders import (DirectedGraph, NeighborMaps, TotalOrder, build_graph,
                     check_markov_window, conditional_coloring_pmf, founders,
                     neighbor_maps, to_dot)
from .factor import (LuckyWitness, MappingSource, SiteRandomness, SiteSource,
                     WindowColoring, absolute_record, coding_radius, color_at,
                     find_witness, is_lucky, scan_lr, site, solve_truncated,
                     solve_window, verify_witness)
from .rng import Stream

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "WitnessIntegrityError",
    "ExactPmf", "format_rational", "parse_rational", "tv_distance",
    "Coloring", "InsertionStep", "JointLaw", "WiParams", "enumerate_joint",
    "exact_coloring_pmf", "exact_order_pmf", "insertion_point_pmf",
    "proper_colorings", "sample_wi", "w_star",
    "DirectedGraph", "NeighborMaps", "TotalOrder", "build_graph",
    "check_markov_window", "conditional_coloring_pmf", "founders",
    "neighbor_maps", "to_dot",
    "LuckyWitness", "MappingSource", "SiteRandomness", "SiteSource",
    "WindowColoring", "absolute_record", "coding_radius", "color_at",
    "find_witness", "is_lucky", "scan_lr", "site", "solve_truncated",
    "solve_window", "verify_witness",
    "Stream",
    "__version__",
]
