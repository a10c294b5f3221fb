"""Command-line front end.

Subcommands: sample (weighted-insertion or line-factor draws), exact
(rational law dumps), verify (named identity suites), tail (witness-radius
survival curves), founders (exact founder tables).  Every invocation is a
pure function of its flags: seeds are mandatory wherever randomness is
involved, rationals cross the boundary as "num/den" strings, and output
ordering is canonical so worker counts never change bytes.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 capacity
guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import factor, lab, report, wi
from .errors import CapacityError
from .pmf import format_rational
from .rng import Stream

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def _emit(out_path, text: str) -> None:
    if out_path:
        report.write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def cmd_sample(args) -> int:
    if args.q < 3:
        raise UsageError(f"need q >= 3, got q={args.q}")
    if args.model == "wi":
        if args.w <= 0:
            raise UsageError("need weight w > 0")
        if args.n < 1:
            raise UsageError("need n >= 1")
        params = wi.WiParams(args.q, args.w)
        lines = []
        for i in range(args.count):
            coloring, order = wi.sample_wi(params, args.n,
                                           Stream(args.seed, 100, i))
            lines.append(_json_line({
                "op": "sample_wi", "seed": args.seed, "index": i,
                "q": args.q, "w": format_rational(args.w), "n": args.n,
                "colors": list(coloring.colors), "ranks": list(order.ranks)}))
        _emit(args.out, "".join(lines))
        return EXIT_OK
    if args.model == "factor":
        if args.window is None:
            raise UsageError("--model factor requires --window")
        if args.format == "csv" and args.count != 1:
            raise UsageError("csv output carries one seed; use jsonl for "
                             "--count > 1")
        jlines = []
        for k in range(args.count):
            seed = args.seed + k
            wc = factor.solve_truncated(factor.SiteSource(seed, args.q),
                                        args.window)
            if args.format == "csv":
                rows = [(i, wc.color_at(i), int(wc.resolved_at(i)))
                        for i in range(-args.window, args.window + 1)]
                _emit(args.out, report.csv_text(
                    ("site", "color", "resolved"), rows))
            else:
                jlines.append(_json_line({
                    "op": "solve_truncated", "seed": seed, "q": args.q,
                    "window": args.window, "colors": list(wc.colors),
                    "resolved": [int(r) for r in wc.resolved],
                    "decided": all(wc.resolved)}))
        if args.format == "jsonl":
            _emit(args.out, "".join(jlines))
        return EXIT_OK
    # color-at
    if args.q < 4:
        raise UsageError("--model color-at needs q >= 4")
    jlines = []
    for k in range(args.count):
        seed = args.seed + k
        col = factor.color_at(factor.SiteSource(seed, args.q), args.site,
                              args.t_max)
        jlines.append(_json_line({
            "op": "color_at", "seed": seed, "site": args.site,
            "result": col, "cap": args.t_max, "decided": col is not None}))
    _emit(args.out, "".join(jlines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------

def cmd_exact(args) -> int:
    if args.kind == "coloring":
        if args.q < 3:
            raise UsageError("need q >= 3")
        pmf = wi.exact_coloring_pmf(wi.WiParams(args.q, args.w), args.n)
    else:
        pmf = wi.exact_order_pmf(args.w, args.n)
    _emit(args.out, pmf.to_json() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _suite_consistency(args, lines):
    w = args.w if args.w is not None else wi.w_star(args.q)
    expect_zero = w == wi.w_star(args.q)
    ok = True
    worst = Fraction(0)
    for n in range(2, args.n_max + 1):
        tv = lab.check_consistency(args.q, w, n)
        worst = max(worst, tv)
        if expect_zero:
            good = tv == 0
            ok &= good
            lines.append(f"{'PASS' if good else 'FAIL'} consistency q={args.q} "
                         f"w={format_rational(w)} n={n}: TV={format_rational(tv)}")
        else:
            lines.append(f"INFO consistency q={args.q} w={format_rational(w)} "
                         f"n={n}: TV={format_rational(tv)}")
    if not expect_zero:
        # away from the critical weight some restriction must disagree
        ok = worst > 0
        lines.append(f"{'PASS' if ok else 'FAIL'} violation found up to "
                     f"n={args.n_max}: worst TV={format_rational(worst)}")
    return ok, {"suite": "consistency", "q": args.q, "w": format_rational(w),
                "worst_tv": format_rational(worst)}


def _suite_kdep(args, lines):
    w = args.w if args.w is not None else wi.w_star(args.q)
    expect_zero = (w == wi.w_star(args.q)
                   and ((args.q == 4 and args.k >= 1)
                        or (args.q == 3 and args.k >= 2)))
    if expect_zero:
        rep = lab.check_k_dependence(args.q, w, args.n, args.k)
        ok = rep.max_discrepancy == 0
        lines.append(f"{'PASS' if ok else 'FAIL'} kdep q={args.q} "
                     f"w={format_rational(w)} n={args.n} k={args.k}: "
                     f"max discrepancy {format_rational(rep.max_discrepancy)}")
        return ok, rep.to_json_dict()
    rep = lab.find_dependence_violation(args.q, w, args.k, args.n)
    ok = rep is not None
    if ok:
        lines.append(f"PASS kdep violation found (expected): q={args.q} "
                     f"w={format_rational(w)} n={rep.n} k={args.k}: "
                     f"discrepancy {format_rational(rep.max_discrepancy)} "
                     f"at sets {rep.witness_sets}")
        return ok, rep.to_json_dict()
    lines.append(f"FAIL kdep: no violation found up to n={args.n} "
                 f"(one was expected for these parameters)")
    return ok, {"suite": "kdep", "violation": None}


def _suite_founders(args, lines):
    w = args.w
    ok = True
    try:
        tables = lab.founder_recurrences(w, args.n_max)
    except AssertionError as exc:
        lines.append(f"FAIL founders: {exc}")
        return False, {"suite": "founders", "error": str(exc)}
    lines.append(f"PASS founders: ends/symmetry/unimodality hold for "
                 f"n <= {args.n_max}")
    n_enum = min(8, args.n_max)
    for n in range(1, n_enum + 1):
        if tables[n].p != lab.founder_membership_by_enumeration(w, n):
            ok = False
            lines.append(f"FAIL founders: recurrence != enumeration at n={n}")
    if ok:
        lines.append(f"PASS founders: recurrence matches enumeration for "
                     f"n <= {n_enum}")
    s = tables[args.n_max].s
    lines.append(f"INFO founders: s_{args.n_max} = {format_rational(s)} "
                 f"(~{float(s):.3f})")
    return ok, {"suite": "founders", "w": format_rational(w),
                "n_max": args.n_max, "s_final": format_rational(s)}


def _suite_converge(args, lines):
    w = args.w if args.w is not None else wi.w_star(args.q)
    n_list = args.n_list
    pts = lab.convergence_coloring(args.q, w, args.m, n_list,
                                   samples=args.samples, seed=args.seed)
    ok = True
    for p in pts:
        lines.append(f"INFO converge n={p.n} mode={p.mode} TV={p.tv:.6g}"
                     + (f" samples={p.samples}" if p.samples else ""))
    exact_pts = [p for p in pts if p.mode == "exact"]
    if w == wi.w_star(args.q):
        ok = all(p.exact == 0 for p in exact_pts)
        lines.append(f"{'PASS' if ok else 'FAIL'} critical-weight windows "
                     f"are exactly stable")
    elif len(exact_pts) >= 2:
        ok = all(a.exact >= b.exact for a, b in zip(exact_pts, exact_pts[1:]))
        lines.append(f"{'PASS' if ok else 'FAIL'} exact TVs non-increasing "
                     f"along n")
    if args.plot:
        report.render_convergence_figure([p.n for p in pts],
                                         [p.tv for p in pts], args.plot)
        lines.append(f"INFO figure written to {args.plot}")
    return ok, {"suite": "converge", "q": args.q, "w": format_rational(w),
                "points": [{"n": p.n, "tv": p.tv, "mode": p.mode}
                           for p in pts]}


def _suite_markov(args, lines):
    from .orders import TotalOrder, check_markov_window, founder_positions
    stream = Stream(args.seed, 3)
    window = (2, 5)
    done = 0
    attempts = 0
    ok = True
    while done < args.trials and attempts < 200_000:
        attempts += 1
        o1 = TotalOrder.random((1, 7), stream)
        r1 = o1.restrict(window)
        if founder_positions(r1.ranks) != (0, window[1] - window[0]):
            continue
        o2 = TotalOrder.random((1, 7), stream)
        if o2.restrict(window).ranks != r1.ranks:
            continue
        tv = check_markov_window(o1, o2, window, args.q)
        if tv != 0:
            ok = False
            lines.append(f"FAIL markov: TV={format_rational(tv)} for "
                         f"{o1.ranks} vs {o2.ranks}")
        done += 1
    ok = ok and done == args.trials
    if ok:
        lines.append(f"PASS markov window: {done} matched trials, all "
                     f"exactly equal in law")
    else:
        lines.append(f"FAIL markov window ({done} of {args.trials} trials)")
    return ok, {"suite": "markov", "trials": done}


def _suite_q3count(args, lines):
    ok = True
    for k in range(args.seeds):
        got = lab.q3_solution_count(args.seed + k, args.n)
        if got != 6:
            ok = False
            lines.append(f"FAIL q3count seed={args.seed + k}: {got} != 6")
    if ok:
        lines.append(f"PASS q3count: exactly 6 window solutions for "
                     f"{args.seeds} seeds at n={args.n}")
    return ok, {"suite": "q3count", "seeds": args.seeds, "n": args.n}


_SUITES = {
    "consistency": _suite_consistency,
    "kdep": _suite_kdep,
    "founders": _suite_founders,
    "converge": _suite_converge,
    "markov": _suite_markov,
    "q3count": _suite_q3count,
}


def cmd_verify(args) -> int:
    lines: list[str] = []
    ok, summary = _SUITES[args.suite](args, lines)
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        summary["pass"] = ok
        report.write_text(args.out, json.dumps(summary, sort_keys=True,
                                               indent=2) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# tail / founders reports
# ---------------------------------------------------------------------------

def cmd_tail(args) -> int:
    if args.q < 4:
        raise UsageError("tail needs q >= 4")
    curve = _tail_parallel(args)
    rows = curve.to_csv_rows()
    text = report.csv_text(("t", "survival", "undecided"), rows)
    slope = curve.loglog_slope()
    _emit(args.out, text)
    sys.stderr.write(f"undecided mass {curve.undecided:.4f}; "
                     f"log-log slope {slope if slope is None else round(slope, 4)}\n")
    if args.plot:
        report.render_tail_figure(curve.grid, curve.survival,
                                  curve.undecided, args.plot)
    return EXIT_OK


def _tail_parallel(args) -> lab.TailCurve:
    if args.workers <= 1:
        return lab.tail_curve(args.q, args.seeds, args.t_max, seed0=args.seed)
    import multiprocessing as mp
    chunk = (args.seeds + args.workers - 1) // args.workers
    jobs = [(args.q, min(chunk, args.seeds - k * chunk), args.t_max,
             args.seed + k * chunk)
            for k in range(args.workers) if k * chunk < args.seeds]
    with mp.Pool(args.workers) as pool:
        parts = pool.starmap(_tail_chunk, jobs)
    radii = [r for part in sorted(parts, key=lambda p: p[0]) for r in part[1]]
    arr = np.array(radii, dtype=np.int64)
    grid = lab.tail_curve(args.q, 1, args.t_max, seed0=args.seed).grid
    undecided = float((arr == 0).mean())
    survival = tuple(float(((arr > t) | (arr == 0)).mean()) for t in grid)
    return lab.TailCurve(args.q, args.seeds, args.t_max, grid, survival,
                         undecided, tuple(int(r) for r in radii))


def _tail_chunk(q, seeds, t_max, seed0):
    curve = lab.tail_curve(q, seeds, t_max, seed0=seed0)
    return seed0, curve.radii


def cmd_founders(args) -> int:
    tables = lab.founder_recurrences(args.w, args.n_max, keep=[args.n_max])
    table = tables[args.n_max]
    s_series = lab.founder_sum_series(args.w, args.n_max)
    rows = [("p", args.n_max, k + 1, v, float(v))
            for k, v in enumerate(table.p)]
    rows.extend(("s", n + 1, "", v, float(v))
                for n, v in enumerate(s_series))
    text = report.csv_text(("kind", "n", "k", "exact", "value"), rows)
    _emit(args.out, text)
    if args.plot:
        report.render_founder_figure(args.n_max, table.p, s_series, args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="findep",
        description="Finitely dependent colorings: samplers, exact laws, "
                    "verification suites, reports.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw colorings")
    sp.add_argument("--model", choices=("wi", "factor", "color-at"),
                    required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--w", type=_rational, default=Fraction(1))
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--site", type=int, default=0)
    sp.add_argument("--t-max", type=int, default=1000)
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sample)

    ep = sub.add_parser("exact", help="dump exact rational laws")
    ep.add_argument("--kind", choices=("coloring", "order"),
                    default="coloring")
    ep.add_argument("--q", type=int, default=4)
    ep.add_argument("--w", type=_rational, required=True)
    ep.add_argument("--n", type=int, required=True)
    ep.add_argument("--out", default=None)
    ep.set_defaults(func=cmd_exact)

    vp = sub.add_parser("verify", help="run a named verification suite")
    vp.add_argument("suite", choices=sorted(_SUITES))
    vp.add_argument("--q", type=int, default=4)
    vp.add_argument("--w", type=_rational, default=None)
    vp.add_argument("--n", type=int, default=5)
    vp.add_argument("--n-max", type=int, default=6)
    vp.add_argument("--k", type=int, default=1)
    vp.add_argument("--m", type=int, default=1)
    vp.add_argument("--n-list", type=lambda s: [int(x) for x in s.split(",")],
                    default=[2, 4])
    vp.add_argument("--samples", type=int, default=0)
    vp.add_argument("--trials", type=int, default=5)
    vp.add_argument("--seeds", type=int, default=25)
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--out", default=None)
    vp.add_argument("--plot", default=None)
    vp.set_defaults(func=cmd_verify)

    tp = sub.add_parser("tail", help="witness radius survival curve")
    tp.add_argument("--q", type=int, default=4)
    tp.add_argument("--seeds", type=int, required=True)
    tp.add_argument("--t-max", type=int, required=True)
    tp.add_argument("--seed", type=int, required=True)
    tp.add_argument("--workers", type=int, default=1)
    tp.add_argument("--out", default=None)
    tp.add_argument("--plot", default=None)
    tp.set_defaults(func=cmd_tail)

    fp = sub.add_parser("founders", help="exact founder tables")
    fp.add_argument("--w", type=_rational, required=True)
    fp.add_argument("--n-max", type=int, required=True)
    fp.add_argument("--out", default=None)
    fp.add_argument("--plot", default=None)
    fp.set_defaults(func=cmd_founders)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors already
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
