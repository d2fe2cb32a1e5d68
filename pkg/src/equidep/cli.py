"""Command-line interface: ``equidep <subcommand> [flags]``.

Subcommands
-----------
measure     dependence measures of a two-column CSV
gen         synthetic samples (mixture, regression, gaussian, hardpair)
scan        all-pairs scan of a table with missing values
simulate    power curves or the equitability experiment
oracle      population measures of a gridded copula density

Statistics are printed with six significant digits. Generated samples are
written at full precision so that no ties are introduced.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .copula_core import Sample
from .errors import InvalidInputError
from .infer import DEFAULT_NOISE_GRID, equitability_experiment, power_curves
from .measures import ALL_KINDS, compute_measures
from .plot import lines_svg, scatter_svg
from .scan import DEFAULT_MIN_N, fmt, load_table, rank_nonlinear, scan, write_scan_csv
from .synth import (
    CDF_ORACLE_KINDS,
    DENSITY_ORACLE_KINDS,
    RELATIONSHIP_IDS,
    SIX_CURVES,
    GridDensity,
    HardPairSpec,
    MixtureSpec,
    block_diagonal_density,
    gen_gaussian_copula,
    gen_hard_pair,
    gen_mixture,
    gen_regression,
    mixture_density,
    population_measure,
    table_row_density,
)

SEED_ENV = "EQUIDEP_SEED"
DEFAULT_SEED = 0


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _kinds(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in ALL_KINDS]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown kind(s) {', '.join(bad)}; choose from {', '.join(ALL_KINDS)}"
        )
    if not kinds:
        raise argparse.ArgumentTypeError("no measure kinds given")
    return kinds


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fraction(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _fractions(text: str) -> list[float]:
    try:
        return [_fraction(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers or a/b, got {text!r}") from None


def _noise_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count``."""
    if ":" in text:
        try:
            start, stop, count = text.split(":")
            return [float(x) for x in np.linspace(float(start), float(stop), int(count))]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None
    return _floats(text)


def _measure_params(args) -> dict:
    params = {}
    for name, attr in (("h", "bandwidth"), ("g_cells", "grid"), ("k", "k"), ("alpha", "alpha")):
        value = getattr(args, attr, None)
        if value is not None:
            params[name] = value
    return params


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _emit(text: str, path: str | None) -> None:
    out, close = _open_out(path)
    try:
        out.write(text)
    finally:
        if close:
            out.close()


def _write_plot(path: str | None, svg: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)


# -- subcommands ------------------------------------------------------------------


def _read_pair(path: str, columns: str | None, delimiter: str) -> Sample:
    table = load_table(path, delimiter=delimiter)
    if columns:
        names = [c.strip() for c in columns.split(",")]
        if len(names) != 2:
            raise InvalidInputError("--columns needs exactly two names")
        missing = [n for n in names if n not in table.names]
        if missing:
            raise InvalidInputError(f"column(s) not found: {', '.join(missing)}")
        x, y = table.column(names[0]), table.column(names[1])
    else:
        x, y = table.columns[0], table.columns[1]
    keep = ~(np.isnan(x) | np.isnan(y))
    return Sample(x[keep], y[keep])


def cmd_measure(args) -> int:
    sample = _read_pair(args.input, args.columns, args.delimiter)
    kinds = args.kinds or [args.kind]
    values = compute_measures(sample, kinds, **_measure_params(args))
    if len(kinds) == 1 and args.kinds is None:
        _emit(fmt(values[kinds[0]]) + "\n", args.output)
    else:
        _emit("".join(f"{k},{fmt(values[k])}\n" for k in kinds), args.output)
    return 0


def cmd_gen(args) -> int:
    if args.family == "mixture":
        sample = gen_mixture(MixtureSpec(args.rel, args.p), args.n, args.seed, fixed_count=args.fixed_count)
    elif args.family == "regression":
        sample = gen_regression(args.rel, args.noise_sd, args.n, args.seed)
    elif args.family == "gaussian":
        sample = gen_gaussian_copula(args.rho, args.n, args.seed)
    else:
        spec = HardPairSpec(args.a, args.delta, args.m_low, args.m_high, args.epsilon, args.variant)
        sample = gen_hard_pair(spec, args.n, args.seed)
    buf = io.StringIO()
    buf.write("x,y\n")
    for x, y in zip(sample.xs.tolist(), sample.ys.tolist()):
        buf.write(f"{x!r},{y!r}\n")
    _emit(buf.getvalue(), args.output)
    _write_plot(args.plot, scatter_svg(sample.xs, sample.ys, f"{args.family} n={args.n}"))
    return 0


def cmd_scan(args) -> int:
    table = load_table(args.input, delimiter=args.delimiter)
    summary = scan(table, args.kinds, args.min_n, args.workers, **_measure_params(args))
    rows = summary.rows
    if args.top_k is not None:
        rows = rank_nonlinear(rows, args.top_k)
    out, close = _open_out(args.output)
    try:
        write_scan_csv(rows, summary.kinds, out)
    finally:
        if close:
            out.close()
    print(
        f"pairs={summary.n_pairs} retained={len(summary.rows)} skipped={summary.skipped} "
        f"constant={summary.constant}",
        file=sys.stderr,
    )
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.plot and summary.rows:
        _write_plot(
            args.plot,
            scatter_svg(
                [abs(r.measures["pearson"]) for r in summary.rows],
                [r.measures["ccor"] for r in summary.rows],
                "pairwise scan", "|pearson|", "ccor",
            ),
        )
    return 0


def cmd_power(args) -> int:
    kinds = args.kinds or [args.kind]
    curves = power_curves(
        kinds, args.rel, args.noise_grid, n=args.n, n_sims=args.n_sims, n_perm=args.n_perm,
        seed=args.seed, level=args.level, workers=args.workers, **_measure_params(args),
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "relationship", "noise_sd", "power", "cutoff"])
    for k in kinds:
        for pt in curves[k]:
            writer.writerow([k, args.rel, fmt(pt.noise_sd), fmt(pt.power), fmt(pt.cutoff)])
    _emit(buf.getvalue(), args.output)
    if args.plot:
        series = {k: ([p.noise_sd for p in c], [p.power for p in c]) for k, c in curves.items()}
        _write_plot(args.plot, lines_svg(series, f"power, {args.rel}, n={args.n}", "noise sd", "power"))
    return 0


def cmd_equitability(args) -> int:
    reports = equitability_experiment(
        args.kinds, args.noise_props, args.sizes, args.reps, args.seed,
        workers=args.workers, **_measure_params(args),
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if args.details:
        writer.writerow(["kind", "relationship", "noise_prop", "n", "rep", "value"])
        for rep in reports:
            for v in rep.values:
                writer.writerow([rep.kind, v.relationship, fmt(v.noise_prop), v.n, v.rep, fmt(v.value)])
    else:
        writer.writerow(["kind", "separation_auc"])
        for rep in reports:
            writer.writerow([rep.kind, fmt(rep.separation_auc)])
    _emit(buf.getvalue(), args.output)
    if args.plot:
        first = reports[0]
        _write_plot(
            args.plot,
            scatter_svg([v.noise_prop for v in first.values], [v.value for v in first.values],
                        f"{first.kind} by noise proportion", "noise proportion", first.kind),
        )
    return 0


def _load_grid(path: str) -> GridDensity:
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: cannot read a numeric grid ({exc})") from None
    return GridDensity(values)


def cmd_oracle(args) -> int:
    if args.input:
        density = _load_grid(args.input)
    elif args.example:
        density = table_row_density(args.example, args.grid or 512)
    else:
        g = args.grid or 512
        density = mixture_density(args.p, block_diagonal_density(g, g))
    kinds = args.kinds or list(DENSITY_ORACLE_KINDS + CDF_ORACLE_KINDS)
    lines = [f"{k},{fmt(population_measure(density, k, args.alpha))}\n" for k in kinds]
    _emit("".join(lines), args.output)
    return 0


# -- parser -------------------------------------------------------------------------


def _oracle_kinds(text: str) -> list[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    allowed = DENSITY_ORACLE_KINDS + CDF_ORACLE_KINDS
    bad = [k for k in kinds if k not in allowed]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown kind(s) {', '.join(bad)}; choose from {', '.join(allowed)}")
    return kinds


def _add_common(p: argparse.ArgumentParser, seed: bool = False, workers: bool = False) -> None:
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    if seed:
        p.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    if workers:
        p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")


def _add_estimator(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bandwidth", type=float, help="kernel half-width h (default 0.25 n^-1/4)")
    p.add_argument("--grid", type=int, help="lattice cells per axis (default max(100, ceil(4/h)))")
    p.add_argument("--k", type=int, help="KSG neighbour count (default 3)")
    p.add_argument("--alpha", type=float, help="exponent for cd / tsallis")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equidep", description="Copula correlation and dependence measures.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="measures of a two-column CSV")
    p.add_argument("--input", "-i", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--kind", default="ccor", choices=ALL_KINDS)
    group.add_argument("--kinds", type=_kinds, help="comma-separated kinds; prints kind,value lines")
    p.add_argument("--columns", help="two column names (default: first two columns)")
    p.add_argument("--delimiter", default=",")
    _add_estimator(p)
    _add_common(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("gen", help="synthetic samples as x,y CSV")
    gsub = p.add_subparsers(dest="family", required=True)
    for family in ("mixture", "regression", "gaussian", "hardpair"):
        q = gsub.add_parser(family)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--plot", help="write an SVG scatter plot here")
        _add_common(q, seed=True)
        if family == "mixture":
            q.add_argument("--rel", required=True, choices=[r for r in RELATIONSHIP_IDS if r != "four_clouds"])
            q.add_argument("--p", type=_fraction, required=True, help="proportion on the curve")
            q.add_argument("--fixed-count", action="store_true", help="exactly round(p n) curve points")
        elif family == "regression":
            q.add_argument("--rel", required=True, choices=RELATIONSHIP_IDS)
            q.add_argument("--noise-sd", type=float, default=0.0)
        elif family == "gaussian":
            q.add_argument("--rho", type=float, required=True)
        else:
            q.add_argument("--a", type=float, default=0.1)
            q.add_argument("--delta", type=float, default=0.05)
            q.add_argument("--m-low", type=float, default=2.0)
            q.add_argument("--m-high", type=float, default=float(np.exp(100.0)))
            q.add_argument("--epsilon", type=float, default=0.01)
            q.add_argument("--variant", choices=("c1", "c2"), default="c1")
        q.set_defaults(func=cmd_gen)

    p = sub.add_parser("scan", help="all-pairs scan of a table")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--kinds", type=_kinds, default=["ccor", "pearson"])
    p.add_argument("--min-n", type=int, default=DEFAULT_MIN_N)
    p.add_argument("--top-k", type=int, help="keep the top rows by ccor - |pearson|")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--plot", help="write an SVG of ccor against |pearson|")
    _add_estimator(p)
    _add_common(p, workers=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    ssub = p.add_subparsers(dest="experiment", required=True)
    q = ssub.add_parser("power", help="power curve over noise levels")
    group = q.add_mutually_exclusive_group()
    group.add_argument("--kind", default="ccor", choices=ALL_KINDS)
    group.add_argument("--kinds", type=_kinds)
    q.add_argument("--rel", required=True, choices=RELATIONSHIP_IDS)
    q.add_argument("--noise-grid", type=_noise_grid, default=list(DEFAULT_NOISE_GRID),
                   help="a,b,c or start:stop:count (default 0.05:1.5:30)")
    q.add_argument("--noise-sd", type=float, help="single noise level (overrides --noise-grid)")
    q.add_argument("--n", type=int, default=320)
    q.add_argument("--n-sims", type=int, default=500)
    q.add_argument("--n-perm", type=int, default=1000)
    q.add_argument("--level", type=float, default=0.05)
    q.add_argument("--plot", help="write an SVG of the power curves")
    _add_estimator(q)
    _add_common(q, seed=True, workers=True)
    q.set_defaults(func=cmd_power)

    q = ssub.add_parser("equitability", help="noise-level separation of mixture datasets")
    q.add_argument("--kinds", type=_kinds, default=["ccor", "pearson", "dcor"])
    q.add_argument("--noise-props", type=_fractions, default=[1 / 3, 2 / 3])
    q.add_argument("--sizes", type=_ints, default=[200, 2000])
    q.add_argument("--reps", type=int, default=1)
    q.add_argument("--details", action="store_true", help="one row per dataset instead of per kind")
    q.add_argument("--plot", help="write an SVG of the first kind's values")
    _add_estimator(q)
    _add_common(q, seed=True, workers=True)
    q.set_defaults(func=cmd_equitability)

    p = sub.add_parser("oracle", help="population measures of a copula density")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", "-i", help="CSV of a G x G density grid (rows index u)")
    src.add_argument("--example", choices=("D", "E", "F"), help="built-in block-diagonal examples")
    src.add_argument("--p", type=_fraction, default=None,
                     help="mixture p*M + (1-p)*independence (default when no source is given: p=1)")
    p.add_argument("--kinds", type=_oracle_kinds)
    p.add_argument("--grid", type=int, help="grid size for built-in densities (default 512)")
    p.add_argument("--alpha", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        if getattr(args, "noise_sd", None) is not None and hasattr(args, "noise_grid"):
            args.noise_grid = [args.noise_sd]
        if args.command == "oracle" and args.p is None:
            args.p = 1.0
        return args.func(args)
    except (InvalidInputError, OSError) as exc:
        print(f"equidep: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
