"""Command line interface: ``concordia <subcommand> ...``.

Exit codes: 0 success, 1 a requested check failed, 2 malformed input,
3 sample smaller than ``n_A``, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

import numpy as np

from ._jsonfmt import dumps, format_float
from .biconvex import BiconvexConvergenceError, biconvex_form
from .concordance import NotGammaInvariant
from .copulas import InvalidCopulaError
from .estimator import SampleSizeNotFound, SampleTooSmall, estimate, minimal_sample_size
from .group import invariance_defect, subgroup
from .ranks import Sample
from .simulation import StudyConfig, UnsupportedCopula, run_study, sample_copula, write_report
from .specs import SpecError, load_copula, resolve_generator

log = logging.getLogger("concordia")

EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_TOO_SMALL = 3
EXIT_NUMERIC = 4


class CsvFormatError(ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_row(cells):
    values = [float(c) for c in cells]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("non-finite value")
    return values


def read_pairs(path):
    """Read a two-column numeric CSV with an optional header row into an ``(n, 2)`` array."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != 2:
                raise CsvFormatError(lineno, f"expected 2 columns, found {len(cells)}")
            try:
                rows.append(_parse_row(cells))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise CsvFormatError(lineno, f"non-numeric or non-finite value in {cells!r}") from None
    if len(rows) < 2:
        raise CsvFormatError(0, f"need at least 2 data rows, found {len(rows)}")
    return np.array(rows)


def write_pairs(sample, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2"])
        for a, b in sample.rows.T:
            writer.writerow([format_float(a), format_float(b)])


def _emit(payload, args):
    if getattr(args, "format", "json") == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        keys = sorted(flat)
        text = ",".join(keys) + "\n" + ",".join(
            format_float(flat[k]) if isinstance(flat[k], float) else str(flat[k]) for k in keys
        )
    else:
        text = dumps(payload)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_estimate(args):
    X = read_pairs(args.input)
    g = resolve_generator(args.generator)
    report = estimate(Sample(X.T), g)
    payload = {"schema": "concordia/estimate-report", "version": 1, **report.to_dict()}
    _emit(payload, args)
    return 0


def cmd_exact(args):
    C = load_copula(args.copula)
    g = resolve_generator(args.generator)
    result = biconvex_form(C, g.copula, args.resolution)
    value = (result.value - 0.25) / (g.m_form - 0.25)
    payload = {
        "schema": "concordia/exact-report",
        "version": 1,
        "generator": g.name,
        "kappa": value,
        "biconvex": result.value,
        "method": result.method,
        "resolution_used": result.resolution_used,
        "est_error": result.est_error,
    }
    _emit(payload, args)
    return 0


def cmd_check(args):
    C = load_copula(args.copula)
    S = subgroup(args.subgroup)
    deviation, g, point = invariance_defect(C, S, args.resolution)
    invariant = deviation <= args.tol
    payload = {
        "schema": "concordia/check-report",
        "version": 1,
        "subgroup": S.name,
        "invariant": invariant,
        "max_deviation": deviation,
        "witness_element": g.name,
        "witness_point": list(point) if point is not None else None,
        "tol": args.tol,
    }
    _emit(payload, args)
    return 0 if invariant else EXIT_CHECK_FAILED


def cmd_na(args):
    g = resolve_generator(args.generator)
    n_A = minimal_sample_size(g.copula, args.n_max)
    _emit({"schema": "concordia/na-report", "version": 1, "generator": g.name, "n_A": n_A}, args)
    return 0


def cmd_study(args):
    cfg = StudyConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_study(cfg)
    out = args.out or cfg.output
    if out:
        write_report(report, out)
        log.info("study report written to %s", out)
    else:
        print(dumps(report))
    return 0


def cmd_sample(args):
    C = load_copula(args.copula)
    write_pairs(sample_copula(C, args.n, args.seed), args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="concordia", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="write the report here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("estimate", help="estimate kappa_A from a two-column CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--generator", default="spearman")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="population value kappa_A[C] of a copula")
    p.add_argument("--copula", required=True, help="copula spec file or one of M, W, Pi, E")
    p.add_argument("--generator", default="spearman")
    p.add_argument("--resolution", type=int, default=16, help="starting lattice resolution")
    common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("check", help="test a copula for invariance under a subgroup")
    p.add_argument("--copula", required=True)
    p.add_argument("--subgroup", default="Gamma")
    p.add_argument("--resolution", type=int, default=101, help="lattice points per axis")
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("na", help="minimal sample size n_A of a generator")
    p.add_argument("--generator", required=True)
    p.add_argument("--n-max", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_na)

    p = sub.add_parser("study", help="run a Monte Carlo consistency study")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    common(p, fmt=False)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("sample", help="write a sample drawn from a copula as CSV")
    p.add_argument("--copula", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SampleTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_SMALL
    except (CsvFormatError, SpecError, InvalidCopulaError, NotGammaInvariant, UnsupportedCopula, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (BiconvexConvergenceError, SampleSizeNotFound, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
