"""Command-line front end.

    popuc spectrum PARAMS [--zeta Z]
    popuc validate [N TRIALS SEED]
    popuc classify --family table1|hypergeom|file:PATH --t START:END:STEP
    popuc track    --family ... --t START:END:STEP [--format csv|svg --out PATH]
    popuc repro    table1|hypergeom

Exit codes: 0 ok, 1 acceptance failure, 2 input error, 3 family error,
4 tracking fault.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import formats as fmt
from .errors import (
    ConstructionFault,
    ConvergenceError,
    FamilyError,
    ParameterError,
    PopucError,
    SpectrumCollisionError,
    TrackingError,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_FAMILY, EXIT_TRACKING = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


# -- argument helpers ------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``start:end:step`` (end included when reached within 1e-9 steps)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"range must be start:end:step, got {text!r}")
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError:
        raise InputError(f"range must be numeric, got {text!r}") from None
    if not all(math.isfinite(v) for v in (start, end, step)):
        raise InputError("range values must be finite")
    if end < start:
        raise InputError(f"empty range {text!r}")
    if start == end:
        return np.array([start])
    if not step > 0:
        raise InputError("step must be positive")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    if count > 1_000_000:
        raise InputError("range has too many points")
    return start + step * np.arange(count)


def _complex_arg(text: Optional[str]) -> Optional[complex]:
    if text is None:
        return None
    try:
        return fmt.parse_complex(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def build_family(args):
    from .families import HypergeometricFamily, Table1Family, tabulated_family

    sel = args.family
    if sel == "table1":
        return Table1Family(args.n if args.n is not None else 5)
    if sel == "hypergeom":
        return HypergeometricFamily(args.a if args.a is not None else 1.0, args.n if args.n is not None else 5)
    if sel.startswith("file:"):
        path = Path(sel[5:])
        if not path.is_file():
            raise InputError(f"no such file: {path}")
        return tabulated_family(path)
    raise InputError(f"unknown family {sel!r}")


def _apply_zeta(family, zeta):
    if zeta is None:
        return
    if family.kind != "schur":
        raise InputError("--zeta applies to schur families only")
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise InputError("--zeta must lie on the unit circle")
    family.with_zeta(zeta)


def _emit(text: str, out: Optional[str]):
    if out:
        fmt.write_atomic(out, text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------


def cmd_spectrum(args) -> int:
    from .schur import build_hessenberg, popuc_zeros, recover_parameters, unitarity_residual
    from .tridiag import cot_identity_residual, default_zeta, system_for

    try:
        params = fmt.read_parameters(args.params)
    except OSError as exc:
        raise InputError(f"cannot read {args.params}: {exc}") from None
    zeta = _complex_arg(args.zeta)
    zs = popuc_zeros(params)
    if zeta is None:
        zeta = default_zeta(zs.eigenvalues)
    elif float(np.min(np.abs(zs.eigenvalues - zeta))) < 1e-10:
        raise InputError("--zeta lies on the spectrum; choose another point")
    system = system_for(params, zeta)
    G = build_hessenberg(params).matrix
    back = recover_parameters(G)
    rows = []
    for k, (ang, eta) in enumerate(zip(zs.angles, zs.eigenvalues), 1):
        rows.append((k, float(ang), float(eta.real), float(eta.imag), float(abs(abs(eta) - 1.0)),
                     float(cot_identity_residual(system, eta))))
    header = ("k", "theta", "re", "im", "modulus_error", "residual")
    body = fmt.csv_text(header, rows) if args.format == "csv" else fmt.aligned_table(header, rows)
    notes = [
        f"# zeta: {fmt.format_complex(zeta, 9)}",
        f"# unitarity: {unitarity_residual(G):.3e}",
        f"# round_trip: {max(np.max(np.abs(back.alphas - params.alphas)), abs(back.tau - params.tau)):.3e}",
    ]
    _emit(body + "\n".join(notes) + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import replay_text, run_suite, THRESHOLDS

    n, trials, seed = args.n, args.trials, args.seed
    if args.positional:
        if len(args.positional) != 3:
            raise InputError("validate takes N TRIALS SEED")
        try:
            n, trials, seed = (int(v) for v in args.positional)
        except ValueError:
            raise InputError("N TRIALS SEED must be integers") from None
    n = 8 if n is None else n
    seed = 0 if seed is None else seed
    if n < 1 or trials < 1:
        raise InputError("need n >= 1 and trials >= 1")
    rep = run_suite(trials, seed, n=n, corrupt=args.inject_corrupt_beta)
    worst = rep.worst
    rows = []
    for name, (thr, upper) in THRESHOLDS.items():
        v = worst.get(name, float("nan"))
        ok = (v <= thr) if upper else (v >= thr)
        rows.append((name, f"{v:.3e}", ("<= " if upper else ">= ") + f"{thr:g}", "pass" if ok else "FAIL"))
    out = fmt.aligned_table(("check", "worst", "threshold", "status"), rows)
    sys.stdout.write(out)
    bad = rep.first_failure
    if bad is None:
        sys.stdout.write(f"all {trials} instances passed (n={n}, seed={seed})\n")
        return EXIT_OK
    k = rep.reports.index(bad)
    path = Path(args.out) if args.out else Path(f"popuc-replay-n{n}-seed{seed}-{k}.txt")
    fmt.write_atomic(path, replay_text(bad))
    sys.stdout.write(f"instance {k} failed ({', '.join(bad.failures)}); replay written to {path}\n")
    return EXIT_FAIL


def _path_rows(report, path):
    rows = []
    for k, t in enumerate(report.grid):
        pc = report.points[k]
        angs = [float(a) for a in path.angles[:, k]] if path is not None else []
        rows.append([float(t)] + angs + [pc.label, pc.prediction, report.observed_at(k)])
    return rows


def _path_header(m):
    return ["t"] + [f"theta_{i}" for i in range(1, m + 1)] + ["classification", "predicted", "observed"]


def _scan(args, track: bool):
    from .monotone import scan_intervals

    grid = parse_range(args.t)
    family = build_family(args)
    _apply_zeta(family, _complex_arg(args.zeta))
    tol = args.tol if args.tol is not None else 1e-6
    if not tol > 0:
        raise InputError("--tol must be positive")
    return family, scan_intervals(family, grid, refine_tol=tol, track=track)


def _svg(report, family, out: Optional[str]):
    from .plotting import path_svg

    if report.path is None:
        raise InputError("svg output needs at least two grid points")
    shade = [(iv.start, iv.end) for iv in report.intervals if iv.predicted is None]
    data = path_svg(report.path, title=family.name, shade=shade)
    if not out:
        raise InputError("--format svg needs --out PATH")
    out = Path(out)
    fmt.write_atomic(out.with_suffix(".csv"), fmt.csv_text(_path_header(report.path.angles.shape[0]),
                                                          _path_rows(report, report.path)))
    fmt.write_atomic(out, data, binary=True)


def cmd_classify(args) -> int:
    family, rep = _scan(args, track=True)
    if rep.grid.size == 1:
        pc = rep.points[0]
        header = ("t", "classification", "predicted", "rule")
        rows = [(float(pc.t), pc.label, pc.prediction, pc.rule)]
    else:
        header = ("start", "end", "classification", "predicted", "observed", "agrees")
        rows = []
        for iv in rep.intervals:
            agree = "-" if iv.agrees is None else ("yes" if iv.agrees else "no")
            rows.append((float(iv.start), float(iv.end), iv.label, iv.predicted or "unclassified", iv.observed, agree))
    if args.format == "svg":
        _svg(rep, family, args.out)
        sys.stdout.write(fmt.aligned_table(header, rows))
    else:
        text = fmt.csv_text(header, rows) if args.format == "csv" else fmt.aligned_table(header, rows)
        if rep.notes and args.format != "csv":
            text += "".join(f"# {note}\n" for note in rep.notes)
        _emit(text, args.out)
    disagree = [iv for iv in rep.intervals if iv.agrees is False]
    if disagree:
        sys.stderr.write(f"{len(disagree)} predicted interval(s) disagree with tracked motion\n")
        return EXIT_FAIL
    return EXIT_OK


def cmd_track(args) -> int:
    family, rep = _scan(args, track=True)
    if rep.path is None:
        raise InputError("tracking needs at least two grid points")
    if args.format == "svg":
        _svg(rep, family, args.out)
        return EXIT_OK
    header = _path_header(rep.path.angles.shape[0])
    rows = _path_rows(rep, rep.path)
    text = fmt.csv_text(header, rows) if args.format != "table" else fmt.aligned_table(header, rows)
    _emit(text, args.out)
    return EXIT_OK


def repro_table1(slack: float = 1e-9):
    """Rows of (t, label, expected label, computed, printed, max deviation, ok)."""
    from .families import Table1Family
    from .monotone import classify_matrix_point
    from .reference import TABLE1, TABLE1_N, printed_tolerance
    from .schur import normalize_angle

    fam = Table1Family(TABLE1_N)
    out = []
    for label, t, printed in TABLE1:
        got = np.sort(normalize_angle(fam.spectrum(t)))
        dev = [abs(g - float(p)) for g, p in zip(got, printed)]
        ok_vals = all(d <= printed_tolerance(p, slack) for d, p in zip(dev, printed))
        pc = classify_matrix_point(fam, t)
        ok_label = (pc.predicted is None) if label is None else (pc.label == label and pc.predicted is not None)
        out.append((t, pc.label, label, got, printed, max(dev), ok_vals and ok_label))
    return out


def repro_hypergeom():
    from .families import HypergeometricFamily
    from .matching import circular_match_error
    from .monotone import scan_intervals
    from .tridiag import p_zeros

    grid = np.round(np.arange(0, 101) * 0.1, 12)
    out = []
    for a in (0.5, 1.0, 2.5):
        for n in (2, 5):
            fam = HypergeometricFamily(a, n)
            rep = scan_intervals(fam, grid)
            step = float(np.max(rep.path.steps()))
            err = max(circular_match_error(p_zeros(fam.beta(b)), fam.zeros(b)) for b in grid)
            labels = sorted({p.label for p in rep.points})
            ok = step < 0 and labels == ["I0-"] and all(p.predicted == "clockwise" for p in rep.points) and err <= 1e-8
            out.append((a, n + 1, step, ",".join(labels), err, ok))
    return out


def cmd_repro(args) -> int:
    slack = args.tol if args.tol is not None else 1e-9
    if args.target == "table1":
        rows = []
        worst = 0.0
        ok = True
        for t, lab, expected, got, printed, dev, good in repro_table1(slack):
            worst = max(worst, dev)
            ok &= good
            rows.append([float(t), lab, expected or "unclassified"] + [f"{g:.6f}" for g in got]
                        + [" ".join(printed), f"{dev:.2e}", "ok" if good else "MISMATCH"])
        header = ["t", "classification", "expected", "theta_1", "theta_2", "theta_3", "theta_4", "theta_5",
                  "printed", "max_dev", "status"]
        text = fmt.csv_text(header, rows) if args.format == "csv" else fmt.aligned_table(header, rows)
        text += f"# max deviation {worst:.3e}; {'all rows within printed precision' if ok else 'MISMATCH'}\n"
    else:
        res = repro_hypergeom()
        ok = all(r[-1] for r in res)
        header = ("a", "degree", "max_step", "labels", "beta_r_error", "status")
        rows = [(a, d, f"{s:.3e}", lab, f"{e:.1e}", "ok" if g else "FAIL") for a, d, s, lab, e, g in res]
        text = fmt.csv_text(header, rows) if args.format == "csv" else fmt.aligned_table(header, rows)
        text += f"# zeros move strictly clockwise for every case: {'yes' if ok else 'NO'}\n"
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ----------------------------------------------------------------


def _common(p, family=True):
    if family:
        p.add_argument("--family", default="table1", help="table1 | hypergeom | file:PATH")
        p.add_argument("--n", type=int, default=None, help="order (table1) or degree - 1 (hypergeom)")
        p.add_argument("--a", type=float, default=None, help="hypergeometric parameter a > 0")
        p.add_argument("--t", default=None, required=True, help="start:end:step")
        p.add_argument("--zeta", default=None, help="fixed zeta for schur families, re+imi")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output path (written atomically)")
    p.add_argument("--format", choices=("csv", "table", "svg"), default="table")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="popuc", description="POPUC zeros and their motion along parameter families.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="zeros of the POPUC of a parameter file")
    p.add_argument("params")
    p.add_argument("--zeta", default=None)
    _common(p, family=False)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("validate", help="property suite on random Schur parameters")
    p.add_argument("positional", nargs="*", metavar="N TRIALS SEED")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--inject-corrupt-beta", action="store_true", help=argparse.SUPPRESS)
    _common(p, family=False)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="interval classification along a family")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("track", help="tracked eigenvalue arguments along a family")
    _common(p)
    p.set_defaults(func=cmd_track, format="csv")

    p = sub.add_parser("repro", help="reproduce the reference table or the hypergeometric check")
    p.add_argument("target", choices=("table1", "hypergeom"))
    _common(p, family=False)
    p.set_defaults(func=cmd_repro)
    return ap


_VALUE_OPTIONS = ("--t", "--zeta", "--a", "--tol")


def _join_negative_values(argv: Sequence[str]) -> list:
    """Let ``--t -10:20:0.05`` through: argparse would read the value as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except TrackingError as exc:
        sys.stderr.write(f"tracking fault: {exc}\n")
        return EXIT_TRACKING
    except (FamilyError, SpectrumCollisionError, ConstructionFault) as exc:
        sys.stderr.write(f"family error: {exc}\n")
        return EXIT_FAMILY
    except (InputError, ParameterError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (ConvergenceError, PopucError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
