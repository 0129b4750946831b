"""Command-line surface: limit reports, property checks, ensemble sweeps.

Matrices travel as JSON files holding either dense entries (nested
[re, im] pairs) or a spectral form {eigenvalues, eigenvectors}.  Reports
are JSON with both log10 and linear eigenvalue fields; the log field is
authoritative since linear values can leave double range.  Sweeps emit
plot-ready CSV with a header row.

Exit codes: 0 success, 1 failed check or failed convergence criterion,
2 parse or usage error, 3 dimension error, 4 non-separable eigenvalue
group (rank-one test failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import limits, majorize, means, oracle
from .errors import (
    AlphaOne,
    AntitrotterError,
    BadCardinality,
    BadSpectrum,
    DimensionMismatch,
    DimensionTooLarge,
    LengthMismatch,
    MateriallyNegative,
    NotConverged,
    NotDensity,
    NotHermitian,
    QNotRankOne,
    ShapeMismatch,
    ZZero,
)
from .matnum import NEG_INF, LogValue, PsdMatrix

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_GROUP_NOT_SEPARABLE = 4

_LOG10 = math.log(10.0)


class _CliParseError(Exception):
    pass


class _CliDimensionError(Exception):
    pass


def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_entries(M: np.ndarray) -> list:
    return [[_pair(z) for z in row] for row in np.asarray(M, dtype=complex)]


def _entry_to_complex(cell) -> complex:
    if isinstance(cell, (int, float)):
        return complex(cell)
    if isinstance(cell, (list, tuple)) and len(cell) == 2:
        re, im = cell
        return complex(float(re), float(im))
    raise _CliParseError(f"matrix entry must be a number or [re, im] pair, got {cell!r}")


def parse_matrix(obj: dict) -> PsdMatrix:
    """PsdMatrix from the JSON schema (dense entries or spectral form).

    The spectral form is authoritative when both are present; it rebuilds
    the stored decomposition exactly, so serialize/parse round-trips are
    bit-identical.
    """
    if not isinstance(obj, dict):
        raise _CliParseError("matrix document must be a JSON object")
    if "eigenvalues" in obj and "eigenvectors" in obj:
        vals = np.asarray([float(v) for v in obj["eigenvalues"]], dtype=float)
        V = np.asarray(
            [[_entry_to_complex(c) for c in row] for row in obj["eigenvectors"]],
            dtype=complex,
        )
        d = int(obj.get("d", vals.size))
        if vals.shape != (d,) or V.shape != (d, d):
            raise _CliDimensionError("spectral form must supply d eigenvalues and a d x d basis")
        order = np.argsort(-vals, kind="stable")
        return PsdMatrix(vals[order], V[:, order])
    if "entries" in obj:
        rows = obj["entries"]
        d = int(obj.get("d", len(rows)))
        M = np.asarray([[_entry_to_complex(c) for c in row] for row in rows], dtype=complex)
        if M.shape != (d, d):
            raise _CliDimensionError(f"entries shape {M.shape} does not match d={d}")
        return PsdMatrix.from_matrix(M)
    raise _CliParseError("matrix document needs either 'entries' or 'eigenvalues'+'eigenvectors'")


def serialize_matrix(A: PsdMatrix) -> dict:
    return {
        "d": A.d,
        "entries": _matrix_entries(A.matrix()),
        "eigenvalues": [float(v) for v in A.eigenvalues],
        "eigenvectors": _matrix_entries(A.eigenvectors),
    }


def load_matrix(path: str) -> PsdMatrix:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise _CliParseError(f"cannot read {path}: {e}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise _CliParseError(f"{path}: invalid JSON ({e})")
    try:
        return parse_matrix(obj)
    except (NotHermitian, MateriallyNegative, BadSpectrum, ValueError) as e:
        raise _CliParseError(f"{path}: {e}")


def _log10_field(logmag: float) -> object:
    if logmag == NEG_INF:
        return "-inf"
    return logmag / _LOG10


def _linear_field(lv: LogValue) -> object:
    if lv.is_zero:
        return 0.0
    try:
        with np.errstate(over="raise"):
            return float(lv.sign) * float(np.exp(lv.logmag))
    except FloatingPointError:
        return "inf" if lv.sign > 0 else "-inf"


def _eigenvalue_rows(values) -> list:
    out = []
    for i, lv in enumerate(values, start=1):
        out.append(
            {
                "index": i,
                "log10": _log10_field(lv.logmag if not lv.is_zero else NEG_INF),
                "linear": _linear_field(lv),
            }
        )
    return out


def _emit(doc: dict, args) -> None:
    if not args.deterministic:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True))
    sys.stdout.write("\n")


def _schedule(args) -> list:
    points = int(args.p_points)
    p_max = float(args.p_max)
    if points < 1 or p_max <= 0:
        raise _CliParseError("schedule needs p-points >= 1 and p-max > 0")
    return [p_max / 2.0 ** (points - 1 - i) for i in range(points)]


def _tolerances(args, d: int) -> dict:
    product_tol = args.product_tol if args.product_tol is not None else 1e-9 * d
    return {
        "minor_tol": float(args.minor_tol),
        "product_tol": float(product_tol),
        "spec_tol": float(args.spec_tol),
    }


def _maximal_doc(verdict) -> dict:
    witnesses = {
        str(k): [list(pair[0].members), list(pair[1].members)]
        for k, pair in sorted(verdict.witnesses.items())
    }
    return {
        "holds": bool(verdict.holds),
        "failing_k": verdict.failing_k,
        "eigenvalues_match": verdict.eigenvalues_match,
        "witnesses": witnesses,
    }


def _report_doc(report, tols: dict) -> dict:
    groups = []
    for g in report.groups:
        groups.append(
            {
                "first": g.first,
                "last": g.last,
                "eigenvalue_log10": _log10_field(
                    g.eigenvalue.logmag if not g.eigenvalue.is_zero else NEG_INF
                ),
                "projection": _matrix_entries(g.projection),
            }
        )
    doc = {
        "eigenvalues": _eigenvalue_rows(report.eigenvalues),
        "matrix": serialize_matrix(report.matrix),
        "groups": groups,
        "diagnostics": {str(int(p)): v for p, v in sorted(report.diagnostics.items())},
        "tolerances": tols,
    }
    if report.maximal is not None:
        doc["maximal"] = _maximal_doc(report.maximal)
    if report.notes:
        doc["notes"] = list(report.notes)
    return doc


def _cmd_limit(args) -> int:
    mats = [load_matrix(p) for p in args.matrices]
    if len(mats) < 2:
        raise _CliParseError("limit needs at least two matrices")
    d = mats[0].d
    tols = _tolerances(args, d)
    schedule = _schedule(args)
    if len(mats) == 2:
        report = limits.limit_matrix(
            mats[0],
            mats[1],
            minor_tol=tols["minor_tol"],
            product_tol=tols["product_tol"],
            verify_schedule=schedule[-3:],
        )
    else:
        report = limits.limit_matrix_multi(
            mats,
            minor_tol=tols["minor_tol"],
            product_tol=tols["product_tol"],
            verify_schedule=schedule[-3:],
        )
    doc = {"command": "limit", "d": d, "m": len(mats)}
    doc.update(_report_doc(report, tols))
    _emit(doc, args)
    return EXIT_OK


def _cmd_check(args) -> int:
    A = load_matrix(args.matrices[0])
    B = load_matrix(args.matrices[1])
    d = A.d
    tols = _tolerances(args, d)
    schedule = _schedule(args)
    doc = {"command": "check", "property": args.property, "d": d, "tolerances": tols}
    passes = True
    if args.property == "alt":
        rep = majorize.check_alt_monotonicity(A, B, schedule)
        passes = rep.passes
        doc["worst_margin"] = rep.worst_margin
        doc["pairs"] = [
            {"p": p, "q": q, "ok": ok, "margin": m} for p, q, ok, m in rep.pair_results
        ]
    elif args.property == "gm":
        rep = majorize.check_gm_monotonicity(A, B, schedule)
        passes = rep.passes
        doc["worst_margin"] = rep.worst_margin
        doc["pairs"] = [
            {"p": p, "q": q, "ok": ok, "margin": m} for p, q, ok, m in rep.pair_results
        ]
    elif args.property == "sandwich":
        from .matnum import g_p_eigenvalues_numeric, z_p_eigenvalues_numeric

        rows = []
        for p in schedule:
            for family, fn in (("z", z_p_eigenvalues_numeric), ("g", g_p_eigenvalues_numeric)):
                ok = majorize.gelfand_naimark_sandwich(A, B, fn(A, B, p))
                passes = passes and ok
                rows.append({"family": family, "p": p, "ok": ok})
        doc["points"] = rows
    else:
        verdict = limits.check_maximal(
            A, B, minor_tol=tols["minor_tol"], spec_tol=tols["spec_tol"]
        )
        passes = verdict.holds
        doc["maximal"] = _maximal_doc(verdict)
    doc["passes"] = passes
    _emit(doc, args)
    return EXIT_OK if passes else EXIT_CHECK_FAILED


def _parse_spectrum_spec(text: str, d: int):
    if ":" in text:
        lo_s, hi_s = text.split(":", 1)
        try:
            return {"log_range": (float(lo_s), float(hi_s))}
        except ValueError:
            raise _CliDimensionError(f"bad spectrum range {text!r}")
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise _CliDimensionError(f"bad spectrum list {text!r}")
    if len(vals) != d:
        raise _CliDimensionError(f"spectrum list needs {d} values, got {len(vals)}")
    return vals


def _cmd_sweep(args) -> int:
    d = int(args.dim)
    if not 2 <= d <= 20:
        raise _CliDimensionError(f"sweep dimension {d} outside 2..20")
    count = int(args.count)
    if count < 1:
        raise _CliDimensionError("sweep needs count >= 1")
    spec = _parse_spectrum_spec(args.spectrum, d)
    schedule = _schedule(args)
    collect = oracle.collect_z_trace if args.family == "z" else oracle.collect_g_trace

    def one(i: int):
        A = oracle.random_psd([args.seed, i, 0], d, spec)
        B = oracle.random_psd([args.seed, i, 1], d, spec)
        trace = collect(A, B, schedule)
        return trace, oracle.extrapolate(trace)

    raw = os.environ.get("ANTITROTTER_THREADS", "1")
    try:
        threads = max(1, int(raw))
    except ValueError:
        threads = 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(count)))
    else:
        results = [one(i) for i in range(count)]

    header = (
        ["seed", "p"]
        + [f"log10_lambda_{k}" for k in range(1, d + 1)]
        + [f"delta_log10_{k}" for k in range(1, d + 1)]
    )
    rows = []
    for i, (trace, _) in enumerate(results):
        prev = None
        for p, logs in zip(trace.p_values, trace.spectra_logs):
            l10 = [x / _LOG10 if np.isfinite(x) else "-inf" for x in logs]
            if prev is None:
                deltas = [""] * d
            else:
                deltas = [
                    abs(x - y) / _LOG10 if np.isfinite(x) and np.isfinite(y) else ""
                    for x, y in zip(logs, prev)
                ]
            rows.append([i, p] + l10 + deltas)
            prev = logs
    summary = {
        "family": args.family,
        "d": d,
        "count": count,
        "seed": args.seed,
        "scores": [
            {"seed": i, "score": res.score(), "rates": [float(r) for r in res.rates]}
            for i, (_, res) in enumerate(results)
        ],
    }
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        doc = {"command": "sweep", "header": header, "rows": rows, "summary": summary}
        _emit(doc, args)
    return EXIT_OK


def _mean_spec(name: str, alpha: float) -> means.OperatorMeanSpec:
    if name == "arithmetic":
        return means.OperatorMeanSpec.arithmetic(alpha)
    if name == "harmonic":
        return means.OperatorMeanSpec.harmonic(alpha)
    if abs(alpha - 0.5) > 1e-12:
        raise _CliParseError("the geometric mean requires alpha = 0.5")
    return means.OperatorMeanSpec.geometric()


def _psd_doc(M: PsdMatrix) -> dict:
    logs = M.log_eigenvalues()
    return {
        "eigenvalues": _eigenvalue_rows(
            [LogValue.from_log(x) if np.isfinite(x) else LogValue.from_real(0.0) for x in logs]
        ),
        "matrix": serialize_matrix(M),
    }


def _cmd_means(args) -> int:
    A = load_matrix(args.matrices[0])
    B = load_matrix(args.matrices[1])
    spec = _mean_spec(args.mean, args.alpha)
    schedule = _schedule(args)
    doc = {
        "command": "means",
        "mean": spec.name,
        "direction": args.direction,
        "d": A.d,
    }
    if args.direction == "p0":
        M = means.weighted_lt_limit(A, B, spec, normalization=args.normalization)
        doc["normalization"] = args.normalization
        doc.update(_psd_doc(M))
    else:
        if args.mean == "arithmetic":
            try:
                M = means.spectral_sup(A, B, schedule)
            except NotConverged as e:
                _emit({**doc, "error": str(e)}, args)
                return EXIT_CHECK_FAILED
            doc.update(_psd_doc(M))
        elif args.mean == "harmonic":
            try:
                M = means.spectral_inf(A, B, schedule)
            except NotConverged as e:
                _emit({**doc, "error": str(e)}, args)
                return EXIT_CHECK_FAILED
            doc.update(_psd_doc(M))
        elif A.d == 2:
            res = means.g_p_limit_2x2(A, B, minor_tol=args.minor_tol)
            doc["branch"] = res.branch
            doc["normalization_derived"] = res.normalization_derived
            doc["eigenvalues"] = _eigenvalue_rows(
                [LogValue.from_real(v) for v in res.eigenvalues]
            )
            doc["matrix"] = {"d": 2, "entries": _matrix_entries(res.matrix)}
        else:
            est = means.g_limit_estimate(A, B, schedule)
            doc["heuristic"] = True
            doc["eigenvalue_log10"] = [
                x / _LOG10 if np.isfinite(x) else "-inf" for x in est.eigenvalue_logs
            ]
            doc["eigenvalue_residuals"] = [float(r) for r in est.eigenvalue_residuals]
            doc["matrix_estimate"] = {
                "d": A.d,
                "entries": _matrix_entries(est.matrix_estimate),
            }
            doc["matrix_cauchy"] = [float(c) for c in est.matrix_cauchy]
            doc["monotone_ok"] = bool(est.monotone_ok)
            doc["converged_looking"] = bool(est.converged_looking)
    _emit(doc, args)
    return EXIT_OK


def _cmd_renyi(args) -> int:
    rho = load_matrix(args.matrices[0])
    sigma = load_matrix(args.matrices[1])
    try:
        value = means.renyi_divergence(rho, sigma, args.alpha, args.z)
    except (NotDensity, AlphaOne, ZZero) as e:
        raise _CliParseError(str(e))
    doc = {
        "command": "renyi",
        "alpha": args.alpha,
        "z": args.z,
        "divergence": "+inf" if math.isinf(value) else value,
    }
    _emit(doc, args)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antitrotter",
        description="Limits of sandwiched matrix powers and operator-mean extremes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, matrices: Optional[int]) -> None:
        if matrices is not None:
            p.add_argument(
                "matrices",
                nargs="+" if matrices == 0 else matrices,
                help="matrix JSON files ('-' reads one matrix from stdin)",
            )
        p.add_argument("--minor-tol", type=float, default=1e-10)
        p.add_argument("--product-tol", type=float, default=None,
                       help="defaults to 1e-9 times the dimension")
        p.add_argument("--spec-tol", type=float, default=1e-9)
        p.add_argument("--p-max", type=float, default=4096.0)
        p.add_argument("--p-points", type=int, default=7)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--deterministic", action="store_true",
                       help="suppress the timestamp field for byte-identical reruns")

    p_limit = sub.add_parser("limit", help="limit of the sandwiched power chain")
    common(p_limit, 0)
    p_limit.set_defaults(fn=_cmd_limit)

    p_check = sub.add_parser("check", help="monotonicity / sandwich / maximality checks")
    common(p_check, 2)
    p_check.add_argument("--property", choices=("alt", "gm", "sandwich", "maximal"),
                         required=True)
    p_check.set_defaults(fn=_cmd_check)

    p_sweep = sub.add_parser("sweep", help="seeded ensemble traces as CSV or JSON")
    common(p_sweep, None)
    p_sweep.add_argument("--family", choices=("z", "g"), default="z")
    p_sweep.add_argument("--count", type=int, default=10)
    p_sweep.add_argument("--dim", type=int, default=3)
    p_sweep.add_argument("--spectrum", default="1e-3:1e3",
                         help="log-range 'lo:hi' or comma-separated eigenvalues")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_means = sub.add_parser("means", help="operator-mean limits for p to 0 or infinity")
    common(p_means, 2)
    p_means.add_argument("--mean", choices=("arithmetic", "harmonic", "geometric"),
                         required=True)
    p_means.add_argument("--alpha", type=float, default=0.5)
    p_means.add_argument("--direction", choices=("p0", "pinf"), required=True)
    p_means.add_argument("--normalization", choices=("1/p", "2/p"), default="1/p")
    p_means.set_defaults(fn=_cmd_means)

    p_renyi = sub.add_parser("renyi", help="alpha-z divergence of two density matrices")
    common(p_renyi, 2)
    p_renyi.add_argument("--alpha", type=float, required=True)
    p_renyi.add_argument("--z", type=float, required=True)
    p_renyi.set_defaults(fn=_cmd_renyi)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json"
    try:
        return args.fn(args)
    except _CliParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (_CliDimensionError, DimensionMismatch, DimensionTooLarge, BadCardinality,
            ShapeMismatch, LengthMismatch) as e:
        print(f"dimension error: {e}", file=sys.stderr)
        return EXIT_DIMENSION
    except QNotRankOne as e:
        print(f"group separation failure: {e}", file=sys.stderr)
        return EXIT_GROUP_NOT_SEPARABLE
    except AntitrotterError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
