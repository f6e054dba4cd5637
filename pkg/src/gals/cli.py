"""Command-line interface: ``gals fit`` and ``gals simulate``.

Reports go to standard output (JSON is authoritative; tables round for
display), messages to standard error. Exit codes: 0 success, 2 usage
error, 3 data error, 4 numerical failure. All randomness enters through
--seed; repeated runs with the same inputs emit byte-identical JSON.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from . import report
from .basis import FAMILIES, BasisSpec
from .design import build_dataset
from .errors import DataError, GalsError, NumericalError
from .estimators import ESTIMATORS, fit_all, fit_ols
from .gmm import build_moment_system
from .inference import gals_covariance, gmm_sandwich, hc_covariance
from .simulation import (
    MIN_REPLICATIONS,
    VARIANCE_FAMILIES,
    DgpSpec,
    run_monte_carlo,
)


class UsageError(Exception):
    pass


def _float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list of numbers, got {text!r}")


def read_csv_columns(path: str, response: str, regressors: list[str]):
    """Load the named columns from a headered CSV of floats."""
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror or exc}")
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        missing = [c for c in [response] + regressors if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s): " + ", ".join(missing))
        idx = {c: header.index(c) for c in [response] + regressors}

        y_vals: list[float] = []
        x_rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {len(header)}"
                )
            parsed = {}
            for col in idx:
                cell = row[idx[col]].strip()
                try:
                    parsed[col] = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at line {line_no}, "
                        f"column {col!r}"
                    )
            y_vals.append(parsed[response])
            x_rows.append([parsed[c] for c in regressors])
        if not y_vals:
            raise DataError(f"{path}: no data rows")
    return np.asarray(y_vals), np.asarray(x_rows)


def _apply_se_override(results, d, method):
    """Recompute covariances with an explicitly requested method."""
    if method in ("hc0", "hc1"):
        for name in ("ols", "wls"):
            if name not in results:
                continue
            fr = results[name]
            weights = fr.variance_model.inv_sigma2 if name == "wls" else None
            cov = hc_covariance(d, fr.residuals, weights=weights, variant=method)
            results[name] = replace(
                fr, covariance=cov.matrix, std_errors=np.sqrt(np.diag(cov.matrix))
            )
    elif method in ("gmm_optimal", "gmm_sandwich"):
        fr = results.get("gals")
        if fr is None or fr.diagnostics.degenerate_fallback:
            return results
        ms = build_moment_system(d, results["ols"].residuals, fr.variance_model)
        cov = gals_covariance(ms) if method == "gmm_optimal" else gmm_sandwich(ms, ms.W)
        results["gals"] = replace(
            fr, covariance=cov.matrix, std_errors=np.sqrt(np.diag(cov.matrix))
        )
    return results


def cmd_fit(args) -> int:
    regressors = [c.strip() for c in args.regressors.split(",") if c.strip()]
    if not regressors:
        raise UsageError("--regressors must name at least one column")
    cols = [args.response] + regressors
    if len(set(cols)) != len(cols):
        raise UsageError("response and regressor columns must be distinct")
    if not 0.0 < args.ci_level < 1.0:
        raise UsageError(f"--ci-level must be in (0, 1), got {args.ci_level}")

    y, X_raw = read_csv_columns(args.data, args.response, regressors)
    d = build_dataset(y, X_raw, intercept=args.intercept, names=regressors)

    if args.estimator == "ols":
        results = {"ols": fit_ols(d)}
        order = ["ols"]
    else:
        spec = BasisSpec(family=args.basis, degree=args.degree)
        results = fit_all(d, spec)
        order = list(ESTIMATORS) if args.estimator == "all" else [args.estimator]
        results = {name: results[name] for name in order}
    if args.se_method:
        results = _apply_se_override(results, d, args.se_method)

    doc = report.fit_document(results, d, args.ci_level, order=order)
    if args.output == "json":
        sys.stdout.write(report.dumps(doc))
    else:
        sys.stdout.write(report.fit_table(doc))
    return 0


def cmd_simulate(args) -> int:
    if args.reps < MIN_REPLICATIONS:
        raise UsageError(f"--reps must be at least {MIN_REPLICATIONS}, got {args.reps}")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    beta = _float_list(args.beta, "--beta")
    gamma = _float_list(args.gamma, "--gamma")
    error_dist = "scaled_t5" if args.error == "t5" else "normal"
    try:
        spec = DgpSpec(
            beta_true=beta,
            variance_family=args.dgp,
            gamma=gamma,
            n=args.n,
            error_distribution=error_dist,
        )
    except ValueError as exc:
        raise UsageError(str(exc))

    rep = run_monte_carlo(
        spec,
        args.reps,
        basis_family=args.basis,
        basis_degree=args.degree,
        seed=args.seed,
        workers=args.workers,
    )
    doc = report.simulation_document(rep)
    if args.output == "json":
        sys.stdout.write(report.dumps(doc))
    else:
        sys.stdout.write(report.simulation_table(doc))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gals",
        description="Heteroscedasticity-adaptive linear regression and its Monte Carlo harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit estimators to a CSV dataset")
    fit.add_argument("--data", required=True, help="path to a headered CSV file")
    fit.add_argument("--response", required=True, help="response column name")
    fit.add_argument("--regressors", required=True,
                     help="comma-separated regressor column names")
    fit.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True)
    fit.add_argument("--estimator", choices=list(ESTIMATORS) + ["all"], default="all")
    fit.add_argument("--basis", choices=list(FAMILIES), default="chebyshev")
    fit.add_argument("--degree", type=int, default=2, help="basis degree per regressor")
    fit.add_argument("--se-method", dest="se_method",
                     choices=["hc0", "hc1", "gmm_optimal", "gmm_sandwich"], default=None)
    fit.add_argument("--output", choices=["json", "table"], default="table")
    fit.add_argument("--ci-level", dest="ci_level", type=float, default=0.95)
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="run a Monte Carlo estimator comparison")
    sim.add_argument("--dgp", choices=list(VARIANCE_FAMILIES), required=True)
    sim.add_argument("--n", type=int, required=True, help="sample size per replication")
    sim.add_argument("--reps", type=int, required=True, help="number of replications")
    sim.add_argument("--seed", type=int, required=True, help="root seed")
    sim.add_argument("--beta", required=True, help="true coefficients, comma-separated")
    sim.add_argument("--gamma", required=True, help="variance parameters, comma-separated")
    sim.add_argument("--degree", type=int, default=2)
    sim.add_argument("--basis", choices=list(FAMILIES), default="chebyshev")
    sim.add_argument("--error", choices=["normal", "t5"], default="normal")
    sim.add_argument("--output", choices=["json", "table"], default="table")
    sim.add_argument("--workers", type=int, default=1,
                     help="worker threads for replications (does not affect results)")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gals: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gals: error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"gals: data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"gals: numerical failure: {exc}", file=sys.stderr)
        return 4
    except GalsError as exc:
        print(f"gals: error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
