"""Report documents: JSON (authoritative) and table (display) rendering.

JSON output is deterministic byte for byte: keys appear in construction
order and floats are written with 17 significant digits, which round-trips
doubles exactly. Tables round to 6 significant digits for display only.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .design import Dataset
from .estimators import FitResult
from .inference import confidence_interval
from .simulation import SimulationReport

SCHEMA_VERSION = "1"


def _py(value):
    """Normalize numpy scalars/arrays into plain Python containers."""
    if isinstance(value, np.ndarray):
        return [_py(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _write_json(obj, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format(obj, ".17g") if math.isfinite(obj) else "null")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}  {json.dumps(str(key))}: ")
            _write_json(val, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, val in enumerate(obj):
            _write_json(val, out, indent + 1)
            if i < len(obj) - 1:
                out.append(", ")
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: dict) -> str:
    """Serialize a report document to deterministic JSON text."""
    out: list[str] = []
    _write_json(doc, out, 0)
    out.append("\n")
    return "".join(out)


def fit_document(results: dict[str, FitResult], d: Dataset, ci_level: float,
                 order=None) -> dict:
    """ReportDocument for a fit run: one block per estimator."""
    blocks = []
    for name in order or results.keys():
        fr = results[name]
        ci = confidence_interval(fr, ci_level)
        diag = fr.diagnostics
        blocks.append({
            "name": name,
            "coefficients": [
                {
                    "label": d.column_names[j],
                    "estimate": float(fr.beta_hat[j]),
                    "std_error": float(fr.std_errors[j]),
                    "ci_lo": float(ci[j, 0]),
                    "ci_hi": float(ci[j, 1]),
                }
                for j in range(d.p)
            ],
            "covariance": _py(fr.covariance),
            "diagnostics": {
                "degenerate_fallback": bool(diag.degenerate_fallback),
                "cond_omega": _finite_or_none(diag.cond_omega),
                "ridge_lambda": float(diag.ridge_lambda),
                "K": diag.basis_degree,
                "basis_family": diag.basis_family,
                "n": d.n,
                "p": d.p,
            },
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "ci_level": float(ci_level),
        "estimators": blocks,
    }


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def simulation_document(rep: SimulationReport) -> dict:
    """ReportDocument for a simulate run."""
    spec = rep.dgp
    estimators = {}
    for name, summary in rep.estimators.items():
        estimators[name] = {
            "mean_bias": _py(summary.mean_bias),
            "empirical_covariance": _py(summary.empirical_covariance),
            "mean_std_error": _py(summary.mean_std_error),
            "coverage95": _py(summary.coverage95),
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "dgp": {
            "variance_family": spec.variance_family,
            "beta_true": _py(spec.beta_true),
            "gamma": _py(spec.gamma),
            "n": spec.n,
            "x_distribution": spec.x_distribution,
            "error_distribution": spec.error_distribution,
        },
        "basis_family": rep.basis_family,
        "K": rep.basis_degree,
        "replications": rep.replications,
        "completed": rep.completed,
        "skipped": rep.skipped,
        "seed": rep.seed,
        "estimators": estimators,
        "relative_efficiency": {k: _py(v) for k, v in rep.relative_efficiency.items()},
        "fallback_rate": float(rep.fallback_rate),
        "skip_messages": list(rep.skip_messages),
    }


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def fit_table(doc: dict) -> str:
    """Human-readable coefficient tables (6 significant digits)."""
    lines = []
    for block in doc["estimators"]:
        diag = block["diagnostics"]
        lines.append(f"== {block['name']} (n={diag['n']}, p={diag['p']}) ==")
        header = f"{'coef':<14}{'estimate':>14}{'std_error':>14}{'ci_lo':>14}{'ci_hi':>14}"
        lines.append(header)
        lines.append("-" * len(header))
        for c in block["coefficients"]:
            lines.append(
                f"{c['label']:<14}{_fmt(c['estimate']):>14}{_fmt(c['std_error']):>14}"
                f"{_fmt(c['ci_lo']):>14}{_fmt(c['ci_hi']):>14}"
            )
        notes = []
        if diag["degenerate_fallback"]:
            notes.append("degenerate fallback to ols")
        if diag["ridge_lambda"]:
            notes.append(f"ridge={_fmt(diag['ridge_lambda'])}")
        if diag["cond_omega"] is not None:
            notes.append(f"cond(Omega)={_fmt(diag['cond_omega'])}")
        if diag["K"] is not None:
            notes.append(f"basis={diag['basis_family']} K={diag['K']}")
        if notes:
            lines.append("  [" + "; ".join(notes) + "]")
        lines.append("")
    return "\n".join(lines)


def simulation_table(doc: dict) -> str:
    """Human-readable summary of a simulate run."""
    lines = [
        f"simulate: {doc['dgp']['variance_family']} dgp, n={doc['dgp']['n']}, "
        f"reps={doc['replications']} (completed {doc['completed']}, "
        f"skipped {doc['skipped']}), seed={doc['seed']}",
        f"basis={doc['basis_family']} K={doc['K']}  "
        f"fallback_rate={_fmt(doc['fallback_rate'])}",
        "",
    ]
    p = len(doc["dgp"]["beta_true"])
    header = f"{'estimator':<10}" + "".join(
        f"{f'bias[{j}]':>12}{f'empvar[{j}]':>12}{f'meanSE[{j}]':>12}{f'cover[{j}]':>12}"
        for j in range(p)
    )
    lines.append(header)
    lines.append("-" * len(header))
    for name, s in doc["estimators"].items():
        row = f"{name:<10}"
        for j in range(p):
            row += (
                f"{_fmt(s['mean_bias'][j]):>12}"
                f"{_fmt(s['empirical_covariance'][j][j]):>12}"
                f"{_fmt(s['mean_std_error'][j]):>12}"
                f"{_fmt(s['coverage95'][j]):>12}"
            )
        lines.append(row)
    lines.append("")
    lines.append("relative efficiency (empirical variance ratios):")
    for key, vals in doc["relative_efficiency"].items():
        lines.append(f"  {key:<14} " + "  ".join(_fmt(v) for v in vals))
    lines.append("")
    return "\n".join(lines)
