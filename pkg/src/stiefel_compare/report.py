"""CSV / JSON emission of experiment results.

Every result type flattens to rows with a fixed column order. Floats are
written with 17 significant digits, which round-trips any double exactly;
wall-clock times are left out so that output is a pure function of the run
configuration.
"""

import csv
import io
import json
import math
import sys

from .constants import AlphaReport
from .experiments import ComparisonReport, CounterexampleReport, MaxEntryRow, SelfTestResult

__all__ = ["COMPARISON_COLUMNS", "to_rows", "render", "emit_report"]

COMPARISON_COLUMNS = (
    "theorem_id",
    "n",
    "k",
    "norm",
    "phi",
    "factor",
    "lhs_mean",
    "lhs_stderr",
    "rhs_mean",
    "rhs_stderr",
    "verdict",
    "z_margin",
    "seed",
    "samples",
)
ALPHA_COLUMNS = (
    "k",
    "n",
    "alpha_exact",
    "lower_sum",
    "upper_sum",
    "lower_int",
    "upper_int",
    "factor_exact",
    "factor_bound",
)
MAXENTRY_COLUMNS = (
    "n",
    "estimate",
    "stderr",
    "bound",
    "separation",
    "normalized_mean",
    "normalized_stderr",
    "seed",
    "samples",
)
COUNTEREXAMPLE_COLUMNS = (
    "beta",
    "n",
    "k",
    "gaussian_mean",
    "gaussian_stderr",
    "stiefel_mean",
    "stiefel_max",
    "gaussian_positive",
    "stiefel_zero",
    "seed",
    "samples",
)
SELFTEST_COLUMNS = ("test", "statistic", "threshold", "passed", "n", "k", "seed", "samples")


def _row(item, context):
    if isinstance(item, ComparisonReport):
        return COMPARISON_COLUMNS, {
            "theorem_id": item.theorem_id,
            "n": item.dims.n,
            "k": item.dims.k,
            "norm": item.norm,
            "phi": item.phi,
            "factor": item.factor_used,
            "lhs_mean": item.lhs.mean,
            "lhs_stderr": item.lhs.stderr,
            "rhs_mean": item.rhs.mean,
            "rhs_stderr": item.rhs.stderr,
            "verdict": item.verdict.status,
            "z_margin": item.verdict.z_margin,
            "seed": item.lhs.master_seed,
            "samples": item.lhs.n_samples,
        }
    if isinstance(item, AlphaReport):
        return ALPHA_COLUMNS, {c: getattr(item, c) for c in ALPHA_COLUMNS}
    if isinstance(item, MaxEntryRow):
        return MAXENTRY_COLUMNS, {
            "n": item.n,
            "estimate": item.estimate.mean,
            "stderr": item.estimate.stderr,
            "bound": item.bound,
            "separation": item.separation,
            "normalized_mean": item.normalized_mean,
            "normalized_stderr": item.normalized_stderr,
            "seed": item.estimate.master_seed,
            "samples": item.estimate.n_samples,
        }
    if isinstance(item, CounterexampleReport):
        return COUNTEREXAMPLE_COLUMNS, {
            "beta": item.beta,
            "n": item.dims.n,
            "k": item.dims.k,
            "gaussian_mean": item.gaussian.mean,
            "gaussian_stderr": item.gaussian.stderr,
            "stiefel_mean": item.stiefel.mean,
            "stiefel_max": item.stiefel_max,
            "gaussian_positive": item.gaussian_positive,
            "stiefel_zero": item.stiefel_zero,
            "seed": item.gaussian.master_seed,
            "samples": item.gaussian.n_samples,
        }
    if isinstance(item, SelfTestResult):
        return SELFTEST_COLUMNS, {
            "test": item.name,
            "statistic": item.statistic,
            "threshold": item.threshold,
            "passed": item.passed,
            **{c: context.get(c) for c in ("n", "k", "seed", "samples")},
        }
    raise TypeError(f"cannot report {type(item).__name__}")


def to_rows(items, context=None):
    """Flatten results into ``(columns, list_of_dicts)``; all items must share a type."""
    items = list(items)
    if not items:
        return (), []
    context = context or {}
    columns = None
    rows = []
    for item in items:
        cols, row = _row(item, context)
        if columns is None:
            columns = cols
        elif cols != columns:
            raise TypeError("cannot mix result types in one report")
        rows.append(row)
    return columns, rows


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt(value) if math.isfinite(value) else json.dumps(_fmt(value))
    if isinstance(value, int):
        return str(value)
    if value is None:
        return "null"
    return json.dumps(value)


def render(items, fmt="csv", context=None):
    """Render results as CSV or JSON text."""
    columns, rows = to_rows(items, context)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        lines = []
        for row in rows:
            fields = ", ".join(f"{json.dumps(c)}: {_json_value(row[c])}" for c in columns)
            lines.append("    {" + fields + "}")
        body = ",\n".join(lines)
        return '{\n  "columns": ' + json.dumps(list(columns)) + ',\n  "rows": [\n' + body + "\n  ]\n}\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(items, fmt="csv", path="-", context=None):
    """Write results to ``path`` (``"-"`` for stdout).

    Raises
    ------
    OSError
        With the offending path in the message.
    """
    text = render(items, fmt, context)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc
