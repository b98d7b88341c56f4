"""CSV and markdown summaries of benchmark records."""

import logging
import math
from typing import List, Sequence, Tuple

import pandas as pd

from ..bench.generator import bucket_label
from ..bench.runner import RunRecord
from ..config import CSV_COLUMNS, EXTRA_RECORD_COLUMNS, SEARCH_SPACE_BUCKETS

logger = logging.getLogger(__name__)

BUCKET_ORDER = [label for label, _, _ in SEARCH_SPACE_BUCKETS]


def records_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    """Records as a DataFrame, stably sorted by suite and instance."""
    df = pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS + EXTRA_RECORD_COLUMNS)
    if df.empty:
        return df
    df["bucket"] = df["ss_log2"].map(bucket_label)
    return df.sort_values(["suite", "instance"], kind="stable").reset_index(drop=True)


def solver_order(df: pd.DataFrame) -> List[str]:
    return list(dict.fromkeys(df["solver"]))


def summary_table(records: Sequence[RunRecord]) -> pd.DataFrame:
    """
    One row per (suite, bucket): instance count, mean search-space log2,
    per-solver mean time in seconds over successful runs with the success
    count, and the pareto statistics of pareto-based runs.
    """
    df = records_frame(records)
    rows = []
    if df.empty:
        return pd.DataFrame(rows)
    solvers = solver_order(df)
    df["bucket_rank"] = df["bucket"].map(BUCKET_ORDER.index)
    for (suite, _, bucket), group in df.groupby(["suite", "bucket_rank", "bucket"], sort=True):
        row = {
            "Net type": suite,
            "Bucket": bucket,
            "#Q": group["instance"].nunique(),
            "SS": group.drop_duplicates("instance")["ss_log2"].mean(),
        }
        for solver in solvers:
            ok = group[(group["solver"] == solver) & (group["status"] == "ok")]
            row[f"{solver} time(sec)"] = ok["ms"].mean() / 1000.0 if len(ok) else math.nan
            row[f"{solver} successes"] = len(ok)
        pareto = group[(group["status"] == "ok") & group["avg_pareto"].notna()]
        row["Avg. pareto"] = pareto["avg_pareto"].astype(float).mean() if len(pareto) else math.nan
        row["Avg. dimen."] = pareto["avg_dim"].astype(float).mean() if len(pareto) else math.nan
        rows.append(row)
    return pd.DataFrame(rows)


def approx_quality(records: Sequence[RunRecord]) -> pd.DataFrame:
    """
    Approximate against exact values on instances where both succeeded.

    Columns: solver, pairs, exact_fraction (same value), within_1pct
    (approx >= exact / 1.01), worst_ratio (min approx / exact).
    """
    df = records_frame(records)
    columns = ["solver", "pairs", "exact_fraction", "within_1pct", "worst_ratio"]
    if df.empty:
        return pd.DataFrame(columns=columns)
    ok = df[df["status"] == "ok"]
    exact = ok[ok["solver"] == "exact"].set_index("instance")["value"]
    rows = []
    for solver in solver_order(df):
        if not solver.startswith("approx"):
            continue
        approx = ok[ok["solver"] == solver].set_index("instance")["value"]
        common = approx.index.intersection(exact.index)
        if not len(common):
            rows.append({"solver": solver, "pairs": 0, "exact_fraction": math.nan,
                         "within_1pct": math.nan, "worst_ratio": math.nan})
            continue
        a = approx.loc[common].astype(float)
        e = exact.loc[common].astype(float)
        ratio = a / e
        rows.append({
            "solver": solver,
            "pairs": len(common),
            "exact_fraction": float(((a - e).abs() <= 1e-12 * e.abs()).mean()),
            "within_1pct": float((a >= e / 1.01).mean()),
            "worst_ratio": float(ratio.min()),
        })
    return pd.DataFrame(rows, columns=columns)


def _cell(value) -> str:
    if isinstance(value, float):
        return "-" if math.isnan(value) else f"{value:.3f}"
    return str(value)


def _markdown(headers: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    lines.extend("| " + " | ".join(r) + " |" for r in rows)
    return lines


def emit_report(records: Sequence[RunRecord]) -> Tuple[str, str]:
    """
    Render benchmark records.

    Args:
        records: non-empty list of run records

    Returns:
        (csv_text with the fixed column order, markdown_text)
    """
    if not records:
        raise ValueError("no records to report")
    df = records_frame(records)
    csv_text = df[CSV_COLUMNS].to_csv(index=False)

    summary = summary_table(records)
    solvers = solver_order(df)
    headers = ["Net type", "#Q", "SS"]
    headers += [f"{s} time(sec) (successes)" for s in solvers]
    headers += ["Avg. pareto", "Avg. dimen."]
    rows = []
    for _, row in summary.iterrows():
        cells = [f"{row['Net type']} ({row['Bucket']})", str(row["#Q"]), _cell(float(row["SS"]))]
        for s in solvers:
            cells.append(f"{_cell(float(row[f'{s} time(sec)']))} ({row[f'{s} successes']})")
        cells += [_cell(float(row["Avg. pareto"])), _cell(float(row["Avg. dimen."]))]
        rows.append(cells)
    lines = _markdown(headers, rows)

    quality = approx_quality(records)
    if not quality.empty:
        lines += ["", "Approximation quality (ok approx/exact pairs):", ""]
        lines += _markdown(
            list(quality.columns),
            [[_cell(v) if isinstance(v, float) else str(v) for v in r] for r in quality.itertuples(index=False)],
        )
    logger.info(f"Report built: {len(df)} records, {len(summary)} summary rows")
    return csv_text, "\n".join(lines) + "\n"
