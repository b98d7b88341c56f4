"""Excel export of benchmark runs."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import pandas as pd

try:
    import xlsxwriter  # noqa: F401
    XLSXWRITER_AVAILABLE = True
except ImportError:
    XLSXWRITER_AVAILABLE = False

from ..bench.runner import RunRecord
from ..config import APP_NAME, APP_VERSION, EXPORT_SHEETS
from .report import approx_quality, records_frame, summary_table

logger = logging.getLogger(__name__)


class BenchmarkWorkbook:
    """Write benchmark records, per-bucket summary and approximation quality to .xlsx."""

    def __init__(self, settings: Optional[Dict[str, Any]] = None):
        """
        Args:
            settings: run settings echoed in the run log (solvers, timeout, threads, suite file)
        """
        self.settings = settings or {}

    def write(self, records: Sequence[RunRecord], path: Union[str, Path]) -> Path:
        """Write the workbook.

        Args:
            records: benchmark records
            path: destination .xlsx

        Returns:
            The written path
        """
        if not XLSXWRITER_AVAILABLE:
            raise ImportError("xlsxwriter is required for Excel export")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with pd.ExcelWriter(path, engine="xlsxwriter") as writer:
            workbook = writer.book
            formats = self._create_formats(workbook)
            records_sheet, summary_sheet, quality_sheet, log_sheet = EXPORT_SHEETS

            self._write_frame(writer, formats, records_sheet, records_frame(records))
            self._write_frame(writer, formats, summary_sheet, summary_table(records))
            self._write_frame(writer, formats, quality_sheet, approx_quality(records))
            self._create_run_log(workbook, formats, log_sheet, records)

        logger.info(f"Workbook written to {path}")
        return path

    def _create_formats(self, workbook: Any) -> Dict[str, Any]:
        return {
            "title": workbook.add_format({
                "bold": True,
                "font_size": 14,
                "align": "center",
                "bg_color": "#1F4E79",
                "font_color": "white",
            }),
            "header": workbook.add_format({
                "bold": True,
                "bg_color": "#5B9BD5",
                "font_color": "white",
                "border": 1,
            }),
            "subheader": workbook.add_format({"bold": True, "bg_color": "#DDEBF7", "border": 1}),
            "text": workbook.add_format({"border": 1}),
        }

    def _write_frame(
        self, writer: pd.ExcelWriter, formats: Dict[str, Any], sheet: str, df: pd.DataFrame
    ) -> None:
        """Frame below a bold header row, columns sized to their content."""
        df = df.copy()
        if df.empty:
            df = pd.DataFrame({"note": ["no data"]})
        df.to_excel(writer, sheet_name=sheet, index=False)
        worksheet = writer.sheets[sheet]
        for col, name in enumerate(df.columns):
            worksheet.write(0, col, name, formats["header"])
            longest = max([len(str(name))] + [len(str(v)) for v in df[name].head(200)])
            worksheet.set_column(col, col, min(max(longest + 2, 10), 50))
        worksheet.freeze_panes(1, 0)

    def _create_run_log(
        self, workbook: Any, formats: Dict[str, Any], sheet: str, records: Sequence[RunRecord]
    ) -> None:
        worksheet = workbook.add_worksheet(sheet)
        worksheet.merge_range("A1:B1", "Benchmark Run Log", formats["title"])
        worksheet.set_column("A:A", 28)
        worksheet.set_column("B:B", 50)

        statuses: Dict[str, int] = {}
        for rec in records:
            statuses[rec.status] = statuses.get(rec.status, 0) + 1
        metadata = [
            ("Report Generated", datetime.now().strftime("%Y-%m-%d %H:%M:%S")),
            ("Application", f"{APP_NAME} v{APP_VERSION}"),
            ("Records", len(records)),
            ("Instances", len({r.instance for r in records})),
            ("Statuses", ", ".join(f"{k}={v}" for k, v in sorted(statuses.items()))),
        ]
        metadata += [(str(k).title(), v) for k, v in sorted(self.settings.items())]
        errors = [r for r in records if r.message]
        row = 2
        for label, value in metadata:
            worksheet.write(row, 0, label, formats["subheader"])
            worksheet.write(row, 1, str(value), formats["text"])
            row += 1
        if errors:
            row += 1
            worksheet.write(row, 0, "Notes", formats["subheader"])
            row += 1
            for rec in errors:
                worksheet.write(row, 0, f"{rec.instance} / {rec.solver}", formats["text"])
                worksheet.write(row, 1, rec.message, formats["text"])
                row += 1


def write_workbook(
    records: Sequence[RunRecord], path: Union[str, Path], settings: Optional[Dict[str, Any]] = None
) -> Path:
    """Convenience wrapper around BenchmarkWorkbook."""
    return BenchmarkWorkbook(settings).write(records, path)
