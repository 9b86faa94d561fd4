"""
Reporting and export utilities.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union
import logging

import pandas as pd

from .models import ScanReport
from .numeric_config import CSV_FLOAT_FORMAT

REPORT_COLUMNS = ["series", "parameter", "N", "value", "ratio"]
CHECK_COLUMNS = ["name", "ok", "value", "bound", "detail"]


_INVALID_SHEET_CHARS = "[]:*?/\\"


def safe_sheet_name(name: str, suffix: str = "") -> str:
    """Excel worksheet titles forbid []:*?/\\ and are capped at 31 chars."""
    cleaned = "".join("_" if c in _INVALID_SHEET_CHARS else c for c in name)
    return (cleaned[: 31 - len(suffix)] + suffix)[:31]


def report_to_frame(report: ScanReport) -> pd.DataFrame:
    """One row per cell: series, parameter, N, value, ratio (in recorded order)."""
    rows = [
        {"series": c.series, "parameter": c.parameter, "N": c.n, "value": c.value, "ratio": c.ratio}
        for c in report.cells
    ]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def checks_to_frame(report: ScanReport) -> pd.DataFrame:
    return pd.DataFrame([asdict(check) for check in report.checks], columns=CHECK_COLUMNS)


def write_csv(frame: pd.DataFrame, target: Union[Path, TextIO]) -> None:
    """Header row, '.' decimal, 17 significant digits; byte-stable for equal input."""
    if isinstance(target, Path):
        target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_to_dict(report: ScanReport, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return _jsonable(
        {
            "kind": report.kind,
            "ok": report.ok,
            "config": dict(config or {}),
            "metadata": dict(report.metadata),
            "cells": [asdict(c) for c in report.cells],
            "checks": [asdict(c) for c in report.checks],
        }
    )


def write_json(
    report: ScanReport, target: Union[Path, TextIO], config: Optional[Dict[str, Any]] = None
) -> None:
    payload = report_to_dict(report, config)
    if isinstance(target, Path):
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, default=str)
    else:
        json.dump(payload, target, indent=2, default=str)
        target.write("\n")


def export_worksheets(report: ScanReport, excel_file: Path) -> Path:
    """One sheet per series plus a "checks" sheet."""
    excel_file.parent.mkdir(parents=True, exist_ok=True)
    frame = report_to_frame(report)
    with pd.ExcelWriter(excel_file, engine="openpyxl") as writer:
        if frame.empty:
            frame.to_excel(writer, sheet_name="cells", index=False)
        for series, group in frame.groupby("series", sort=False):
            group.drop(columns="series").to_excel(
                writer, sheet_name=safe_sheet_name(str(series)), index=False
            )
        if report.checks:
            checks_to_frame(report).to_excel(writer, sheet_name="checks", index=False)
    return excel_file


def summary_line(report: ScanReport) -> str:
    status = "ok" if report.ok else f"{len(report.violations)} violated"
    series = sorted({c.series for c in report.cells})
    return (
        f"{report.kind}: {len(report.cells)} cells ({', '.join(series) or 'none'}), "
        f"{len(report.checks)} checks, {status}"
    )


def print_summary(report: ScanReport) -> str:
    line = summary_line(report)
    logger.info("%s", line)
    for check in report.violations:
        logger.warning(
            "violated: %s value=%.17g bound=%.17g %s",
            check.name,
            check.value,
            check.bound,
            check.detail,
        )
    return line


logger = logging.getLogger(__name__)
