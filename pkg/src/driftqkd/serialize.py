"""CSV/JSON emission of sweep records.

The CSV header is fixed; protocols not present in a sweep produce empty
fields (CSV) or null (JSON).  Floats are rendered with 9 significant digits
and rows are sorted by ascending variable value, so output is byte-stable.
"""

from __future__ import annotations

from typing import Iterable

from .sweep import SweepRecord

CSV_HEADER = "variable,value,rate_rfi,rate_bb84_xz,rate_bb84_xy"

_COLUMNS = (
    ("rate_rfi", "RFI"),
    ("rate_bb84_xz", "BB84_XZ"),
    ("rate_bb84_xy", "BB84_XY"),
)

FORMATS = ("csv", "json")


def format_number(value: float) -> str:
    """Render with 9 significant digits."""
    return f"{value:.9g}"


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    lines = [CSV_HEADER]
    for record in sorted(records, key=lambda r: r.value):
        clamped = record.clamped
        cells = [record.variable, format_number(record.value)]
        for _, protocol in _COLUMNS:
            cells.append(format_number(clamped[protocol]) if protocol in clamped else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def records_to_json(records: Iterable[SweepRecord]) -> str:
    rows = []
    for record in sorted(records, key=lambda r: r.value):
        clamped = record.clamped
        fields = [
            f'"variable": "{record.variable}"',
            f'"value": {format_number(record.value)}',
        ]
        for column, protocol in _COLUMNS:
            rendered = format_number(clamped[protocol]) if protocol in clamped else "null"
            fields.append(f'"{column}": {rendered}')
        rows.append("  {" + ", ".join(fields) + "}")
    return "[\n" + ",\n".join(rows) + "\n]\n"


def render_records(records: Iterable[SweepRecord], fmt: str) -> str:
    if fmt == "csv":
        return records_to_csv(records)
    if fmt == "json":
        return records_to_json(records)
    raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
