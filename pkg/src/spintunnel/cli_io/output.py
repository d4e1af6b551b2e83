"""CSV / JSON emission with a byte-stable number format."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import IO, Union

from .sweep import SweepTable

FLOAT_FORMAT = "{:.16e}"


def format_value(value) -> str:
    """Text form shared by CSV cells.

    Floats use 17 significant digits in scientific notation, infinities are
    "inf"/"-inf", half-integers (m, s) print exactly, None is empty.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else str(float(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT.format(value)
    return str(value)


def _json_value(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


def render(table: SweepTable, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(row.get(col)) for col in table.columns])
        return buf.getvalue()
    if fmt == "json":
        records = [{col: _json_value(row.get(col)) for col in table.columns} for row in table.rows]
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def emit(
    table: SweepTable,
    fmt: str = "csv",
    destination: Union[str, os.PathLike, IO[str], None] = None,
) -> None:
    """Write ``table`` to a path, an open text stream, or stdout (None or "-")."""
    text = render(table, fmt)
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
