"""CSV output: RFC 4180 quoting, '.' decimal separator, 17 significant digits for floats."""

import csv
import os


def format_value(value) -> str:
    """Missing values become empty fields."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write(path, mode, header, rows) -> None:
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        if header is not None:
            writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_csv(path, header, rows) -> None:
    _write(path, "w", header, rows)


def append_csv(path, header, rows) -> None:
    """Append rows, writing ``header`` first only if the file is new or empty."""
    try:
        fresh = os.path.getsize(path) == 0
    except FileNotFoundError:
        fresh = True
    _write(path, "a", header if fresh else None, rows)
