from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence

from config import CSV_FORMAT_VERSION

from .json_io import ConfigParseError

_PREFIX = "# pointgas-csv"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    return str(value)


def write_csv(path: str | Path, subcommand: str, rows: Sequence[Dict[str, Any]]) -> Path:
    """Header comment with version and columns, a header row, then repr-exact rows."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"{_PREFIX} v{CSV_FORMAT_VERSION} {subcommand} columns={','.join(columns)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
    return path


def read_csv(path: str | Path) -> tuple[str, List[Dict[str, str]]]:
    """Subcommand and raw string rows of a file written by ``write_csv``."""

    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        parts = first.split()
        if len(parts) < 4 or " ".join(parts[:2]) != _PREFIX or parts[2] != f"v{CSV_FORMAT_VERSION}":
            raise ConfigParseError(f"{path} is not a pointgas v{CSV_FORMAT_VERSION} CSV")
        rows = list(csv.DictReader(fh))
    return parts[3], rows


__all__ = ["read_csv", "write_csv"]
