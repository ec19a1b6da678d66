"""CSV and JSON report emission.

CSV output is RFC-4180 with reals written to 17 significant digits.  It opens
with ``#`` comment lines carrying the schema version, the resolved config and
the summary, followed by one header row and the data rows.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def format_cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


@dataclass
class Report:
    experiment: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool | None = None

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": _plain(self.config),
            "summary": _plain(self.summary),
            "pass": self.passed,
            "rows": [_plain({c: row.get(c) for c in self.columns}) for row in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} experiment={self.experiment}\r\n")
        buf.write("# config=" + json.dumps(_plain(self.config), sort_keys=True, allow_nan=False) + "\r\n")
        buf.write("# summary=" + json.dumps(_plain(self.summary), sort_keys=True, allow_nan=False) + "\r\n")
        buf.write("# pass=" + json.dumps(self.passed) + "\r\n")
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path, fmt: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.render(fmt))


def read_csv_rows(text: str) -> list[dict]:
    """Parse the data rows of a CSV report back into dicts of strings."""
    lines = [ln for ln in text.splitlines(keepends=True) if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))
