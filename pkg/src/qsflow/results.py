"""Tabular experiment output with deterministic serialization.

CSV output is byte-reproducible for a fixed (config, seed): metadata is
emitted as sorted ``# key=value`` comment lines with volatile entries
(wall time) excluded, floats are printed in scientific notation with 17
significant digits so they re-parse to the exact double.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

__all__ = ["ResultTable", "emit", "format_cell"]

# metadata keys never written to CSV (not stable across reruns)
_VOLATILE_KEYS = {"wall_time_s"}


def _to_native(value):
    """Map numpy scalars to their Python equivalents; pass the rest through."""
    if hasattr(value, "item") and type(value).__module__ == "numpy":
        return value.item()
    return value


def format_cell(value) -> str:
    value = _to_native(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".16e")
    if isinstance(value, str):
        if any(ch in value for ch in ",\n\""):
            return '"' + value.replace('"', '""') + '"'
        return value
    raise TypeError(f"unsupported cell type {type(value).__name__}")


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arity = len(self.columns)
        for row in self.rows:
            if len(row) != arity:
                raise ValueError(
                    f"row arity {len(row)} does not match {arity} columns"
                )

    def to_csv(self) -> str:
        lines = []
        for key in sorted(self.metadata):
            if key in _VOLATILE_KEYS:
                continue
            lines.append(f"# {key}={self._meta_str(self.metadata[key])}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    @staticmethod
    def _meta_str(value) -> str:
        value = _to_native(value)
        if isinstance(value, (bool, float)):
            return format_cell(value)
        if isinstance(value, (dict, list)):
            return json.dumps(value, sort_keys=True, separators=(",", ":"))
        return str(value)

    def to_json(self) -> str:
        doc = {
            "columns": self.columns,
            "rows": [[_to_native(v) for v in r] for r in self.rows],
            "metadata": self.metadata,
        }
        return json.dumps(doc, sort_keys=True, indent=1, allow_nan=True, default=_to_native)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        return cls(
            columns=list(doc["columns"]),
            rows=[tuple(r) for r in doc["rows"]],
            metadata=dict(doc.get("metadata", {})),
        )

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        metadata = {}
        lines = [ln for ln in text.splitlines() if ln]
        body = []
        for ln in lines:
            if ln.startswith("# "):
                key, _, val = ln[2:].partition("=")
                metadata[key] = val
            else:
                body.append(ln)
        if not body:
            raise ValueError("CSV without header row")
        columns = body[0].split(",")
        rows = [tuple(_parse_cell(c) for c in ln.split(",")) for ln in body[1:]]
        return cls(columns=columns, rows=rows, metadata=metadata)

    def write(self, path, fmt: str = "csv") -> None:
        emit(self, fmt, path)


def emit(table: ResultTable, fmt: str, path) -> None:
    """Serialize a table to disk; fmt is 'csv' or 'json'."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = table.to_csv() if fmt == "csv" else table.to_json()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
