"""Reading and writing result tables (CSV with a ``#`` header block, or JSONL)."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

from .sweep import SweepTable

__all__ = ["TableIOError", "write_table", "read_table", "format_value"]

FORMATS = ("csv", "jsonl")


class TableIOError(OSError):
    pass


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _parse_value(text: str):
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


def _meta_lines(meta: dict) -> list[str]:
    lines = []
    for key, value in meta.items():
        text = format_value(value).replace("\n", " ")
        lines.append(f"# {key}: {text}\n")
    return lines


def _render_csv(table: SweepTable) -> str:
    buf = _io.StringIO()
    buf.writelines(_meta_lines(table.meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _render_jsonl(table: SweepTable) -> str:
    lines = [json.dumps({"_meta": table.meta, "_columns": list(table.columns)}) + "\n"]
    for row in table.rows:
        lines.append(json.dumps({c: _json_value(v) for c, v in zip(table.columns, row)}) + "\n")
    return "".join(lines)


def write_table(table: SweepTable, fmt: str = "csv", path=None) -> str:
    """Serialize ``table``; write it to ``path`` if given and return the text.

    CSV floats carry 17 significant digits so a re-read is lossless.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    text = _render_csv(table) if fmt == "csv" else _render_jsonl(table)
    if path is not None and str(path) != "-":
        try:
            Path(path).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise TableIOError(f"cannot write {path}: {exc}") from exc
    return text


def read_table(path=None, text: str | None = None, fmt: str | None = None) -> SweepTable:
    """Inverse of :func:`write_table`; header comments come back as ``meta`` strings."""
    if text is None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise TableIOError(f"cannot read {path}: {exc}") from exc
    if fmt is None:
        fmt = "jsonl" if text.lstrip().startswith("{") else "csv"
    if fmt == "jsonl":
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        head = lines[0]
        columns = tuple(head["_columns"])
        rows = []
        for obj in lines[1:]:
            row = []
            for c in columns:
                v = obj[c]
                if isinstance(v, str) and v in ("nan", "inf", "-inf"):
                    v = float(v)
                row.append(v)
            rows.append(tuple(row))
        return SweepTable(columns, rows, head["_meta"])
    meta = {}
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    columns = tuple(next(reader))
    rows = [tuple(_parse_value(v) for v in row) for row in reader]
    return SweepTable(columns, rows, meta)
