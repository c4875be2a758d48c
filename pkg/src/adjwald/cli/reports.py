"""Deterministic CSV/JSON serialisation of report tables."""

from __future__ import annotations

import json
import sys

SCHEMA_VERSION = 1


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def rows_to_csv(rows, fields):
    lines = [",".join(fields)]
    for row in rows:
        lines.append(",".join(_format_value(row.get(f)) for f in fields))
    return "\n".join(lines) + "\n"


def rows_to_json(rows, fields, meta=None):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "fields": list(fields),
        "rows": [
            {f: _json_value(row.get(f)) for f in fields if row.get(f) is not None}
            for row in rows
        ],
    }
    if meta:
        payload["meta"] = {k: _json_value(v) for k, v in meta.items()}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _json_value(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if hasattr(value, "item"):
        return value.item()
    return value


def emit(rows, fields, fmt="csv", path=None, meta=None):
    text = (
        rows_to_json(rows, fields, meta) if fmt == "json" else rows_to_csv(rows, fields)
    )
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as f:
            f.write(text)
    return text
