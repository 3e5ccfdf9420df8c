"""Rendering of reports as aligned tables, JSON or CSV."""

import csv
import io
import json
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel

Record = Union[BaseModel, Dict[str, Any]]


def to_dict(record: Record) -> Dict[str, Any]:
    """JSON-ready mapping of a model or plain dict."""
    if isinstance(record, BaseModel):
        return record.model_dump(mode="json", by_alias=True)
    return dict(record)


def _flat(value: Any) -> str:
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _columns(rows: List[Dict[str, Any]], columns: Optional[Sequence[str]]) -> List[str]:
    if columns:
        return list(columns)
    return list(rows[0].keys()) if rows else []


def render_table(records: Sequence[Record], columns: Optional[Sequence[str]] = None) -> str:
    """Left-aligned text table with a header rule."""
    rows = [to_dict(r) for r in records]
    cols = _columns(rows, columns)
    if not cols:
        return ""
    cells = [[_flat(row.get(c)) for c in cols] for row in rows]
    widths = [max([len(c)] + [len(line[i]) for line in cells]) for i, c in enumerate(cols)]

    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for line in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(line, widths)).rstrip())
    return "\n".join(lines)


def render_csv(records: Sequence[Record], columns: Optional[Sequence[str]] = None) -> str:
    """CSV with a header row; nested values are compact JSON."""
    rows = [to_dict(r) for r in records]
    cols = _columns(rows, columns)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_flat(row.get(c)) for c in cols])
    return buffer.getvalue().rstrip("\n")


def render_json(records: Union[Record, Sequence[Record]]) -> str:
    if isinstance(records, (BaseModel, dict)):
        return json.dumps(to_dict(records), indent=2)
    return json.dumps([to_dict(r) for r in records], indent=2)


def render(
    records: Union[Record, Sequence[Record]],
    fmt: str,
    columns: Optional[Sequence[str]] = None,
) -> str:
    """Render one record or a list in ``table``, ``json`` or ``csv`` form."""
    if fmt == "json":
        return render_json(records)
    many = records if isinstance(records, (list, tuple)) else [records]
    if fmt == "csv":
        return render_csv(many, columns)
    return render_table(many, columns)
