"""
Report Output

Writes result rows as CSV (primary) or a JSON mirror. Column order is fixed
per table and float formatting is fixed, so reruns with identical inputs give
byte-identical files.
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .config_manager import get_logger

logger = get_logger("report")

CURVE_COLUMNS = (
    "scheme",
    "key_qubits",
    "statistic",
    "method",
    "probability",
    "trials",
    "stderr",
    "seed",
)
CROSSVALIDATE_COLUMNS = (
    "scheme",
    "key_qubits",
    "statistic",
    "model",
    "analytic",
    "empirical",
    "stderr",
    "tolerance",
    "trials",
    "seed",
    "agree",
)
ATTACK_COLUMNS = (
    "protocol",
    "scheme",
    "target_wire",
    "copies",
    "trials",
    "detected",
    "inferred_correct",
    "inferred_wrong",
    "unknown",
    "seed",
)
FORMATS = ("csv", "json")


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    ordered = [{column: row.get(column) for column in columns} for row in rows]
    return json.dumps(ordered, indent=2) + "\n"


def render(rows: List[Dict[str, Any]], columns: Sequence[str], fmt: str = "csv") -> str:
    """Render rows in the requested format

    Raises:
        ValueError: unknown format
    """
    if fmt == "csv":
        return render_csv(rows, columns)
    if fmt == "json":
        return render_json(rows, columns)
    raise ValueError(f"Unknown output format '{fmt}' (known: {', '.join(FORMATS)})")


def write_report(
    rows: List[Dict[str, Any]],
    columns: Sequence[str],
    fmt: str = "csv",
    out: Optional[Path] = None,
) -> str:
    """Write rendered rows to `out`, or return them for stdout when out is None"""
    text = render(rows, columns, fmt)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as f:
            f.write(text)
        logger.info(f"Wrote {len(rows)} rows to {out}")
    return text


def write_json_lines(records: Iterable[Dict[str, Any]], path: Path) -> int:
    """One JSON document per line; returns the record count"""
    count = 0
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True))
            f.write("\n")
            count += 1
    return count
