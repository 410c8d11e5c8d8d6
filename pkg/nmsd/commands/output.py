"""
Report output.

Wraps command results in the versioned envelope and writes them as JSON or,
for tabular payloads, CSV.
"""

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from nmsd.models.results import ReportEnvelope, to_builtin


@dataclass
class CommandOutput:
    """
    What a subcommand handler hands back to the dispatcher.

    Attributes:
        results: JSON payload
        rows: Table used by --format csv; None flattens the payload instead
        warnings: Diagnostic messages for the envelope
        config: Effective settings merged into the config echo
    """
    results: Dict[str, Any]
    rows: Optional[List[Dict[str, Any]]] = None
    warnings: List[str] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)


def flatten(value: Any, prefix: str = "") -> List[Dict[str, Any]]:
    """Flatten nested results into key/value rows with dotted keys."""
    if isinstance(value, dict):
        rows = []
        for key, item in value.items():
            rows.extend(flatten(item, f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        rows = []
        for i, item in enumerate(value, start=1):
            rows.extend(flatten(item, f"{prefix}[{i}]"))
        return rows
    if isinstance(value, list):
        value = ";".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    return [{"key": prefix, "value": value}]


def render(envelope: ReportEnvelope, fmt: str, rows: Optional[List[Dict[str, Any]]] = None) -> str:
    """Render an envelope as JSON text or its results as CSV text."""
    if fmt == "json":
        return json.dumps(envelope.to_dict(), indent=2) + "\n"
    table = to_builtin(rows) if rows is not None else flatten(to_builtin(envelope.results))
    buffer = io.StringIO()
    if table:
        columns = list(dict.fromkeys(key for row in table for key in row))
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(table)
    return buffer.getvalue()


def emit(text: str, out: Optional[str] = None) -> None:
    """Write rendered output to a file or stdout."""
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
