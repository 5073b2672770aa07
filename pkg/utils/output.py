"""
Output writers - CSV and JSON with a fixed, deterministic layout
"""

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from utils.errors import OutputError
from utils.logger import setup_logger

logger = setup_logger(__name__)

SIGNIFICANT_DIGITS = 12


def format_number(value: Any) -> str:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return str(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def _json_safe(value: Any) -> Any:
    """Non-finite floats become strings so the document stays strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def render_csv(rows: Sequence[Dict[str, Any]], headers: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([format_number(row[header]) for header in headers])
    return buffer.getvalue()


def render_json(document: Any) -> str:
    return json.dumps(_json_safe(document), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_text(text: str, out: Optional[str]) -> None:
    """Write to a file, or to stdout when out is None or '-'"""
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        path = Path(out)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"Cannot write output to {out}: {e.strerror or e}") from e
    logger.info(f"Results saved to {out}")


def write_rows(rows: List[Dict[str, Any]], headers: Sequence[str], fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        write_text(render_csv(rows, headers), out)
    else:
        write_text(render_json(rows), out)


def sidecar_path(out: Optional[str]) -> Optional[str]:
    if out is None or out == "-":
        return None
    return f"{out}.meta.json"
