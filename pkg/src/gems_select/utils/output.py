# gems_select/utils/output.py
"""Report writers: JSON and CSV with a provenance header and round-trip exact numbers."""

import csv
import importlib.metadata
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "both")


def get_version() -> str:
    """Project version from installed package metadata."""
    try:
        return importlib.metadata.version("gems-select")
    except importlib.metadata.PackageNotFoundError:
        return "unknown (package not installed)"


def format_number(value: Any) -> str:
    """17 significant digits for floats; inf and nan spelled out; None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return to_jsonable(value.tolist())
    return value


def provenance_header(config_hash: str, seed: int, command: str) -> Dict[str, Any]:
    return {
        "command": command,
        "config_hash": config_hash,
        "seed": seed,
        "version": get_version(),
    }


def error_object(exc: BaseException) -> Dict[str, str]:
    return {"error": type(exc).__name__, "message": str(exc)}


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True, allow_nan=False)


def write_json(path: Path, header: Dict[str, Any], body: Dict[str, Any]) -> Path:
    path.write_text(dumps({"header": header, **body}) + "\n", encoding="utf-8")
    return path


def write_csv(
    path: Path,
    header: Dict[str, Any],
    columns: Sequence[str],
    rows: Iterable[Mapping[str, Any]],
) -> Path:
    """Comment lines ``# key: value`` for the header, then one CSV row per record."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(header):
            fh.write(f"# {key}: {header[key]}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(row.get(c)) for c in columns])
    return path


def write_report(
    out_dir: Path,
    stem: str,
    fmt: str,
    header: Dict[str, Any],
    body: Dict[str, Any],
    columns: Sequence[str],
    rows: List[Mapping[str, Any]],
) -> List[Path]:
    """Write ``<stem>.json`` and/or ``<stem>.csv`` into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        written.append(write_json(out_dir / f"{stem}.json", header, body))
    if fmt in ("csv", "both"):
        written.append(write_csv(out_dir / f"{stem}.csv", header, columns, rows))
    for path in written:
        logger.info(f"Wrote {path}")
    return written
