"""
Utility functions for the laboratory.
Includes logging setup, config overrides and the deterministic report writers.
"""

import csv
import hashlib
import io
import json
import logging
import math
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import aiofiles
import colorlog
import numpy as np
from pydantic import BaseModel

from core.errors import ConfigError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(log_level: str = "INFO", log_dir: Optional[Path] = None) -> None:
    """
    Set up colored logging for the application.

    Args:
        log_level: The logging level (DEBUG, INFO, WARNING, ERROR)
        log_dir: Directory of the daily log file, `output/logs` when omitted
    """
    log_dir = Path(log_dir) if log_dir is not None else Path("output") / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)

    console_handler = colorlog.StreamHandler()
    console_handler.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s" + LOG_FORMAT,
            datefmt=DATE_FORMAT,
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'red,bg_white',
            }
        )
    )

    file_handler = logging.FileHandler(
        log_dir / f"stablegirsanov_{datetime.now().strftime('%Y%m%d')}.log",
        encoding='utf-8'
    )
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
    # repeated calls (tests, several commands in one process) replace the handlers
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)

    logging.getLogger("asyncio").setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.info(f"Logging initialized at {log_level} level")


def parse_override_value(text: str) -> Any:
    """JSON when it parses, the raw string otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(document: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply `a.b.c=value` overrides to a nested config document.

    Args:
        document: Parsed JSON config (left untouched)
        overrides: Items of the form dotted.path=value

    Returns:
        A new document with the overrides applied
    """
    result = json.loads(json.dumps(document))
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override '{item}' is not of the form key=value")
        parts = key.strip().split(".")
        node = result
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"override '{item}': '{part}' is not a section")
            node = child
        node[parts[-1]] = parse_override_value(raw)
    return result


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON data for reports.

    Non-finite floats become the strings "inf", "-inf" and "nan" so the
    output stays strict JSON.
    """
    if isinstance(value, BaseModel):
        cls = type(value)
        names = list(cls.model_fields) + list(cls.model_computed_fields)
        return {name: to_jsonable(getattr(value, name)) for name in names}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in value]
        return sorted(items, key=json.dumps) if isinstance(value, (set, frozenset)) else items
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    if isinstance(value, Path):
        return value.as_posix()
    if value is None or isinstance(value, str):
        return value
    return repr(value)


def dump_json(value: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def config_digest(value: Any, length: int = 12) -> str:
    """Short sha256 of the canonical JSON form."""
    canonical = json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:length]


def csv_text(rows: List[Dict[str, Any]]) -> str:
    """CSV with a header row; columns are the union of keys in first-seen order."""
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: to_jsonable(v) for k, v in row.items()})
    return buffer.getvalue()


async def write_text(path: Path, text: str) -> Path:
    """Write a text file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
        await f.write(text)
    return path


async def write_json(path: Path, value: Any) -> Path:
    return await write_text(path, dump_json(value))


async def write_csv(path: Path, rows: List[Dict[str, Any]]) -> Path:
    return await write_text(path, csv_text(rows))


async def write_jsonl(path: Path, records: List[Dict[str, Any]]) -> Path:
    lines = [json.dumps(to_jsonable(r), sort_keys=True) for r in records]
    return await write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def truncate_text(text: str, max_length: int = 300) -> str:
    """
    Truncate text to a maximum length with ellipsis.

    Args:
        text: The text to truncate
        max_length: Maximum length before truncation

    Returns:
        Truncated text
    """
    if len(text) <= max_length:
        return text
    return text[:max_length - 3] + "..."
