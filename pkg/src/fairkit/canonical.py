"""Canonical JSON and timestamp conventions shared by all modules.

Wire rules pinned here: UTF-8, compact separators, caller-fixed key
order (Python dicts preserve insertion order), and RFC 3339 UTC
timestamps at second resolution.
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

from .errors import CorruptLog


def canonical_json(obj: Any) -> str:
    """Serialize *obj* compactly, preserving the caller's key order."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def rfc3339(ts: datetime | None = None) -> str:
    """UTC timestamp like ``2026-08-10T12:34:56Z`` (second resolution)."""
    dt = ts or datetime.now(timezone.utc)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_rfc3339(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def append_jsonl(path: Path, obj: Any, sync: bool = False) -> None:
    """Append one canonical JSON line, creating parent dirs as needed."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(canonical_json(obj) + "\n")
        fh.flush()
        if sync:
            os.fsync(fh.fileno())


def read_jsonl(path: Path) -> Iterator[dict]:
    """Yield one object per line.

    A truncated final line (no trailing newline, interrupted write) is
    ignored so that replay recovers the last consistent state; a bad
    line anywhere else raises :class:`CorruptLog`.
    """
    if not path.exists():
        return
    with open(path, "r", encoding="utf-8", newline="") as fh:
        raw = fh.read()
    lines = raw.split("\n")
    complete, tail = lines[:-1], lines[-1]
    for lineno, line in enumerate(complete, start=1):
        try:
            yield json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLog(f"unparseable log entry in {path.name}: {exc.msg}", lineno)
    if tail:
        try:
            yield json.loads(tail)
        except json.JSONDecodeError:
            pass  # interrupted append; drop it
