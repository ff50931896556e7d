"""Local identifier registry: mint, resolve, update, upgrade.

Persistence is a single append-only newline-delimited JSON log; an
in-memory index (id -> latest version) is rebuilt on startup by replay.
Records are immutable values, so reads need no locking; mutations are
serialized through one writer lock.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from ..canonical import append_jsonl, read_jsonl, rfc3339
from ..clock import SYSTEM_CLOCK, Clock
from ..errors import (
    CorruptLog,
    EmptyLocations,
    MalformedDigest,
    MalformedDoi,
    MalformedId,
    NotFound,
    SupersededImmutable,
)
from .idstring import IdString, new_id, parse_id

ACTIVE = "active"
SUPERSEDED = "superseded"

_HEX_RE = re.compile(r"^[0-9a-f]+$")
# "10.<registrant>/<suffix>"; the suffix itself may contain slashes.
_DOI_RE = re.compile(r"^10\.\d{4,9}(\.\d+)*/\S+$")

DIGEST_LENGTHS = {"sha256": 64, "sha512": 128, "md5": 32}


@dataclass(frozen=True)
class MinidRecord:
    id: IdString
    version: int
    creator: str
    created: str
    checksum: tuple[str, str]  # (algorithm, lowercase hex digest)
    locations: tuple[str, ...]
    title: str | None = None
    status: str = ACTIVE
    superseded_by: str | None = None

    def to_dict(self) -> dict:
        # fixed key order: this IS the log line and wire format
        return {
            "id": str(self.id),
            "version": self.version,
            "creator": self.creator,
            "created": self.created,
            "checksum": {"algorithm": self.checksum[0], "digest": self.checksum[1]},
            "locations": list(self.locations),
            "title": self.title,
            "status": self.status,
            "superseded_by": self.superseded_by,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MinidRecord":
        return cls(
            id=parse_id(data["id"]),
            version=int(data["version"]),
            creator=data["creator"],
            created=data["created"],
            checksum=(data["checksum"]["algorithm"], data["checksum"]["digest"]),
            locations=tuple(data["locations"]),
            title=data.get("title"),
            status=data.get("status", ACTIVE),
            superseded_by=data.get("superseded_by"),
        )


def _check_digest(checksum: tuple[str, str]) -> tuple[str, str]:
    algorithm, digest = checksum
    digest = digest.lower()
    expected = DIGEST_LENGTHS.get(algorithm)
    if expected is None:
        raise MalformedDigest(f"unknown algorithm {algorithm!r}")
    if len(digest) != expected or not _HEX_RE.match(digest):
        raise MalformedDigest(f"{algorithm} digest must be {expected} lowercase hex chars")
    return algorithm, digest


class Registry:
    """Append-only registry of identifier record versions."""

    def __init__(self, log_path: Path, clock: Clock = SYSTEM_CLOCK):
        self.log_path = Path(log_path)
        self.clock = clock
        self._lock = threading.Lock()
        self._log: list[MinidRecord] = []
        self._index: dict[str, MinidRecord] = {}
        for lineno, line in enumerate(read_jsonl(self.log_path), start=1):
            try:
                record = MinidRecord.from_dict(line)
            except (KeyError, TypeError, ValueError, MalformedId) as exc:
                raise CorruptLog(f"bad record in {self.log_path.name}: {exc!r}", lineno)
            self._log.append(record)
            self._index[str(record.id)] = record

    # -- queries --------------------------------------------------------

    def resolve(self, id_text: str | IdString) -> MinidRecord:
        key = str(parse_id(str(id_text)))
        record = self._index.get(key)
        if record is None:
            raise NotFound(key)
        return record

    def versions(self, id_text: str | IdString) -> list[MinidRecord]:
        key = str(parse_id(str(id_text)))
        found = [r for r in self._log if str(r.id) == key]
        if not found:
            raise NotFound(key)
        return found

    def __len__(self) -> int:
        return len(self._index)

    # -- mutations ------------------------------------------------------

    def _append(self, record: MinidRecord) -> MinidRecord:
        append_jsonl(self.log_path, record.to_dict())
        self._log.append(record)
        self._index[str(record.id)] = record
        return record

    def mint(
        self,
        creator: str,
        checksum: tuple[str, str],
        locations: Iterable[str],
        title: str | None = None,
        namespace: str = "MINID",
    ) -> MinidRecord:
        locations = tuple(locations)
        if not locations:
            raise EmptyLocations("a minted identifier needs at least one location")
        checksum = _check_digest(checksum)
        with self._lock:
            while True:
                id_string = new_id(namespace)
                if str(id_string) not in self._index:
                    break
            record = MinidRecord(
                id=id_string,
                version=1,
                creator=creator,
                created=rfc3339(self.clock.now()),
                checksum=checksum,
                locations=locations,
                title=title,
            )
            return self._append(record)

    def update_locations(
        self, id_text: str | IdString, new_locations: Iterable[str], actor: str
    ) -> MinidRecord:
        new_locations = tuple(new_locations)
        if not new_locations:
            raise EmptyLocations("location update needs at least one location")
        with self._lock:
            current = self.resolve(id_text)
            if current.status == SUPERSEDED:
                raise SupersededImmutable(str(current.id))
            updated = replace(
                current,
                version=current.version + 1,
                locations=new_locations,
            )
            return self._append(updated)

    def update_title(self, id_text: str | IdString, title: str, actor: str) -> MinidRecord:
        with self._lock:
            current = self.resolve(id_text)
            if current.status == SUPERSEDED:
                raise SupersededImmutable(str(current.id))
            return self._append(replace(current, version=current.version + 1, title=title))

    def upgrade(self, id_text: str | IdString, doi: str) -> MinidRecord:
        if not _DOI_RE.match(doi):
            raise MalformedDoi(doi)
        with self._lock:
            current = self.resolve(id_text)
            if current.status == SUPERSEDED:
                raise SupersededImmutable(str(current.id))
            upgraded = replace(
                current,
                version=current.version + 1,
                status=SUPERSEDED,
                superseded_by=doi,
            )
            return self._append(upgraded)
