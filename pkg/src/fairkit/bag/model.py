"""In-memory bag model: an immutable aggregation of payload, manifests,
tag metadata, and by-reference (fetch) entries."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

BAG_VERSION = "1.0"
PAYLOAD_DIR = "data"
METADATA_DIR = "metadata"

# Tag file name per metadata mechanism; the mechanism fixes both the
# file name and the parse rules of the body.
MECHANISMS = {
    "research-object": f"{METADATA_DIR}/manifest.json",
    "key-value": f"{METADATA_DIR}/keyvalue.json",
    "table-schema": f"{METADATA_DIR}/table-schema.json",
}


@dataclass(frozen=True)
class PayloadEntry:
    """One payload file. ``path`` is bag-root-relative (``data/...``),
    like every path in this model. ``source`` supplies the bytes (a
    filesystem path or an in-memory blob) and is excluded from
    structural equality."""

    path: str
    size: int
    source: Union[Path, bytes] = field(compare=False, repr=False, default=b"")

    def read_bytes(self) -> bytes:
        if isinstance(self.source, bytes):
            return self.source
        return Path(self.source).read_bytes()


@dataclass(frozen=True)
class ManifestEntry:
    algorithm: str
    digest: str
    path: str


@dataclass(frozen=True)
class FetchEntry:
    url: str
    length: int | None  # None serializes as "-" (unknown length)
    path: str


@dataclass(frozen=True)
class MetadataBlock:
    mechanism: str
    body: dict

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown metadata mechanism: {self.mechanism}")

    @property
    def tag_path(self) -> str:
        return MECHANISMS[self.mechanism]


@dataclass(frozen=True)
class Bag:
    version: str = BAG_VERSION
    payload: tuple[PayloadEntry, ...] = ()
    manifests: tuple[tuple[str, tuple[ManifestEntry, ...]], ...] = ()
    tag_manifests: tuple[tuple[str, tuple[ManifestEntry, ...]], ...] = ()
    bag_info: tuple[tuple[str, str], ...] = ()
    fetch: tuple[FetchEntry, ...] = ()
    metadata: tuple[MetadataBlock, ...] = ()
    # Unknown tag files are preserved verbatim across read/write cycles.
    extra_tag_files: tuple[tuple[str, bytes], ...] = ()

    def __post_init__(self):
        mechanisms = [b.mechanism for b in self.metadata]
        if len(mechanisms) != len(set(mechanisms)):
            raise ValueError("a bag carries at most one metadata block per mechanism")

    def manifest_map(self) -> dict[str, dict[str, str]]:
        """algorithm -> path -> digest"""
        return {alg: {e.path: e.digest for e in entries} for alg, entries in self.manifests}

    def tag_manifest_map(self) -> dict[str, dict[str, str]]:
        return {alg: {e.path: e.digest for e in entries} for alg, entries in self.tag_manifests}

    def algorithms(self) -> list[str]:
        return [alg for alg, _ in self.manifests]

    def payload_paths(self) -> set[str]:
        return {p.path for p in self.payload}

    def fetch_paths(self) -> set[str]:
        return {f.path for f in self.fetch}

    def metadata_block(self, mechanism: str) -> MetadataBlock | None:
        for block in self.metadata:
            if block.mechanism == mechanism:
                return block
        return None

    def info_value(self, label: str) -> str | None:
        for key, value in self.bag_info:
            if key == label:
                return value
        return None

    def payload_oxum(self) -> str:
        """Recomputed ``octets.count`` over payload plus pending fetch
        entries (holey bags keep the Oxum of the complete payload)."""
        octets = sum(p.size for p in self.payload) + sum(f.length or 0 for f in self.fetch)
        count = len(self.payload) + len(self.fetch)
        return f"{octets}.{count}"

    def with_info(self, label: str, value: str) -> "Bag":
        pairs = [(k, v) for k, v in self.bag_info if k != label]
        pairs.append((label, value))
        return replace(self, bag_info=tuple(pairs))
