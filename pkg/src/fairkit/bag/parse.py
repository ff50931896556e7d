"""Read bags back from a directory, zip, or tar serialization."""

from __future__ import annotations

import io
import json
import re
import tarfile
import zipfile
from pathlib import Path, PurePosixPath
from typing import BinaryIO

from ..errors import MalformedManifestLine, NotABag, UnsupportedAlgorithm, UnsupportedVersion
from . import hashing
from .model import MECHANISMS, Bag, FetchEntry, ManifestEntry, MetadataBlock, PayloadEntry
from .serialize import decode_path

_MANIFEST_RE = re.compile(r"^(?:tag)?manifest-([a-z0-9]+)\.txt$")
_SUPPORTED_VERSIONS = ("0.97", "1.0")


class BagSource:
    """Uniform byte access over the three serializations."""

    def __init__(self, location: Path):
        self.location = Path(location)

    def names(self) -> list[str]:
        raise NotImplementedError

    def read(self, relpath: str) -> bytes:
        raise NotImplementedError

    def open(self, relpath: str) -> BinaryIO:
        return io.BytesIO(self.read(relpath))

    def size(self, relpath: str) -> int:
        return len(self.read(relpath))

    def exists(self, relpath: str) -> bool:
        return relpath in set(self.names())


class DirSource(BagSource):
    def names(self) -> list[str]:
        out = []
        for path in sorted(self.location.rglob("*")):
            if path.is_file():
                out.append(path.relative_to(self.location).as_posix())
        return sorted(out, key=lambda p: p.encode("utf-8"))

    def read(self, relpath: str) -> bytes:
        return (self.location / Path(*relpath.split("/"))).read_bytes()

    def open(self, relpath: str) -> BinaryIO:
        return open(self.location / Path(*relpath.split("/")), "rb")

    def size(self, relpath: str) -> int:
        return (self.location / Path(*relpath.split("/"))).stat().st_size

    def exists(self, relpath: str) -> bool:
        return (self.location / Path(*relpath.split("/"))).is_file()


class _ArchiveSource(BagSource):
    """Base for archive-backed bags; strips the single top-level dir."""

    def __init__(self, location: Path):
        super().__init__(location)
        self._members = self._load()
        self._prefix = self._detect_prefix()

    def _load(self) -> dict[str, bytes]:
        raise NotImplementedError

    def _detect_prefix(self) -> str:
        roots = {name.split("/", 1)[0] for name in self._members}
        if len(roots) == 1 and f"{next(iter(roots))}/bagit.txt" in self._members:
            return next(iter(roots)) + "/"
        return ""

    def names(self) -> list[str]:
        names = [n[len(self._prefix):] for n in self._members if n.startswith(self._prefix)]
        return sorted((n for n in names if n), key=lambda p: p.encode("utf-8"))

    def read(self, relpath: str) -> bytes:
        return self._members[self._prefix + relpath]

    def exists(self, relpath: str) -> bool:
        return self._prefix + relpath in self._members


class ZipSource(_ArchiveSource):
    def _load(self) -> dict[str, bytes]:
        with zipfile.ZipFile(self.location) as zf:
            return {i.filename: zf.read(i) for i in zf.infolist() if not i.is_dir()}


class TarSource(_ArchiveSource):
    def _load(self) -> dict[str, bytes]:
        out = {}
        with tarfile.open(self.location) as tar:
            for member in tar.getmembers():
                if member.isfile():
                    out[member.name] = tar.extractfile(member).read()
        return out


def open_source(location: Path) -> BagSource:
    location = Path(location)
    if location.is_dir():
        return DirSource(location)
    if not location.exists():
        raise NotABag(f"{location}: no such file or directory")
    if zipfile.is_zipfile(location):
        return ZipSource(location)
    try:
        return TarSource(location)
    except tarfile.TarError:
        raise NotABag(f"{location}: not a bag directory or supported archive")


def _safe_relpath(encoded: str, lineno: int, filename: str) -> str:
    path = decode_path(encoded)
    pure = PurePosixPath(path)
    if pure.is_absolute() or ".." in pure.parts or path.startswith("~"):
        raise MalformedManifestLine(f"{filename}: path escapes bag root: {path!r}", lineno)
    return path


def parse_manifest(content: bytes, algorithm: str, filename: str) -> tuple[ManifestEntry, ...]:
    entries = []
    hex_len = hashing.DIGEST_HEX_LEN[algorithm]
    for lineno, line in enumerate(content.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        m = re.match(r"^([0-9a-fA-F]+) {1,2}(.+)$", line)
        if not m:
            raise MalformedManifestLine(f"{filename}: expected '<digest>  <path>'", lineno)
        digest, raw_path = m.group(1).lower(), m.group(2)
        if len(digest) != hex_len:
            raise MalformedManifestLine(
                f"{filename}: {algorithm} digest must be {hex_len} hex chars", lineno
            )
        entries.append(ManifestEntry(algorithm, digest, _safe_relpath(raw_path, lineno, filename)))
    return tuple(entries)


def parse_bag_info(content: bytes) -> tuple[tuple[str, str], ...]:
    pairs: list[tuple[str, str]] = []
    for lineno, line in enumerate(content.decode("utf-8").splitlines(), start=1):
        if line.startswith((" ", "\t")):
            if not pairs:
                raise MalformedManifestLine("bag-info.txt: continuation before any label", lineno)
            label, value = pairs[-1]
            pairs[-1] = (label, value + "\n" + line.lstrip())
        elif ": " in line:
            label, value = line.split(": ", 1)
            pairs.append((label, value))
        elif line.endswith(":"):
            pairs.append((line[:-1], ""))
        elif line.strip():
            raise MalformedManifestLine("bag-info.txt: expected 'Label: value'", lineno)
    return tuple(pairs)


def parse_fetch(content: bytes) -> tuple[FetchEntry, ...]:
    entries = []
    for lineno, line in enumerate(content.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        m = re.match(r"^(\S+) (\d+|-) (.+)$", line)
        if not m:
            raise MalformedManifestLine("fetch.txt: expected '<url> <length-or-dash> <path>'", lineno)
        url, length, raw_path = m.groups()
        entries.append(
            FetchEntry(url, None if length == "-" else int(length),
                       _safe_relpath(raw_path, lineno, "fetch.txt"))
        )
    return tuple(entries)


def _parse_bagit_txt(content: bytes) -> str:
    fields = dict(parse_bag_info(content))
    version = fields.get("BagIt-Version")
    if version is None:
        raise NotABag("bagit.txt lacks BagIt-Version")
    if version not in _SUPPORTED_VERSIONS:
        raise UnsupportedVersion(version)
    return version


def _parse_metadata(source: BagSource, names: set[str]) -> tuple[tuple[MetadataBlock, ...], set[str]]:
    blocks = []
    consumed: set[str] = set()
    for mechanism, tag_path in MECHANISMS.items():
        if tag_path not in names:
            continue
        body = json.loads(source.read(tag_path).decode("utf-8"))
        consumed.add(tag_path)
        if mechanism == "table-schema":
            data = {}
            for table in body.get("tables", []):
                csv_path = f"metadata/data/{table['name']}.csv"
                if csv_path in names:
                    data[table["name"]] = source.read(csv_path).decode("utf-8")
                    consumed.add(csv_path)
            body = dict(body, data=data)
        blocks.append(MetadataBlock(mechanism, body))
    blocks.sort(key=lambda b: b.mechanism)
    return tuple(blocks), consumed


def read_bag(location: Path) -> Bag:
    """Parse a serialized bag. Unknown tag files are preserved verbatim."""
    source = open_source(location)
    names = set(source.names())
    if "bagit.txt" not in names:
        raise NotABag(f"{location}: no bagit.txt")
    version = _parse_bagit_txt(source.read("bagit.txt"))

    manifests: list[tuple[str, tuple[ManifestEntry, ...]]] = []
    tag_manifests: list[tuple[str, tuple[ManifestEntry, ...]]] = []
    consumed = {"bagit.txt"}
    for name in sorted(names):
        m = _MANIFEST_RE.match(name)
        if not m:
            continue
        try:
            algorithm = hashing.normalize_algorithm(m.group(1))
        except UnsupportedAlgorithm:
            raise UnsupportedAlgorithm(f"{name}: unsupported checksum algorithm")
        entries = parse_manifest(source.read(name), algorithm, name)
        if name.startswith("tagmanifest-"):
            tag_manifests.append((algorithm, entries))
        else:
            manifests.append((algorithm, entries))
        consumed.add(name)

    bag_info: tuple[tuple[str, str], ...] = ()
    if "bag-info.txt" in names:
        bag_info = parse_bag_info(source.read("bag-info.txt"))
        consumed.add("bag-info.txt")
    fetch: tuple[FetchEntry, ...] = ()
    if "fetch.txt" in names:
        fetch = parse_fetch(source.read("fetch.txt"))
        consumed.add("fetch.txt")

    metadata, meta_consumed = _parse_metadata(source, names)
    consumed |= meta_consumed

    payload = tuple(
        PayloadEntry(name, source.size(name), _payload_source(source, name))
        for name in sorted((n for n in names if n.startswith("data/")),
                           key=lambda p: p.encode("utf-8"))
    )
    extra = tuple(
        (name, source.read(name))
        for name in sorted(names - consumed, key=lambda p: p.encode("utf-8"))
        if not name.startswith("data/")
    )
    return Bag(
        version=version,
        payload=payload,
        manifests=tuple(sorted(manifests)),
        tag_manifests=tuple(sorted(tag_manifests)),
        bag_info=bag_info,
        fetch=fetch,
        metadata=metadata,
        extra_tag_files=extra,
    )


def _payload_source(source: BagSource, name: str):
    if isinstance(source, DirSource):
        return source.location / Path(*name.split("/"))
    return source.read(name)
