"""Bit-exact bag serialization: directory layout, tag-file rendering,
and deterministic zip/tar archives.

Surface rules pinned here:
  - all text tag files are UTF-8 with LF line endings
  - manifest lines are ``<digest>  <path>`` (two spaces), sorted by the
    percent-encoded path, byte-wise
  - CR, LF, and ``%`` in manifest/fetch paths are percent-encoded
  - fetch lines are ``<url> <length-or-dash> <path>`` (single spaces)
  - deterministic archives order members by path bytes with fixed
    timestamps, so equal bags yield byte-identical archives
"""

from __future__ import annotations

import io
import json
import shutil
import tarfile
import time
import zipfile
from pathlib import Path

from ..errors import DestinationExists, IoFailure
from . import hashing
from .model import Bag, ManifestEntry, MetadataBlock

BAGIT_TXT = "BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"


def encode_path(path: str) -> str:
    return path.replace("%", "%25").replace("\r", "%0D").replace("\n", "%0A")


def decode_path(encoded: str) -> str:
    return encoded.replace("%0D", "\r").replace("%0A", "\n").replace("%25", "%")


def _sort_key(path: str) -> bytes:
    return encode_path(path).encode("utf-8")


def render_manifest(entries: tuple[ManifestEntry, ...]) -> bytes:
    ordered = sorted(entries, key=lambda e: _sort_key(e.path))
    return "".join(f"{e.digest}  {encode_path(e.path)}\n" for e in ordered).encode("utf-8")


def render_bag_info(pairs: tuple[tuple[str, str], ...]) -> bytes:
    out: list[str] = []
    for label, value in pairs:
        first, *rest = value.split("\n")
        out.append(f"{label}: {first}\n")
        # long/multi-line values continue on indented lines
        out.extend(f"    {line}\n" for line in rest)
    return "".join(out).encode("utf-8")


def render_fetch(entries) -> bytes:
    lines = []
    for e in sorted(entries, key=lambda e: _sort_key(e.path)):
        length = "-" if e.length is None else str(e.length)
        lines.append(f"{e.url} {length} {encode_path(e.path)}\n")
    return "".join(lines).encode("utf-8")


def render_metadata_block(block: MetadataBlock) -> dict[str, bytes]:
    """Tag files contributed by one metadata block, keyed by path."""
    if block.mechanism == "table-schema":
        descriptor = dict(block.body)
        data = descriptor.pop("data", {})
        files = {
            block.tag_path: _json_bytes(descriptor),
        }
        for table, csv_text in sorted(data.items()):
            files[f"metadata/data/{table}.csv"] = csv_text.encode("utf-8")
        return files
    return {block.tag_path: _json_bytes(block.body)}


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode("utf-8")


def tag_file_bytes(bag: Bag) -> dict[str, bytes]:
    """Every tag file except the tag manifests themselves."""
    files: dict[str, bytes] = {"bagit.txt": BAGIT_TXT.encode("utf-8")}
    if bag.bag_info:
        files["bag-info.txt"] = render_bag_info(bag.bag_info)
    for alg, entries in bag.manifests:
        files[f"manifest-{alg}.txt"] = render_manifest(entries)
    if bag.fetch:
        files["fetch.txt"] = render_fetch(bag.fetch)
    for block in bag.metadata:
        files.update(render_metadata_block(block))
    for path, content in bag.extra_tag_files:
        files[path] = content
    return files


def compute_tag_manifests(
    tag_files: dict[str, bytes], algorithms: list[str]
) -> tuple[tuple[str, tuple[ManifestEntry, ...]], ...]:
    result = []
    for alg in algorithms:
        entries = tuple(
            ManifestEntry(alg, hashing.digest_bytes(content, [alg])[alg], path)
            for path, content in sorted(tag_files.items(), key=lambda kv: _sort_key(kv[0]))
        )
        result.append((alg, entries))
    return tuple(result)


def all_tag_files(bag: Bag) -> dict[str, bytes]:
    """Every tag file including the tag manifests."""
    files = tag_file_bytes(bag)
    for alg, entries in compute_tag_manifests(files, bag.algorithms()):
        files[f"tagmanifest-{alg}.txt"] = render_manifest(entries)
    return files


def _all_files(bag: Bag) -> list[tuple[str, bytes]]:
    """(archive-relative path, content) for every bag member, in the
    deterministic member order (byte-wise by encoded path)."""
    files = all_tag_files(bag)
    for entry in bag.payload:
        files[entry.path] = entry.read_bytes()
    return sorted(files.items(), key=lambda kv: _sort_key(kv[0]))


def write_bag(bag: Bag, dest: Path, deterministic: bool = True, fmt: str = "dir") -> Path:
    """Serialize *bag* to *dest* as a directory, ``zip``, or ``tar``."""
    dest = Path(dest)
    if dest.exists():
        raise DestinationExists(str(dest))
    try:
        if fmt == "dir":
            _write_dir(bag, dest)
        elif fmt in ("zip", "tar"):
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_bytes(archive_bytes(bag, fmt, deterministic=deterministic))
        else:
            raise IoFailure(f"unknown bag format: {fmt}")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return dest


def write_tag_files(bag: Bag, root: Path) -> None:
    """(Re)write only the tag files of a bag directory, leaving data/
    alone. Used after materialize rewrites the fetch list."""
    for relpath, content in sorted(all_tag_files(bag).items(), key=lambda kv: _sort_key(kv[0])):
        target = root / Path(*relpath.split("/"))
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(content)


def _write_dir(bag: Bag, root: Path) -> None:
    root.mkdir(parents=True)
    (root / "data").mkdir()
    write_tag_files(bag, root)
    for entry in bag.payload:
        target = root / Path(*entry.path.split("/"))
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(entry.source, Path):
            shutil.copyfile(entry.source, target)
        else:
            target.write_bytes(entry.source)


def archive_bytes(bag: Bag, fmt: str = "tar", deterministic: bool = True) -> bytes:
    """Archive form of *bag*. With deterministic=True, member order is
    total and timestamps are fixed, so equal bags give equal bytes."""
    members = _all_files(bag)
    buf = io.BytesIO()
    if fmt == "tar":
        with tarfile.open(fileobj=buf, mode="w") as tar:
            for relpath, content in members:
                info = tarfile.TarInfo(name=f"bag/{relpath}")
                info.size = len(content)
                info.mtime = 0 if deterministic else int(time.time())
                info.mode = 0o644
                info.uid = info.gid = 0
                info.uname = info.gname = ""
                tar.addfile(info, io.BytesIO(content))
    elif fmt == "zip":
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            for relpath, content in members:
                # zip cannot express 1970; DOS epoch is the fixed stamp
                info = zipfile.ZipInfo(f"bag/{relpath}", date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                info.external_attr = 0o644 << 16
                zf.writestr(info, content)
    else:
        raise IoFailure(f"unknown archive format: {fmt}")
    return buf.getvalue()
