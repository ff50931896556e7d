"""Create bags from directory trees and turn payload into fetch references."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable

from ..canonical import rfc3339
from ..errors import MissingUrl, UnreadableSource
from . import hashing
from .model import Bag, FetchEntry, ManifestEntry, MetadataBlock, PayloadEntry
from .serialize import compute_tag_manifests, encode_path, tag_file_bytes


def create_bag(
    source_dir: Path,
    algorithms: Iterable[str] = ("sha256",),
    info: Iterable[tuple[str, str]] = (),
    metadata: MetadataBlock | None = None,
    workers: int = 8,
) -> Bag:
    """Package every file under *source_dir* into a valid bag.

    Each payload file is digested under every requested algorithm and
    Payload-Oxum is computed. The source files are referenced, not
    copied; serialization happens in :func:`write_bag`.
    """
    source_dir = Path(source_dir)
    if not source_dir.is_dir():
        raise UnreadableSource(str(source_dir))
    algs = hashing.check_producible(algorithms)

    files = sorted(
        (p for p in source_dir.rglob("*") if p.is_file()),
        key=lambda p: p.relative_to(source_dir).as_posix().encode("utf-8"),
    )
    try:
        digests = hashing.digest_files(files, algs, workers=workers)
    except OSError as exc:
        raise UnreadableSource(str(exc)) from exc

    payload = []
    manifest_entries: dict[str, list[ManifestEntry]] = {alg: [] for alg in algs}
    total = 0
    for path, (digest_map, size) in zip(files, digests):
        rel = "data/" + path.relative_to(source_dir).as_posix()
        payload.append(PayloadEntry(rel, size, path))
        total += size
        for alg in algs:
            manifest_entries[alg].append(ManifestEntry(alg, digest_map[alg], rel))

    info_pairs = [(str(k), str(v)) for k, v in info]
    labels = {k for k, _ in info_pairs}
    if "Bagging-Date" not in labels:
        info_pairs.append(("Bagging-Date", rfc3339()[:10]))
    info_pairs = [(k, v) for k, v in info_pairs if k != "Payload-Oxum"]
    info_pairs.append(("Payload-Oxum", f"{total}.{len(payload)}"))

    bag = Bag(
        payload=tuple(payload),
        manifests=tuple(
            (alg, tuple(sorted(manifest_entries[alg], key=lambda e: _entry_key(e))))
            for alg in algs
        ),
        bag_info=tuple(info_pairs),
        metadata=(metadata,) if metadata else (),
    )
    return refresh_tag_manifests(bag)


def _entry_key(entry: ManifestEntry) -> bytes:
    return encode_path(entry.path).encode("utf-8")


def refresh_tag_manifests(bag: Bag) -> Bag:
    """Recompute tag manifests from the current tag-file bytes."""
    tags = tag_file_bytes(bag)
    return replace(bag, tag_manifests=compute_tag_manifests(tags, bag.algorithms()))


def make_holey(
    bag: Bag,
    externalize: Callable[[str], bool],
    url_for: Callable[[str], str],
) -> Bag:
    """Replace payload entries matched by *externalize* with fetch
    entries. Manifests are untouched, so fetched content stays
    checksum-verifiable; Payload-Oxum keeps describing the complete
    payload."""
    keep, out = [], []
    for entry in bag.payload:
        if not externalize(entry.path):
            keep.append(entry)
            continue
        try:
            url = url_for(entry.path)
        except KeyError:
            url = None
        if not url:
            raise MissingUrl(entry.path)
        out.append(FetchEntry(url=url, length=entry.size, path=entry.path))
    if not out:
        return bag
    holey = replace(
        bag,
        payload=tuple(keep),
        fetch=tuple(sorted(bag.fetch + tuple(out), key=lambda f: _fetch_key(f))),
    )
    return refresh_tag_manifests(holey)


def _fetch_key(entry: FetchEntry) -> bytes:
    return encode_path(entry.path).encode("utf-8")
