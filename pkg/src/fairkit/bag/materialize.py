"""Fill a holey bag by fetching its by-reference entries.

Each scheme (file, http, https, minid, ...) is served by a registered
handler. Fetched bytes are digest-verified while streaming; a mismatch
discards the partial file and fails the entry.
"""

from __future__ import annotations

import shutil
import urllib.parse
import urllib.request
from pathlib import Path
from typing import Callable, Iterator

from ..errors import DigestMismatchAfterFetch, FetchFailed, NoHandler
from . import hashing
from .build import refresh_tag_manifests
from .model import Bag
from .parse import read_bag
from .serialize import write_tag_files

Handler = Callable[[str], Iterator[bytes]]


def file_handler(url: str) -> Iterator[bytes]:
    parsed = urllib.parse.urlparse(url)
    path = urllib.parse.unquote(parsed.path)
    if parsed.netloc not in ("", "localhost"):
        raise FetchFailed(f"{url}: remote file URLs unsupported")
    try:
        with open(path, "rb") as fh:
            while True:
                block = fh.read(hashing.CHUNK)
                if not block:
                    return
                yield block
    except OSError as exc:
        raise FetchFailed(f"{url}: {exc}") from exc


def http_handler(url: str) -> Iterator[bytes]:
    try:
        with urllib.request.urlopen(url) as resp:
            while True:
                block = resp.read(hashing.CHUNK)
                if not block:
                    return
                yield block
    except OSError as exc:
        raise FetchFailed(f"{url}: {exc}") from exc


def default_resolvers() -> dict[str, Handler]:
    return {"file": file_handler, "http": http_handler, "https": http_handler}


def url_scheme(url: str) -> str:
    return url.split(":", 1)[0].lower() if ":" in url else ""


def materialize(bag_dir: Path, resolvers: dict[str, Handler] | None = None) -> Bag:
    """Fetch every fetch entry of the bag at *bag_dir* into place and
    rewrite the tag files with an empty fetch list.

    Digests from the payload manifests are verified during the fetch;
    on mismatch the partial file is discarded and the bag is left holey
    for the failed entry.
    """
    bag_dir = Path(bag_dir)
    resolvers = resolvers if resolvers is not None else default_resolvers()
    bag = read_bag(bag_dir)
    expected = bag.manifest_map()

    for entry in bag.fetch:
        scheme = url_scheme(entry.url)
        if scheme not in resolvers:
            raise NoHandler(scheme or entry.url)

    for entry in bag.fetch:
        per_alg = {
            alg: paths[entry.path] for alg, paths in expected.items() if entry.path in paths
        }
        _fetch_one(bag_dir, resolvers[url_scheme(entry.url)], entry, per_alg)

    materialized = read_bag(bag_dir)
    materialized = refresh_tag_manifests(
        Bag(
            version=materialized.version,
            payload=materialized.payload,
            manifests=materialized.manifests,
            bag_info=materialized.bag_info,
            fetch=(),
            metadata=materialized.metadata,
            extra_tag_files=materialized.extra_tag_files,
        )
    )
    fetch_txt = bag_dir / "fetch.txt"
    if fetch_txt.exists():
        fetch_txt.unlink()
    write_tag_files(materialized, bag_dir)
    return materialized


def _fetch_one(bag_dir: Path, handler: Handler, entry, per_alg: dict[str, str]) -> None:
    target = bag_dir / Path(*entry.path.split("/"))
    target.parent.mkdir(parents=True, exist_ok=True)
    partial = target.with_name(target.name + ".part")
    hashers = {alg: hashing.ALGORITHMS[alg]() for alg in per_alg}
    try:
        with open(partial, "wb") as out:
            for block in handler(entry.url):
                out.write(block)
                for h in hashers.values():
                    h.update(block)
    except Exception:
        partial.unlink(missing_ok=True)
        raise
    for alg, expected_digest in per_alg.items():
        if hashers[alg].hexdigest() != expected_digest:
            partial.unlink(missing_ok=True)
            raise DigestMismatchAfterFetch(
                f"{entry.path}: fetched {alg} digest {hashers[alg].hexdigest()}, "
                f"manifest says {expected_digest}"
            )
    shutil.move(str(partial), str(target))


def minid_handler(resolve, inner: dict[str, Handler]) -> Handler:
    """Handler for ``minid:NAMESPACE:SUFFIX`` URLs: resolve through the
    identifier registry, then fetch the first live location."""

    def handle(url: str) -> Iterator[bytes]:
        id_text = url.split(":", 1)[1]
        record = resolve(id_text)
        last_error: Exception | None = None
        for location in record.locations:
            scheme = url_scheme(location)
            if scheme not in inner:
                continue
            try:
                yield from inner[scheme](location)
                return
            except FetchFailed as exc:
                last_error = exc
        raise FetchFailed(f"{url}: no live location") from last_error

    return handle
