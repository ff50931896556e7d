"""Bind identifiers to the exact bytes of a bag."""

from __future__ import annotations

import hashlib
from typing import Iterable

from ..bag import Bag, archive_bytes
from .registry import MinidRecord, Registry


def bag_digest(bag: Bag, algorithm: str = "sha256") -> str:
    """Digest of the bag's deterministic tar archive (data and tags),
    so any modification of payload or metadata is detectable."""
    data = archive_bytes(bag, "tar", deterministic=True)
    return hashlib.new(algorithm, data).hexdigest()


def bind_bag(
    registry: Registry,
    bag: Bag,
    creator: str,
    locations: Iterable[str],
    namespace: str = "MINID",
    title: str | None = None,
) -> MinidRecord:
    """Mint an identifier whose checksum is the digest of the bag's
    deterministic archive form."""
    return registry.mint(
        creator=creator,
        checksum=("sha256", bag_digest(bag)),
        locations=locations,
        title=title,
        namespace=namespace,
    )
