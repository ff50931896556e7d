"""Lightweight persistent identifiers bound to content checksums."""

from .binding import bag_digest, bind_bag
from .idstring import IdString, new_id, parse_id
from .registry import ACTIVE, SUPERSEDED, MinidRecord, Registry

__all__ = [
    "ACTIVE",
    "IdString",
    "MinidRecord",
    "Registry",
    "SUPERSEDED",
    "bag_digest",
    "bind_bag",
    "new_id",
    "parse_id",
]
