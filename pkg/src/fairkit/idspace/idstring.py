"""Identifier grammar: ``NAMESPACE:SUFFIX`` with Crockford base-32
suffixes in hyphen-separated groups.

Catalog record IDs reuse this grammar (with the catalog's namespace),
so one parser covers both.
"""

from __future__ import annotations

import re
import secrets
import threading
from dataclasses import dataclass

from ..errors import MalformedId

# Crockford base-32: no I, L, O, U.
ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_NAMESPACE_RE = re.compile(r"^[A-Z][A-Z0-9_]*$")
_GROUP_RE = re.compile(rf"^[{ALPHABET}]{{1,4}}$")


@dataclass(frozen=True)
class IdString:
    namespace: str
    suffix: str

    def __str__(self) -> str:
        return f"{self.namespace}:{self.suffix}"

    @property
    def text(self) -> str:
        return str(self)


def parse_id(text: str) -> IdString:
    """Parse and case-normalize an identifier like ``SYNAPSE:1-1ACR``."""
    if not isinstance(text, str):
        raise MalformedId("identifier must be a string", 0)
    normalized = text.strip().upper()
    if ":" not in normalized:
        raise MalformedId("missing ':' between namespace and suffix", len(normalized))
    namespace, suffix = normalized.split(":", 1)
    if not _NAMESPACE_RE.match(namespace):
        raise MalformedId(f"bad namespace {namespace!r}", 0)
    if not suffix:
        raise MalformedId("empty suffix", len(namespace) + 1)
    offset = len(namespace) + 1
    for group in suffix.split("-"):
        if not _GROUP_RE.match(group):
            raise MalformedId(f"bad suffix group {group!r}", offset)
        offset += len(group) + 1
    return IdString(namespace, suffix)


def _encode_base32(value: int, chars: int) -> str:
    out = []
    for _ in range(chars):
        out.append(ALPHABET[value & 0x1F])
        value >>= 5
    return "".join(reversed(out))


class SuffixGenerator:
    """64 random bits plus a 16-bit monotonic sequence, grouped by 4.

    The random part makes collisions negligible at desk scale; the
    sequence part guarantees distinctness within one process even if
    the RNG misbehaves.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._seq = 0

    def generate(self) -> str:
        with self._lock:
            seq = self._seq & 0xFFFF
            self._seq += 1
        value = (secrets.randbits(64) << 16) | seq
        flat = _encode_base32(value, 16)
        return "-".join(flat[i:i + 4] for i in range(0, 16, 4))


_GENERATOR = SuffixGenerator()


def new_id(namespace: str) -> IdString:
    ns = namespace.strip().upper()
    if not _NAMESPACE_RE.match(ns):
        raise MalformedId(f"bad namespace {namespace!r}", 0)
    return IdString(ns, _GENERATOR.generate())
