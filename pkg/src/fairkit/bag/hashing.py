"""Checksum algorithm registry and streaming digest helpers."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import BinaryIO, Iterable

from ..errors import UnsupportedAlgorithm

CHUNK = 1 << 16

# sha256 is mandatory in bags we produce, sha512 optional, md5 accepted
# on parse only (legacy bags).
ALGORITHMS = {
    "sha256": hashlib.sha256,
    "sha512": hashlib.sha512,
    "md5": hashlib.md5,
}
PRODUCIBLE = ("sha256", "sha512")
DIGEST_HEX_LEN = {"sha256": 64, "sha512": 128, "md5": 32}

_ALIASES = {"sha-256": "sha256", "sha-512": "sha512", "md-5": "md5"}


def normalize_algorithm(name: str) -> str:
    token = name.strip().lower()
    token = _ALIASES.get(token, token)
    if token not in ALGORITHMS:
        raise UnsupportedAlgorithm(name)
    return token


def check_producible(algorithms: Iterable[str]) -> list[str]:
    """Normalize *algorithms* for bag creation; md5 is read-only."""
    normalized = sorted({normalize_algorithm(a) for a in algorithms})
    if not normalized:
        raise UnsupportedAlgorithm("at least one checksum algorithm required")
    for alg in normalized:
        if alg not in PRODUCIBLE:
            raise UnsupportedAlgorithm(f"{alg} is accepted on parse but never produced")
    return normalized


def digest_stream(stream: BinaryIO, algorithms: Iterable[str]) -> tuple[dict[str, str], int]:
    hashers = {alg: ALGORITHMS[alg]() for alg in algorithms}
    size = 0
    while True:
        block = stream.read(CHUNK)
        if not block:
            break
        size += len(block)
        for h in hashers.values():
            h.update(block)
    return {alg: h.hexdigest() for alg, h in hashers.items()}, size


def digest_bytes(data: bytes, algorithms: Iterable[str]) -> dict[str, str]:
    return {alg: ALGORITHMS[alg](data).hexdigest() for alg in algorithms}


def digest_file(path: Path, algorithms: Iterable[str]) -> tuple[dict[str, str], int]:
    with open(path, "rb") as fh:
        return digest_stream(fh, algorithms)


def digest_files(
    paths: list[Path], algorithms: Iterable[str], workers: int = 8
) -> list[tuple[dict[str, str], int]]:
    """Digest many files concurrently, preserving input order."""
    algs = list(algorithms)
    if len(paths) <= 1 or workers <= 1:
        return [digest_file(p, algs) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: digest_file(p, algs), paths))
