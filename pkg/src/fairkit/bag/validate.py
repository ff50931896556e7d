"""Completeness and validity checking for bags on disk.

``check`` never raises: every problem, including a structurally
unparseable bag, lands in the returned report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import PurePosixPath

from ..errors import FairError
from . import hashing
from .parse import open_source, read_bag

COMPLETE = "complete"
VALID = "valid"


@dataclass(frozen=True)
class Problem:
    severity: str
    code: str
    path: str
    detail: str


@dataclass
class BagValidationReport:
    is_complete: bool
    is_valid: bool
    problems: list[Problem] = field(default_factory=list)

    def codes(self) -> set[str]:
        return {p.code for p in self.problems}

    def paths(self, code: str) -> set[str]:
        return {p.path for p in self.problems if p.code == code}

    def to_dict(self) -> dict:
        return {
            "is_complete": self.is_complete,
            "is_valid": self.is_valid,
            "problems": [
                {"severity": p.severity, "code": p.code, "path": p.path, "detail": p.detail}
                for p in self.problems
            ],
        }


def check(location, level: str = VALID) -> BagValidationReport:
    """Check a serialized bag.

    ``complete`` verifies structure and path coverage only; ``valid``
    additionally recomputes every digest of every present file.
    """
    problems: list[Problem] = []
    try:
        bag = read_bag(location)
        source = open_source(location)
    except FairError as exc:
        problems.append(Problem("error", exc.code, str(location), exc.detail))
        return BagValidationReport(False, False, problems)

    names = set(source.names())
    payload_on_disk = {n for n in names if n.startswith("data/")}
    fetch_paths = bag.fetch_paths()
    manifest_paths: set[str] = set()
    tagmanifest_names = {f"tagmanifest-{alg}.txt" for alg, _ in bag.tag_manifests}

    if not bag.manifests:
        problems.append(Problem("error", "NoManifest", "", "bag has no payload manifest"))

    for alg, entries in bag.manifests:
        seen: set[str] = set()
        for entry in entries:
            manifest_paths.add(entry.path)
            if entry.path in seen:
                problems.append(Problem("error", "DuplicateManifestEntry", entry.path,
                                        f"listed twice in manifest-{alg}.txt"))
            seen.add(entry.path)
            if not entry.path.startswith("data/"):
                problems.append(Problem("error", "UnsafePath", entry.path,
                                        "payload manifest path outside data/"))
            elif entry.path not in payload_on_disk and entry.path not in fetch_paths:
                problems.append(Problem("error", "MissingPayload", entry.path,
                                        f"listed in manifest-{alg}.txt but absent"))

    for path in sorted(payload_on_disk - manifest_paths):
        problems.append(Problem("error", "UnlistedPayload", path,
                                "payload file not in any manifest"))
    for entry in bag.fetch:
        if entry.path not in manifest_paths:
            problems.append(Problem("error", "FetchNotInManifest", entry.path,
                                    "fetch entry not covered by a payload manifest"))
        if PurePosixPath(entry.path).is_absolute() or not entry.path.startswith("data/"):
            problems.append(Problem("error", "UnsafePath", entry.path,
                                    "fetch path outside data/"))

    for alg, entries in bag.tag_manifests:
        for entry in entries:
            if entry.path in tagmanifest_names:
                problems.append(Problem("error", "UnsafePath", entry.path,
                                        "tag manifest must not list a tag manifest"))
            elif entry.path not in names:
                problems.append(Problem("error", "MissingTag", entry.path,
                                        f"listed in tagmanifest-{alg}.txt but absent"))

    _check_oxum(bag, problems)

    is_complete = not problems
    if level == COMPLETE:
        # validity is only established by the digest pass below
        return BagValidationReport(is_complete, False, problems)

    # digests are verified even when completeness failed, so a report
    # names every tampered path the bag still contains
    _verify_digests(source, bag.manifests, names, problems)
    _verify_digests(source, bag.tag_manifests, names, problems)
    is_valid = not problems
    return BagValidationReport(is_complete, is_valid, problems)


def _check_oxum(bag, problems: list[Problem]) -> None:
    stored = bag.info_value("Payload-Oxum")
    if stored is None:
        return
    if any(f.length is None for f in bag.fetch):
        return  # oxum of the complete payload is unknowable
    expected = bag.payload_oxum()
    if stored != expected:
        problems.append(Problem("error", "OxumMismatch", "bag-info.txt",
                                f"Payload-Oxum is {stored}, recomputed {expected}"))


def _verify_digests(source, manifests, names: set[str], problems: list[Problem]) -> None:
    by_path: dict[str, list[tuple[str, str]]] = {}
    for alg, entries in manifests:
        for entry in entries:
            by_path.setdefault(entry.path, []).append((alg, entry.digest))
    for path in sorted(by_path, key=lambda p: p.encode("utf-8")):
        if path not in names:
            # pending fetch entries are verified at materialize time;
            # other absences were already reported as Missing*
            continue
        algs = [alg for alg, _ in by_path[path]]
        with source.open(path) as fh:
            actual, _ = hashing.digest_stream(fh, algs)
        for alg, expected in by_path[path]:
            if actual[alg] != expected:
                problems.append(Problem("error", "ChecksumMismatch", path,
                                        f"{alg} digest is {actual[alg]}, manifest says {expected}"))
