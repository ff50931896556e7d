import random
import string
from pathlib import Path

import pytest

from fairkit.bag import MetadataBlock, create_bag

# Alphabet for generated payload paths: plain ASCII, unicode, spaces,
# and the characters that force percent-encoding in manifests.
SEGMENT_CHARS = string.ascii_letters + string.digits + "-_. " + "äöüßéλ中"
TRICKY_CHARS = "\r\n%"


def random_segment(rng: random.Random, tricky: bool) -> str:
    length = rng.randint(1, 12)
    chars = SEGMENT_CHARS + (TRICKY_CHARS if tricky else "")
    seg = "".join(rng.choice(chars) for _ in range(length))
    seg = seg.strip(" ")  # no leading/trailing blanks in file names
    if not seg or seg in (".", "..") or seg.startswith("tagmanifest"):
        return random_segment(rng, tricky)
    return seg


def populate_tree(root: Path, rng: random.Random, n_files: int, tricky_paths: bool = False) -> None:
    used = set()
    for _ in range(n_files):
        depth = rng.randint(0, 2)
        parts = [random_segment(rng, tricky_paths) for _ in range(depth + 1)]
        rel = "/".join(parts)
        if rel in used or any(rel.startswith(u + "/") or u.startswith(rel + "/") for u in used):
            continue
        used.add(rel)
        target = root.joinpath(*parts)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(rng.randbytes(rng.randint(0, 512)))


def random_bag(tmp_path: Path, rng: random.Random, tag: str = "bag", tricky_paths: bool = False,
               with_metadata: bool = False, algorithms=("sha256",)):
    src = tmp_path / f"src-{tag}"
    src.mkdir()
    populate_tree(src, rng, rng.randint(0, 8), tricky_paths=tricky_paths)
    info = [("Source-Organization", "fairkit tests"), ("External-Identifier", tag)]
    metadata = None
    if with_metadata:
        metadata = MetadataBlock("key-value", {"experiment": tag, "instrument": "spim-1"})
    return create_bag(src, algorithms=algorithms, info=info, metadata=metadata)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260810)
