import random

import pytest

from fairkit.bag import (
    FetchEntry,
    archive_bytes,
    create_bag,
    make_holey,
    read_bag,
    refresh_tag_manifests,
    write_bag,
)
from fairkit.errors import (
    DestinationExists,
    MalformedManifestLine,
    NotABag,
    UnsupportedVersion,
)
from tests.conftest import random_bag


def test_write_then_read_round_trip(tmp_path, rng):
    bag = random_bag(tmp_path, rng, with_metadata=True, algorithms=("sha256", "sha512"))
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    assert read_bag(dest) == bag


def test_round_trip_unicode_and_encoded_paths(tmp_path, rng):
    bag = random_bag(tmp_path, rng, tricky_paths=True)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    back = read_bag(dest)
    assert back == bag
    assert back.payload_paths() == bag.payload_paths()


def test_deterministic_archives_are_identical(tmp_path, rng):
    bag = random_bag(tmp_path, rng, with_metadata=True)
    for fmt in ("tar", "zip"):
        assert archive_bytes(bag, fmt) == archive_bytes(bag, fmt)


def test_archive_round_trip_both_formats(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    for fmt in ("tar", "zip"):
        dest = tmp_path / f"bag.{fmt}"
        write_bag(bag, dest, fmt=fmt)
        assert read_bag(dest) == bag


def test_fetch_txt_one_line_per_entry(tmp_path, rng):
    bag = random_bag(tmp_path, rng, tag="fetchy")
    n = len(bag.payload)
    if n == 0:
        pytest.skip("generator produced an empty bag for this seed")
    holey = make_holey(bag, lambda p: True, lambda p: f"https://example.org/{p}")
    dest = tmp_path / "holey"
    write_bag(holey, dest)
    lines = (dest / "fetch.txt").read_text(encoding="utf-8").splitlines()
    assert len(lines) == n  # oracle: one line per fetch entry


def test_unknown_length_serializes_as_dash(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    (src / "f").write_bytes(b"xyz")
    bag = create_bag(src)
    holey = refresh_tag_manifests(
        bag.__class__(
            version=bag.version,
            payload=(),
            manifests=bag.manifests,
            bag_info=bag.bag_info,
            fetch=(FetchEntry("https://example.org/f", None, "data/f"),),
            metadata=bag.metadata,
            extra_tag_files=bag.extra_tag_files,
        )
    )
    dest = tmp_path / "bag"
    write_bag(holey, dest)
    assert (dest / "fetch.txt").read_text() == "https://example.org/f - data/f\n"
    assert read_bag(dest).fetch[0].length is None


def test_bagit_txt_is_exact(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    assert (dest / "bagit.txt").read_bytes() == (
        b"BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n"
    )


def test_manifest_lines_two_space_separated_and_sorted(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    (src / "b.txt").write_bytes(b"b")
    (src / "a.txt").write_bytes(b"a")
    bag = create_bag(src)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    lines = (dest / "manifest-sha256.txt").read_text().splitlines()
    paths = [line.split("  ", 1)[1] for line in lines]
    assert paths == sorted(paths, key=lambda p: p.encode("utf-8"))
    assert all("  " in line for line in lines)


def test_unknown_tag_file_preserved_verbatim(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    (dest / "custom-notes.txt").write_bytes(b"lab notes\x00binary ok\n")
    back = read_bag(dest)
    assert ("custom-notes.txt", b"lab notes\x00binary ok\n") in back.extra_tag_files
    dest2 = tmp_path / "bag2"
    write_bag(back, dest2)
    assert (dest2 / "custom-notes.txt").read_bytes() == b"lab notes\x00binary ok\n"


def test_destination_exists(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    with pytest.raises(DestinationExists):
        write_bag(bag, dest)


def test_not_a_bag(tmp_path):
    plain = tmp_path / "plain"
    plain.mkdir()
    (plain / "file.txt").write_text("hi")
    with pytest.raises(NotABag):
        read_bag(plain)


def test_single_token_manifest_line_is_malformed(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    (dest / "manifest-sha256.txt").write_text("deadbeef\n")
    with pytest.raises(MalformedManifestLine) as exc:
        read_bag(dest)
    assert exc.value.line_number == 1


def test_unsupported_version(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    dest = tmp_path / "bag"
    write_bag(bag, dest)
    (dest / "bagit.txt").write_text("BagIt-Version: 2.0\nTag-File-Character-Encoding: UTF-8\n")
    with pytest.raises(UnsupportedVersion):
        read_bag(dest)


def test_round_trip_many_random_bags(tmp_path):
    rng = random.Random(7)
    for i in range(25):
        bag = random_bag(tmp_path, rng, tag=f"b{i}", tricky_paths=(i % 3 == 0),
                         with_metadata=(i % 2 == 0))
        dest = tmp_path / f"bag{i}"
        write_bag(bag, dest)
        assert read_bag(dest) == bag, f"round trip failed for bag {i}"
