import random

import pytest

from fairkit.bag import (
    archive_bytes,
    check,
    create_bag,
    make_holey,
    materialize,
    read_bag,
    write_bag,
)
from fairkit.errors import DigestMismatchAfterFetch, MissingUrl, NoHandler
from tests.conftest import random_bag


def file_url_for(src_root):
    def url_for(path):
        # path is bag-root-relative ("data/..."); source tree layout matches
        return (src_root / path[len("data/"):]).resolve().as_uri()

    return url_for


def make_source(tmp_path, name, files):
    src = tmp_path / name
    src.mkdir()
    for rel, content in files.items():
        target = src / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(content)
    return src


def test_externalize_nothing_is_identity(tmp_path, rng):
    bag = random_bag(tmp_path, rng)
    assert make_holey(bag, lambda p: False, lambda p: "unused") == bag


def test_externalize_all_conserves_manifest_entries(tmp_path):
    src = make_source(tmp_path, "src", {f"f{i}": b"x" * i for i in range(1, 4)})
    bag = create_bag(src)
    holey = make_holey(bag, lambda p: True, lambda p: f"https://ex.org/{p}")
    assert holey.payload == ()
    assert len(holey.fetch) == 3
    [(_, entries)] = holey.manifests
    assert len(entries) == 3
    assert {f.length for f in holey.fetch} == {1, 2, 3}


def test_missing_url_raises(tmp_path):
    src = make_source(tmp_path, "src", {"a": b"a"})
    bag = create_bag(src)
    with pytest.raises(MissingUrl):
        make_holey(bag, lambda p: True, lambda p: None)


def test_materialize_restores_valid_bag_with_identical_bytes(tmp_path):
    files = {"one.bin": b"\x00\x01\x02", "sub/two.bin": b"payload two", "three.txt": b""}
    src = make_source(tmp_path, "src", files)
    bag = create_bag(src)

    holey = make_holey(bag, lambda p: True, file_url_for(src))
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)

    materialized = materialize(holey_dir)
    assert materialized.fetch == ()
    report = check(holey_dir)
    assert report.is_valid, report.problems
    for rel, content in files.items():
        assert (holey_dir / "data" / rel).read_bytes() == content


def test_materialized_bag_equals_original_full_bag(tmp_path):
    src = make_source(tmp_path, "src", {"a.bin": b"alpha", "b.bin": b"beta"})
    bag = create_bag(src)
    full_dir = tmp_path / "full"
    write_bag(bag, full_dir)

    holey = make_holey(bag, lambda p: p.endswith("a.bin"), file_url_for(src))
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)
    materialize(holey_dir)

    assert read_bag(holey_dir) == read_bag(full_dir)
    assert archive_bytes(read_bag(holey_dir)) == archive_bytes(bag)


def test_digest_mismatch_discards_partial_file(tmp_path):
    src = make_source(tmp_path, "src", {"a.bin": b"original"})
    bag = create_bag(src)
    holey = make_holey(bag, lambda p: True, file_url_for(src))
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)

    (src / "a.bin").write_bytes(b"tampered")  # server content drifts
    with pytest.raises(DigestMismatchAfterFetch):
        materialize(holey_dir)
    assert not (holey_dir / "data" / "a.bin").exists()
    assert not (holey_dir / "data" / "a.bin.part").exists()


def test_no_handler_for_scheme(tmp_path):
    src = make_source(tmp_path, "src", {"a.bin": b"a"})
    bag = create_bag(src)
    holey = make_holey(bag, lambda p: True, lambda p: f"sftp://ex.org/{p}")
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)
    with pytest.raises(NoHandler):
        materialize(holey_dir, {"file": lambda url: iter(())})


def test_holey_equivalence_over_random_predicates(tmp_path):
    rng = random.Random(99)
    for i in range(10):
        src = tmp_path / f"s{i}"
        src.mkdir()
        files = {f"f{j}.bin": rng.randbytes(rng.randint(0, 64)) for j in range(rng.randint(1, 6))}
        for rel, content in files.items():
            (src / rel).write_bytes(content)
        bag = create_bag(src)
        chosen = {f"data/{name}" for name in files if rng.random() < 0.5}
        holey = make_holey(bag, lambda p, c=chosen: p in c, file_url_for(src))
        dest = tmp_path / f"h{i}"
        write_bag(holey, dest)
        materialize(dest)
        report = check(dest)
        assert report.is_valid, (i, report.problems)
        for rel, content in files.items():
            assert (dest / "data" / rel).read_bytes() == content
