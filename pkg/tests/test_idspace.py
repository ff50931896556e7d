import json
import threading

import pytest

from fairkit.bag import create_bag, make_holey, materialize, minid_handler, write_bag
from fairkit.bag.materialize import default_resolvers
from fairkit.errors import (
    EmptyLocations,
    MalformedDigest,
    MalformedDoi,
    MalformedId,
    NotFound,
    SupersededImmutable,
)
from fairkit.idspace import Registry, bag_digest, bind_bag, parse_id

SHA = "a" * 64


@pytest.fixture
def registry(tmp_path):
    return Registry(tmp_path / "registry.log")


def test_parse_paper_id_exactly():
    parsed = parse_id("SYNAPSE:1-1ACR")
    assert parsed.namespace == "SYNAPSE"
    assert parsed.suffix == "1-1ACR"
    assert str(parsed) == "SYNAPSE:1-1ACR"


def test_parse_normalizes_case():
    assert parse_id("synapse:1-1acr") == parse_id("SYNAPSE:1-1ACR")


@pytest.mark.parametrize("bad", ["SYNAPSE:", ":1-1ACR", "SYNAPSE", "SYNAPSE:1-1ILO",
                                 "SYNAPSE:ABCDE", "SYNAPSE:1--1", "9GROUP:1-1ACR"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(MalformedId):
        parse_id(bad)


def test_mint_then_resolve_round_trip(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://ex.org/d1"], title="d1")
    resolved = registry.resolve(record.id)
    assert resolved == record
    assert resolved.status == "active"
    assert resolved.version == 1


def test_mint_requires_locations(registry):
    with pytest.raises(EmptyLocations):
        registry.mint("alice", ("sha256", SHA), [])


def test_mint_rejects_malformed_digest(registry):
    with pytest.raises(MalformedDigest):
        registry.mint("alice", ("sha256", "zz"), ["https://ex.org"])
    with pytest.raises(MalformedDigest):
        registry.mint("alice", ("whirlpool", SHA), ["https://ex.org"])


def test_unknown_id_not_found(registry):
    with pytest.raises(NotFound):
        registry.resolve("MINID:AAAA-AAAA-AAAA-AAAA")


def test_locations_keep_insertion_order(registry):
    locs = ["https://a.example", "https://b.example", "https://c.example"]
    record = registry.mint("alice", ("sha256", SHA), locs)
    assert list(registry.resolve(record.id).locations) == locs


def test_update_locations_appends_version(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://old.example"])
    updated = registry.update_locations(record.id, ["https://new.example"], actor="bob")
    assert updated.version == 2
    assert updated.checksum == record.checksum
    assert registry.resolve(record.id).locations == ("https://new.example",)
    assert [r.version for r in registry.versions(record.id)] == [1, 2]


def test_two_updates_leave_three_versions(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://1.example"])
    registry.update_locations(record.id, ["https://2.example"], actor="alice")
    registry.update_locations(record.id, ["https://3.example"], actor="alice")
    assert len(registry.versions(record.id)) == 3


def test_upgrade_with_paper_doi(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://ex.org"])
    upgraded = registry.upgrade(record.id, "10.25551/1/1-1F6W")
    assert upgraded.status == "superseded"
    assert upgraded.superseded_by == "10.25551/1/1-1F6W"
    # resolution keeps working after upgrade
    assert registry.resolve(record.id).superseded_by == "10.25551/1/1-1F6W"


def test_upgrade_rejects_bad_doi(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://ex.org"])
    with pytest.raises(MalformedDoi):
        registry.upgrade(record.id, "doi.org/xyz")


def test_superseded_records_are_immutable(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://ex.org"])
    registry.upgrade(record.id, "10.25551/9/XYZ")
    with pytest.raises(SupersededImmutable):
        registry.update_locations(record.id, ["https://n.example"], actor="alice")


def test_registry_survives_restart(tmp_path):
    log = tmp_path / "registry.log"
    first = Registry(log)
    record = first.mint("alice", ("sha256", SHA), ["https://ex.org"])
    first.update_locations(record.id, ["https://moved.example"], actor="alice")

    reopened = Registry(log)
    assert reopened.resolve(record.id).locations == ("https://moved.example",)
    assert len(reopened.versions(record.id)) == 2


def test_truncated_final_line_is_dropped_on_replay(tmp_path):
    log = tmp_path / "registry.log"
    registry = Registry(log)
    keep = registry.mint("alice", ("sha256", SHA), ["https://keep.example"])
    with open(log, "a", encoding="utf-8") as fh:
        fh.write('{"id": "MINID:TRUN')  # interrupted append, no newline

    recovered = Registry(log)
    assert len(recovered) == 1
    assert recovered.resolve(keep.id).locations == ("https://keep.example",)


def test_log_lines_have_fixed_key_order(tmp_path):
    log = tmp_path / "registry.log"
    Registry(log).mint("alice", ("sha256", SHA), ["https://ex.org"], title="t")
    line = log.read_text().splitlines()[0]
    assert list(json.loads(line).keys()) == [
        "id", "version", "creator", "created", "checksum",
        "locations", "title", "status", "superseded_by",
    ]


def test_mint_batch_distinct_and_concurrent(registry):
    ids = []
    lock = threading.Lock()

    def mint_some(n):
        for _ in range(n):
            record = registry.mint("alice", ("sha256", SHA), ["https://ex.org"])
            with lock:
                ids.append(str(record.id))

    threads = [threading.Thread(target=mint_some, args=(50,)) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(ids)) == 200


def test_minted_suffix_shape(registry):
    record = registry.mint("alice", ("sha256", SHA), ["https://ex.org"], namespace="SYNAPSE")
    groups = record.id.suffix.split("-")
    assert len(groups) == 4
    assert all(len(g) == 4 for g in groups)
    assert not set("".join(groups)) & set("ILOU")


def test_bind_bag_detects_modification(tmp_path, registry):
    src = tmp_path / "src"
    src.mkdir()
    (src / "a.txt").write_bytes(b"original")
    bag = create_bag(src)
    record = bind_bag(registry, bag, "alice", ["https://ex.org/bag"])

    (src / "a.txt").write_bytes(b"tampered")
    rebagged = create_bag(src)
    assert bag_digest(rebagged) != record.checksum[1]


def test_bind_same_bag_twice_identical_checksums(tmp_path, registry):
    src = tmp_path / "src"
    src.mkdir()
    (src / "a.txt").write_bytes(b"stable")
    bag = create_bag(src)
    r1 = bind_bag(registry, bag, "alice", ["https://ex.org/1"])
    r2 = bind_bag(registry, bag, "alice", ["https://ex.org/2"])
    assert r1.id != r2.id
    assert r1.checksum == r2.checksum


def test_materialized_holey_bag_has_same_bound_digest(tmp_path, registry):
    src = tmp_path / "src"
    src.mkdir()
    (src / "big.bin").write_bytes(bytes(range(256)))
    (src / "small.txt").write_bytes(b"s")
    bag = create_bag(src)
    original_digest = bag_digest(bag)

    holey = make_holey(
        bag, lambda p: p.endswith("big.bin"),
        lambda p: (src / p[len("data/"):]).resolve().as_uri(),
    )
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)
    materialized = materialize(holey_dir)
    assert bag_digest(materialized) == original_digest


def test_minid_scheme_fetch_resolves_then_fetches(tmp_path, registry):
    payload = tmp_path / "served.bin"
    payload.write_bytes(b"resolved content")
    record = registry.mint(
        "alice", ("sha256", "0" * 64),
        ["https://dead.invalid/x", payload.resolve().as_uri()],
    )

    src = tmp_path / "src"
    src.mkdir()
    (src / "served.bin").write_bytes(b"resolved content")
    bag = create_bag(src)
    holey = make_holey(bag, lambda p: True, lambda p: f"minid:{record.id}")
    holey_dir = tmp_path / "holey"
    write_bag(holey, holey_dir)

    resolvers = default_resolvers()
    resolvers.pop("https")  # dead location has no handler; fall through
    resolvers["minid"] = minid_handler(registry.resolve, dict(resolvers))
    materialized = materialize(holey_dir, resolvers)
    assert materialized.fetch == ()
    assert (holey_dir / "data" / "served.bin").read_bytes() == b"resolved content"
