import hashlib

import pytest

from fairkit.bag import check, materialize, read_bag
from fairkit.catalog import Catalog, Principal, export_dataset, import_dataset
from fairkit.errors import NotFound, UnreachableAsset
from fairkit.idspace import Registry

ADMIN = Principal.of("ada", "admin")


@pytest.fixture
def registry(tmp_path):
    return Registry(tmp_path / "registry.log")


@pytest.fixture
def catalog(tmp_path):
    cat = Catalog(tmp_path / "catalog.log", namespace="SYNAPSE")
    cat.apply_model_change(
        {"kind": "add_vocabulary", "schema": "main", "name": "Status"}, ADMIN)
    cat.apply_model_change(
        {"kind": "add_term", "schema": "main", "vocabulary": "Status",
         "canonical": "completed"}, ADMIN)
    cat.apply_model_change(
        {"kind": "add_synonym", "schema": "main", "vocabulary": "Status",
         "canonical": "completed", "synonym": "done"}, ADMIN)
    cat.apply_model_change(
        {"kind": "add_table", "schema": "main", "name": "Dataset",
         "table_kind": "entity",
         "columns": [{"name": "Name"},
                     {"name": "status", "value_type": "term", "vocabulary": "Status"}]},
        ADMIN,
    )
    cat.apply_model_change(
        {"kind": "add_table", "schema": "main", "name": "Image",
         "table_kind": "asset",
         "columns": [{"name": "dataset", "value_type": "identifier"}],
         "foreign_keys": [{"columns": ["dataset"], "ref_schema": "main",
                           "ref_table": "Dataset", "ref_columns": ["RID"]}]},
        ADMIN,
    )
    return cat


def add_asset(tmp_path, catalog, dataset_rid, name, content):
    path = tmp_path / name
    path.write_bytes(content)
    return catalog.insert(
        "main", "Image",
        {"url": path.resolve().as_uri(),
         "checksum": hashlib.sha256(content).hexdigest(),
         "length": len(content),
         "dataset": dataset_rid},
        ADMIN,
    )


def test_export_single_record_with_asset(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "d1", "status": "done"}, ADMIN)
    add_asset(tmp_path, catalog, dataset.rid, "img.bin", b"pixels")

    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=1)
    assert len(result.bag.fetch) == 1
    block = result.bag.metadata_block("table-schema")
    assert block is not None
    assert sorted(t["name"] for t in block.body["tables"]) == ["Dataset", "Image"]
    dataset_csv = block.body["data"]["Dataset"]
    assert dataset_csv.count("\n") == 2  # header + 1 row
    # identifier resolves and its checksum matches the written bag
    resolved = registry.resolve(result.record.id)
    assert resolved.locations[0] == (tmp_path / "export").resolve().as_uri()


def test_exported_bag_materializes_and_validates(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "d"}, ADMIN)
    for i in range(3):
        add_asset(tmp_path, catalog, dataset.rid, f"a{i}.bin", bytes([i]) * (i + 1))
    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=1)
    assert len(result.bag.fetch) == 3
    materialize(result.path)
    report = check(result.path)
    assert report.is_valid, report.problems


def test_export_unknown_rid(tmp_path, catalog, registry):
    with pytest.raises(NotFound):
        export_dataset(catalog, registry, ["SYNAPSE:0000-0000-0000-0000"],
                       tmp_path / "export", ADMIN)


def test_export_unreachable_asset(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "d"}, ADMIN)
    catalog.insert(
        "main", "Image",
        {"url": (tmp_path / "missing.bin").as_uri(), "checksum": "c" * 64,
         "length": 3, "dataset": dataset.rid},
        ADMIN,
    )
    with pytest.raises(UnreachableAsset):
        export_dataset(catalog, registry, [dataset.rid], tmp_path / "export", ADMIN)


def test_depth_zero_exports_roots_only(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "solo"}, ADMIN)
    add_asset(tmp_path, catalog, dataset.rid, "img.bin", b"pixels")
    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=0)
    block = result.bag.metadata_block("table-schema")
    assert [t["name"] for t in block.body["tables"]] == ["Dataset"]
    assert result.bag.fetch == ()


def test_reimport_into_empty_catalog_equal_up_to_rid_remapping(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "d1", "status": "done"}, ADMIN)
    asset = add_asset(tmp_path, catalog, dataset.rid, "img.bin", b"pixels")
    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=1)

    fresh = Catalog(tmp_path / "fresh.log", namespace="COPY")
    rid_map = import_dataset(fresh, result.path, ADMIN)
    assert set(rid_map) == {dataset.rid, asset.rid}

    # field-wise equality oracle, identifiers remapped
    old_ds = catalog.get(dataset.rid).values
    new_ds = fresh.get(rid_map[dataset.rid]).values
    assert new_ds == old_ds

    old_img = catalog.get(asset.rid).values
    new_img = fresh.get(rid_map[asset.rid]).values
    assert new_img.pop("dataset") == rid_map[old_img.pop("dataset")]
    assert new_img == old_img

    # vocabulary travelled with the export: synonyms still normalize
    assert fresh.normalize_term("Status", "Done") == "completed"


def test_reimport_extension_rows(tmp_path, catalog, registry):
    catalog.apply_model_change(
        {"kind": "add_extension_table", "schema": "main", "name": "Dataset_Detail",
         "extends": "Dataset", "columns": [{"name": "note"}]},
        ADMIN,
    )
    dataset = catalog.insert("main", "Dataset", {"Name": "d"}, ADMIN)
    catalog.insert("main", "Dataset_Detail", {"RID": dataset.rid, "note": "n1"}, ADMIN)
    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=1)

    fresh = Catalog(tmp_path / "fresh.log")
    rid_map = import_dataset(fresh, result.path, ADMIN)
    new_rid = rid_map[dataset.rid]
    assert fresh.get_row("main", "Dataset_Detail", new_rid).values["note"] == "n1"


def test_export_bag_round_trips_from_disk(tmp_path, catalog, registry):
    dataset = catalog.insert("main", "Dataset", {"Name": "d"}, ADMIN)
    result = export_dataset(catalog, registry, [dataset.rid], tmp_path / "export",
                            ADMIN, depth=0)
    assert read_bag(result.path) == result.bag
