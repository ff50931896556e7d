import pytest

from fairkit.catalog import AclPolicy, Catalog, Principal
from fairkit.errors import (
    DanglingReference,
    DuplicateName,
    Forbidden,
    UnknownColumn,
)

ADMIN = Principal.of("ada", "admin")
WRITER = Principal.of("wes", "writer")
READER = Principal.of("rhea", "reader")


@pytest.fixture
def catalog(tmp_path):
    return Catalog(tmp_path / "catalog.log")


def add_table(cat, name, columns=(), actor=ADMIN, schema="main", kind="entity", **extra):
    return cat.apply_model_change(
        {"kind": "add_table", "schema": schema, "name": name, "table_kind": kind,
         "columns": list(columns), **extra},
        actor,
    )


def test_add_table_brings_system_columns(catalog):
    model = add_table(catalog, "Protocol", [{"name": "Name"}, {"name": "Description"}])
    table = model.table("main", "Protocol")
    assert [c.name for c in table.columns[:3]] == ["RID", "RCT", "RMT"]
    assert [c.name for c in table.user_columns()] == ["Name", "Description"]
    assert model.version == 1


def test_asset_table_carries_asset_columns(catalog):
    model = add_table(catalog, "Image", kind="asset")
    names = [c.name for c in model.table("main", "Image").columns]
    assert names == ["RID", "RCT", "RMT", "url", "checksum", "length"]


def test_model_change_requires_right(catalog):
    with pytest.raises(Forbidden):
        add_table(catalog, "Protocol", actor=WRITER)
    with pytest.raises(Forbidden):
        add_table(catalog, "Protocol", actor=READER)


def test_duplicate_table_rejected(catalog):
    add_table(catalog, "Protocol")
    with pytest.raises(DuplicateName):
        add_table(catalog, "Protocol")


def test_add_table_with_missing_vocabulary_dangles(catalog):
    with pytest.raises(DanglingReference):
        add_table(catalog, "Experiment",
                  [{"name": "status", "value_type": "term", "vocabulary": "Status"}])


def test_add_column_to_existing_table(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}])
    model = catalog.apply_model_change(
        {"kind": "add_column", "schema": "main", "table": "Protocol",
         "column": {"name": "Rank", "value_type": "float"}},
        ADMIN,
    )
    assert model.table("main", "Protocol").has_column("Rank")
    assert model.version == 2


def test_extension_table_shares_parent_rid_key(catalog):
    add_table(catalog, "Zebrafish", [{"name": "Name"}])
    model = catalog.apply_model_change(
        {"kind": "add_extension_table", "schema": "main", "name": "Zebrafish_Genotype",
         "extends": "Zebrafish", "columns": [{"name": "genotype"}]},
        ADMIN,
    )
    ext = model.table("main", "Zebrafish_Genotype")
    assert ext.kind == "extension"
    assert ext.extends == "Zebrafish"
    assert ext.keys == (("RID",),)


def test_extension_of_missing_parent_dangles(catalog):
    with pytest.raises(DanglingReference):
        catalog.apply_model_change(
            {"kind": "add_extension_table", "schema": "main", "name": "X",
             "extends": "Nope", "columns": []},
            ADMIN,
        )


def test_foreign_key_validation(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}])
    add_table(catalog, "Subject",
              [{"name": "protocol", "value_type": "identifier"}])
    model = catalog.apply_model_change(
        {"kind": "add_foreign_key", "schema": "main", "table": "Subject",
         "columns": ["protocol"], "ref_schema": "main", "ref_table": "Protocol",
         "ref_columns": ["RID"]},
        ADMIN,
    )
    assert model.table("main", "Subject").foreign_keys[0].ref_table == "Protocol"
    with pytest.raises(DanglingReference):
        catalog.apply_model_change(
            {"kind": "add_foreign_key", "schema": "main", "table": "Subject",
             "columns": ["protocol"], "ref_schema": "main", "ref_table": "Missing",
             "ref_columns": ["RID"]},
            ADMIN,
        )


def test_rename_column_keeps_alias(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}])
    model = catalog.apply_model_change(
        {"kind": "rename_column", "schema": "main", "table": "Protocol",
         "old": "Name", "new": "Title"},
        ADMIN,
    )
    table = model.table("main", "Protocol")
    assert table.has_column("Title")
    assert not table.has_column("Name")
    assert table.resolve_column("Name") == "Title"


def test_chained_renames_resolve_to_latest(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}])
    for old, new in [("Name", "Title"), ("Title", "Label")]:
        catalog.apply_model_change(
            {"kind": "rename_column", "schema": "main", "table": "Protocol",
             "old": old, "new": new},
            ADMIN,
        )
    table = catalog.model.table("main", "Protocol")
    assert table.resolve_column("Name") == "Label"
    assert table.resolve_column("Title") == "Label"
    with pytest.raises(UnknownColumn):
        table.resolve_column("Unheard")


def test_rename_to_existing_or_aliased_name_rejected(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}, {"name": "Rank"}])
    catalog.apply_model_change(
        {"kind": "rename_column", "schema": "main", "table": "Protocol",
         "old": "Name", "new": "Title"},
        ADMIN,
    )
    for new in ("Rank", "Name"):
        with pytest.raises(DuplicateName):
            catalog.apply_model_change(
                {"kind": "rename_column", "schema": "main", "table": "Protocol",
                 "old": "Title", "new": new},
                ADMIN,
            )


def test_vocabulary_terms_and_synonyms(catalog):
    catalog.apply_model_change(
        {"kind": "add_vocabulary", "schema": "main", "name": "Status"}, ADMIN)
    catalog.apply_model_change(
        {"kind": "add_term", "schema": "main", "vocabulary": "Status",
         "canonical": "completed", "description": "experiment finished"},
        ADMIN,
    )
    catalog.apply_model_change(
        {"kind": "add_synonym", "schema": "main", "vocabulary": "Status",
         "canonical": "completed", "synonym": "done"},
        ADMIN,
    )
    vocab = catalog.model.table("main", "Status")
    assert vocab.term("completed").synonyms == ("done",)
    with pytest.raises(DuplicateName):
        catalog.apply_model_change(
            {"kind": "add_term", "schema": "main", "vocabulary": "Status",
             "canonical": "done"},
            ADMIN,
        )
    with pytest.raises(DuplicateName):
        catalog.apply_model_change(
            {"kind": "add_synonym", "schema": "main", "vocabulary": "Status",
             "canonical": "completed", "synonym": "done"},
            ADMIN,
        )


def test_every_change_bumps_version_once(catalog):
    assert catalog.model.version == 0
    add_table(catalog, "A")
    assert catalog.model.version == 1
    add_table(catalog, "B", foreign_keys=[{
        "columns": ["RID"], "ref_schema": "main", "ref_table": "A", "ref_columns": ["RID"],
    }])
    assert catalog.model.version == 2


def test_model_round_trips_through_dict(catalog):
    add_table(catalog, "Protocol", [{"name": "Name"}])
    catalog.apply_model_change(
        {"kind": "add_vocabulary", "schema": "main", "name": "Status"}, ADMIN)
    model = catalog.model
    from fairkit.catalog import CatalogModel

    assert CatalogModel.from_dict(model.to_dict()) == model


def test_acl_weaker_role_also_rejected(tmp_path):
    policy = AclPolicy(catalog={"admin": "model_change", "writer": "write",
                                "reader": "read"})
    catalog = Catalog(tmp_path / "c.log", acl=policy)
    add_table(catalog, "T", [{"name": "v"}])
    outcomes = {}
    for principal in (ADMIN, WRITER, READER, Principal.of("nobody")):
        try:
            catalog.insert("main", "T", {"v": "x"}, principal)
            outcomes[principal.name] = True
        except Forbidden:
            outcomes[principal.name] = False
    assert outcomes == {"ada": True, "wes": True, "rhea": False, "nobody": False}
