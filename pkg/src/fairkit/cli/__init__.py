"""The ``fair`` command line: bags, identifiers, catalog, and flows
from one binary, offline against a data directory or online against a
running service.

Exit codes: 0 success, 1 operation error, 2 usage error, 3 connectivity.
"""

from __future__ import annotations

import json
import secrets
import sys
from pathlib import Path

import click
import httpx

from .. import __version__, bag as bagmod
from ..canonical import canonical_json
from ..errors import FairError, NotEmpty, UsageError
from .backends import CliConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_CONNECTIVITY = 3


def emit(ctx_config: CliConfig, result: dict, human: str | None = None) -> None:
    """json mode prints canonical JSON only; human mode a readable form."""
    if ctx_config.json_output:
        click.echo(canonical_json(result))
    elif human is not None:
        click.echo(human)
    else:
        for key, value in result.items():
            if isinstance(value, (dict, list)):
                value = canonical_json(value)
            click.echo(f"{key}: {value}")


def fail(config: CliConfig, code: str, detail: str, exit_code: int = EXIT_ERROR):
    if config.json_output:
        click.echo(canonical_json({"code": code, "detail": detail}), err=False)
    else:
        click.echo(f"error: {code}: {detail}", err=True)
    sys.exit(exit_code)


def run_guarded(config: CliConfig, fn):
    try:
        return fn()
    except (httpx.ConnectError, httpx.ConnectTimeout) as exc:
        fail(config, "Connectivity", str(exc), EXIT_CONNECTIVITY)
    except UsageError as exc:
        fail(config, exc.code, exc.detail, EXIT_USAGE)
    except FairError as exc:
        fail(config, exc.code, exc.detail, EXIT_ERROR)


def parse_kv(pairs: tuple[str, ...], what: str) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"{what} must look like KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key] = value
    return out


def parse_table_ref(ref: str) -> tuple[str, str]:
    if ":" in ref:
        schema, table = ref.split(":", 1)
        return schema, table
    return "main", ref


@click.group()
@click.version_option(version=__version__, prog_name="fair")
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="JSON config with url / data_dir / token.")
@click.option("--url", envvar="FAIR_URL", default=None, help="Service base URL.")
@click.option("--data-dir", envvar="FAIR_DATA_DIR", default=None,
              type=click.Path(path_type=Path), help="Local data directory (offline mode).")
@click.option("--token", envvar="FAIR_TOKEN", default=None, help="Bearer token.")
@click.option("--json", "json_output", is_flag=True, help="Machine-readable output only.")
@click.pass_context
def main(ctx, config_path, url, data_dir, token, json_output):
    file_config = {}
    if config_path:
        file_config = json.loads(Path(config_path).read_text())
    ctx.obj = CliConfig(
        url=url or file_config.get("url"),
        data_dir=str(data_dir) if data_dir else file_config.get("data_dir"),
        token=token or file_config.get("token"),
        json_output=json_output or file_config.get("format") == "json",
        actor=file_config.get("actor", "local"),
    )


# -- init / serve ----------------------------------------------------------

@main.command()
@click.argument("directory", type=click.Path(path_type=Path))
@click.option("--namespace", default="FAIR", help="Identifier namespace for catalog RIDs.")
@click.pass_obj
def init(config: CliConfig, directory: Path, namespace: str):
    """Initialize an empty data directory (registry log, catalog log,
    config skeleton, default ACL with one admin token)."""

    def do():
        if directory.exists() and any(directory.iterdir()):
            raise NotEmpty(str(directory))
        directory.mkdir(parents=True, exist_ok=True)
        token = secrets.token_urlsafe(24)
        (directory / "config.json").write_text(json.dumps(
            {"namespace": namespace.upper()}, indent=2) + "\n")
        (directory / "acl.json").write_text(json.dumps({
            "catalog": {"admin": "model_change", "writer": "write", "reader": "read"},
            "tables": {},
            "tokens": {token: {"name": "admin", "roles": ["admin"]}},
            "anonymous": {"name": "anonymous", "roles": ["reader"]},
        }, indent=2) + "\n")
        (directory / "registry.log").touch()
        (directory / "catalog.log").touch()
        (directory / "flows").mkdir()
        emit(config, {"data_dir": str(directory), "namespace": namespace.upper(),
                      "admin_token": token})

    run_guarded(config, do)


@main.command()
@click.option("--data-dir", "serve_dir", type=click.Path(path_type=Path), required=False)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--acl", "acl_path", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def serve(config: CliConfig, serve_dir, host, port, acl_path):
    """Serve the HTTP API over a data directory."""

    def do():
        from ..services import serve as run_service

        target = serve_dir or config.data_dir
        if not target:
            raise UsageError("serve needs --data-dir")
        run_service(Path(target), host=host, port=port, acl_path=acl_path)

    run_guarded(config, do)


# -- bag -----------------------------------------------------------------

@main.group("bag")
def bag_group():
    """Create, validate, externalize, materialize, and archive bags."""


@bag_group.command("create")
@click.argument("source", type=click.Path(path_type=Path))
@click.argument("dest", type=click.Path(path_type=Path))
@click.option("--algorithm", "algorithms", multiple=True, default=("sha256",),
              help="Checksum algorithm (repeatable).")
@click.option("--info", "info_pairs", multiple=True, help="bag-info pair LABEL=VALUE.")
@click.option("--fmt", type=click.Choice(["dir", "zip", "tar"]), default="dir")
@click.pass_obj
def bag_create(config, source, dest, algorithms, info_pairs, fmt):
    """Package SOURCE directory into a bag at DEST."""

    def do():
        info = list(parse_kv(info_pairs, "--info").items())
        built = bagmod.create_bag(source, algorithms=algorithms, info=info)
        bagmod.write_bag(built, dest, fmt=fmt)
        emit(config, {
            "dest": str(dest), "format": fmt,
            "payload_oxum": built.info_value("Payload-Oxum"),
            "algorithms": built.algorithms(),
        }, human=f"wrote bag {dest} (Payload-Oxum {built.info_value('Payload-Oxum')})")

    run_guarded(config, do)


@bag_group.command("validate")
@click.argument("location", type=click.Path(path_type=Path))
@click.option("--level", type=click.Choice(["complete", "valid"]), default="valid")
@click.pass_obj
def bag_validate(config, location, level):
    """Check a bag; nonzero exit when problems are found."""

    def do():
        report = bagmod.check(location, level=level)
        payload = report.to_dict()
        ok = report.is_valid if level == "valid" else report.is_complete
        if config.json_output:
            click.echo(canonical_json(payload))
        else:
            verdict = "ok" if ok else "FAILED"
            click.echo(f"{location}: {verdict} "
                       f"(complete={report.is_complete} valid={report.is_valid})")
            for p in report.problems:
                click.echo(f"  {p.code}: {p.path} ({p.detail})")
        if not ok:
            sys.exit(EXIT_ERROR)

    run_guarded(config, do)


@bag_group.command("holey")
@click.argument("source", type=click.Path(path_type=Path))
@click.argument("dest", type=click.Path(path_type=Path))
@click.option("--url-template", required=True,
              help="Fetch URL per payload path, e.g. https://ex.org/{path}")
@click.pass_obj
def bag_holey(config, source, dest, url_template):
    """Externalize every payload file of SOURCE into a holey bag at DEST."""

    def do():
        original = bagmod.read_bag(source)

        def url_for(path: str) -> str:
            return url_template.format(path=path, name=path.rsplit("/", 1)[-1])

        holey = bagmod.make_holey(original, lambda p: True, url_for)
        bagmod.write_bag(holey, dest)
        emit(config, {"dest": str(dest), "fetch_entries": len(holey.fetch)})

    run_guarded(config, do)


@bag_group.command("materialize")
@click.argument("bag_dir", type=click.Path(path_type=Path))
@click.pass_obj
def bag_materialize(config, bag_dir):
    """Fetch all by-reference entries of a holey bag into place."""

    def do():
        resolvers = bagmod.default_resolvers()
        if config.data_dir:
            # a configured registry lets minid: fetch entries resolve
            from ..services import ServiceState

            state = ServiceState(Path(config.data_dir))
            resolvers["minid"] = bagmod.minid_handler(state.registry.resolve,
                                                      dict(resolvers))
        materialized = bagmod.materialize(bag_dir, resolvers)
        emit(config, {"bag": str(bag_dir), "payload_files": len(materialized.payload)})

    run_guarded(config, do)


@bag_group.command("archive")
@click.argument("bag_dir", type=click.Path(path_type=Path))
@click.argument("dest", type=click.Path(path_type=Path))
@click.option("--fmt", type=click.Choice(["zip", "tar"]), default="tar")
@click.pass_obj
def bag_archive(config, bag_dir, dest, fmt):
    """Write a deterministic archive of a bag directory."""

    def do():
        loaded = bagmod.read_bag(bag_dir)
        Path(dest).write_bytes(bagmod.archive_bytes(loaded, fmt, deterministic=True))
        emit(config, {"archive": str(dest), "format": fmt})

    run_guarded(config, do)


# -- id ---------------------------------------------------------------------

@main.group("id")
def id_group():
    """Mint, resolve, update, and upgrade persistent identifiers."""


@id_group.command("mint")
@click.option("--checksum", required=True, help="ALG:HEXDIGEST of the content.")
@click.option("--location", "locations", multiple=True, required=True)
@click.option("--title", default=None)
@click.option("--creator", default=None)
@click.option("--namespace", default="MINID")
@click.pass_obj
def id_mint(config, checksum, locations, title, creator, namespace):
    def do():
        if ":" not in checksum:
            raise UsageError("--checksum must be ALG:HEXDIGEST")
        algorithm, digest = checksum.split(":", 1)
        body = {"checksum": {"algorithm": algorithm, "digest": digest},
                "locations": list(locations), "title": title,
                "namespace": namespace}
        if creator:
            body["creator"] = creator
        emit(config, config.backend().id_mint(body))

    run_guarded(config, do)


@id_group.command("resolve")
@click.argument("id_text")
@click.pass_obj
def id_resolve(config, id_text):
    def do():
        record = config.backend().id_resolve(id_text)
        emit(config, record, human=canonical_json(record))

    run_guarded(config, do)


@id_group.command("update")
@click.argument("id_text")
@click.option("--location", "locations", multiple=True, required=True)
@click.pass_obj
def id_update(config, id_text, locations):
    def do():
        emit(config, config.backend().id_update(id_text, list(locations)))

    run_guarded(config, do)


@id_group.command("upgrade")
@click.argument("id_text")
@click.argument("doi")
@click.pass_obj
def id_upgrade(config, id_text, doi):
    def do():
        emit(config, config.backend().id_upgrade(id_text, doi))

    run_guarded(config, do)


# -- catalog -----------------------------------------------------------------

@main.group("catalog")
def catalog_group():
    """Model, records, queries, and dataset export."""


@catalog_group.command("model")
@click.option("--apply", "change_file", type=click.Path(path_type=Path), default=None,
              help="Apply the model change described in this JSON file.")
@click.pass_obj
def catalog_model(config, change_file):
    def do():
        backend = config.backend()
        if change_file:
            change = json.loads(Path(change_file).read_text())
            emit(config, backend.model_change(change))
        else:
            emit(config, backend.model_fetch())

    run_guarded(config, do)


@catalog_group.command("insert")
@click.argument("table_ref")
@click.argument("pairs", nargs=-1)
@click.option("--values", "values_json", default=None, help="Typed values as JSON.")
@click.pass_obj
def catalog_insert(config, table_ref, pairs, values_json):
    """Insert a record: fair catalog insert main:Protocol Name=..."""

    def do():
        schema, table = parse_table_ref(table_ref)
        values = json.loads(values_json) if values_json else {}
        values.update(parse_kv(pairs, "values"))
        emit(config, config.backend().insert(schema, table, values))

    run_guarded(config, do)


@catalog_group.command("update")
@click.argument("rid")
@click.argument("pairs", nargs=-1)
@click.option("--values", "values_json", default=None)
@click.option("--delete", is_flag=True, help="Tombstone the record instead.")
@click.pass_obj
def catalog_update(config, rid, pairs, values_json, delete):
    def do():
        values = json.loads(values_json) if values_json else {}
        values.update(parse_kv(pairs, "values"))
        emit(config, config.backend().update(rid, values, delete=delete))

    run_guarded(config, do)


@catalog_group.command("query")
@click.argument("path")
@click.option("--filter", "filters", multiple=True, help="COLUMN:OP:VALUE")
@click.option("--facet", "facets", multiple=True, help="COLUMN")
@click.option("--snapshot", type=int, default=None)
@click.option("--limit", type=int, default=100)
@click.option("--cursor", default=None)
@click.pass_obj
def catalog_query(config, path, filters, facets, snapshot, limit, cursor):
    def do():
        parsed = []
        for item in filters:
            parts = item.split(":", 2)
            if len(parts) == 2:
                column, op, value = parts[0], "=", parts[1]
            elif len(parts) == 3:
                column, op, value = parts
            else:
                raise UsageError(f"bad --filter {item!r}")
            try:
                value = json.loads(value)
            except json.JSONDecodeError:
                pass
            parsed.append((column, op, value))
        result = config.backend().query(path, filters=parsed, facets=list(facets),
                                        snapshot=snapshot, limit=limit, cursor=cursor)
        emit(config, result, human=canonical_json(result))

    run_guarded(config, do)


@catalog_group.command("export")
@click.option("--rid", "rids", multiple=True, required=True)
@click.option("--depth", default="1", help="Foreign-key closure depth or 'all'.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Archive file to write (tar).")
@click.option("--title", default=None)
@click.option("--namespace", default="MINID")
@click.pass_obj
def catalog_export(config, rids, depth, out, title, namespace):
    def do():
        depth_value = depth if depth == "all" else int(depth)
        emit(config, config.backend().export(list(rids), depth_value, out,
                                             title=title, namespace=namespace))

    run_guarded(config, do)


# -- flow ----------------------------------------------------------------

@main.group("flow")
def flow_group():
    """Define, run, resume, and audit publication flows."""


@flow_group.command("define")
@click.argument("document", type=click.Path(path_type=Path))
@click.pass_obj
def flow_define(config, document):
    def do():
        doc = json.loads(Path(document).read_text())
        emit(config, config.backend().flow_define(doc))

    run_guarded(config, do)


@flow_group.command("run")
@click.argument("flow_ref")
@click.option("--param", "params", multiple=True, help="KEY=VALUE run parameter.")
@click.pass_obj
def flow_run(config, flow_ref, params):
    """Run a flow by defined name or from a document file."""

    def do():
        if Path(flow_ref).exists():
            flow = json.loads(Path(flow_ref).read_text())
        else:
            flow = flow_ref
        run = config.backend().flow_run(flow, parse_kv(params, "--param"))
        rid = run.get("steps", {}).get("register", {}).get("outputs", {}).get("rid")
        human = f"run {run['run_id']}: {run['status']}"
        if rid:
            human += f"\nrid: {rid}"
        emit(config, run, human=human)
        if run.get("status") != "completed":
            sys.exit(EXIT_ERROR)

    run_guarded(config, do)


@flow_group.command("resume")
@click.argument("run_id")
@click.pass_obj
def flow_resume(config, run_id):
    def do():
        run = config.backend().flow_resume(run_id)
        emit(config, run, human=f"run {run['run_id']}: {run['status']}")
        if run.get("status") != "completed":
            sys.exit(EXIT_ERROR)

    run_guarded(config, do)


@flow_group.command("audit")
@click.argument("run_id")
@click.pass_obj
def flow_audit(config, run_id):
    def do():
        audit = config.backend().flow_audit(run_id)
        human = "\n".join(f"{e['timestamp']} {e['step']:<12} {e['action']:<7} {e['detail']}"
                          for e in audit["events"])
        emit(config, audit, human=human or "(no events)")

    run_guarded(config, do)


if __name__ == "__main__":  # pragma: no cover
    main()
