"""HTTP surface over the identifier registry, catalog, and flows.

All routes live under /v1 with canonical JSON bodies; module errors map
one-to-one onto ApiError bodies. Record views also serve minimal HTML
landing pages when the client asks for text/html, so identifiers cited
in figure captions resolve to something a browser can show.
"""

from __future__ import annotations

import json
import socket
import tempfile
from pathlib import Path
from typing import Any, Optional

from fastapi import Body, Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse, StreamingResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__, present
from ..bag import archive_bytes
from ..catalog import AclPolicy, Catalog, Principal, export_dataset
from ..errors import BindFailure, Conflict, FairError, Forbidden, NotFound, http_status
from ..flows import FlowRunner, ServiceBindings, define_flow
from ..idspace import Registry

WRITE = "write"


class ServiceState:
    """Everything one served data directory needs."""

    def __init__(self, data_dir: Path, acl_path: Path | None = None):
        self.data_dir = Path(data_dir)
        config_path = self.data_dir / "config.json"
        self.config = json.loads(config_path.read_text()) if config_path.exists() else {}
        acl_file = Path(acl_path) if acl_path else self.data_dir / "acl.json"
        acl_doc = json.loads(acl_file.read_text()) if acl_file.exists() else {}
        self.policy = (
            AclPolicy.from_dict(acl_doc) if acl_doc.get("catalog") else AclPolicy.default()
        )
        self.tokens = {
            token: Principal.of(spec["name"], *spec.get("roles", []))
            for token, spec in acl_doc.get("tokens", {}).items()
        }
        anon = acl_doc.get("anonymous", {"name": "anonymous", "roles": ["reader"]})
        self.anonymous = Principal.of(anon["name"], *anon.get("roles", []))

        namespace = self.config.get("namespace", "FAIR")
        self.registry = Registry(self.data_dir / "registry.log")
        self.catalog = Catalog(self.data_dir / "catalog.log", acl=self.policy,
                               namespace=namespace)
        self.flow_defs = self.data_dir / "flows" / "defs"

    def principal(self, request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        if not header:
            return self.anonymous
        if not header.lower().startswith("bearer "):
            raise Forbidden("only bearer tokens are accepted")
        token = header.split(" ", 1)[1].strip()
        principal = self.tokens.get(token)
        if principal is None:
            raise Forbidden("unknown token")
        return principal

    def runner(self, actor: Principal) -> FlowRunner:
        return FlowRunner(ServiceBindings(
            data_dir=self.data_dir,
            registry=self.registry,
            catalog=self.catalog,
            actor=actor,
            namespace=self.config.get("namespace", "MINID"),
        ))


def _parse_filter(text: str) -> tuple[str, str, Any]:
    parts = text.split(":", 2)
    if len(parts) == 2:
        column, value = parts
        op = "="
    elif len(parts) == 3:
        column, op, value = parts
    else:
        column, op, value = text, "is_null", "false"
    try:
        decoded = json.loads(value)
    except json.JSONDecodeError:
        decoded = value
    return column, op, decoded


def _landing_page(title: str, fields: dict) -> str:
    rows = "".join(
        f"<tr><th>{k}</th><td>{json.dumps(v, ensure_ascii=False) if not isinstance(v, str) else v}</td></tr>"
        for k, v in fields.items()
    )
    return (
        "<!doctype html><html><head><meta charset='utf-8'>"
        f"<title>{title}</title></head>"
        f"<body><h1>{title}</h1><table>{rows}</table></body></html>"
    )


def _wants_html(request: Request) -> bool:
    return "text/html" in request.headers.get("accept", "")


def create_app(data_dir: Path, acl_path: Path | None = None) -> FastAPI:
    state = ServiceState(data_dir, acl_path)
    app = FastAPI(title="fairkit", version=__version__, docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.fairkit = state

    def principal(request: Request) -> Principal:
        return state.principal(request)

    @app.exception_handler(FairError)
    async def fair_error(request: Request, exc: FairError):
        return JSONResponse(status_code=http_status(exc.code),
                            content={"code": exc.code, "detail": exc.detail})

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        code = "UnknownRoute" if exc.status_code == 404 else "HttpError"
        return JSONResponse(status_code=exc.status_code,
                            content={"code": code, "detail": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "UsageError", "detail": str(exc.errors())})

    # -- health ----------------------------------------------------------

    @app.get("/healthz")
    @app.get("/v1/healthz")
    async def healthz():
        return {"status": "ok", "version": __version__}

    # -- identifiers -------------------------------------------------------

    @app.post("/v1/id/mint")
    def id_mint(body: dict = Body(...), actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        checksum = body.get("checksum", {})
        record = state.registry.mint(
            creator=body.get("creator", actor.name),
            checksum=(checksum.get("algorithm", "sha256"), checksum.get("digest", "")),
            locations=body.get("locations", []),
            title=body.get("title"),
            namespace=body.get("namespace", "MINID"),
        )
        return present.id_record(record)

    @app.get("/v1/id/{id_text}")
    def id_resolve(id_text: str, request: Request):
        record = state.registry.resolve(id_text)
        if _wants_html(request):
            return HTMLResponse(_landing_page(str(record.id), present.id_record(record)))
        return present.id_record(record)

    @app.patch("/v1/id/{id_text}/locations")
    def id_update(id_text: str, body: dict = Body(...),
                  actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        record = state.registry.update_locations(
            id_text, body.get("locations", []), actor=actor.name)
        return present.id_record(record)

    @app.post("/v1/id/{id_text}/upgrade")
    def id_upgrade(id_text: str, body: dict = Body(...),
                   actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        record = state.registry.upgrade(id_text, body.get("doi", ""))
        return present.id_record(record)

    # -- catalog -----------------------------------------------------------

    @app.get("/v1/catalog/model")
    def model_fetch(snapshot: Optional[int] = None):
        return state.catalog.model_at(snapshot).to_dict()

    @app.post("/v1/catalog/model")
    def model_change(body: dict = Body(...), actor: Principal = Depends(principal)):
        change = body.get("change", body)
        return state.catalog.apply_model_change(change, actor).to_dict()

    @app.post("/v1/catalog/entity/{schema}/{table}")
    def entity_insert(schema: str, table: str, body: dict = Body(...),
                      actor: Principal = Depends(principal)):
        version = state.catalog.insert(schema, table, body, actor)
        return present.catalog_record(state.catalog, version)

    @app.get("/v1/catalog/entity/{rid}")
    def entity_get(rid: str, request: Request, snapshot: Optional[int] = None,
                   actor: Principal = Depends(principal)):
        version = state.catalog.get(rid, actor, snapshot=snapshot)
        if _wants_html(request):
            resolved = present.resolution(state.catalog, rid)
            return HTMLResponse(_landing_page(
                f"{version.table} {rid}",
                {**resolved["record"], "citation": resolved["citation"]},
            ))
        return present.catalog_record(state.catalog, version)

    @app.patch("/v1/catalog/entity/{rid}")
    def entity_update(rid: str, body: dict = Body(...),
                      actor: Principal = Depends(principal)):
        expected_rmt = body.get("expected_rmt")
        if expected_rmt is not None:
            current = state.catalog.get(rid, actor)
            if current.rmt != expected_rmt:
                raise Conflict(f"{rid} changed at {current.rmt}, client read {expected_rmt}")
        if body.get("delete") is True:
            version = state.catalog.delete(rid, actor)
        else:
            version = state.catalog.update(rid, body.get("values", body), actor)
        return present.catalog_record(state.catalog, version)

    @app.get("/v1/catalog/resolve/{rid}")
    def entity_resolve(rid: str):
        return present.resolution(state.catalog, rid)

    @app.get("/v1/catalog/query")
    def catalog_query(
        path: str,
        filter: list[str] = Query(default=[]),
        facet: list[str] = Query(default=[]),
        snapshot: Optional[int] = None,
        limit: int = 100,
        cursor: Optional[str] = None,
        actor: Principal = Depends(principal),
    ):
        filters = [_parse_filter(f) for f in filter]
        facets = [_parse_filter(f) if ":" in f else f for f in facet]
        result = state.catalog.query(path, filters=filters, facets=facets,
                                     snapshot=snapshot, actor=actor)
        return present.query_result(result, limit=limit, cursor=cursor)

    @app.get("/v1/catalog/snapshot/{sid}/entity/{schema}/{table}")
    def snapshot_entities(sid: int, schema: str, table: str,
                          limit: int = 100, cursor: Optional[str] = None,
                          actor: Principal = Depends(principal)):
        result = state.catalog.query(f"{schema}:{table}", snapshot=sid, actor=actor)
        return present.query_result(result, limit=limit, cursor=cursor)

    @app.post("/v1/catalog/export")
    def catalog_export(body: dict = Body(...), actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        rids = body.get("rids", [])
        suffix = rids[0].split(":", 1)[-1] if rids else "dataset"
        dest = state.data_dir / "exports" / suffix
        counter = 0
        while dest.exists():
            counter += 1
            dest = state.data_dir / "exports" / f"{suffix}-{counter}"
        result = export_dataset(
            state.catalog, state.registry, rids, dest, actor,
            depth=body.get("depth", 1),
            namespace=body.get("namespace", "MINID"),
            title=body.get("title"),
        )
        payload = archive_bytes(result.bag, "tar", deterministic=True)

        def chunks(blob: bytes, size: int = 1 << 16):
            for i in range(0, len(blob), size):
                yield blob[i:i + size]

        return StreamingResponse(
            chunks(payload),
            media_type="application/x-tar",
            headers={
                "Content-Disposition": f'attachment; filename="{suffix}.tar"',
                "X-Fair-Id": str(result.record.id),
                "X-Fair-Checksum": result.record.checksum[1],
                "X-Fair-Rids": ",".join(result.rids),
            },
        )

    # -- flows --------------------------------------------------------------

    @app.post("/v1/flow/define")
    def flow_define(body: dict = Body(...), actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        flow = define_flow(body.get("flow", body))
        state.flow_defs.mkdir(parents=True, exist_ok=True)
        path = state.flow_defs / f"{flow.name}.json"
        path.write_text(json.dumps(flow.to_dict(), ensure_ascii=False, indent=2) + "\n",
                        encoding="utf-8")
        return flow.to_dict()

    @app.post("/v1/flow/run")
    def flow_run(body: dict = Body(...), actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        spec = body.get("flow")
        if isinstance(spec, str):
            path = state.flow_defs / f"{spec}.json"
            if not path.exists():
                raise NotFound(f"flow {spec}")
            spec = json.loads(path.read_text())
        flow = define_flow(spec)
        run = state.runner(actor).run(flow, body.get("params", {}))
        return run.to_dict()

    @app.post("/v1/flow/{run_id}/resume")
    def flow_resume(run_id: str, actor: Principal = Depends(principal)):
        state.policy.require(actor, WRITE)
        return state.runner(actor).resume(run_id).to_dict()

    @app.get("/v1/flow/{run_id}/audit")
    def flow_audit(run_id: str, actor: Principal = Depends(principal)):
        events = state.runner(actor).audit_log(run_id)
        return {"run_id": run_id, "events": [e.to_dict() for e in events]}

    return app


def route_table(app: FastAPI | None = None) -> list[str]:
    """`METHOD /path` for every route; conformance tests pin this."""
    if app is None:
        with tempfile.TemporaryDirectory() as tmp:
            app = create_app(Path(tmp))
    rows = []
    for route in app.routes:
        methods = getattr(route, "methods", None)
        if not methods:
            continue
        for method in sorted(methods - {"HEAD", "OPTIONS"}):
            rows.append(f"{method} {route.path}")
    return sorted(set(rows))


def serve(data_dir: Path, host: str = "127.0.0.1", port: int = 8000,
          acl_path: Path | None = None) -> None:
    """Run the service until interrupted. Raises BindFailure when the
    address is unavailable."""
    import uvicorn

    app = create_app(data_dir, acl_path)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise BindFailure(f"{host}:{port}: {exc}") from exc
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])
