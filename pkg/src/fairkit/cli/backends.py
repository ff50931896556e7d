"""CLI backends: the same commands run against a local data directory
(offline) or a running service (online) and produce identical canonical
JSON output for the same state."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import httpx
from filelock import FileLock, Timeout

from .. import present
from ..bag import archive_bytes
from ..catalog import Principal, export_dataset
from ..errors import FairError, UsageError
from ..flows import define_flow
from ..services import ServiceState


class LockHeld(FairError):
    """Another offline writer holds this data directory's lock."""


@dataclass
class CliConfig:
    url: str | None = None
    data_dir: str | None = None
    token: str | None = None
    json_output: bool = False
    actor: str = "local"

    def backend(self):
        if self.url and self.data_dir:
            raise UsageError("set either --url or --data-dir, not both")
        if self.url:
            return HttpBackend(self.url, self.token)
        if self.data_dir:
            return LocalBackend(Path(self.data_dir), actor=self.actor)
        raise UsageError("no service URL or data directory configured")


class LocalBackend:
    """Direct library calls against one data directory."""

    def __init__(self, data_dir: Path, actor: str = "local"):
        if not Path(data_dir).is_dir():
            raise UsageError(f"{data_dir} is not an initialized data directory")
        self.data_dir = Path(data_dir)
        self.state = ServiceState(self.data_dir)
        self.actor = Principal.of(actor, "admin")
        self._lock = FileLock(str(self.data_dir / ".fair.lock"))

    def _acquire(self):
        try:
            self._lock.acquire(timeout=0.5)
        except Timeout:
            raise LockHeld(f"{self.data_dir} is locked by another fair process")
        return self._lock

    # -- id --------------------------------------------------------------

    def id_mint(self, body: dict) -> dict:
        with self._acquire():
            checksum = body.get("checksum", {})
            record = self.state.registry.mint(
                creator=body.get("creator", self.actor.name),
                checksum=(checksum.get("algorithm", "sha256"), checksum.get("digest", "")),
                locations=body.get("locations", []),
                title=body.get("title"),
                namespace=body.get("namespace", "MINID"),
            )
        return present.id_record(record)

    def id_resolve(self, id_text: str) -> dict:
        return present.id_record(self.state.registry.resolve(id_text))

    def id_update(self, id_text: str, locations: list[str]) -> dict:
        with self._acquire():
            record = self.state.registry.update_locations(id_text, locations,
                                                          actor=self.actor.name)
        return present.id_record(record)

    def id_upgrade(self, id_text: str, doi: str) -> dict:
        with self._acquire():
            record = self.state.registry.upgrade(id_text, doi)
        return present.id_record(record)

    # -- catalog -----------------------------------------------------------

    def model_fetch(self) -> dict:
        return self.state.catalog.model.to_dict()

    def model_change(self, change: dict) -> dict:
        with self._acquire():
            return self.state.catalog.apply_model_change(change, self.actor).to_dict()

    def insert(self, schema: str, table: str, values: dict) -> dict:
        with self._acquire():
            version = self.state.catalog.insert(schema, table, values, self.actor)
        return present.catalog_record(self.state.catalog, version)

    def update(self, rid: str, values: dict, delete: bool = False) -> dict:
        with self._acquire():
            if delete:
                version = self.state.catalog.delete(rid, self.actor)
            else:
                version = self.state.catalog.update(rid, values, self.actor)
        return present.catalog_record(self.state.catalog, version)

    def get(self, rid: str, snapshot: int | None = None) -> dict:
        version = self.state.catalog.get(rid, self.actor, snapshot=snapshot)
        return present.catalog_record(self.state.catalog, version)

    def query(self, path: str, filters=(), facets=(), snapshot=None,
              limit: int = 100, cursor=None) -> dict:
        result = self.state.catalog.query(path, filters=filters, facets=facets,
                                          snapshot=snapshot, actor=self.actor)
        return present.query_result(result, limit=limit, cursor=cursor)

    def export(self, rids: list[str], depth, out: Path, title=None,
               namespace: str = "MINID") -> dict:
        with self._acquire():
            workdir = self.data_dir / "exports" / Path(out).stem
            counter = 0
            while workdir.exists():
                counter += 1
                workdir = self.data_dir / "exports" / f"{Path(out).stem}-{counter}"
            result = export_dataset(self.state.catalog, self.state.registry, rids,
                                    workdir, self.actor, depth=depth,
                                    namespace=namespace, title=title)
        Path(out).write_bytes(archive_bytes(result.bag, "tar", deterministic=True))
        return {"id": str(result.record.id), "archive": str(out),
                "checksum": result.record.checksum[1], "rids": list(result.rids)}

    # -- flows ---------------------------------------------------------------

    def flow_define(self, document: dict) -> dict:
        flow = define_flow(document)
        self.state.flow_defs.mkdir(parents=True, exist_ok=True)
        path = self.state.flow_defs / f"{flow.name}.json"
        path.write_text(json.dumps(flow.to_dict(), ensure_ascii=False, indent=2) + "\n",
                        encoding="utf-8")
        return flow.to_dict()

    def _flow_doc(self, name_or_doc) -> dict:
        if isinstance(name_or_doc, dict):
            return name_or_doc
        path = self.state.flow_defs / f"{name_or_doc}.json"
        if not path.exists():
            raise UsageError(f"no defined flow named {name_or_doc!r}")
        return json.loads(path.read_text())

    def flow_run(self, flow, params: dict) -> dict:
        with self._acquire():
            run = self.state.runner(self.actor).run(define_flow(self._flow_doc(flow)),
                                                    params)
        return run.to_dict()

    def flow_resume(self, run_id: str) -> dict:
        with self._acquire():
            return self.state.runner(self.actor).resume(run_id).to_dict()

    def flow_audit(self, run_id: str) -> dict:
        events = self.state.runner(self.actor).audit_log(run_id)
        return {"run_id": run_id, "events": [e.to_dict() for e in events]}


class HttpBackend:
    """The same surface, spoken over the /v1 HTTP API."""

    def __init__(self, url: str, token: str | None = None):
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        self.client = httpx.Client(base_url=url.rstrip("/"), headers=headers,
                                   timeout=60.0)

    def _call(self, method: str, path: str, **kwargs) -> httpx.Response:
        resp = self.client.request(method, path, **kwargs)
        if resp.status_code >= 400:
            try:
                body = resp.json()
            except json.JSONDecodeError:
                body = {"code": "HttpError", "detail": resp.text}
            raise _ApiError(body.get("code", "HttpError"), body.get("detail", ""))
        return resp

    def _json(self, method: str, path: str, **kwargs) -> dict:
        return self._call(method, path, **kwargs).json()

    def id_mint(self, body: dict) -> dict:
        return self._json("POST", "/v1/id/mint", json=body)

    def id_resolve(self, id_text: str) -> dict:
        return self._json("GET", f"/v1/id/{id_text}")

    def id_update(self, id_text: str, locations: list[str]) -> dict:
        return self._json("PATCH", f"/v1/id/{id_text}/locations",
                          json={"locations": locations})

    def id_upgrade(self, id_text: str, doi: str) -> dict:
        return self._json("POST", f"/v1/id/{id_text}/upgrade", json={"doi": doi})

    def model_fetch(self) -> dict:
        return self._json("GET", "/v1/catalog/model")

    def model_change(self, change: dict) -> dict:
        return self._json("POST", "/v1/catalog/model", json={"change": change})

    def insert(self, schema: str, table: str, values: dict) -> dict:
        return self._json("POST", f"/v1/catalog/entity/{schema}/{table}", json=values)

    def update(self, rid: str, values: dict, delete: bool = False) -> dict:
        body: dict[str, Any] = {"delete": True} if delete else {"values": values}
        return self._json("PATCH", f"/v1/catalog/entity/{rid}", json=body)

    def get(self, rid: str, snapshot: int | None = None) -> dict:
        params = {"snapshot": snapshot} if snapshot is not None else {}
        return self._json("GET", f"/v1/catalog/entity/{rid}", params=params)

    def query(self, path: str, filters=(), facets=(), snapshot=None,
              limit: int = 100, cursor=None) -> dict:
        params: list[tuple[str, Any]] = [("path", path), ("limit", limit)]
        params += [("filter", f"{c}:{o}:{json.dumps(v) if not isinstance(v, str) else v}")
                   for c, o, v in filters]
        params += [("facet", f) for f in facets]
        if snapshot is not None:
            params.append(("snapshot", snapshot))
        if cursor:
            params.append(("cursor", cursor))
        return self._json("GET", "/v1/catalog/query", params=params)

    def export(self, rids: list[str], depth, out: Path, title=None,
               namespace: str = "MINID") -> dict:
        resp = self._call("POST", "/v1/catalog/export",
                          json={"rids": rids, "depth": depth, "title": title,
                                "namespace": namespace})
        Path(out).write_bytes(resp.content)
        return {"id": resp.headers.get("x-fair-id", ""), "archive": str(out),
                "checksum": resp.headers.get("x-fair-checksum", ""),
                "rids": [r for r in resp.headers.get("x-fair-rids", "").split(",") if r]}

    def flow_define(self, document: dict) -> dict:
        return self._json("POST", "/v1/flow/define", json={"flow": document})

    def flow_run(self, flow, params: dict) -> dict:
        return self._json("POST", "/v1/flow/run", json={"flow": flow, "params": params})

    def flow_resume(self, run_id: str) -> dict:
        return self._json("POST", f"/v1/flow/{run_id}/resume")

    def flow_audit(self, run_id: str) -> dict:
        return self._json("GET", f"/v1/flow/{run_id}/audit")


class _ApiError(FairError):
    """Service-side error carried back to the CLI with its code."""

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self._code = code

    @property
    def code(self) -> str:
        return self._code
