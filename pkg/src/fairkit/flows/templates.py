"""Stock flow documents.

``publish_flow`` is the standard seven-step publication pipeline:
capture, checksum, metadata, packaging, quality control, identifier
minting, and cataloging. Callers adapt it by overriding the target
table or adding steps before defining it.
"""

from __future__ import annotations


def publish_flow(name: str = "publish", table: str = "Data_Asset",
                 schema: str = "main", namespace: str = "MINID",
                 on_error="halt") -> dict:
    return {
        "name": name,
        "on_error": on_error,
        "steps": [
            {
                "name": "capture",
                "kind": "ingest_file",
                "inputs": {"source": "params.file"},
            },
            {
                "name": "checksum",
                "kind": "compute_checksum",
                "inputs": {"path": "steps.capture.path"},
            },
            {
                "name": "describe",
                "kind": "extract_metadata",
                "inputs": {"path": "steps.capture.path"},
            },
            {
                "name": "package",
                "kind": "build_bag",
                "inputs": {"path": "steps.capture.path",
                           "metadata": "steps.describe.metadata"},
            },
            {
                "name": "qc",
                "kind": "quality_check",
                "params": {"predicate": {"check": "digest_equals",
                                         "left": "steps.checksum.digest",
                                         "right": "steps.package.payload_digest"}},
            },
            {
                "name": "identify",
                "kind": "mint_id",
                "params": {"namespace": namespace},
                "inputs": {"digest": "steps.package.bag_digest",
                           "location": "steps.package.bag_path",
                           "title": "params.title"},
            },
            {
                "name": "register",
                "kind": "register_record",
                "params": {"schema": schema, "table": table},
                "inputs": {"values": {
                    "url": "steps.capture.url",
                    "checksum": "steps.checksum.digest",
                    "length": "steps.checksum.length",
                    "identifier": "steps.identify.id",
                    "name": "params.title",
                }},
            },
        ],
    }
