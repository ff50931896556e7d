"""BagIt-format data aggregations: create, serialize, parse, validate,
externalize (holey bags), and materialize."""

from .build import create_bag, make_holey, refresh_tag_manifests
from .materialize import default_resolvers, materialize, minid_handler
from .model import (
    Bag,
    FetchEntry,
    ManifestEntry,
    MetadataBlock,
    PayloadEntry,
)
from .parse import read_bag
from .serialize import archive_bytes, encode_path, decode_path, write_bag
from .validate import COMPLETE, VALID, BagValidationReport, Problem, check

__all__ = [
    "Bag",
    "BagValidationReport",
    "COMPLETE",
    "FetchEntry",
    "ManifestEntry",
    "MetadataBlock",
    "PayloadEntry",
    "Problem",
    "VALID",
    "archive_bytes",
    "check",
    "create_bag",
    "decode_path",
    "default_resolvers",
    "encode_path",
    "make_holey",
    "materialize",
    "minid_handler",
    "read_bag",
    "refresh_tag_manifests",
    "write_bag",
]
