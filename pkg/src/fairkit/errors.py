"""Shared error hierarchy.

Every operational failure raises a :class:`FairError` subclass whose
``code`` (the class name) is stable across the library, the HTTP API,
and the CLI, so callers can match on it regardless of transport.
"""

from __future__ import annotations


class FairError(Exception):
    """Base class for all operational errors."""

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail

    @property
    def code(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:  # pragma: no cover - trivial
        return f"{self.code}: {self.detail}" if self.detail else self.code


class NotFound(FairError):
    """The referenced identifier, record, or run does not exist."""


# -- bag ---------------------------------------------------------------

class UnreadableSource(FairError):
    pass


class UnsupportedAlgorithm(FairError):
    pass


class DestinationExists(FairError):
    pass


class IoFailure(FairError):
    pass


class NotABag(FairError):
    pass


class MalformedManifestLine(FairError):
    def __init__(self, detail: str, line_number: int):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number


class UnsupportedVersion(FairError):
    pass


class MissingUrl(FairError):
    pass


class NoHandler(FairError):
    pass


class FetchFailed(FairError):
    pass


class DigestMismatchAfterFetch(FairError):
    pass


class IncompleteBag(FairError):
    pass


# -- idspace -----------------------------------------------------------

class EmptyLocations(FairError):
    pass


class MalformedDigest(FairError):
    pass


class MalformedId(FairError):
    def __init__(self, detail: str, position: int):
        super().__init__(f"position {position}: {detail}")
        self.position = position


class SupersededImmutable(FairError):
    pass


class MalformedDoi(FairError):
    pass


# -- catalog -----------------------------------------------------------

class Forbidden(FairError):
    pass


class DanglingReference(FairError):
    pass


class DuplicateName(FairError):
    pass


class TypeViolation(FairError):
    pass


class UnknownTerm(FairError):
    pass


class UnknownPath(FairError):
    pass


class UnknownColumn(FairError):
    pass


class UnreachableAsset(FairError):
    pass


# -- flows -------------------------------------------------------------

class ParseError(FairError):
    pass


class UnboundInput(FairError):
    pass


class NotResumable(FairError):
    pass


# -- services / cli ----------------------------------------------------

class BindFailure(FairError):
    pass


class CorruptLog(FairError):
    def __init__(self, detail: str, position: int):
        super().__init__(f"line {position}: {detail}")
        self.position = position


class UnknownRoute(FairError):
    pass


class NotEmpty(FairError):
    pass


class Conflict(FairError):
    """Optimistic-concurrency failure: the record changed since it was read."""


class UsageError(FairError):
    pass


# HTTP status per error code, used by the service layer and by the CLI
# when translating ApiError bodies back into exit codes.
HTTP_STATUS: dict[str, int] = {
    "NotFound": 404,
    "UnknownRoute": 404,
    "Forbidden": 403,
    "UnreadableSource": 400,
    "UnsupportedAlgorithm": 400,
    "DestinationExists": 409,
    "IoFailure": 500,
    "NotABag": 400,
    "MalformedManifestLine": 400,
    "UnsupportedVersion": 400,
    "MissingUrl": 400,
    "NoHandler": 400,
    "FetchFailed": 502,
    "DigestMismatchAfterFetch": 502,
    "IncompleteBag": 409,
    "EmptyLocations": 400,
    "MalformedDigest": 400,
    "MalformedId": 400,
    "SupersededImmutable": 409,
    "MalformedDoi": 400,
    "DanglingReference": 400,
    "DuplicateName": 409,
    "TypeViolation": 400,
    "UnknownTerm": 400,
    "UnknownPath": 400,
    "UnknownColumn": 400,
    "UnreachableAsset": 400,
    "ParseError": 400,
    "UnboundInput": 400,
    "NotResumable": 409,
    "BindFailure": 500,
    "CorruptLog": 500,
    "NotEmpty": 409,
    "Conflict": 409,
    "UsageError": 400,
}


def http_status(code: str) -> int:
    return HTTP_STATUS.get(code, 500)
