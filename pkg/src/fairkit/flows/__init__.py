"""Declarative, resumable, audited publication pipelines."""

from .runner import (
    COMPLETED,
    FAILED,
    RUNNING,
    AuditEvent,
    FlowRun,
    FlowRunner,
    ServiceBindings,
    StepState,
)
from .spec import EFFECTFUL_KINDS, KIND_OUTPUTS, FlowDef, StepDef, define_flow
from .steps import StepFailure, register_extractor

__all__ = [
    "AuditEvent",
    "COMPLETED",
    "EFFECTFUL_KINDS",
    "FAILED",
    "FlowDef",
    "FlowRun",
    "FlowRunner",
    "KIND_OUTPUTS",
    "RUNNING",
    "ServiceBindings",
    "StepDef",
    "StepFailure",
    "StepState",
    "define_flow",
    "register_extractor",
]
