"""Versioned HTTP API over identifiers, catalog, and flows."""

from .app import ServiceState, create_app, route_table, serve

__all__ = ["ServiceState", "create_app", "route_table", "serve"]
