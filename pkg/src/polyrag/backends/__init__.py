"""Query execution environment: connections, adapters, seed ingestion."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ExecutionFailed, UnknownSource
from ..model import DataSourceKind
from ..schema import SchemaDescriptor
from .base import (
    BackendAdapter,
    BackendConnection,
    Health,
    QueryResult,
    compare_values,
    execute,
)
from .document import DocumentBackend
from .external import ExternalAdapter
from .graph import GraphBackend
from .relational import RelationalBackend
from .search import SearchBackend

__all__ = [
    "BackendAdapter",
    "BackendConnection",
    "Health",
    "QueryResult",
    "execute",
    "compare_values",
    "connect",
    "load_seed_data",
    "make_backend",
    "RelationalBackend",
    "DocumentBackend",
    "GraphBackend",
    "SearchBackend",
    "ExternalAdapter",
]

_BACKEND_FOR_KIND = {
    DataSourceKind.RELATIONAL: RelationalBackend,
    DataSourceKind.DOCUMENT: DocumentBackend,
    DataSourceKind.GRAPH: GraphBackend,
    DataSourceKind.SEARCH: SearchBackend,
}


def make_backend(schema: SchemaDescriptor) -> BackendAdapter:
    return _BACKEND_FOR_KIND[schema.kind](schema)


def connect(source_id: str, config) -> BackendConnection:
    """Open the backend for a declared source.

    In-memory sources load their seed file (when configured) and come up
    ready; external sources are probed and raise ConnectionFailed when
    unreachable.
    """
    source = config.source(source_id)
    if source is None:
        raise UnknownSource(f"source {source_id!r} is not declared in the config")
    schema = source.load_schema()
    if source.endpoint:
        adapter = ExternalAdapter(schema, source.endpoint)
        adapter.probe()
        return BackendConnection(source_id, schema.kind, adapter, Health.READY)
    adapter = make_backend(schema)
    connection = BackendConnection(source_id, schema.kind, adapter, Health.READY)
    if source.seed_path is not None:
        load_seed_data(connection, source.seed_path)
    return connection


def load_seed_data(connection: BackendConnection, dataset_path: str | Path) -> int:
    """Atomically replace backend contents from a seed file; returns record count."""
    if isinstance(connection.adapter, ExternalAdapter):
        raise ExecutionFailed("seed loading is only supported for in-memory backends")
    with open(dataset_path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return connection.adapter.load(data)
