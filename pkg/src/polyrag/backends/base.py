"""Backend adapter contract, connections, and shared value semantics.

The four in-memory backends are the reference execution semantics;
external-driver adapters share the same contract but are registration
seams only. All backends are read-only by construction: ``query`` never
mutates the store, and ``load`` replaces contents atomically.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence

from ..errors import DialectMismatch, ExecutionFailed
from ..model import DIALECT_FOR_KIND, DataSourceKind
from ..schema import SchemaDescriptor

Value = str | int | float | bool | None


@dataclass(frozen=True)
class QueryResult:
    columns: tuple[str, ...]
    rows: tuple[tuple[Value, ...], ...]
    row_count: int
    elapsed_ms: float
    source_id: str

    def __post_init__(self):
        if self.row_count != len(self.rows):
            raise ValueError("row_count must equal the number of rows")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("every row must have exactly one value per column")


class Health(str, Enum):
    READY = "ready"
    FAILED = "failed"


class BackendAdapter(Protocol):
    kind: DataSourceKind
    schema: SchemaDescriptor

    def load(self, data: dict) -> int: ...

    def query(self, parsed) -> tuple[tuple[str, ...], list[tuple[Value, ...]]]: ...

    def state_hash(self) -> str: ...


@dataclass
class BackendConnection:
    source_id: str
    kind: DataSourceKind
    adapter: BackendAdapter
    health: Health = Health.READY


def type_class(value: Value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    return "string"


def compare_values(left: Value, op: str, right: Value) -> bool:
    """Ordered/equality comparison with no silent cross-type coercion."""
    lc, rc = type_class(left), type_class(right)
    if lc != rc or lc == "null":
        raise ExecutionFailed(
            f"cannot compare {lc} with {rc} (values {left!r} and {right!r})"
        )
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if lc == "bool":
        raise ExecutionFailed(f"ordered comparison {op!r} is not defined for bool")
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ExecutionFailed(f"unknown comparison operator {op!r}")


def check_field_value(ftype: str, value: Value) -> bool:
    """Does a seed value conform to its declared semantic type?"""
    if ftype == "string":
        return isinstance(value, str)
    if ftype == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if ftype == "float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if ftype == "bool":
        return isinstance(value, bool)
    if ftype == "date":
        return isinstance(value, str) and len(value) == 10 and value[4] == "-" and value[7] == "-"
    return False


def state_digest(payload) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()


def execute(connection: BackendConnection, query) -> QueryResult:
    """Evaluate a GeneratedQuery against the connection's backend.

    EmptyResult is not an error: an accepted query over an empty store
    returns row_count 0. ExecutionFailed signals a backend fault and is
    retryable by the pipeline.
    """
    if connection.health is not Health.READY:
        raise ExecutionFailed(f"connection {connection.source_id!r} is not ready")
    if query.source_id != connection.source_id:
        raise DialectMismatch(
            f"query targets {query.source_id!r} but connection is {connection.source_id!r}"
        )
    if query.dialect is not DIALECT_FOR_KIND[connection.kind]:
        raise DialectMismatch(
            f"dialect {query.dialect.value!r} cannot run on a "
            f"{connection.kind.value!r} backend"
        )
    start = time.perf_counter()
    columns, rows = connection.adapter.query(query.parsed)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return QueryResult(
        columns=columns,
        rows=tuple(rows),
        row_count=len(rows),
        elapsed_ms=elapsed_ms,
        source_id=connection.source_id,
    )


def rows_from_records(
    records: Sequence[dict], field_names: Sequence[str]
) -> list[tuple[Value, ...]]:
    return [tuple(rec.get(name) for name in field_names) for rec in records]
