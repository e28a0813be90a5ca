"""In-memory relational backend executing the SELECT subset."""

from __future__ import annotations

from ..dialects.sql import And, ColumnRef, Comparison, Literal, Or, SqlSelect
from ..errors import ExecutionFailed, MalformedDataset
from ..model import DataSourceKind
from ..schema import SchemaDescriptor
from .base import Value, check_field_value, compare_values, state_digest


class RelationalBackend:
    kind = DataSourceKind.RELATIONAL

    def __init__(self, schema: SchemaDescriptor):
        self.schema = schema
        self._tables: dict[str, list[dict]] = {e.name: [] for e in schema.entities}

    def load(self, data: dict) -> int:
        """Replace all table contents; rows must carry exactly the declared columns."""
        tables = data.get("tables")
        if not isinstance(tables, dict):
            raise MalformedDataset(0, "tables", "seed file must map table name to rows")
        staged: dict[str, list[dict]] = {e.name: [] for e in self.schema.entities}
        count = 0
        for tname, rows in tables.items():
            entity = self.schema.entity(tname)
            if entity is None:
                raise MalformedDataset(0, tname, "table is not declared in the schema")
            declared = entity.field_names()
            for i, row in enumerate(rows):
                for fname in declared:
                    if fname not in row:
                        raise MalformedDataset(i, fname, "row is missing a declared column")
                for fname in row:
                    if fname not in declared:
                        raise MalformedDataset(i, fname, "column is not declared")
                for f in entity.fields:
                    if not check_field_value(f.type, row[f.name]):
                        raise MalformedDataset(
                            i, f.name, f"value {row[f.name]!r} is not a valid {f.type}"
                        )
                staged[tname].append(dict(row))
                count += 1
        self._tables = staged
        return count

    def state_hash(self) -> str:
        return state_digest(self._tables)

    def _eval(self, expr, row: dict) -> bool:
        if isinstance(expr, Comparison):
            return compare_values(
                self._operand(expr.left, row), expr.op, self._operand(expr.right, row)
            )
        # Children evaluate eagerly so type faults surface deterministically.
        results = [self._eval(item, row) for item in expr.items]
        return all(results) if isinstance(expr, And) else any(results)

    def _operand(self, operand, row: dict) -> Value:
        if isinstance(operand, Literal):
            return operand.value
        if operand.name not in row:
            raise ExecutionFailed(f"unknown column {operand.name!r}")
        return row[operand.name]

    def query(self, parsed: SqlSelect) -> tuple[tuple[str, ...], list[tuple[Value, ...]]]:
        entity = self.schema.entity(parsed.table)
        if entity is None:
            raise ExecutionFailed(f"unknown table {parsed.table!r}")
        declared = entity.field_names()
        rows = self._tables.get(parsed.table, [])

        if parsed.predicate is not None:
            rows = [r for r in rows if self._eval(parsed.predicate, r)]
        if parsed.order_by is not None:
            col, direction = parsed.order_by
            if col not in declared:
                raise ExecutionFailed(f"unknown column {col!r} in ORDER BY")
            try:
                rows = sorted(rows, key=lambda r: r[col], reverse=direction == "DESC")
            except TypeError as e:
                raise ExecutionFailed(f"cannot order by {col!r}: {e}")
        if parsed.limit is not None:
            rows = rows[: parsed.limit]

        columns = declared if parsed.columns is None else parsed.columns
        for col in columns:
            if col not in declared:
                raise ExecutionFailed(f"unknown column {col!r} in projection")
        return tuple(columns), [tuple(r[c] for c in columns) for r in rows]
