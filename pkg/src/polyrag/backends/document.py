"""In-memory document backend executing find-only filters."""

from __future__ import annotations

from ..dialects.document import DocumentFilterQuery, EqCond, GtCond, InCond, LtCond
from ..errors import ExecutionFailed, MalformedDataset
from ..model import DataSourceKind
from ..schema import SchemaDescriptor
from .base import Value, check_field_value, compare_values, state_digest


class DocumentBackend:
    kind = DataSourceKind.DOCUMENT

    def __init__(self, schema: SchemaDescriptor):
        self.schema = schema
        self._collections: dict[str, list[dict]] = {e.name: [] for e in schema.entities}

    def load(self, data: dict) -> int:
        collections = data.get("collections")
        if not isinstance(collections, dict):
            raise MalformedDataset(0, "collections", "seed file must map collection to documents")
        staged: dict[str, list[dict]] = {e.name: [] for e in self.schema.entities}
        count = 0
        for cname, docs in collections.items():
            entity = self.schema.entity(cname)
            if entity is None:
                raise MalformedDataset(0, cname, "collection is not declared in the schema")
            declared = set(entity.field_names())
            for i, doc in enumerate(docs):
                for fname, value in doc.items():
                    if fname not in declared:
                        raise MalformedDataset(i, fname, "field is not declared")
                    ftype = entity.field_type(fname)
                    if not check_field_value(ftype, value):
                        raise MalformedDataset(
                            i, fname, f"value {value!r} is not a valid {ftype}"
                        )
                staged[cname].append(dict(doc))
                count += 1
        self._collections = staged
        return count

    def state_hash(self) -> str:
        return state_digest(self._collections)

    @staticmethod
    def _matches(doc: dict, field: str, cond) -> bool:
        # Absent fields never match; that is standard document-store
        # behavior, not a fault.
        if field not in doc:
            return False
        value = doc[field]
        if isinstance(cond, EqCond):
            return type(value) is type(cond.value) and value == cond.value
        if isinstance(cond, InCond):
            return any(type(value) is type(v) and value == v for v in cond.values)
        op = ">" if isinstance(cond, GtCond) else "<"
        return compare_values(value, op, cond.value)

    def query(
        self, parsed: DocumentFilterQuery
    ) -> tuple[tuple[str, ...], list[tuple[Value, ...]]]:
        entity = self.schema.entity(parsed.collection)
        if entity is None:
            raise ExecutionFailed(f"unknown collection {parsed.collection!r}")
        docs = self._collections.get(parsed.collection, [])
        for field, _ in parsed.conditions:
            if field not in entity.field_names():
                raise ExecutionFailed(f"unknown field {field!r}")
        matches = [
            doc
            for doc in docs
            if all(self._matches(doc, field, cond) for field, cond in parsed.conditions)
        ]
        columns = entity.field_names()
        return columns, [tuple(doc.get(c) for c in columns) for doc in matches]
