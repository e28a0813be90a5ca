"""Schema descriptors: validation plus deterministic prompt-block rendering.

A schema file describes one data source. Validation turns the parsed
document into an immutable descriptor whose ``rendered_block`` is the
exact text later embedded into prompts; the layout is fixed here so
prompt tests can assert byte equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    DuplicateField,
    EmptySchema,
    RelationshipsNotAllowed,
    UnknownKind,
)
from .model import DataSourceKind

FIELD_TYPES = ("string", "int", "float", "date", "bool")


@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    type: str


@dataclass(frozen=True)
class EntityDescriptor:
    """A table, collection, index, or node label with its ordered fields."""

    name: str
    fields: tuple[FieldDescriptor, ...]

    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def field_type(self, name: str) -> str | None:
        for f in self.fields:
            if f.name == name:
                return f.type
        return None


@dataclass(frozen=True)
class RelationshipDescriptor:
    type: str
    from_label: str
    to_label: str


@dataclass(frozen=True)
class SchemaDescriptor:
    source_id: str
    kind: DataSourceKind
    entities: tuple[EntityDescriptor, ...]
    relationships: tuple[RelationshipDescriptor, ...]
    rendered_block: str
    display_name: str | None = None

    def entity(self, name: str) -> EntityDescriptor | None:
        for e in self.entities:
            if e.name == name:
                return e
        return None

    def to_raw(self) -> dict:
        """Inverse of validate_schema_descriptor for round-trip checks."""
        raw: dict = {
            "source_id": self.source_id,
            "kind": self.kind.value,
            "entities": [
                {"name": e.name, "fields": {f.name: f.type for f in e.fields}}
                for e in self.entities
            ],
        }
        if self.display_name is not None:
            raw["name"] = self.display_name
        if self.relationships:
            raw["relationships"] = [
                {"type": r.type, "from": r.from_label, "to": r.to_label}
                for r in self.relationships
            ]
        return raw


def _render_relational(entities: tuple[EntityDescriptor, ...]) -> str:
    blocks = []
    for e in entities:
        lines = [f"Table: {e.name}", "Columns:"]
        lines += [f"  - {f.name} ({f.type})" for f in e.fields]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _render_keyed_json(keyword: str, entities: tuple[EntityDescriptor, ...]) -> str:
    blocks = []
    for e in entities:
        doc = {keyword: e.name, "fields": {f.name: f.type for f in e.fields}}
        blocks.append(json.dumps(doc, indent=2))
    return "\n\n".join(blocks)


def _render_graph(
    display_name: str,
    entities: tuple[EntityDescriptor, ...],
    relationships: tuple[RelationshipDescriptor, ...],
) -> str:
    lines = [f"Graph: {display_name}", "Nodes:"]
    for e in entities:
        props = ", ".join(f"{f.name}: {f.type}" for f in e.fields)
        lines.append(f"  - {e.name} {{{props}}}")
    if relationships:
        lines.append("Relationships:")
        seen = []
        for r in relationships:
            if r.type not in seen:
                seen.append(r.type)
                lines.append(f"  - {r.type}")
    return "\n".join(lines)


def render_block(
    kind: DataSourceKind,
    entities: tuple[EntityDescriptor, ...],
    relationships: tuple[RelationshipDescriptor, ...],
    display_name: str,
) -> str:
    """Deterministic schema block; same descriptor fields, same bytes."""
    if kind is DataSourceKind.RELATIONAL:
        return _render_relational(entities)
    if kind is DataSourceKind.DOCUMENT:
        return _render_keyed_json("collection", entities)
    if kind is DataSourceKind.SEARCH:
        return _render_keyed_json("index", entities)
    return _render_graph(display_name, entities, relationships)


def validate_schema_descriptor(raw: dict) -> SchemaDescriptor:
    """Validate a parsed schema document and attach its rendered block.

    Raises EmptySchema, UnknownKind (including RelationshipsNotAllowed),
    or DuplicateField; each error message names the offending path.
    """
    source_id = str(raw.get("source_id", "")).strip()
    if not source_id:
        raise EmptySchema("source_id: missing or empty")
    kind = DataSourceKind.parse(str(raw.get("kind", "")))

    raw_entities = raw.get("entities") or []
    if not raw_entities:
        raise EmptySchema(f"{source_id}: entities: schema declares no entities")

    entities: list[EntityDescriptor] = []
    seen_entities: set[str] = set()
    for i, re_ in enumerate(raw_entities):
        path = f"{source_id}: entities[{i}]"
        name = str(re_.get("name", "")).strip()
        if not name:
            raise EmptySchema(f"{path}.name: missing or empty")
        if name in seen_entities:
            raise DuplicateField(f"{path}.name: duplicate entity {name!r}")
        seen_entities.add(name)
        raw_fields = re_.get("fields") or {}
        if not raw_fields:
            raise EmptySchema(f"{path}.fields: entity declares no fields")
        fields: list[FieldDescriptor] = []
        seen_fields: set[str] = set()
        for fname, ftype in raw_fields.items():
            if fname in seen_fields:
                raise DuplicateField(f"{path}.fields: duplicate field {fname!r}")
            seen_fields.add(fname)
            if ftype not in FIELD_TYPES:
                raise UnknownKind(
                    f"{path}.fields[{fname!r}]: unknown field type {ftype!r} "
                    f"(expected one of: {', '.join(FIELD_TYPES)})"
                )
            fields.append(FieldDescriptor(fname, ftype))
        entities.append(EntityDescriptor(name, tuple(fields)))

    raw_rels = raw.get("relationships") or []
    if raw_rels and kind is not DataSourceKind.GRAPH:
        raise RelationshipsNotAllowed(
            f"{source_id}: relationships: only graph schemas may declare relationships "
            f"(kind is {kind.value!r})"
        )
    relationships: list[RelationshipDescriptor] = []
    labels = {e.name for e in entities}
    for i, rr in enumerate(raw_rels):
        path = f"{source_id}: relationships[{i}]"
        rtype = str(rr.get("type", "")).strip()
        from_label = str(rr.get("from", "")).strip()
        to_label = str(rr.get("to", "")).strip()
        if not rtype:
            raise EmptySchema(f"{path}.type: missing or empty")
        if from_label not in labels:
            raise UnknownKind(f"{path}.from: unknown node label {from_label!r}")
        if to_label not in labels:
            raise UnknownKind(f"{path}.to: unknown node label {to_label!r}")
        relationships.append(RelationshipDescriptor(rtype, from_label, to_label))

    display_name = raw.get("name")
    block = render_block(
        kind,
        tuple(entities),
        tuple(relationships),
        str(display_name) if display_name else source_id,
    )
    return SchemaDescriptor(
        source_id=source_id,
        kind=kind,
        entities=tuple(entities),
        relationships=tuple(relationships),
        rendered_block=block,
        display_name=str(display_name) if display_name else None,
    )


def load_schema_file(path: str | Path) -> SchemaDescriptor:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_schema_descriptor(json.load(fh))
