"""In-memory property-graph backend executing single-hop MATCH patterns."""

from __future__ import annotations

from dataclasses import dataclass

from ..dialects.graph import GraphPatternQuery, NodePattern
from ..errors import ExecutionFailed, MalformedDataset
from ..model import DataSourceKind
from ..schema import SchemaDescriptor
from .base import Value, check_field_value, compare_values, state_digest


@dataclass(frozen=True)
class _Node:
    node_id: str
    label: str
    properties: dict


@dataclass(frozen=True)
class _Edge:
    rel_type: str
    from_id: str
    to_id: str


class GraphBackend:
    kind = DataSourceKind.GRAPH

    def __init__(self, schema: SchemaDescriptor):
        self.schema = schema
        self._nodes: list[_Node] = []
        self._edges: list[_Edge] = []
        self._by_id: dict[str, _Node] = {}

    def load(self, data: dict) -> int:
        raw_nodes = data.get("nodes", [])
        raw_edges = data.get("relationships", [])
        declared_rels = {r.type for r in self.schema.relationships}
        nodes: list[_Node] = []
        by_id: dict[str, _Node] = {}
        for i, rn in enumerate(raw_nodes):
            node_id = rn.get("id")
            label = rn.get("label")
            props = rn.get("properties", {})
            if not node_id:
                raise MalformedDataset(i, "id", "node is missing an id")
            if node_id in by_id:
                raise MalformedDataset(i, "id", f"duplicate node id {node_id!r}")
            entity = self.schema.entity(label or "")
            if entity is None:
                raise MalformedDataset(i, "label", f"unknown node label {label!r}")
            for pname, pvalue in props.items():
                ptype = entity.field_type(pname)
                if ptype is None:
                    raise MalformedDataset(i, pname, "property is not declared")
                if not check_field_value(ptype, pvalue):
                    raise MalformedDataset(
                        i, pname, f"value {pvalue!r} is not a valid {ptype}"
                    )
            node = _Node(node_id, label, dict(props))
            nodes.append(node)
            by_id[node_id] = node
        edges: list[_Edge] = []
        for i, re_ in enumerate(raw_edges):
            rtype = re_.get("type")
            from_id = re_.get("from_id")
            to_id = re_.get("to_id")
            if rtype not in declared_rels:
                raise MalformedDataset(i, "type", f"unknown relationship type {rtype!r}")
            if from_id not in by_id:
                raise MalformedDataset(i, "from_id", f"unknown node id {from_id!r}")
            if to_id not in by_id:
                raise MalformedDataset(i, "to_id", f"unknown node id {to_id!r}")
            edges.append(_Edge(rtype, from_id, to_id))
        self._nodes, self._edges, self._by_id = nodes, edges, by_id
        return len(nodes) + len(edges)

    def state_hash(self) -> str:
        return state_digest(
            {
                "nodes": [[n.node_id, n.label, n.properties] for n in self._nodes],
                "edges": [[e.rel_type, e.from_id, e.to_id] for e in self._edges],
            }
        )

    @staticmethod
    def _node_matches(node: _Node, pattern: NodePattern) -> bool:
        if pattern.label is not None and node.label != pattern.label:
            return False
        for key, expected in pattern.properties:
            if key not in node.properties or node.properties[key] != expected:
                return False
        return True

    def query(
        self, parsed: GraphPatternQuery
    ) -> tuple[tuple[str, ...], list[tuple[Value, ...]]]:
        heads = [n for n in self._nodes if self._node_matches(n, parsed.head)]

        bindings: list[dict[str, _Node]] = []
        if parsed.hop is None:
            bindings = [{parsed.head.variable: n} for n in heads]
        else:
            hop = parsed.hop
            for head in heads:
                for edge in self._edges:
                    if edge.rel_type != hop.rel_type:
                        continue
                    if hop.direction == "out":
                        if edge.from_id != head.node_id:
                            continue
                        other = self._by_id[edge.to_id]
                    else:
                        if edge.to_id != head.node_id:
                            continue
                        other = self._by_id[edge.from_id]
                    if self._node_matches(other, hop.target):
                        bindings.append(
                            {parsed.head.variable: head, hop.target.variable: other}
                        )

        kept: list[dict[str, _Node]] = []
        for binding in bindings:
            ok = True
            for cond in parsed.where:
                node = binding.get(cond.variable)
                if node is None:
                    raise ExecutionFailed(f"unbound variable {cond.variable!r}")
                if cond.prop not in node.properties:
                    ok = False
                    break
                if not compare_values(node.properties[cond.prop], cond.op, cond.value):
                    ok = False
                    break
            if ok:
                kept.append(binding)

        columns = tuple(f"{r.variable}.{r.prop}" for r in parsed.returns)
        rows: list[tuple[Value, ...]] = []
        for binding in kept:
            row = []
            for ref in parsed.returns:
                node = binding.get(ref.variable)
                if node is None:
                    raise ExecutionFailed(f"unbound variable {ref.variable!r}")
                row.append(node.properties.get(ref.prop))
            rows.append(tuple(row))
        return columns, rows
