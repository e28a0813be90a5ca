"""MATCH/RETURN graph pattern dialect with at most one relationship hop.

Accepts patterns like::

    MATCH (r:Researcher {name: 'X'})-[:COLLABORATES_WITH]->(c:Researcher)
    WHERE c.field = 'NLP'
    RETURN c.name;

CREATE/DELETE/SET/MERGE and multi-hop patterns are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from ..errors import ParseError, ReadOnlyViolation, UnsupportedPattern

MUTATION_KEYWORDS = {"CREATE", "DELETE", "SET", "MERGE", "REMOVE", "DETACH", "DROP"}

Scalar = Union[str, int, float]


@dataclass(frozen=True)
class NodePattern:
    variable: str
    label: str | None
    properties: tuple[tuple[str, Scalar], ...]


@dataclass(frozen=True)
class Hop:
    rel_type: str
    direction: str  # "out" for ->, "in" for <-
    target: NodePattern


@dataclass(frozen=True)
class PropComparison:
    variable: str
    prop: str
    op: str  # = != < <= > >=
    value: Scalar


@dataclass(frozen=True)
class PropRef:
    variable: str
    prop: str


@dataclass(frozen=True)
class GraphPatternQuery:
    head: NodePattern
    hop: Hop | None
    where: tuple[PropComparison, ...]
    returns: tuple[PropRef, ...]


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def take(self, literal: str, expected: str | None = None) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        if expected is not None:
            raise ParseError(self.pos, expected)
        return False

    def keyword(self, word: str) -> bool:
        self.skip_ws()
        end = self.pos + len(word)
        if self.text[self.pos : end].upper() == word and (
            end >= len(self.text) or not self.text[end].isalnum() and self.text[end] != "_"
        ):
            self.pos = end
            return True
        return False

    def identifier(self, expected: str) -> str:
        self.skip_ws()
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", self.text[self.pos :])
        if m is None:
            raise ParseError(self.pos, expected)
        word = m.group()
        if word.upper() in MUTATION_KEYWORDS:
            raise ReadOnlyViolation(f"mutation keyword {word.upper()!r} is not allowed")
        self.pos += len(word)
        return word

    def scalar(self) -> Scalar:
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "'":
            end = self.text.find("'", self.pos + 1)
            if end < 0:
                raise ParseError(self.pos, "a closing quote")
            value = self.text[self.pos + 1 : end]
            self.pos = end + 1
            return value
        m = re.match(r"-?\d+(?:\.\d+)?", self.text[self.pos :])
        if m is None:
            raise ParseError(self.pos, "a string or number literal")
        raw = m.group()
        self.pos += len(raw)
        return float(raw) if "." in raw else int(raw)


def _parse_node(cur: _Cursor) -> NodePattern:
    cur.take("(", "'(' starting a node pattern")
    variable = cur.identifier("a node variable")
    label = None
    if cur.take(":"):
        label = cur.identifier("a node label")
    props: list[tuple[str, Scalar]] = []
    if cur.take("{"):
        while True:
            key = cur.identifier("a property name")
            cur.take(":", "':' after property name")
            props.append((key, cur.scalar()))
            if cur.take(","):
                continue
            cur.take("}", "'}' closing the property map")
            break
    cur.take(")", "')' closing the node pattern")
    return NodePattern(variable, label, tuple(props))


def _parse_prop_ref(cur: _Cursor) -> PropRef:
    variable = cur.identifier("a variable name")
    cur.take(".", "'.' after variable")
    prop = cur.identifier("a property name")
    return PropRef(variable, prop)


_MUTATION_SCAN = re.compile(
    r"\b(" + "|".join(MUTATION_KEYWORDS) + r")\b", re.IGNORECASE
)


def validate_graph_pattern(text: str) -> GraphPatternQuery:
    """Parse a MATCH ... [WHERE ...] RETURN ... statement."""
    stripped = text.strip()
    # Mutation keywords anywhere outside string literals are rejected up
    # front so MATCH ... SET ... fails as a safety violation, not a
    # syntax error.
    unquoted = re.sub(r"'[^']*'", "''", stripped)
    hit = _MUTATION_SCAN.search(unquoted)
    if hit is not None:
        raise ReadOnlyViolation(
            f"mutation keyword {hit.group().upper()!r} is not allowed"
        )
    cur = _Cursor(stripped)
    if not cur.keyword("MATCH"):
        raise ParseError(cur.pos, "MATCH")

    head = _parse_node(cur)
    hop = None
    cur.skip_ws()
    if cur.text.startswith(("-", "<"), cur.pos):
        direction = "out"
        if cur.take("<-"):
            direction = "in"
        else:
            cur.take("-", "'-' starting the relationship")
        cur.take("[", "'[' opening the relationship")
        cur.take(":", "':' before the relationship type")
        rel_type = cur.identifier("a relationship type")
        cur.take("]", "']' closing the relationship")
        if direction == "out":
            cur.take("->", "'->' after the relationship")
        else:
            cur.take("-", "'-' after the relationship")
        target = _parse_node(cur)
        hop = Hop(rel_type, direction, target)
        cur.skip_ws()
        if cur.text.startswith(("-", "<"), cur.pos):
            raise UnsupportedPattern("at most one relationship hop is supported")

    where: list[PropComparison] = []
    if cur.keyword("WHERE"):
        while True:
            ref = _parse_prop_ref(cur)
            cur.skip_ws()
            m = re.match(r"<=|>=|!=|<>|=|<|>", cur.text[cur.pos :])
            if m is None:
                raise ParseError(cur.pos, "a comparison operator")
            op = "!=" if m.group() == "<>" else m.group()
            cur.pos += len(m.group())
            where.append(PropComparison(ref.variable, ref.prop, op, cur.scalar()))
            if not cur.keyword("AND"):
                break

    if not cur.keyword("RETURN"):
        raise ParseError(cur.pos, "RETURN")
    returns = [_parse_prop_ref(cur)]
    while cur.take(","):
        returns.append(_parse_prop_ref(cur))
    cur.take(";")
    if not cur.eof():
        raise ParseError(cur.pos, "end of statement")

    known = {head.variable} | ({hop.target.variable} if hop else set())
    for cmp_ in where:
        if cmp_.variable not in known:
            raise ParseError(0, f"a bound variable in WHERE (got {cmp_.variable!r})")
    for ref in returns:
        if ref.variable not in known:
            raise ParseError(0, f"a bound variable in RETURN (got {ref.variable!r})")

    return GraphPatternQuery(head, hop, tuple(where), tuple(returns))


def _render_scalar(value: Scalar) -> str:
    if isinstance(value, str):
        return f"'{value}'"
    return repr(value) if isinstance(value, float) else str(value)


def _render_node(node: NodePattern) -> str:
    inner = node.variable
    if node.label:
        inner += f":{node.label}"
    if node.properties:
        props = ", ".join(f"{k}: {_render_scalar(v)}" for k, v in node.properties)
        inner += f" {{{props}}}"
    return f"({inner})"


def render_graph_pattern(query: GraphPatternQuery) -> str:
    out = "MATCH " + _render_node(query.head)
    if query.hop is not None:
        arrow = f"-[:{query.hop.rel_type}]->" if query.hop.direction == "out" else f"<-[:{query.hop.rel_type}]-"
        out += arrow + _render_node(query.hop.target)
    if query.where:
        conds = " AND ".join(
            f"{c.variable}.{c.prop} {c.op} {_render_scalar(c.value)}" for c in query.where
        )
        out += f" WHERE {conds}"
    out += " RETURN " + ", ".join(f"{r.variable}.{r.prop}" for r in query.returns)
    return out + ";"
