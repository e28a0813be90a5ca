"""SELECT-only SQL subset: tokenizer, recursive-descent parser, renderer.

The grammar is intentionally small: single-table SELECT with an optional
boolean predicate (=, !=, <>, <, <=, >, >= over columns and literals,
AND/OR, parentheses), ORDER BY, and LIMIT. Nothing else parses, so the
executor only ever sees shapes it implements.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from ..errors import ParseError, ReadOnlyViolation

MUTATION_KEYWORDS = {
    "INSERT",
    "UPDATE",
    "DELETE",
    "DROP",
    "CREATE",
    "ALTER",
    "TRUNCATE",
    "REPLACE",
    "MERGE",
    "GRANT",
    "SET",
}


@dataclass(frozen=True)
class ColumnRef:
    name: str


@dataclass(frozen=True)
class Literal:
    value: Union[str, int, float]


Operand = Union[ColumnRef, Literal]


@dataclass(frozen=True)
class Comparison:
    left: Operand
    op: str  # = != < <= > >=
    right: Operand


@dataclass(frozen=True)
class And:
    items: tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Or:
    items: tuple["BoolExpr", ...]


BoolExpr = Union[Comparison, And, Or]


@dataclass(frozen=True)
class SqlSelect:
    """Parsed SELECT. ``columns`` is None for a star projection."""

    table: str
    columns: tuple[str, ...] | None = None
    predicate: BoolExpr | None = None
    order_by: tuple[str, str] | None = None  # (column, "ASC"|"DESC")
    limit: int | None = None


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|<>|=|<|>)
  | (?P<punct>[(),;*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(pos, f"a SQL token (got {text[pos]!r})")
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self, expected: str) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError(len(self.text), expected)
        self.i += 1
        return tok

    def _expect_keyword(self, word: str) -> _Token:
        tok = self._next(word)
        if tok.kind != "ident" or tok.value.upper() != word:
            raise ParseError(tok.pos, word)
        return tok

    def _at_keyword(self, word: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "ident" and tok.value.upper() == word

    def parse(self) -> SqlSelect:
        tok = self._peek()
        if tok is None:
            raise ParseError(0, "SELECT")
        if tok.kind == "ident" and tok.value.upper() != "SELECT":
            raise ReadOnlyViolation(
                f"only SELECT statements are accepted; got leading keyword {tok.value.upper()!r}"
            )
        self._expect_keyword("SELECT")
        columns = self._parse_projection()
        self._expect_keyword("FROM")
        table = self._identifier("table name")
        predicate = None
        if self._at_keyword("WHERE"):
            self.i += 1
            predicate = self._parse_or()
        order_by = None
        if self._at_keyword("ORDER"):
            self.i += 1
            self._expect_keyword("BY")
            col = self._identifier("column name")
            direction = "ASC"
            if self._at_keyword("ASC") or self._at_keyword("DESC"):
                direction = self._next("direction").value.upper()
            order_by = (col, direction)
        limit = None
        if self._at_keyword("LIMIT"):
            self.i += 1
            tok = self._next("a positive integer")
            if tok.kind != "number" or "." in tok.value or int(tok.value) <= 0:
                raise ParseError(tok.pos, "a positive integer LIMIT")
            limit = int(tok.value)
        tok = self._peek()
        if tok is not None and tok.value == ";":
            self.i += 1
            tok = self._peek()
        if tok is not None:
            raise ParseError(tok.pos, "end of statement")
        return SqlSelect(
            table=table,
            columns=columns,
            predicate=predicate,
            order_by=order_by,
            limit=limit,
        )

    def _parse_projection(self) -> tuple[str, ...] | None:
        tok = self._peek()
        if tok is not None and tok.value == "*":
            self.i += 1
            return None
        cols = [self._identifier("column name")]
        while True:
            tok = self._peek()
            if tok is not None and tok.value == ",":
                self.i += 1
                cols.append(self._identifier("column name"))
            else:
                return tuple(cols)

    def _identifier(self, expected: str) -> str:
        tok = self._next(expected)
        if tok.kind != "ident":
            raise ParseError(tok.pos, expected)
        if tok.value.upper() in MUTATION_KEYWORDS:
            raise ReadOnlyViolation(f"mutation keyword {tok.value.upper()!r} is not allowed")
        return tok.value

    def _parse_or(self) -> BoolExpr:
        items = [self._parse_and()]
        while self._at_keyword("OR"):
            self.i += 1
            items.append(self._parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def _parse_and(self) -> BoolExpr:
        items = [self._parse_unit()]
        while self._at_keyword("AND"):
            self.i += 1
            items.append(self._parse_unit())
        return items[0] if len(items) == 1 else And(tuple(items))

    def _parse_unit(self) -> BoolExpr:
        tok = self._peek()
        if tok is not None and tok.value == "(":
            self.i += 1
            inner = self._parse_or()
            closing = self._next("')'")
            if closing.value != ")":
                raise ParseError(closing.pos, "')'")
            return inner
        left = self._parse_operand()
        op_tok = self._next("a comparison operator")
        if op_tok.kind != "op":
            raise ParseError(op_tok.pos, "a comparison operator")
        op = "!=" if op_tok.value == "<>" else op_tok.value
        right = self._parse_operand()
        return Comparison(left, op, right)

    def _parse_operand(self) -> Operand:
        tok = self._next("a column name or literal")
        if tok.kind == "ident":
            if tok.value.upper() in MUTATION_KEYWORDS:
                raise ReadOnlyViolation(
                    f"mutation keyword {tok.value.upper()!r} is not allowed"
                )
            return ColumnRef(tok.value)
        if tok.kind == "string":
            return Literal(tok.value[1:-1].replace("''", "'"))
        if tok.kind == "number":
            return Literal(float(tok.value) if "." in tok.value else int(tok.value))
        raise ParseError(tok.pos, "a column name or literal")


def validate_sql(text: str) -> SqlSelect:
    """Parse ``text`` into a SqlSelect or raise ParseError/ReadOnlyViolation."""
    return _Parser(text.strip()).parse()


def _render_literal(value: str | int | float) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value) if isinstance(value, float) else str(value)


def _render_operand(operand: Operand) -> str:
    if isinstance(operand, ColumnRef):
        return operand.name
    return _render_literal(operand.value)


def _render_expr(expr: BoolExpr) -> str:
    if isinstance(expr, Comparison):
        return f"{_render_operand(expr.left)} {expr.op} {_render_operand(expr.right)}"
    # Compound children always get parentheses so the rendered text
    # re-parses to an identical tree.
    joiner = " AND " if isinstance(expr, And) else " OR "
    parts = [
        f"({_render_expr(item)})" if isinstance(item, (And, Or)) else _render_expr(item)
        for item in expr.items
    ]
    return joiner.join(parts)


def render_sql(query: SqlSelect) -> str:
    """Canonical single-line rendering; re-parses to an equal AST."""
    cols = "*" if query.columns is None else ", ".join(query.columns)
    parts = [f"SELECT {cols} FROM {query.table}"]
    if query.predicate is not None:
        parts.append(f"WHERE {_render_expr(query.predicate)}")
    if query.order_by is not None:
        parts.append(f"ORDER BY {query.order_by[0]} {query.order_by[1]}")
    if query.limit is not None:
        parts.append(f"LIMIT {query.limit}")
    return " ".join(parts) + ";"
