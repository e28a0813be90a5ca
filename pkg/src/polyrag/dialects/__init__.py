"""Dialect validators: parse and safety-check generated queries.

The four parsers define exactly the query subset the in-memory backends
execute. ``validate_query`` and ``render_query`` dispatch on dialect.
"""

from __future__ import annotations

from ..model import Dialect
from .document import DocumentFilterQuery, render_document_filter, validate_document_filter
from .graph import GraphPatternQuery, render_graph_pattern, validate_graph_pattern
from .search import SearchDslQuery, render_search_dsl, validate_search_dsl
from .sql import SqlSelect, render_sql, validate_sql

__all__ = [
    "SqlSelect",
    "DocumentFilterQuery",
    "GraphPatternQuery",
    "SearchDslQuery",
    "validate_sql",
    "validate_document_filter",
    "validate_graph_pattern",
    "validate_search_dsl",
    "validate_query",
    "render_query",
    "normalize_query_text",
]

ParsedQuery = SqlSelect | DocumentFilterQuery | GraphPatternQuery | SearchDslQuery


def validate_query(dialect: Dialect, text: str, *, index: str = "") -> ParsedQuery:
    """Parse ``text`` under ``dialect``; raises on anything outside the subset."""
    if dialect is Dialect.SQL:
        return validate_sql(text)
    if dialect is Dialect.DOCUMENT_FILTER:
        return validate_document_filter(text)
    if dialect is Dialect.GRAPH_PATTERN:
        return validate_graph_pattern(text)
    return validate_search_dsl(text, index=index)


def render_query(parsed: ParsedQuery) -> str:
    """Canonical pretty-printer; render(parse(t)) re-parses to an equal AST."""
    if isinstance(parsed, SqlSelect):
        return render_sql(parsed)
    if isinstance(parsed, DocumentFilterQuery):
        return render_document_filter(parsed)
    if isinstance(parsed, GraphPatternQuery):
        return render_graph_pattern(parsed)
    return render_search_dsl(parsed)


def normalize_query_text(text: str) -> str:
    """Collapse whitespace runs outside quoted literals to single spaces.

    Used to compare query text without being brittle about layout;
    quoted-literal interiors are preserved verbatim.
    """
    out: list[str] = []
    quote: str | None = None
    pending_space = False
    for ch in text:
        if quote is not None:
            out.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in ("'", '"'):
            if pending_space and out:
                out.append(" ")
            pending_space = False
            out.append(ch)
            quote = ch
            continue
        if ch.isspace():
            pending_space = True
            continue
        if pending_space and out:
            out.append(" ")
        pending_space = False
        out.append(ch)
    return "".join(out)
