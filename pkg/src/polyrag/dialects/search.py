"""Search DSL subset: a bool query with a non-empty must list of match clauses.

Only ``{"query": {"bool": {"must": [{"match": {field: text}}, ...]}}}``
is representable; scripted or mutating clauses do not exist in the type.
The index name is not part of the query body — the agent's source
binding supplies it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import ParseError, UnsupportedClause


@dataclass(frozen=True)
class SearchDslQuery:
    index: str
    must_clauses: tuple[tuple[str, str], ...]  # (field, match text)


def validate_search_dsl(text: str, index: str = "") -> SearchDslQuery:
    """Parse the structured query document; reject anything beyond bool/must/match."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.pos, "a valid JSON query document")
    if not isinstance(doc, dict):
        raise ParseError(0, "a JSON object at the top level")
    for key in doc:
        if key != "query":
            raise UnsupportedClause(f"top-level clause {key!r} is not supported")
    if "query" not in doc:
        raise ParseError(0, "a 'query' object")

    query = doc["query"]
    if not isinstance(query, dict):
        raise ParseError(0, "an object under 'query'")
    for key in query:
        if key != "bool":
            raise UnsupportedClause(f"query clause {key!r} is not supported (only 'bool')")
    if "bool" not in query:
        raise ParseError(0, "a 'bool' object under 'query'")

    bool_clause = query["bool"]
    if not isinstance(bool_clause, dict):
        raise ParseError(0, "an object under 'bool'")
    for key in bool_clause:
        if key != "must":
            raise UnsupportedClause(f"bool clause {key!r} is not supported (only 'must')")
    must = bool_clause.get("must")
    if not isinstance(must, list) or not must:
        raise ParseError(0, "a non-empty 'must' array")

    clauses: list[tuple[str, str]] = []
    for i, item in enumerate(must):
        if not isinstance(item, dict):
            raise ParseError(0, f"an object at must[{i}]")
        for key in item:
            if key != "match":
                raise UnsupportedClause(
                    f"must[{i}] clause {key!r} is not supported (only 'match')"
                )
        match = item.get("match")
        if not isinstance(match, dict) or len(match) != 1:
            raise ParseError(0, f"a single-field match object at must[{i}]")
        field, value = next(iter(match.items()))
        if not isinstance(value, str):
            raise ParseError(0, f"a string match text at must[{i}].{field}")
        clauses.append((field, value))

    return SearchDslQuery(index=index, must_clauses=tuple(clauses))


def render_search_dsl(query: SearchDslQuery) -> str:
    """Pretty-print in the conventional nested layout; re-parses equal."""
    lines = ["{", '  "query": {', '    "bool": {', '      "must": [']
    for i, (field, value) in enumerate(query.must_clauses):
        comma = "," if i + 1 < len(query.must_clauses) else ""
        lines.append(
            f'        {{ "match": {{ {json.dumps(field)}: {json.dumps(value)} }}}}{comma}'
        )
    lines += ["      ]", "    }", "  }", "}"]
    return "\n".join(lines)
