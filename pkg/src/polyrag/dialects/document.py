"""Find-only document filter dialect: ``db.<collection>.find({...});``.

The filter object is a flat map of field to condition; a condition is a
literal equality or exactly one of $gt/$lt/$in. Conjunction over map
entries is implicit. No update/delete shapes are representable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Union

from ..errors import ParseError, ReadOnlyViolation

READ_ONLY_METHOD = "find"

_HEAD_RE = re.compile(r"db\.([A-Za-z_][A-Za-z0-9_]*)\.([A-Za-z_][A-Za-z0-9_]*)\s*\(")

Scalar = Union[str, int, float, bool]


@dataclass(frozen=True)
class EqCond:
    value: Scalar


@dataclass(frozen=True)
class GtCond:
    value: Scalar


@dataclass(frozen=True)
class LtCond:
    value: Scalar


@dataclass(frozen=True)
class InCond:
    values: tuple[Scalar, ...]


Condition = Union[EqCond, GtCond, LtCond, InCond]


@dataclass(frozen=True)
class DocumentFilterQuery:
    collection: str
    conditions: tuple[tuple[str, Condition], ...]  # declaration order


def _parse_condition(field: str, value, offset: int) -> Condition:
    if isinstance(value, bool) or isinstance(value, (str, int, float)):
        return EqCond(value)
    if isinstance(value, dict):
        if len(value) != 1:
            raise ParseError(offset, f"exactly one operator for field {field!r}")
        op, operand = next(iter(value.items()))
        if op == "$gt" or op == "$lt":
            if isinstance(operand, bool) or not isinstance(operand, (str, int, float)):
                raise ParseError(offset, f"a scalar operand for {op} on {field!r}")
            return GtCond(operand) if op == "$gt" else LtCond(operand)
        if op == "$in":
            if not isinstance(operand, list) or not operand:
                raise ParseError(offset, f"a non-empty list operand for $in on {field!r}")
            for item in operand:
                if isinstance(item, bool) or not isinstance(item, (str, int, float)):
                    raise ParseError(offset, f"scalar elements for $in on {field!r}")
            return InCond(tuple(operand))
        raise ParseError(offset, f"one of $gt, $lt, $in for field {field!r} (got {op!r})")
    raise ParseError(offset, f"a scalar or operator object for field {field!r}")


def validate_document_filter(text: str) -> DocumentFilterQuery:
    """Parse a db.<collection>.find(...) call; reject everything else."""
    text = text.strip()
    m = _HEAD_RE.match(text)
    if m is None:
        raise ParseError(0, "db.<collection>.<method>(...)")
    collection, method = m.group(1), m.group(2)
    if method != READ_ONLY_METHOD:
        raise ReadOnlyViolation(
            f"method {method!r} is not allowed; only {READ_ONLY_METHOD!r} is read-only"
        )

    # Balanced-paren extraction of the single argument.
    depth, start, end = 1, m.end(), None
    in_string = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if ch == '"' and text[i - 1] != "\\":
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                end = i
                break
    if end is None:
        raise ParseError(len(text), "')' closing the find call")
    trailer = text[end + 1 :].strip()
    if trailer not in ("", ";"):
        raise ParseError(end + 1, "nothing after the find call except ';'")

    arg = text[start:end].strip()
    if not arg:
        raise ParseError(start, "a JSON filter object")
    try:
        filter_obj = json.loads(arg)
    except json.JSONDecodeError as e:
        raise ParseError(start + e.pos, "a valid JSON filter object")
    if not isinstance(filter_obj, dict):
        raise ParseError(start, "a JSON object as the filter")

    conditions = tuple(
        (field, _parse_condition(field, value, start))
        for field, value in filter_obj.items()
    )
    return DocumentFilterQuery(collection=collection, conditions=conditions)


def _render_value(value) -> str:
    return json.dumps(value)


def _render_condition(cond: Condition) -> str:
    if isinstance(cond, EqCond):
        return _render_value(cond.value)
    if isinstance(cond, GtCond):
        return f'{{ "$gt": {_render_value(cond.value)} }}'
    if isinstance(cond, LtCond):
        return f'{{ "$lt": {_render_value(cond.value)} }}'
    items = ", ".join(_render_value(v) for v in cond.values)
    return f'{{ "$in": [{items}] }}'


def render_document_filter(query: DocumentFilterQuery) -> str:
    if not query.conditions:
        return f"db.{query.collection}.find({{}});"
    body = ", ".join(
        f'"{field}": {_render_condition(cond)}' for field, cond in query.conditions
    )
    return f"db.{query.collection}.find({{ {body} }});"
