"""Specialized query-generation agents.

An agent turns (user question, schema) into a validated GeneratedQuery:
build the few-shot prompt, enforce the window, complete, extract the
query from the completion, and validate it. On a validation failure the
agent retries exactly once with the validator diagnostic appended to the
prompt, then gives up with both diagnostics.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Callable, Sequence

from .dialects import ParsedQuery, validate_query
from .errors import (
    DialectError,
    GenerationFailed,
    NoQueryFound,
    ProviderRefusal,
    WindowExceeded,
)
from .gateway import CompletionRequest, LlmGateway
from .model import DIALECT_FOR_KIND, DataSourceKind, Dialect, ModelProfile, UserQuery
from .prompts import FewShotExample, Prompt, build_agent_prompt, build_retry_prompt, enforce_context_window
from .schema import SchemaDescriptor

# Called as observer(stage, outcome, duration_ms, tokens_in, tokens_out).
StageObserver = Callable[[str, str, float, int, int], None]


@dataclass(frozen=True)
class AgentDescriptor:
    agent_id: str
    kind: DataSourceKind
    source_id: str
    dialect: Dialect | None = None
    example_set_id: str = ""

    def __post_init__(self):
        expected = DIALECT_FOR_KIND[self.kind]
        if self.dialect is None:
            object.__setattr__(self, "dialect", expected)
        elif self.dialect is not expected:
            raise ValueError(
                f"dialect {self.dialect.value!r} does not match kind {self.kind.value!r}"
            )


@dataclass(frozen=True)
class GeneratedQuery:
    dialect: Dialect
    text: str
    parsed: ParsedQuery
    source_id: str
    provenance: str  # "first_attempt" | "retry"


# Extraction anchors include mutating keywords on purpose: a completion
# like "DROP TABLE x" must reach the validator so the failure is named a
# read-only violation rather than a missing query.
_ANCHOR_RES: dict[Dialect, re.Pattern] = {
    Dialect.SQL: re.compile(
        r"\b(?:SELECT|INSERT|UPDATE|DELETE|DROP|CREATE|ALTER|TRUNCATE|REPLACE|MERGE)\b",
        re.IGNORECASE,
    ),
    Dialect.DOCUMENT_FILTER: re.compile(r"\bdb\."),
    Dialect.GRAPH_PATTERN: re.compile(
        r"\b(?:MATCH|CREATE|MERGE|DELETE|SET|REMOVE|DETACH)\b", re.IGNORECASE
    ),
}

_FENCE_RE = re.compile(r"```[A-Za-z0-9_+-]*\n(.*?)```", re.DOTALL)


def _cut_at_terminator(text: str, quote_chars: str) -> str:
    quote: str | None = None
    for i, ch in enumerate(text):
        if quote is not None:
            if ch == quote:
                quote = None
        elif ch in quote_chars:
            quote = ch
        elif ch == ";":
            return text[: i + 1]
    return text


def _extract_braced(text: str) -> str:
    start = text.find("{")
    if start < 0:
        raise NoQueryFound("no '{' found in completion")
    depth = 0
    in_string = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if ch == '"' and text[i - 1] != "\\":
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise NoQueryFound("unbalanced braces in completion")


def extract_query_from_completion(completion: str, dialect: Dialect) -> str:
    """Strip fences and surrounding prose; return the trimmed candidate query."""
    text = completion
    fence = _FENCE_RE.search(text)
    if fence is not None:
        text = fence.group(1)
    if dialect is Dialect.SEARCH_DSL:
        return _extract_braced(text).strip()
    anchor = _ANCHOR_RES[dialect].search(text)
    if anchor is None:
        raise NoQueryFound(f"no {dialect.value} anchor found in completion")
    tail = text[anchor.start() :]
    quotes = '"' + "'" if dialect is Dialect.DOCUMENT_FILTER else "'"
    return _cut_at_terminator(tail, quotes).strip()


def _noop_observer(stage: str, outcome: str, duration_ms: float, tokens_in: int, tokens_out: int) -> None:
    return None


def generate_query(
    agent: AgentDescriptor,
    query: UserQuery,
    schema: SchemaDescriptor,
    examples: Sequence[FewShotExample],
    gateway: LlmGateway,
    profile: ModelProfile,
    *,
    max_output_tokens: int = 512,
    observer: StageObserver | None = None,
) -> GeneratedQuery:
    """Produce a validated GeneratedQuery or raise.

    WindowExceeded and ProviderUnavailable pass through; extraction and
    validation failures are retried once with the diagnostic appended,
    then raised as GenerationFailed carrying both attempts' diagnostics.
    """
    if agent.source_id != schema.source_id:
        raise ValueError(
            f"agent {agent.agent_id!r} serves {agent.source_id!r}, "
            f"not {schema.source_id!r}"
        )
    emit = observer or _noop_observer
    index_binding = schema.entities[0].name

    start = time.perf_counter()
    try:
        prompt = build_agent_prompt(query, schema, examples, agent.agent_id, profile)
        enforce_context_window(prompt, profile, gateway.completion_reserve)
    except WindowExceeded:
        emit("prompt", "failed", (time.perf_counter() - start) * 1000, 0, 0)
        raise
    emit("prompt", "ok", (time.perf_counter() - start) * 1000, 0, prompt.token_count)

    attempts: list[str] = []
    active_prompt = prompt
    for attempt_no in (0, 1):
        last_attempt = attempt_no == 1
        start = time.perf_counter()
        try:
            completion = gateway.complete(
                CompletionRequest(
                    prompt=active_prompt,
                    profile=profile,
                    max_output_tokens=max_output_tokens,
                )
            )
        except ProviderRefusal as e:
            emit(
                "complete",
                "failed" if last_attempt else "retried",
                (time.perf_counter() - start) * 1000,
                active_prompt.token_count,
                0,
            )
            attempts.append(f"{type(e).__name__}: {e}")
            if last_attempt:
                raise GenerationFailed(attempts)
            active_prompt = build_retry_prompt(prompt, attempts[-1], profile)
            continue
        except Exception:
            emit(
                "complete",
                "failed",
                (time.perf_counter() - start) * 1000,
                active_prompt.token_count,
                0,
            )
            raise
        emit(
            "complete",
            "ok",
            (time.perf_counter() - start) * 1000,
            active_prompt.token_count,
            completion.output_token_estimate,
        )

        start = time.perf_counter()
        try:
            candidate = extract_query_from_completion(completion.text, agent.dialect)
            parsed = validate_query(agent.dialect, candidate, index=index_binding)
        except (DialectError, NoQueryFound) as e:
            emit(
                "validate",
                "failed" if last_attempt else "retried",
                (time.perf_counter() - start) * 1000,
                0,
                0,
            )
            attempts.append(f"{type(e).__name__}: {e}")
            if last_attempt:
                raise GenerationFailed(attempts)
            active_prompt = build_retry_prompt(prompt, attempts[-1], profile)
            continue
        emit("validate", "ok", (time.perf_counter() - start) * 1000, 0, 0)
        return GeneratedQuery(
            dialect=agent.dialect,
            text=candidate,
            parsed=parsed,
            source_id=agent.source_id,
            provenance="retry" if attempt_no else "first_attempt",
        )
    raise GenerationFailed(attempts)  # unreachable; loop always returns or raises
