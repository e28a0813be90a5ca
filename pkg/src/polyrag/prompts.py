"""Prompt assembly: specialized agent prompts, the monolithic baseline,
and context-window enforcement.

Prompts are byte-deterministic for fixed inputs. Each section's byte
range is recorded so tests (and the scripted provider) can extract the
schema block, the examples, or the question exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import InsufficientSources, NoExamples, WindowExceeded
from .model import (
    DIALECT_FOR_KIND,
    Dialect,
    ModelProfile,
    TokenCount,
    UserQuery,
    estimate_tokens,
)
from .schema import SchemaDescriptor

DEFAULT_COMPLETION_RESERVE = 256
MONOLITHIC_AGENT_ID = "monolithic"
GENERATIVE_AGENT_ID = "generative"

INSTRUCTION_FOR_DIALECT: dict[Dialect, str] = {
    Dialect.SQL: "Generate a single read-only SQL query. Output only the query.",
    Dialect.DOCUMENT_FILTER: (
        "Generate a single read-only document filter query. Output only the query."
    ),
    Dialect.GRAPH_PATTERN: (
        "Generate a single read-only graph pattern query. Output only the query."
    ),
    Dialect.SEARCH_DSL: (
        "Generate a single read-only search DSL query. Output only the query."
    ),
}
MONOLITHIC_INSTRUCTION = (
    "Generate a single read-only query for the most relevant data source. "
    "Output only the query."
)


@dataclass(frozen=True)
class FewShotExample:
    question: str
    expected_query: str


@dataclass(frozen=True)
class Prompt:
    agent_id: str
    body: str
    token_count: TokenCount
    # (name, start, end) byte offsets into body.encode("utf-8"), in order.
    section_offsets: tuple[tuple[str, int, int], ...]

    def section(self, name: str) -> str:
        for sec, start, end in self.section_offsets:
            if sec == name:
                return self.body.encode("utf-8")[start:end].decode("utf-8")
        raise KeyError(name)

    def section_names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.section_offsets)


class _Assembler:
    """Accumulates body text while tracking byte offsets per section."""

    def __init__(self):
        self._parts: list[str] = []
        self._bytes = 0
        self._sections: list[tuple[str, int, int]] = []

    def literal(self, text: str) -> None:
        self._parts.append(text)
        self._bytes += len(text.encode("utf-8"))

    def section(self, name: str, text: str) -> None:
        start = self._bytes
        self.literal(text)
        self._sections.append((name, start, self._bytes))

    def build(self, agent_id: str, profile: ModelProfile) -> Prompt:
        body = "".join(self._parts)
        return Prompt(
            agent_id=agent_id,
            body=body,
            token_count=estimate_tokens(body, profile),
            section_offsets=tuple(self._sections),
        )


def format_examples(examples: Sequence[FewShotExample]) -> str:
    return "\n\n".join(
        f"Question: {e.question}\nQuery:\n{e.expected_query}" for e in examples
    )


def build_agent_prompt(
    query: UserQuery,
    schema: SchemaDescriptor,
    examples: Sequence[FewShotExample],
    agent_id: str,
    profile: ModelProfile,
) -> Prompt:
    """Assemble instruction, schema, examples, question — in that order."""
    if not examples:
        raise NoExamples(f"agent {agent_id!r} has no few-shot examples")
    dialect = DIALECT_FOR_KIND[schema.kind]
    asm = _Assembler()
    asm.section("instruction", INSTRUCTION_FOR_DIALECT[dialect])
    asm.literal("\n\nSchema:\n")
    asm.section("schema", schema.rendered_block)
    asm.literal("\n\nExamples:\n")
    asm.section("examples", format_examples(examples))
    asm.literal("\n\nQuestion: ")
    asm.section("question", query.text)
    asm.literal("\n")
    return asm.build(agent_id, profile)


def build_monolithic_prompt(
    query: UserQuery,
    schemas: Sequence[SchemaDescriptor],
    example_sets: Sequence[Sequence[FewShotExample]],
    profile: ModelProfile,
) -> Prompt:
    """Single-agent baseline prompt embedding every schema and example set."""
    if len(schemas) < 2:
        raise InsufficientSources(
            f"monolithic prompt needs at least 2 sources, got {len(schemas)}"
        )
    asm = _Assembler()
    asm.section("instruction", MONOLITHIC_INSTRUCTION)
    asm.literal("\n\nSchemas:\n")
    asm.section("schema", "\n\n".join(s.rendered_block for s in schemas))
    asm.literal("\n\nExamples:\n")
    flat = [e for example_set in example_sets for e in example_set]
    asm.section("examples", format_examples(flat))
    asm.literal("\n\nQuestion: ")
    asm.section("question", query.text)
    asm.literal("\n")
    return asm.build(MONOLITHIC_AGENT_ID, profile)


def build_synthesis_prompt(
    query: UserQuery,
    result_payload: dict,
    profile: ModelProfile,
    table_format: bool,
) -> Prompt:
    """Prompt for the generative agent: question plus serialized records."""
    style = (
        "Present the records as an aligned table."
        if table_format
        else "Present the records as short bullet lines."
    )
    asm = _Assembler()
    asm.section(
        "instruction",
        "Answer the user's question using only the records below. " + style,
    )
    asm.literal("\n\nRecords:\n")
    asm.section("results", json.dumps(result_payload))
    asm.literal("\n\nQuestion: ")
    asm.section("question", query.text)
    asm.literal("\n")
    return asm.build(GENERATIVE_AGENT_ID, profile)


def build_retry_prompt(base: Prompt, diagnostic: str, profile: ModelProfile) -> Prompt:
    """Base prompt plus the validator diagnostic as a trailing feedback section."""
    asm = _Assembler()
    asm.literal(base.body)
    # The base body is a prefix of the new body, so its byte ranges
    # remain valid verbatim.
    asm._sections = list(base.section_offsets)
    asm.literal("\nFeedback: the previous query failed validation: ")
    asm.section("feedback", diagnostic)
    asm.literal("\nReturn a corrected query.\n")
    return asm.build(base.agent_id, profile)


def enforce_context_window(
    prompt: Prompt,
    profile: ModelProfile,
    reserve: int = DEFAULT_COMPLETION_RESERVE,
) -> None:
    """Raise WindowExceeded unless prompt tokens + reserve fit the window."""
    if prompt.token_count + reserve > profile.context_window:
        raise WindowExceeded(prompt.token_count, profile.context_window, reserve)


def load_example_file(path: str | Path) -> tuple[FewShotExample, ...]:
    """Example-set file: ordered list of question/expected_query pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return tuple(
        FewShotExample(question=item["question"], expected_query=item["expected_query"])
        for item in raw
    )
