"""Uniform completion interface over providers.

The scripted provider is a deterministic rule table keyed on the prompt's
question section — end-to-end tests never touch the network. The HTTP
provider posts the prompt body to a configured endpoint for live
deployments. Both sit behind ``LlmGateway.complete``.
"""

from __future__ import annotations

import json
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .errors import ProviderRefusal, ProviderUnavailable
from .model import ModelProfile, TokenCount, estimate_tokens
from .prompts import (
    GENERATIVE_AGENT_ID,
    Prompt,
    enforce_context_window,
)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: Prompt
    profile: ModelProfile
    temperature: float = 0.0
    max_output_tokens: int = 512

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    output_token_estimate: TokenCount
    provider_latency_ms: float
    provider: str


class CompletionProvider(Protocol):
    name: str

    def complete_text(self, request: CompletionRequest) -> str: ...


def normalize_question(question: str) -> str:
    """Collapse whitespace and drop trailing sentence punctuation."""
    return " ".join(question.split()).rstrip(".?! ")


_SLOT_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")


@dataclass(frozen=True)
class ScriptedRule:
    """One (question-pattern, template) record.

    Patterns are exact-match on the normalized question with named
    ``{slot}`` captures for proper nouns; captured values are substituted
    into the template.
    """

    pattern: str
    template: str
    agent_id: str = "*"
    _regex: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        normalized = normalize_question(self.pattern)
        parts = _SLOT_RE.split(normalized)
        compiled = ""
        for i, part in enumerate(parts):
            compiled += f"(?P<{part}>.+?)" if i % 2 else re.escape(part)
        object.__setattr__(self, "_regex", re.compile("^" + compiled + "$"))

    def apply(self, question: str) -> str | None:
        m = self._regex.match(question)
        if m is None:
            return None
        text = self.template
        for name, value in m.groupdict().items():
            text = text.replace("{" + name + "}", value)
        return text


def _aligned_table(columns: list[str], rows: list[list]) -> list[str]:
    cells = [[str(c) for c in columns]] + [
        ["null" if v is None else str(v) for v in row] for row in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]


def render_synthesis(prompt: Prompt) -> str:
    """Deterministic generative-agent output: restate the question,
    enumerate the serialized rows, and state the row count."""
    question = prompt.section("question")
    payload = json.loads(prompt.section("results"))
    columns: list[str] = payload["columns"]
    rows: list[list] = payload["rows"]
    row_count: int = payload["row_count"]
    source_id: str = payload.get("source_id", "")

    lines = [f"Question: {question}"]
    if row_count == 0:
        lines.append("The query returned no matching records.")
        return "\n".join(lines)

    if "aligned table" in prompt.section("instruction"):
        lines += _aligned_table(columns, rows)
    else:
        for row in rows:
            rendered = ", ".join(
                f"{col}: {'null' if val is None else val}"
                for col, val in zip(columns, row)
            )
            lines.append(f"- {rendered}")
    summary = f"{row_count} matching record(s) from {source_id}."
    if payload.get("truncated"):
        summary += f" Showing the first {len(rows)}."
    lines.append(summary)
    return "\n".join(lines)


class ScriptedProvider:
    """Deterministic completions from an ordered rule table."""

    name = "scripted"

    def __init__(self, rules: Sequence[ScriptedRule] = ()):
        self.rules = list(rules)

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            [
                ScriptedRule(
                    pattern=item["pattern"],
                    template=item["template"],
                    agent_id=item.get("agent_id", "*"),
                )
                for item in raw
            ]
        )

    def complete_text(self, request: CompletionRequest) -> str:
        prompt = request.prompt
        if prompt.agent_id == GENERATIVE_AGENT_ID:
            return render_synthesis(prompt)
        question = normalize_question(prompt.section("question"))
        for rule in self.rules:
            if rule.agent_id not in ("*", prompt.agent_id):
                continue
            filled = rule.apply(question)
            if filled is not None:
                return filled
        raise ProviderRefusal(f"no scripted rule matches question {question!r}")


class HttpProvider:
    """POSTs the prompt body to an endpoint; response shape is adapter-internal."""

    name = "http"

    def __init__(
        self,
        endpoint: str,
        auth_env: str | None = None,
        timeout_ms: int = 30_000,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint
        self.auth_env = auth_env
        self.timeout_ms = timeout_ms
        self._slots = threading.Semaphore(max_in_flight)

    def complete_text(self, request: CompletionRequest) -> str:
        import os

        payload = json.dumps(
            {
                "prompt": request.prompt.body,
                "temperature": request.temperature,
                "max_tokens": request.max_output_tokens,
            }
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        req = urllib.request.Request(self.endpoint, data=payload, headers=headers)
        with self._slots:
            try:
                with urllib.request.urlopen(req, timeout=self.timeout_ms / 1000) as resp:
                    body = resp.read().decode("utf-8")
            except (urllib.error.URLError, OSError, TimeoutError) as e:
                raise ProviderUnavailable(f"endpoint {self.endpoint}: {e}")
        try:
            doc = json.loads(body)
            text = doc["text"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ProviderRefusal("provider response did not contain completion text")
        if not isinstance(text, str):
            raise ProviderRefusal("provider completion text was not a string")
        return text


class LlmGateway:
    """Dispatch completions to the provider named by the request profile."""

    def __init__(
        self,
        providers: dict[str, CompletionProvider],
        completion_reserve: int = 256,
    ):
        self.providers = dict(providers)
        self.completion_reserve = completion_reserve

    def complete(self, request: CompletionRequest) -> CompletionResult:
        # Never dispatch a request whose prompt fails window enforcement.
        enforce_context_window(request.prompt, request.profile, self.completion_reserve)
        provider = self.providers.get(request.profile.provider)
        if provider is None:
            raise ProviderUnavailable(
                f"no provider registered for {request.profile.provider!r}"
            )
        start = time.perf_counter()
        text = provider.complete_text(request).strip()
        latency_ms = (time.perf_counter() - start) * 1000.0
        if not text:
            raise ProviderRefusal("provider returned an empty completion")
        return CompletionResult(
            text=text,
            output_token_estimate=estimate_tokens(text, request.profile),
            provider_latency_ms=latency_ms,
            provider=provider.name,
        )
