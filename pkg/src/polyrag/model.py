"""Core domain types: user queries, source kinds, model profiles, token estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import UnknownKind

# Estimated tokens. Always a non-negative integer; empty text estimates to 0.
TokenCount = int


class DataSourceKind(str, Enum):
    RELATIONAL = "relational"
    DOCUMENT = "document"
    GRAPH = "graph"
    SEARCH = "search"

    @classmethod
    def parse(cls, raw: str) -> "DataSourceKind":
        try:
            return cls(raw)
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise UnknownKind(f"unknown data source kind {raw!r} (expected one of: {known})")


class Dialect(str, Enum):
    SQL = "sql"
    DOCUMENT_FILTER = "document_filter"
    GRAPH_PATTERN = "graph_pattern"
    SEARCH_DSL = "search_dsl"


# Each source kind is served by exactly one query dialect.
DIALECT_FOR_KIND: dict[DataSourceKind, Dialect] = {
    DataSourceKind.RELATIONAL: Dialect.SQL,
    DataSourceKind.DOCUMENT: Dialect.DOCUMENT_FILTER,
    DataSourceKind.GRAPH: Dialect.GRAPH_PATTERN,
    DataSourceKind.SEARCH: Dialect.SEARCH_DSL,
}


class ResponseFormat(str, Enum):
    PLAIN_TEXT = "plain_text"
    TABLE = "table"


@dataclass(frozen=True)
class UserQuery:
    """A natural-language question plus per-session bookkeeping."""

    text: str
    session_id: str = ""
    requested_format: ResponseFormat = ResponseFormat.PLAIN_TEXT

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("query text must be non-empty after trimming whitespace")


@dataclass(frozen=True)
class ModelProfile:
    """Completion-provider identity and token budget parameters."""

    name: str
    provider: str = "scripted"  # "scripted" | "http"
    context_window: int = 128_000
    chars_per_token: float = 4.0
    endpoint: str | None = None
    auth_env: str | None = None
    timeout_ms: int = 30_000

    def __post_init__(self):
        if self.provider not in ("scripted", "http"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.context_window <= 0:
            raise ValueError("context_window must be positive")
        if self.chars_per_token <= 0:
            raise ValueError("chars_per_token must be positive")


def estimate_tokens(text: str, profile: ModelProfile) -> TokenCount:
    """Deterministic character-ratio token estimate.

    ceiling(len(text) / chars_per_token); monotone non-decreasing in
    text length, and 0 for empty text.
    """
    if not text:
        return 0
    return math.ceil(len(text) / profile.chars_per_token)


def _builtin(name: str, window: int) -> ModelProfile:
    return ModelProfile(name=name, provider="scripted", context_window=window)


# Published context windows for common local and API-hosted models.
# Mistral 7B advertises a 4096-token base window (sliding attention can
# stretch it to 16K; the conservative base is used for enforcement).
BUILTIN_PROFILES: dict[str, ModelProfile] = {
    p.name: p
    for p in (
        _builtin("Mistral 7B", 4_096),
        _builtin("Zephyr", 8_192),
        _builtin("Phi-2", 2_048),
        _builtin("Llama 3", 8_192),
        _builtin("GPT-4", 128_000),
        _builtin("GPT-4 Turbo", 128_000),
        _builtin("GPT-3.5 Turbo", 16_385),
        _builtin("Gemini 1.5 Flash", 1_048_576),
        _builtin("Gemini 1.5 Pro", 2_097_152),
    )
}


def _profile_key(name: str) -> str:
    return "".join(ch for ch in name.casefold() if ch.isalnum())


_PROFILES_BY_KEY = {_profile_key(name): p for name, p in BUILTIN_PROFILES.items()}


def lookup_profile(name: str) -> ModelProfile | None:
    """Find a built-in profile by name, ignoring case and punctuation."""
    return _PROFILES_BY_KEY.get(_profile_key(name))
