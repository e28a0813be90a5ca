"""Lexical routing: pick the data source and specialized agent for a question.

Each agent is scored by weighted keyword overlap between the question's
tokens and that agent's vocabulary — schema-derived terms (entity names,
field names, relationship types) plus a kind-trigger lexicon and any
per-agent extensions. The argmax wins; ties break by registration order.
Routing is pure lexical scoring, deterministic and free; an LLM-backed
classifier can be slotted in behind the same interface if ever needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateAgent, EmptyRegistry, KindMismatch, NoSuitableAgent, RouterError
from .model import DataSourceKind, UserQuery
from .schema import SchemaDescriptor
from .agents import AgentDescriptor

DEFAULT_THRESHOLD = 0.15
DEFAULT_SCHEMA_WEIGHT = 1.0
DEFAULT_LEXICON_WEIGHT = 1.0

STOPWORDS = frozenset(
    """
    a an the all any of to by in on at for with and or is are was were be
    been being do does did done have has had what which who whom whose how
    when where why that this these those there their them they it its as
    from into onto over under than then he she we you i me my our your
    please related still
    """.split()
)

# Trigger words that signal a kind even when the schema vocabulary is silent.
KIND_LEXICON: dict[DataSourceKind, frozenset[str]] = {
    DataSourceKind.RELATIONAL: frozenset(
        {"table", "sql", "row", "record", "column", "relational"}
    ),
    DataSourceKind.DOCUMENT: frozenset(
        {"document", "collection", "nosql", "find", "store"}
    ),
    DataSourceKind.GRAPH: frozenset(
        {
            "graph",
            "node",
            "network",
            "relationship",
            "collaborator",
            "collaborate",
            "collaboration",
            "connected",
            "working",
            "works",
        }
    ),
    DataSourceKind.SEARCH: frozenset(
        {"search", "ticket", "support", "issue", "open", "closed", "raised", "incident"}
    ),
}

_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")
_ALNUM_RE = re.compile(r"[A-Za-z0-9]+")


def _normalize(token: str) -> str:
    token = token.lower()
    # Naive singularization keeps "projects" and "project" comparable.
    if len(token) > 3 and token.endswith("s"):
        token = token[:-1]
    return token


def vocabulary_tokens(name: str) -> set[str]:
    """Split an identifier on underscores, camel-case, and digits."""
    words: list[str] = []
    for chunk in _ALNUM_RE.findall(name):
        words.extend(_CAMEL_RE.findall(chunk))
    return {
        _normalize(w)
        for w in words
        if w.lower() not in STOPWORDS and len(w) > 1
    }


def query_tokens(text: str) -> set[str]:
    return {
        _normalize(w)
        for w in _ALNUM_RE.findall(text.lower())
        if w not in STOPWORDS
    }


@dataclass(frozen=True)
class RoutingDecision:
    source_id: str
    agent_id: str
    score: float
    runner_up_scores: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class _RegisteredAgent:
    descriptor: AgentDescriptor
    schema: SchemaDescriptor
    schema_vocab: frozenset[str]
    lexicon: frozenset[str]


def _schema_vocabulary(schema: SchemaDescriptor) -> frozenset[str]:
    vocab: set[str] = set()
    for entity in schema.entities:
        vocab |= vocabulary_tokens(entity.name)
        for f in entity.fields:
            vocab |= vocabulary_tokens(f.name)
    for rel in schema.relationships:
        vocab |= vocabulary_tokens(rel.type)
    if schema.display_name:
        vocab |= vocabulary_tokens(schema.display_name)
    return frozenset(vocab)


class AgentRegistry:
    """Append-only at setup time, frozen before serving."""

    def __init__(
        self,
        threshold: float = DEFAULT_THRESHOLD,
        schema_weight: float = DEFAULT_SCHEMA_WEIGHT,
        lexicon_weight: float = DEFAULT_LEXICON_WEIGHT,
    ):
        self.threshold = threshold
        self.schema_weight = schema_weight
        self.lexicon_weight = lexicon_weight
        self._agents: dict[str, _RegisteredAgent] = {}
        self._frozen = False

    def register(
        self,
        descriptor: AgentDescriptor,
        schema: SchemaDescriptor,
        extra_lexicon: tuple[str, ...] = (),
    ) -> None:
        if self._frozen:
            raise RouterError("registry is frozen; agents register at setup time only")
        if descriptor.agent_id in self._agents:
            raise DuplicateAgent(f"agent {descriptor.agent_id!r} already registered")
        if descriptor.kind is not schema.kind:
            raise KindMismatch(
                f"agent {descriptor.agent_id!r} kind {descriptor.kind.value!r} "
                f"does not match schema kind {schema.kind.value!r}"
            )
        if descriptor.source_id != schema.source_id:
            raise KindMismatch(
                f"agent {descriptor.agent_id!r} serves {descriptor.source_id!r}, "
                f"not {schema.source_id!r}"
            )
        schema_vocab = _schema_vocabulary(schema)
        lexicon = {_normalize(term) for term in KIND_LEXICON[descriptor.kind]}
        for term in extra_lexicon:
            lexicon.add(_normalize(term))
        self._agents[descriptor.agent_id] = _RegisteredAgent(
            descriptor=descriptor,
            schema=schema,
            schema_vocab=schema_vocab,
            lexicon=frozenset(lexicon) - schema_vocab,
        )

    def freeze(self) -> None:
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __len__(self) -> int:
        return len(self._agents)

    def agent_ids(self) -> tuple[str, ...]:
        return tuple(self._agents)

    def get(self, agent_id: str) -> _RegisteredAgent:
        return self._agents[agent_id]

    def agents_of_kind(self, kind: DataSourceKind) -> tuple[_RegisteredAgent, ...]:
        return tuple(a for a in self._agents.values() if a.descriptor.kind is kind)


def register_agent(
    registry: AgentRegistry,
    descriptor: AgentDescriptor,
    schema: SchemaDescriptor,
    extra_lexicon: tuple[str, ...] = (),
) -> AgentRegistry:
    """Functional-style wrapper around AgentRegistry.register."""
    registry.register(descriptor, schema, extra_lexicon)
    return registry


def identify_data_source(query: UserQuery, registry: AgentRegistry) -> RoutingDecision:
    """Score every registered agent and return the argmax.

    Deterministic for a fixed (query, registry): ties break by agent
    registration order. Raises NoSuitableAgent when the best score falls
    below the registry threshold.
    """
    if len(registry) == 0:
        raise EmptyRegistry("no agents registered")
    if not registry.frozen:
        raise RouterError("registry must be frozen before routing")

    tokens = query_tokens(query.text)
    scored: list[tuple[str, float]] = []
    for agent_id in registry.agent_ids():
        agent = registry.get(agent_id)
        if not tokens:
            scored.append((agent_id, 0.0))
            continue
        schema_hits = len(tokens & agent.schema_vocab)
        lexicon_hits = len(tokens & agent.lexicon)
        raw = (
            registry.schema_weight * schema_hits
            + registry.lexicon_weight * lexicon_hits
        )
        scored.append((agent_id, raw / len(tokens)))

    best_id, best_score = scored[0]
    for agent_id, score in scored[1:]:
        if score > best_score:
            best_id, best_score = agent_id, score

    if best_score < registry.threshold:
        raise NoSuitableAgent(
            f"best score {best_score:.3f} below threshold {registry.threshold} "
            f"for question {query.text!r}"
        )
    runner_ups = tuple(
        (agent_id, score) for agent_id, score in scored if agent_id != best_id
    )
    return RoutingDecision(
        source_id=registry.get(best_id).descriptor.source_id,
        agent_id=best_id,
        score=best_score,
        runner_up_scores=runner_ups,
    )
