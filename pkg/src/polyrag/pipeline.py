"""End-to-end orchestration: route, generate, execute, synthesize.

Failures walk a bounded fallback ladder — validator-diagnostic re-prompt
(inside the agent), one execute retry, an optional keyword reroute to the
search source — and exhaustion produces a degraded Response carrying all
diagnostics instead of an exception. Degraded responses are first-class
outputs: callers always get an answer or the single terminal
NoSuitableAgent error.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .agents import AgentDescriptor, GeneratedQuery, generate_query
from .backends import BackendConnection, QueryResult, connect, execute
from .config import DeploymentConfig
from .dialects.search import SearchDslQuery, render_search_dsl
from .errors import (
    ConfigError,
    DialectError,
    DialectMismatch,
    EmptyRegistry,
    ExecutionFailed,
    GenerationFailed,
    NoSuitableAgent,
    ProviderRefusal,
    ProviderUnavailable,
    SinkUnavailable,
    WindowExceeded,
)
from .gateway import CompletionRequest, HttpProvider, LlmGateway, ScriptedProvider
from .model import (
    DataSourceKind,
    Dialect,
    ModelProfile,
    ResponseFormat,
    UserQuery,
)
from .prompts import FewShotExample, build_synthesis_prompt, load_example_file
from .router import AgentRegistry, RoutingDecision, identify_data_source, query_tokens
from .schema import SchemaDescriptor
from .dialects import validate_query

NO_SUITABLE_AGENT_MESSAGE = "No suitable agent found for query generation."
MAX_SYNTHESIS_ROWS = 50

STAGES = ("route", "prompt", "complete", "validate", "execute", "synthesize")


@dataclass(frozen=True)
class DiagnosticNote:
    stage: str
    message: str


@dataclass(frozen=True)
class Response:
    text: str
    format: ResponseFormat
    source_id: str
    generated_query_text: str
    degraded: bool
    diagnostics: tuple[DiagnosticNote, ...] = ()

    def __post_init__(self):
        if self.degraded and not self.diagnostics:
            raise ValueError("degraded responses must carry diagnostics")


@dataclass(frozen=True)
class TelemetryEvent:
    timestamp: str
    session_id: str
    stage: str
    duration_ms: float
    tokens_in: int
    tokens_out: int
    outcome: str  # ok | retried | failed


class TelemetrySink:
    """Append-only, line-delimited event log. Flushes per event."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None

    def record(self, event: TelemetryEvent) -> None:
        if self.path is None:
            return
        line = json.dumps(dataclasses.asdict(event))
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
        except OSError as e:
            raise SinkUnavailable(f"telemetry sink {self.path}: {e}")


def record_telemetry(event: TelemetryEvent, sink: TelemetrySink) -> None:
    sink.record(event)


@dataclass(frozen=True)
class FallbackPolicy:
    """Bounded retries per stage; exhaustion degrades instead of crashing."""

    execute_retries: int = 1
    provider_retries: int = 1
    reroute_to_search: bool = False


def run_with_fallback(
    stage_fn: Callable,
    *,
    retries: int,
    retryable: tuple[type[BaseException], ...],
    on_attempt: Callable[[int, BaseException], None] | None = None,
):
    """Run ``stage_fn`` with bounded retries on the given exception types.

    Returns (result, attempts_used); re-raises the final error once the
    budget is exhausted.
    """
    attempt = 0
    while True:
        try:
            return stage_fn(), attempt
        except retryable as e:
            attempt += 1
            if on_attempt is not None:
                on_attempt(attempt, e)
            if attempt > retries:
                raise


@dataclass(frozen=True)
class _AgentBundle:
    descriptor: AgentDescriptor
    schema: SchemaDescriptor
    examples: tuple[FewShotExample, ...]


class Pipeline:
    """One instance serves many sessions; shared state is read-only after init."""

    def __init__(
        self,
        *,
        registry: AgentRegistry,
        bundles: dict[str, _AgentBundle],
        connections: dict[str, BackendConnection],
        gateway: LlmGateway,
        profile: ModelProfile,
        policy: FallbackPolicy,
        sink: TelemetrySink,
    ):
        self.registry = registry
        self.bundles = bundles
        self.connections = connections
        self.gateway = gateway
        self.profile = profile
        self.policy = policy
        self.sink = sink
        self._sink_disabled = False
        self._last_timestamp = ""

    # -- construction -------------------------------------------------

    @classmethod
    def from_config(
        cls,
        config: DeploymentConfig,
        *,
        providers: dict | None = None,
        telemetry_path: str | Path | None = None,
    ) -> "Pipeline":
        schemas: dict[str, SchemaDescriptor] = {}
        for source in config.sources:
            schema = source.load_schema()
            if schema.source_id != source.source_id:
                raise ConfigError(
                    f"schema file for {source.source_id!r} declares "
                    f"source_id {schema.source_id!r}"
                )
            if schema.source_id in schemas:
                raise ConfigError(f"duplicate source_id {schema.source_id!r}")
            schemas[schema.source_id] = schema

        registry = AgentRegistry(
            threshold=config.routing.threshold,
            schema_weight=config.routing.schema_weight,
            lexicon_weight=config.routing.lexicon_weight,
        )
        bundles: dict[str, _AgentBundle] = {}
        for agent_cfg in config.agents:
            schema = schemas[agent_cfg.source_id]
            descriptor = AgentDescriptor(
                agent_id=agent_cfg.agent_id,
                kind=agent_cfg.kind,
                source_id=agent_cfg.source_id,
                example_set_id=agent_cfg.examples_path.name,
            )
            examples = load_example_file(agent_cfg.examples_path)
            index_binding = schema.entities[0].name
            for i, example in enumerate(examples):
                try:
                    validate_query(
                        descriptor.dialect, example.expected_query, index=index_binding
                    )
                except DialectError as e:
                    raise ConfigError(
                        f"example {i} for agent {agent_cfg.agent_id!r} "
                        f"does not validate: {e}"
                    )
            registry.register(descriptor, schema, agent_cfg.lexicon)
            bundles[agent_cfg.agent_id] = _AgentBundle(descriptor, schema, examples)
        registry.freeze()

        connections = {
            source.source_id: connect(source.source_id, config)
            for source in config.sources
        }

        if providers is None:
            scripted = (
                ScriptedProvider.from_file(config.scripted_rules_path)
                if config.scripted_rules_path is not None
                else ScriptedProvider([])
            )
            providers = {"scripted": scripted}
            if config.profile.provider == "http" and config.profile.endpoint:
                providers["http"] = HttpProvider(
                    endpoint=config.profile.endpoint,
                    auth_env=config.profile.auth_env,
                    timeout_ms=config.profile.timeout_ms,
                )
        gateway = LlmGateway(providers, completion_reserve=config.completion_reserve)

        sink_path = telemetry_path if telemetry_path is not None else config.telemetry_path
        return cls(
            registry=registry,
            bundles=bundles,
            connections=connections,
            gateway=gateway,
            profile=config.profile,
            policy=FallbackPolicy(reroute_to_search=config.fallback.reroute_to_search),
            sink=TelemetrySink(sink_path),
        )

    # -- telemetry -----------------------------------------------------

    def _timestamp(self) -> str:
        now = datetime.now(timezone.utc).isoformat()
        # Events for a session must be strictly time-ordered even when the
        # clock resolution ties.
        if now <= self._last_timestamp:
            now = self._last_timestamp + "0"
        self._last_timestamp = now
        return now

    def _emit(
        self,
        notes: list[DiagnosticNote],
        session_id: str,
        stage: str,
        outcome: str,
        duration_ms: float,
        tokens_in: int,
        tokens_out: int,
    ) -> None:
        if self._sink_disabled:
            return
        event = TelemetryEvent(
            timestamp=self._timestamp(),
            session_id=session_id,
            stage=stage,
            duration_ms=duration_ms,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            outcome=outcome,
        )
        try:
            self.sink.record(event)
        except SinkUnavailable as e:
            self._sink_disabled = True
            notes.append(DiagnosticNote("telemetry", str(e)))

    # -- synthesis ------------------------------------------------------

    def _result_payload(self, result: QueryResult) -> dict:
        shown = result.rows[:MAX_SYNTHESIS_ROWS]
        payload = {
            "source_id": result.source_id,
            "columns": list(result.columns),
            "rows": [list(row) for row in shown],
            "row_count": result.row_count,
            "truncated": result.row_count > len(shown),
        }
        if payload["truncated"]:
            payload["note"] = (
                f"showing the first {len(shown)} of {result.row_count} rows"
            )
        return payload

    def synthesize(
        self,
        query: UserQuery,
        result: QueryResult,
        *,
        generated_query_text: str = "",
        observer: Callable | None = None,
    ) -> Response:
        """Turn the question plus retrieved records into the final answer.

        Raises WindowExceeded when even the truncated serialization does
        not fit the model window; the caller degrades in that case.
        """
        start = time.perf_counter()
        prompt = build_synthesis_prompt(
            query,
            self._result_payload(result),
            self.profile,
            table_format=query.requested_format is ResponseFormat.TABLE,
        )
        try:
            completion = self.gateway.complete(
                CompletionRequest(prompt=prompt, profile=self.profile)
            )
        except Exception:
            if observer is not None:
                observer(
                    "synthesize",
                    "failed",
                    (time.perf_counter() - start) * 1000,
                    prompt.token_count,
                    0,
                )
            raise
        if observer is not None:
            observer(
                "synthesize",
                "ok",
                (time.perf_counter() - start) * 1000,
                prompt.token_count,
                completion.output_token_estimate,
            )
        return Response(
            text=completion.text,
            format=query.requested_format,
            source_id=result.source_id,
            generated_query_text=generated_query_text,
            degraded=False,
        )

    # -- degraded paths --------------------------------------------------

    def _search_bundle(self, exclude_source: str) -> _AgentBundle | None:
        for bundle in self.bundles.values():
            if (
                bundle.descriptor.kind is DataSourceKind.SEARCH
                and bundle.descriptor.source_id != exclude_source
            ):
                return bundle
        return None

    def _keyword_query(self, query: UserQuery, schema: SchemaDescriptor) -> SearchDslQuery:
        entity = schema.entities[0]
        field = "description" if "description" in entity.field_names() else entity.field_names()[0]
        # Sorted so the keyword text is deterministic across runs.
        ordered = sorted(query_tokens(query.text))
        return SearchDslQuery(
            index=entity.name, must_clauses=((field, " ".join(ordered)),)
        )

    def _degraded_text(
        self,
        query: UserQuery,
        notes: Sequence[DiagnosticNote],
        result: QueryResult | None = None,
    ) -> str:
        lines = [
            f"Question: {query.text}",
            "This answer is degraded; one or more pipeline stages failed.",
        ]
        lines += [f"- {note.stage}: {note.message}" for note in notes]
        if result is not None:
            lines.append(
                f"Fallback keyword search returned {result.row_count} record(s) "
                f"from {result.source_id}."
            )
            for row in result.rows[:MAX_SYNTHESIS_ROWS]:
                rendered = ", ".join(
                    f"{col}: {'null' if val is None else val}"
                    for col, val in zip(result.columns, row)
                )
                lines.append(f"- {rendered}")
        return "\n".join(lines)

    def _fallback_response(
        self,
        query: UserQuery,
        decision: RoutingDecision,
        generated_query_text: str,
        notes: list[DiagnosticNote],
        session_id: str,
    ) -> Response:
        if self.policy.reroute_to_search:
            bundle = self._search_bundle(exclude_source=decision.source_id)
            if bundle is not None:
                connection = self.connections[bundle.descriptor.source_id]
                keyword_query = self._keyword_query(query, bundle.schema)
                generated = GeneratedQuery(
                    dialect=Dialect.SEARCH_DSL,
                    text=render_search_dsl(keyword_query),
                    parsed=keyword_query,
                    source_id=bundle.descriptor.source_id,
                    provenance="first_attempt",
                )
                start = time.perf_counter()
                try:
                    result = execute(connection, generated)
                except (ExecutionFailed, DialectMismatch) as e:
                    self._emit(
                        notes, session_id, "execute", "failed",
                        (time.perf_counter() - start) * 1000, 0, 0,
                    )
                    notes.append(DiagnosticNote("fallback", f"{type(e).__name__}: {e}"))
                else:
                    self._emit(
                        notes, session_id, "execute", "ok",
                        (time.perf_counter() - start) * 1000, 0, 0,
                    )
                    notes.append(
                        DiagnosticNote(
                            "fallback",
                            f"rerouted to search source {bundle.descriptor.source_id!r} "
                            "with a keyword query",
                        )
                    )
                    return Response(
                        text=self._degraded_text(query, notes, result),
                        format=query.requested_format,
                        source_id=bundle.descriptor.source_id,
                        generated_query_text=generated.text,
                        degraded=True,
                        diagnostics=tuple(notes),
                    )
        return Response(
            text=self._degraded_text(query, notes),
            format=query.requested_format,
            source_id=decision.source_id,
            generated_query_text=generated_query_text,
            degraded=True,
            diagnostics=tuple(notes),
        )

    # -- the end-to-end operation ----------------------------------------

    def answer(self, query: UserQuery) -> Response:
        """Route, generate, execute, and synthesize one question.

        Always returns a Response (possibly degraded); the only terminal
        error is NoSuitableAgent.
        """
        session_id = query.session_id
        notes: list[DiagnosticNote] = []

        start = time.perf_counter()
        try:
            decision = identify_data_source(query, self.registry)
        except (NoSuitableAgent, EmptyRegistry):
            self._emit(
                notes, session_id, "route", "failed",
                (time.perf_counter() - start) * 1000, 0, 0,
            )
            raise
        self._emit(
            notes, session_id, "route", "ok",
            (time.perf_counter() - start) * 1000, 0, 0,
        )

        bundle = self.bundles[decision.agent_id]
        connection = self.connections[decision.source_id]

        def observer(stage, outcome, duration_ms, tokens_in, tokens_out):
            self._emit(
                notes, session_id, stage, outcome, duration_ms, tokens_in, tokens_out
            )

        generated: GeneratedQuery | None = None

        def generate_once() -> GeneratedQuery:
            return generate_query(
                bundle.descriptor,
                query,
                bundle.schema,
                bundle.examples,
                self.gateway,
                self.profile,
                observer=observer,
            )

        try:
            generated, _ = run_with_fallback(
                generate_once,
                retries=self.policy.provider_retries,
                retryable=(ProviderUnavailable,),
                on_attempt=lambda n, e: notes.append(
                    DiagnosticNote("complete", f"{type(e).__name__}: {e}")
                ),
            )
        except ProviderUnavailable:
            return self._fallback_response(query, decision, "", notes, session_id)
        except (GenerationFailed, WindowExceeded) as e:
            if isinstance(e, GenerationFailed):
                notes.extend(DiagnosticNote("validate", a) for a in e.attempts)
            else:
                notes.append(DiagnosticNote("prompt", str(e)))
            return self._fallback_response(query, decision, "", notes, session_id)

        result: QueryResult | None = None
        for attempt in range(self.policy.execute_retries + 1):
            last = attempt == self.policy.execute_retries
            start = time.perf_counter()
            try:
                result = execute(connection, generated)
            except (ExecutionFailed, DialectMismatch) as e:
                self._emit(
                    notes, session_id, "execute",
                    "failed" if last else "retried",
                    (time.perf_counter() - start) * 1000, 0, 0,
                )
                notes.append(DiagnosticNote("execute", f"{type(e).__name__}: {e}"))
                if last:
                    return self._fallback_response(
                        query, decision, generated.text, notes, session_id
                    )
                continue
            self._emit(
                notes, session_id, "execute", "ok",
                (time.perf_counter() - start) * 1000, 0, 0,
            )
            break

        try:
            response = self.synthesize(
                query,
                result,
                generated_query_text=generated.text,
                observer=observer,
            )
        except (WindowExceeded, ProviderUnavailable, ProviderRefusal) as e:
            notes.append(DiagnosticNote("synthesize", f"{type(e).__name__}: {e}"))
            return Response(
                text=self._degraded_text(query, notes, result),
                format=query.requested_format,
                source_id=result.source_id,
                generated_query_text=generated.text,
                degraded=True,
                diagnostics=tuple(notes),
            )
        if notes:
            response = dataclasses.replace(response, diagnostics=tuple(notes))
        return response
