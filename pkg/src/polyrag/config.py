"""Deployment configuration: one JSON file wires profiles, sources, agents,
routing, fallback, and telemetry. Relative paths resolve against the
config file's directory."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import BUILTIN_PROFILES, DataSourceKind, ModelProfile, lookup_profile
from .schema import SchemaDescriptor, load_schema_file

DEFAULT_FIXTURES_DIR = Path(__file__).parent / "fixtures"
CONFIG_ENV_VAR = "POLYRAG_CONFIG"


@dataclass(frozen=True)
class SourceConfig:
    source_id: str
    kind: DataSourceKind
    schema_path: Path
    seed_path: Path | None = None
    endpoint: str | None = None

    def load_schema(self) -> SchemaDescriptor:
        return load_schema_file(self.schema_path)


@dataclass(frozen=True)
class AgentConfig:
    agent_id: str
    kind: DataSourceKind
    source_id: str
    examples_path: Path
    lexicon: tuple[str, ...] = ()


@dataclass(frozen=True)
class RoutingConfig:
    threshold: float = 0.15
    schema_weight: float = 1.0
    lexicon_weight: float = 1.0


@dataclass(frozen=True)
class FallbackConfig:
    reroute_to_search: bool = False


@dataclass(frozen=True)
class DeploymentConfig:
    profile: ModelProfile
    completion_reserve: int
    sources: tuple[SourceConfig, ...]
    agents: tuple[AgentConfig, ...]
    routing: RoutingConfig
    fallback: FallbackConfig
    scripted_rules_path: Path | None
    corpus_path: Path | None
    telemetry_path: Path | None
    base_dir: Path

    def source(self, source_id: str) -> SourceConfig | None:
        for s in self.sources:
            if s.source_id == source_id:
                return s
        return None

    def agent(self, agent_id: str) -> AgentConfig | None:
        for a in self.agents:
            if a.agent_id == agent_id:
                return a
        return None


def default_config_path() -> Path:
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return Path(env)
    return DEFAULT_FIXTURES_DIR / "config.json"


def _resolve(base: Path, raw: str | None) -> Path | None:
    if raw is None:
        return None
    p = Path(raw)
    return p if p.is_absolute() else base / p


def _require_file(path: Path | None, what: str) -> None:
    if path is not None and not path.is_file():
        raise ConfigError(f"{what} does not exist: {path}")


def _parse_profile(raw: dict) -> ModelProfile:
    try:
        return ModelProfile(
            name=raw["name"],
            provider=raw.get("provider", "scripted"),
            context_window=int(raw["context_window"]),
            chars_per_token=float(raw.get("chars_per_token", 4.0)),
            endpoint=raw.get("endpoint"),
            auth_env=raw.get("auth_env"),
            timeout_ms=int(raw.get("timeout_ms", 30_000)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid model profile {raw.get('name', '?')!r}: {e}")


def load_config(path: str | Path | None = None) -> DeploymentConfig:
    """Parse and validate the deployment config file."""
    config_path = Path(path) if path is not None else default_config_path()
    if not config_path.is_file():
        raise ConfigError(f"config file does not exist: {config_path}")
    base = config_path.parent
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}")

    custom_profiles = {p.name: p for p in map(_parse_profile, raw.get("profiles", []))}
    profile_name = raw.get("profile", "GPT-4")
    profile = custom_profiles.get(profile_name) or lookup_profile(profile_name)
    if profile is None:
        known = sorted(list(BUILTIN_PROFILES) + list(custom_profiles))
        raise ConfigError(
            f"unknown model profile {profile_name!r}; known profiles: {', '.join(known)}"
        )

    sources: list[SourceConfig] = []
    seen_sources: set[str] = set()
    for rs in raw.get("sources", []):
        source_id = rs.get("id", "")
        if not source_id:
            raise ConfigError("every source needs an id")
        if source_id in seen_sources:
            raise ConfigError(f"duplicate source id {source_id!r}")
        seen_sources.add(source_id)
        schema_path = _resolve(base, rs.get("schema"))
        if schema_path is None:
            raise ConfigError(f"source {source_id!r} needs a schema path")
        _require_file(schema_path, f"schema file for source {source_id!r}")
        seed_path = _resolve(base, rs.get("seed"))
        _require_file(seed_path, f"seed file for source {source_id!r}")
        sources.append(
            SourceConfig(
                source_id=source_id,
                kind=DataSourceKind.parse(rs.get("kind", "")),
                schema_path=schema_path,
                seed_path=seed_path,
                endpoint=rs.get("endpoint"),
            )
        )

    agents: list[AgentConfig] = []
    seen_agents: set[str] = set()
    for ra in raw.get("agents", []):
        agent_id = ra.get("id", "")
        if not agent_id:
            raise ConfigError("every agent needs an id")
        if agent_id in seen_agents:
            raise ConfigError(f"duplicate agent id {agent_id!r}")
        seen_agents.add(agent_id)
        source_id = ra.get("source", "")
        if source_id not in seen_sources:
            raise ConfigError(
                f"agent {agent_id!r} references undeclared source {source_id!r}"
            )
        examples_path = _resolve(base, ra.get("examples"))
        if examples_path is None:
            raise ConfigError(f"agent {agent_id!r} needs an examples path")
        _require_file(examples_path, f"examples file for agent {agent_id!r}")
        agents.append(
            AgentConfig(
                agent_id=agent_id,
                kind=DataSourceKind.parse(ra.get("kind", "")),
                source_id=source_id,
                examples_path=examples_path,
                lexicon=tuple(ra.get("lexicon", [])),
            )
        )

    routing_raw = raw.get("routing", {})
    routing = RoutingConfig(
        threshold=float(routing_raw.get("threshold", 0.15)),
        schema_weight=float(routing_raw.get("schema_weight", 1.0)),
        lexicon_weight=float(routing_raw.get("lexicon_weight", 1.0)),
    )
    fallback = FallbackConfig(
        reroute_to_search=bool(raw.get("fallback", {}).get("reroute_to_search", False))
    )

    rules_path = _resolve(base, raw.get("scripted_rules"))
    _require_file(rules_path, "scripted rules file")
    corpus_path = _resolve(base, raw.get("corpus"))
    _require_file(corpus_path, "routing corpus file")
    telemetry_path = _resolve(base, raw.get("telemetry"))

    return DeploymentConfig(
        profile=profile,
        completion_reserve=int(raw.get("completion_reserve", 256)),
        sources=tuple(sources),
        agents=tuple(agents),
        routing=routing,
        fallback=fallback,
        scripted_rules_path=rules_path,
        corpus_path=corpus_path,
        telemetry_path=telemetry_path,
        base_dir=base,
    )


def load_corpus(path: str | Path) -> tuple[tuple[str, str], ...]:
    """Labeled routing corpus: (question, expected source id) pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return tuple((item["question"], item["source_id"]) for item in raw)
