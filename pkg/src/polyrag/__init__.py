"""polyrag: deterministic multi-agent question answering over
heterogeneous data stores.

A question is routed to a dialect-specialized query-generation agent,
the generated query is validated and executed against a pluggable
backend, and the records are synthesized into the final answer.
"""

from .agents import AgentDescriptor, GeneratedQuery, generate_query
from .backends import BackendConnection, QueryResult, connect, execute, load_seed_data
from .config import DeploymentConfig, load_config
from .gateway import CompletionRequest, CompletionResult, LlmGateway, ScriptedProvider
from .model import (
    BUILTIN_PROFILES,
    DataSourceKind,
    Dialect,
    ModelProfile,
    ResponseFormat,
    UserQuery,
    estimate_tokens,
)
from .pipeline import Pipeline, Response, TelemetryEvent
from .prompts import (
    FewShotExample,
    Prompt,
    build_agent_prompt,
    build_monolithic_prompt,
    enforce_context_window,
)
from .router import AgentRegistry, RoutingDecision, identify_data_source
from .schema import SchemaDescriptor, validate_schema_descriptor

__version__ = "0.1.0"

__all__ = [
    "AgentDescriptor",
    "AgentRegistry",
    "BackendConnection",
    "BUILTIN_PROFILES",
    "CompletionRequest",
    "CompletionResult",
    "DataSourceKind",
    "DeploymentConfig",
    "Dialect",
    "FewShotExample",
    "GeneratedQuery",
    "LlmGateway",
    "ModelProfile",
    "Pipeline",
    "Prompt",
    "QueryResult",
    "Response",
    "ResponseFormat",
    "RoutingDecision",
    "SchemaDescriptor",
    "ScriptedProvider",
    "TelemetryEvent",
    "UserQuery",
    "build_agent_prompt",
    "build_monolithic_prompt",
    "connect",
    "enforce_context_window",
    "estimate_tokens",
    "execute",
    "generate_query",
    "identify_data_source",
    "load_config",
    "load_seed_data",
    "validate_schema_descriptor",
]
