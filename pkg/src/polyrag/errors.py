"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class PolyragError(Exception):
    """Base class for all errors raised by this package."""


# --- schema validation ---------------------------------------------------


class SchemaError(PolyragError):
    pass


class EmptySchema(SchemaError):
    pass


class UnknownKind(SchemaError):
    pass


class RelationshipsNotAllowed(UnknownKind):
    pass


class DuplicateField(SchemaError):
    pass


# --- routing --------------------------------------------------------------


class RouterError(PolyragError):
    pass


class DuplicateAgent(RouterError):
    pass


class KindMismatch(RouterError):
    pass


class EmptyRegistry(RouterError):
    pass


class NoSuitableAgent(RouterError):
    """Raised when no registered agent scores at or above the threshold."""


# --- prompt assembly ------------------------------------------------------


class PromptError(PolyragError):
    pass


class NoExamples(PromptError):
    pass


class InsufficientSources(PromptError):
    pass


class WindowExceeded(PromptError):
    """Prompt plus completion reserve does not fit the model context window."""

    def __init__(self, token_count: int, window: int, reserve: int):
        self.token_count = token_count
        self.window = window
        self.reserve = reserve
        super().__init__(
            f"prompt of {token_count} tokens plus reserve {reserve} "
            f"exceeds context window {window}"
        )


# --- completion gateway ---------------------------------------------------


class GatewayError(PolyragError):
    pass


class ProviderUnavailable(GatewayError):
    """Transport-level failure (network, timeout). Retryable."""


class ProviderRefusal(GatewayError):
    """Provider returned an empty or non-conforming body. Retryable."""


# --- query generation -----------------------------------------------------


class NoQueryFound(PolyragError):
    """No dialect anchor found in a completion."""


class GenerationFailed(PolyragError):
    """Both generation attempts failed validation.

    ``attempts`` holds one diagnostic string per failed attempt.
    """

    def __init__(self, attempts: list[str]):
        self.attempts = list(attempts)
        super().__init__("query generation failed: " + " | ".join(self.attempts))


# --- dialect validation ---------------------------------------------------


class DialectError(PolyragError):
    pass


class ParseError(DialectError):
    """Syntax error at a byte offset into the normalized query text."""

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"parse error at offset {position}: expected {expected}")


class ReadOnlyViolation(DialectError):
    pass


class UnsupportedPattern(DialectError):
    pass


class UnsupportedClause(DialectError):
    pass


# --- execution environment ------------------------------------------------


class ExecEnvError(PolyragError):
    pass


class UnknownSource(ExecEnvError):
    pass


class ConnectionFailed(ExecEnvError):
    pass


class DialectMismatch(ExecEnvError):
    pass


class ExecutionFailed(ExecEnvError):
    """Backend fault during query evaluation. Retryable."""


class MalformedDataset(ExecEnvError):
    """Seed data violates the declared schema; names the record and field."""

    def __init__(self, record_index: int, field: str, reason: str):
        self.record_index = record_index
        self.field = field
        super().__init__(f"record {record_index}, field {field!r}: {reason}")


# --- configuration and telemetry -------------------------------------------


class ConfigError(PolyragError):
    pass


class SinkUnavailable(PolyragError):
    """Telemetry sink cannot be written. Non-fatal."""
