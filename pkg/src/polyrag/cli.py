"""Command-line entry point: one-shot ask, REPL, seeding, validation,
and the specialized-vs-monolithic token benchmark.

Exit codes: 0 success, 2 no suitable agent, 3 validation failure,
4 execution failure after fallback exhaustion, 5 config error.
"""

from __future__ import annotations

import argparse
import sys
import uuid
from pathlib import Path

from .backends import connect, load_seed_data
from .config import load_config, load_corpus
from .dialects import render_query, validate_query
from .errors import (
    ConfigError,
    ConnectionFailed,
    DialectError,
    ExecEnvError,
    MalformedDataset,
    NoSuitableAgent,
    UnknownSource,
)
from .model import Dialect, ResponseFormat, UserQuery
from .pipeline import NO_SUITABLE_AGENT_MESSAGE, Pipeline, Response
from .prompts import build_monolithic_prompt
from .router import identify_data_source

EXIT_OK = 0
EXIT_NO_AGENT = 2
EXIT_VALIDATION = 3
EXIT_EXECUTION = 4
EXIT_CONFIG = 5

_DIALECT_ALIASES = {
    "sql": Dialect.SQL,
    "document": Dialect.DOCUMENT_FILTER,
    "document_filter": Dialect.DOCUMENT_FILTER,
    "graph": Dialect.GRAPH_PATTERN,
    "graph_pattern": Dialect.GRAPH_PATTERN,
    "search": Dialect.SEARCH_DSL,
    "search_dsl": Dialect.SEARCH_DSL,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyrag",
        description="Answer natural-language questions over heterogeneous data stores.",
    )
    parser.add_argument("--config", help="deployment config file path")
    parser.add_argument("--telemetry", help="telemetry output file (overrides config)")
    parser.add_argument(
        "--format",
        choices=["plain", "table"],
        default="plain",
        help="response rendering format",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", help="answer one question and exit")
    ask.add_argument("question")
    ask.add_argument("--show-query", action="store_true", help="echo the generated query")

    sub.add_parser("repl", help="interactive loop; :quit to exit")

    seed = sub.add_parser("seed", help="load a seed dataset into a source")
    seed.add_argument("--source", required=True)
    seed.add_argument("--file", required=True)

    validate = sub.add_parser("validate", help="validate a query file against a dialect")
    validate.add_argument("--dialect", required=True, choices=sorted(_DIALECT_ALIASES))
    validate.add_argument("--file", required=True)

    sub.add_parser(
        "bench-tokens",
        help="compare specialized vs monolithic prompt tokens over the corpus",
    )
    return parser


def _requested_format(args) -> ResponseFormat:
    return ResponseFormat.TABLE if args.format == "table" else ResponseFormat.PLAIN_TEXT


def _degraded_exit_code(response: Response) -> int:
    stages = {note.stage for note in response.diagnostics}
    return EXIT_EXECUTION if "execute" in stages else EXIT_VALIDATION


def _build_pipeline(args) -> Pipeline:
    config = load_config(args.config)
    return Pipeline.from_config(config, telemetry_path=args.telemetry)


def _answer_once(pipeline: Pipeline, text: str, fmt: ResponseFormat, show_query: bool) -> int:
    try:
        query = UserQuery(text=text, session_id=uuid.uuid4().hex, requested_format=fmt)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_AGENT
    try:
        response = pipeline.answer(query)
    except NoSuitableAgent:
        print(NO_SUITABLE_AGENT_MESSAGE)
        return EXIT_NO_AGENT
    print(response.text)
    if show_query and response.generated_query_text:
        print(f"[query] {response.generated_query_text}")
    if response.degraded:
        return _degraded_exit_code(response)
    return EXIT_OK


def _cmd_ask(args) -> int:
    pipeline = _build_pipeline(args)
    return _answer_once(pipeline, args.question, _requested_format(args), args.show_query)


def _cmd_repl(args) -> int:
    pipeline = _build_pipeline(args)
    fmt = _requested_format(args)
    print("polyrag repl; :quit to exit")
    while True:
        try:
            line = input("? ")
        except EOFError:
            break
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            break
        _answer_once(pipeline, line, fmt, show_query=False)
    return EXIT_OK


def _cmd_seed(args) -> int:
    config = load_config(args.config)
    try:
        connection = connect(args.source, config)
        count = load_seed_data(connection, Path(args.file))
    except UnknownSource as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MalformedDataset as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConnectionFailed, ExecEnvError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EXECUTION
    print(f"loaded {count} record(s) into {args.source}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    dialect = _DIALECT_ALIASES[args.dialect]
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        parsed = validate_query(dialect, text)
    except DialectError as e:
        print(f"invalid {dialect.value} query: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"valid {dialect.value} query:")
    print(render_query(parsed))
    return EXIT_OK


def _cmd_bench_tokens(args) -> int:
    config = load_config(args.config)
    if config.corpus_path is None:
        print("error: config declares no corpus file", file=sys.stderr)
        return EXIT_CONFIG
    pipeline = Pipeline.from_config(config, telemetry_path=args.telemetry)
    corpus = load_corpus(config.corpus_path)

    schemas = [bundle.schema for bundle in pipeline.bundles.values()]
    example_sets = [bundle.examples for bundle in pipeline.bundles.values()]

    from .prompts import build_agent_prompt

    ratios: list[float] = []
    for i, (question, _) in enumerate(corpus, start=1):
        query = UserQuery(text=question, session_id=f"bench-{i}")
        decision = identify_data_source(query, pipeline.registry)
        bundle = pipeline.bundles[decision.agent_id]
        specialized = build_agent_prompt(
            query, bundle.schema, bundle.examples, decision.agent_id, pipeline.profile
        )
        monolithic = build_monolithic_prompt(query, schemas, example_sets, pipeline.profile)
        ratio = specialized.token_count / monolithic.token_count
        ratios.append(ratio)
        print(
            f"{i:2d}. source={decision.source_id:<16} "
            f"specialized={specialized.token_count:4d} "
            f"monolithic={monolithic.token_count:4d} ratio={ratio:.3f}"
        )
    print(f"mean ratio: {sum(ratios) / len(ratios):.3f}")
    return EXIT_OK


def cli_dispatch(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "ask":
            return _cmd_ask(args)
        if args.command == "repl":
            return _cmd_repl(args)
        if args.command == "seed":
            return _cmd_seed(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_bench_tokens(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    return cli_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
