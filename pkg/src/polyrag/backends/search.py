"""In-memory search backend: token-containment matching with a naive score.

Fields are tokenized on non-alphanumeric boundaries and lowercased. A
match clause is satisfied when all its query tokens appear in the field's
token set. Results order by descending score (total occurrences of the
matched query tokens in the field token lists) with insertion-order
tie-break, keeping output deterministic.
"""

from __future__ import annotations

import re

from ..dialects.search import SearchDslQuery
from ..errors import ExecutionFailed, MalformedDataset
from ..model import DataSourceKind
from ..schema import SchemaDescriptor
from .base import Value, check_field_value, state_digest

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(str(text).lower())


class SearchBackend:
    kind = DataSourceKind.SEARCH

    def __init__(self, schema: SchemaDescriptor):
        self.schema = schema
        self._documents: list[dict] = []

    def load(self, data: dict) -> int:
        raw_docs = data.get("documents")
        if not isinstance(raw_docs, list):
            raise MalformedDataset(0, "documents", "seed file must hold a document list")
        entity = self.schema.entities[0]
        declared = set(entity.field_names())
        staged: list[dict] = []
        for i, doc in enumerate(raw_docs):
            for fname, value in doc.items():
                if fname not in declared:
                    raise MalformedDataset(i, fname, "field is not declared")
                ftype = entity.field_type(fname)
                if not check_field_value(ftype, value):
                    raise MalformedDataset(
                        i, fname, f"value {value!r} is not a valid {ftype}"
                    )
            staged.append(dict(doc))
        self._documents = staged
        return len(staged)

    def state_hash(self) -> str:
        return state_digest(self._documents)

    def query(
        self, parsed: SearchDslQuery
    ) -> tuple[tuple[str, ...], list[tuple[Value, ...]]]:
        entity = self.schema.entities[0]
        declared = entity.field_names()
        for field, _ in parsed.must_clauses:
            if field not in declared:
                raise ExecutionFailed(f"unknown field {field!r}")

        scored: list[tuple[int, int, dict]] = []
        for idx, doc in enumerate(self._documents):
            score = 0
            matched = True
            for field, text in parsed.must_clauses:
                query_toks = tokenize(text)
                doc_toks = tokenize(doc.get(field, ""))
                doc_set = set(doc_toks)
                if not all(tok in doc_set for tok in query_toks):
                    matched = False
                    break
                score += sum(doc_toks.count(tok) for tok in set(query_toks))
            if matched:
                scored.append((score, idx, doc))

        scored.sort(key=lambda item: (-item[0], item[1]))
        return declared, [
            tuple(doc.get(c) for c in declared) for _, _, doc in scored
        ]
