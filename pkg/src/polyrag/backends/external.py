"""External-driver adapter seam.

Live database servers share the in-memory adapter contract but only the
liveness probe is implemented here; binding a real driver means
subclassing ExternalAdapter and overriding ``query``.
"""

from __future__ import annotations

import urllib.error
import urllib.request

from ..errors import ConnectionFailed, ExecutionFailed
from ..model import DataSourceKind
from ..schema import SchemaDescriptor


class ExternalAdapter:
    def __init__(self, schema: SchemaDescriptor, endpoint: str, timeout_s: float = 2.0):
        self.kind: DataSourceKind = schema.kind
        self.schema = schema
        self.endpoint = endpoint
        self.timeout_s = timeout_s

    def probe(self) -> None:
        try:
            with urllib.request.urlopen(self.endpoint, timeout=self.timeout_s):
                pass
        except (urllib.error.URLError, OSError, ValueError, TimeoutError) as e:
            raise ConnectionFailed(f"probe of {self.endpoint!r} failed: {e}")

    def load(self, data: dict) -> int:
        raise ExecutionFailed("seed loading is only supported for in-memory backends")

    def query(self, parsed):
        raise ExecutionFailed(
            f"no driver bound for external source {self.schema.source_id!r}"
        )

    def state_hash(self) -> str:
        return "external"
