"""Append-only event traces, one JSON object per line.

Records get a run-wide sequence number; ``ref(seq)`` produces the
``<trace_id>#<seq>`` strings that reports cite as evidence.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Iterable


class TraceSink:
    def __init__(self, trace_id: str = "trace"):
        self.trace_id = trace_id
        self.records: list[dict[str, Any]] = []
        self._context = ""

    def set_context(self, context: str) -> None:
        self._context = context

    @property
    def context(self) -> str:
        return self._context

    def emit(self, t_ms: int, src: str, event: str, **fields: Any) -> int:
        seq = len(self.records)
        rec = {"seq": seq, "t": int(t_ms), "ctx": self._context, "src": src, "ev": event}
        rec.update(fields)
        self.records.append(rec)
        return seq

    def ref(self, seq: int) -> str:
        return f"{self.trace_id}#{seq}"

    def refs(self, seqs: Iterable[int]) -> list[str]:
        return [self.ref(s) for s in seqs]

    def lines(self) -> Iterable[str]:
        for rec in self.records:
            yield json.dumps(rec, sort_keys=True, separators=(",", ":"))

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")


class NullSink(TraceSink):
    """Drops everything; used for large statistical batches."""

    def emit(self, t_ms: int, src: str, event: str, **fields: Any) -> int:
        return -1


def read_trace(path) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
