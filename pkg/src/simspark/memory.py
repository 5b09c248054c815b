"""Per-agent memory stream with recency/importance/relevance retrieval.

Each agent owns one append-only stream of records. Retrieval scores every
record as

    w_rec * decay^(hours since last retrieval)
  + w_imp * importance / 10
  + w_rel * max(cosine similarity, 0)

with each component normalized to [0, 1] before weighting, and returns the
top_k records by score. Ties break toward the more recently created record,
then the smaller memory_id, so results never depend on insertion order.
Retrieval refreshes last_retrieved_at on exactly the returned records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from .errors import ComputeError, MalformedPayload, PreconditionError
from .providers import Embedding, Provider, ask_score
from .templates import build_prompt
from .timeutil import format_aoe, parse_aoe

MEMORY_KINDS = (
    "daily_action",
    "perception_event",
    "perception_spark",
    "plan",
    "own_post",
    "own_engagement",
)

FALLBACK_IMPORTANCE = 1


@dataclass
class MemoryRecord:
    memory_id: str
    owner: str
    created_at: datetime
    last_retrieved_at: datetime
    kind: str
    text: str
    importance: int
    embedding: Embedding

    def to_json(self, include_embedding: bool = True) -> dict:
        record = {
            "memory_id": self.memory_id,
            "owner": self.owner,
            "created_at": format_aoe(self.created_at),
            "last_retrieved_at": format_aoe(self.last_retrieved_at),
            "kind": self.kind,
            "text": self.text,
            "importance": self.importance,
        }
        if include_embedding:
            record["embedding"] = list(self.embedding)
        return record

    @classmethod
    def from_json(cls, raw: dict) -> "MemoryRecord":
        return cls(
            memory_id=raw["memory_id"],
            owner=raw["owner"],
            created_at=parse_aoe(raw["created_at"]),
            last_retrieved_at=parse_aoe(raw["last_retrieved_at"]),
            kind=raw["kind"],
            text=raw["text"],
            importance=raw["importance"],
            embedding=tuple(raw.get("embedding", ())),
        )


@dataclass(frozen=True)
class RetrievalQuery:
    owner: str
    situation_text: str
    situation_embedding: Embedding
    now: datetime
    top_k: int

    def __post_init__(self):
        if self.top_k < 1:
            raise PreconditionError("top_k must be >= 1")


def recency_score(record: MemoryRecord, now: datetime, decay: float) -> float:
    """decay^(hours since the record was last retrieved)."""
    if not 0.0 < decay < 1.0:
        raise PreconditionError("decay must lie in (0, 1)")
    if now < record.last_retrieved_at:
        raise PreconditionError("now precedes the record's last retrieval")
    hours = (now - record.last_retrieved_at).total_seconds() / 3600.0
    return decay**hours


def relevance_score(record_embedding: Embedding, situation_embedding: Embedding) -> float:
    """Cosine similarity; rejects dimension mismatches and zero vectors."""
    if len(record_embedding) != len(situation_embedding):
        raise ComputeError(
            f"embedding dimensions differ: {len(record_embedding)} vs {len(situation_embedding)}"
        )
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for a, b in zip(record_embedding, situation_embedding):
        dot += a * b
        norm_a += a * a
        norm_b += b * b
    if norm_a == 0.0 or norm_b == 0.0:
        raise ComputeError("cosine similarity undefined for a zero vector")
    return dot / (math.sqrt(norm_a) * math.sqrt(norm_b))


def retrieval_score(
    record: MemoryRecord,
    query: RetrievalQuery,
    weights: tuple[float, float, float],
    decay: float,
) -> float:
    w_rec, w_imp, w_rel = weights
    recency = recency_score(record, query.now, decay)
    relevance = relevance_score(record.embedding, query.situation_embedding)
    clamped = min(max(relevance, 0.0), 1.0)
    return w_rec * recency + w_imp * (record.importance / 10.0) + w_rel * clamped


class MemoryStore:
    """One agent's memory stream; single writer, monotone created_at."""

    def __init__(self, owner: str):
        self.owner = owner
        self.records: list[MemoryRecord] = []
        self._counter = 0

    def __len__(self) -> int:
        return len(self.records)

    def next_id(self) -> str:
        memory_id = f"m-{self.owner}-{self._counter:06d}"
        self._counter += 1
        return memory_id

    def append(self, record: MemoryRecord) -> None:
        if record.owner != self.owner:
            raise PreconditionError(f"record owner {record.owner!r} does not match store {self.owner!r}")
        if self.records and record.created_at < self.records[-1].created_at:
            raise PreconditionError("created_at must not precede the newest record (monotone stream)")
        if not record.text:
            raise PreconditionError("memory text must be non-empty")
        if not 1 <= record.importance <= 10:
            raise PreconditionError("importance must lie in 1..10")
        self.records.append(record)

    def retrieve(
        self,
        query: RetrievalQuery,
        weights: tuple[float, float, float],
        decay: float,
    ) -> list[MemoryRecord]:
        """Top-k records by retrieval score, refreshing their last_retrieved_at."""
        scored = [
            (
                -retrieval_score(record, query, weights, decay),
                -record.created_at.timestamp(),
                record.memory_id,
                record,
            )
            for record in self.records
        ]
        scored.sort(key=lambda item: item[:3])
        top = [item[3] for item in scored[: query.top_k]]
        for record in top:
            record.last_retrieved_at = query.now
        return top

    def to_json(self) -> dict:
        return {
            "owner": self.owner,
            "counter": self._counter,
            "records": [r.to_json() for r in self.records],
        }

    @classmethod
    def from_json(cls, raw: dict) -> "MemoryStore":
        store = cls(raw["owner"])
        store._counter = raw["counter"]
        store.records = [MemoryRecord.from_json(r) for r in raw["records"]]
        return store


def append_memory(
    store: MemoryStore,
    provider: Provider,
    *,
    kind: str,
    text: str,
    created_at: datetime,
    owner_name: str,
    owner_profile: str,
    tick: Optional[int] = None,
    fixed_importance: Optional[int] = None,
) -> tuple[MemoryRecord, bool]:
    """Score, embed, and persist one new memory.

    Importance comes from the 1-10 poignancy rating prompt unless the
    caller fixes it (engine-generated records like "sleeping" never hit the
    model). Returns the record and whether the rating fell back after the
    re-ask policy (the caller logs the parse-failure trace).
    """
    if kind not in MEMORY_KINDS:
        raise PreconditionError(f"unknown memory kind {kind!r}")
    parse_failed = False
    if fixed_importance is not None:
        importance = fixed_importance
    else:
        parts = build_prompt(
            "importance",
            {"Agent": owner_name, "Agent's Demographic Information": owner_profile, "Event": text},
        )
        try:
            importance = ask_score(
                provider, parts, 1, 10, template_id="importance", agent_id=store.owner, tick=tick
            )
        except MalformedPayload:
            importance = FALLBACK_IMPORTANCE
            parse_failed = True
    record = MemoryRecord(
        memory_id=store.next_id(),
        owner=store.owner,
        created_at=created_at,
        last_retrieved_at=created_at,
        kind=kind,
        text=text,
        importance=importance,
        embedding=provider.embed(text),
    )
    store.append(record)
    return record, parse_failed


def export_lines(store: MemoryStore, include_embeddings: bool = False) -> list[str]:
    return [
        json.dumps(r.to_json(include_embedding=include_embeddings), ensure_ascii=False, sort_keys=True)
        for r in store.records
    ]
