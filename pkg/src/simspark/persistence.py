"""Durable run storage and the read-side view over the run log.

Directory layout, one directory per run:

    runs/<run_id>/
      config.json          # config snapshot at run creation (+ format_version)
      log.jsonl            # append-only run log; replay/audit source of truth
      transcript.jsonl     # every provider request/response
      control.jsonl        # control-plane transitions (start/pause/resume/...)
      snapshots/<tick>.json

The log is a sequence of records with contiguous sequence numbers from 0.
Record types: config_change, tick_begin, spark, behavior, trace, delivery,
edge, memory, note, tick_commit. Every line is written, flushed, and
fsynced before the append is acknowledged, so the tail is always
self-consistent.

Control transitions live outside log.jsonl on purpose: the log holds only
simulated history, so a run paused and resumed arbitrarily produces a log
byte-identical to an uninterrupted one.

Everything any query endpoint serves is derived from these records alone
(see LogView); exports are filtered views of the same lines.
"""

from __future__ import annotations

import json
import os
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Optional

from .errors import NotFoundError, PreconditionError, StateError
from .timeutil import parse_aoe

FORMAT_VERSION = 1

RECORD_TYPES = (
    "config_change",
    "tick_begin",
    "spark",
    "behavior",
    "trace",
    "delivery",
    "edge",
    "memory",
    "note",
    "tick_commit",
)

EXPORT_KINDS = ("behaviors", "sparks", "network", "memories", "traces")


def dump_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


class RunStore:
    """Single-writer storage for one run directory."""

    def __init__(self, run_dir: Path | str, run_id: str, create: bool = True):
        self.run_dir = Path(run_dir)
        self.run_id = run_id
        self.records: list[dict] = []
        self._finished = False
        if create:
            (self.run_dir / "snapshots").mkdir(parents=True, exist_ok=True)
            (self.run_dir / "log.jsonl").touch()
            (self.run_dir / "transcript.jsonl").touch()
            (self.run_dir / "control.jsonl").touch()
        self._log = open(self.run_dir / "log.jsonl", "a", encoding="utf-8")
        self._transcript = open(self.run_dir / "transcript.jsonl", "a", encoding="utf-8")
        self._control = open(self.run_dir / "control.jsonl", "a", encoding="utf-8")

    @classmethod
    def open_existing(cls, run_dir: Path | str) -> "RunStore":
        run_dir = Path(run_dir)
        if not (run_dir / "log.jsonl").exists():
            raise NotFoundError(f"no run at {run_dir}")
        config = json.loads((run_dir / "config.json").read_text("utf-8"))
        store = cls(run_dir, config.get("run_id", run_dir.name), create=False)
        store.records = list(store.iter_log())
        return store

    # -- config snapshot ---------------------------------------------------------

    def save_config(self, document: dict) -> None:
        payload = {"format_version": FORMAT_VERSION, "run_id": self.run_id, **document}
        (self.run_dir / "config.json").write_text(
            json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n", "utf-8"
        )

    def load_config(self) -> dict:
        return json.loads((self.run_dir / "config.json").read_text("utf-8"))

    # -- log ----------------------------------------------------------------------

    @property
    def next_seq(self) -> int:
        return len(self.records)

    def append(self, record: dict) -> int:
        """Durable before acknowledgment; sequence strictly increasing."""
        if self._finished:
            raise StateError("run is finished; the log is closed")
        seq = self.next_seq
        record = {"seq": seq, **record}
        self._log.write(dump_line(record) + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())
        self.records.append(record)
        return seq

    def append_transcript(self, entry: dict) -> None:
        self._transcript.write(dump_line(entry) + "\n")
        self._transcript.flush()

    def append_control(self, entry: dict) -> None:
        self._control.write(dump_line(entry) + "\n")
        self._control.flush()

    def iter_log(self) -> Iterable[dict]:
        with open(self.run_dir / "log.jsonl", "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def finish(self) -> None:
        self._finished = True

    def close(self) -> None:
        self._log.close()
        self._transcript.close()
        self._control.close()

    # -- snapshots -----------------------------------------------------------------

    def snapshot(self, tick: int, payload: dict) -> str:
        """Persist full committed state for ``tick``; returns the ref."""
        committed = [r for r in self.records if r["type"] == "tick_commit" and r["tick"] == tick]
        if not committed:
            raise PreconditionError(f"tick {tick} is not committed; cannot snapshot")
        path = self.run_dir / "snapshots" / f"{tick}.json"
        body = {"tick": tick, "log_length": committed[0]["seq"] + 1, **payload}
        path.write_text(json.dumps(body, ensure_ascii=False, sort_keys=True), "utf-8")
        return str(path)

    def load_snapshot(self, tick: int) -> dict:
        path = self.run_dir / "snapshots" / f"{tick}.json"
        if not path.exists():
            raise NotFoundError(f"no snapshot for tick {tick}")
        return json.loads(path.read_text("utf-8"))

    def truncate_log(self, length: int) -> None:
        """Rewind the log to its first ``length`` records (restore support)."""
        if length > len(self.records):
            raise PreconditionError("cannot truncate forward")
        self._log.close()
        kept = self.records[:length]
        with open(self.run_dir / "log.jsonl", "w", encoding="utf-8") as handle:
            for record in kept:
                handle.write(dump_line(record) + "\n")
            handle.flush()
            os.fsync(handle.fileno())
        self.records = kept
        self._log = open(self.run_dir / "log.jsonl", "a", encoding="utf-8")

    # -- export --------------------------------------------------------------------

    def export(self, what: str, include_embeddings: bool = False) -> list[str]:
        if what not in EXPORT_KINDS:
            raise NotFoundError(f"unknown export kind {what!r}")
        view = LogView(self.records)
        if what == "behaviors":
            rows = view.behaviors
        elif what == "traces":
            rows = view.traces
        elif what == "network":
            rows = view.edges
        elif what == "sparks":
            rows = view.assembled_sparks()
        else:  # memories
            rows = view.memories
            if not include_embeddings:
                rows = [{k: v for k, v in row.items() if k != "embedding"} for row in rows]
        return [dump_line(row) for row in rows]


class LogView:
    """Pure read model over run-log records; every query endpoint and the
    acceptance checks are built on this, never on live engine state."""

    def __init__(self, records: Iterable[dict]):
        self.records = list(records)
        self.behaviors: list[dict] = []
        self.traces: list[dict] = []
        self.deliveries: list[dict] = []
        self.edges: list[dict] = []
        self.memories: list[dict] = []
        self.sparks: list[dict] = []
        self.notes: list[dict] = []
        self._traces_by_id: dict[str, dict] = {}
        self._behaviors_by_id: dict[str, dict] = {}
        self._sparks_by_id: dict[str, dict] = {}
        for record in self.records:
            kind = record["type"]
            if kind == "behavior":
                self.behaviors.append(record)
                self._behaviors_by_id[record["record_id"]] = record
            elif kind == "trace":
                self.traces.append(record)
                self._traces_by_id[record["trace_id"]] = record
            elif kind == "delivery":
                self.deliveries.append(record)
            elif kind == "edge":
                self.edges.append(record)
            elif kind == "memory":
                self.memories.append(record)
            elif kind == "spark":
                self.sparks.append(record)
                self._sparks_by_id[record["spark_id"]] = record
            elif kind == "note":
                self.notes.append(record)

    def trace(self, trace_id: str) -> dict:
        if trace_id not in self._traces_by_id:
            raise NotFoundError(f"no trace {trace_id!r}")
        return self._traces_by_id[trace_id]

    def behavior(self, record_id: str) -> dict:
        if record_id not in self._behaviors_by_id:
            raise NotFoundError(f"no behavior record {record_id!r}")
        return self._behaviors_by_id[record_id]

    def reasoning_for(self, record_id: str) -> dict:
        """The trace behind a behavior record."""
        behavior = self.behavior(record_id)
        ref = behavior.get("reasoning_ref") or ""
        if not ref:
            raise NotFoundError(f"behavior {record_id!r} has no reasoning trace")
        return self.trace(ref)

    def hidden(self, spark_id: str) -> list[dict]:
        """Declined (and precondition-skipped) engagement traces for a spark."""
        if spark_id not in self._sparks_by_id:
            raise NotFoundError(f"no spark {spark_id!r}")
        return [
            t
            for t in self.traces
            if t.get("spark_id") == spark_id and t["polarity"] in ("declined", "skipped")
        ]

    def assembled_sparks(self) -> list[dict]:
        """Sparks with their likes and replies folded in, publish order."""
        assembled: dict[str, dict] = {}
        for spark in self.sparks:
            assembled[spark["spark_id"]] = {
                "spark_id": spark["spark_id"],
                "author": spark["author"],
                "posted_at": spark["posted_at"],
                "content": spark["content"],
                "tick": spark["tick"],
                "likes": [],
                "replies": [],
            }
        for behavior in self.behaviors:
            if behavior["kind"] == "like" and behavior["target"] in assembled:
                assembled[behavior["target"]]["likes"].append(
                    {
                        "agent": behavior["agent"],
                        "tick": behavior["tick"],
                        "reasoning_ref": behavior["reasoning_ref"],
                    }
                )
            elif behavior["kind"] == "reply" and behavior["target"] in assembled:
                assembled[behavior["target"]]["replies"].append(
                    {
                        "author": behavior["agent"],
                        "replied_at": behavior["at"],
                        "content": behavior["detail"],
                        "reasoning_ref": behavior["reasoning_ref"],
                    }
                )
        return [assembled[s["spark_id"]] for s in self.sparks]

    def network_at(self, tick: Optional[int] = None) -> list[dict]:
        if tick is None:
            return list(self.edges)
        return [e for e in self.edges if e["created_at_tick"] <= tick]

    def calendar(
        self,
        agent: Optional[str] = None,
        min_importance: int = 1,
        kinds: Optional[set[str]] = None,
    ) -> list[dict]:
        """Behavior records bucketed by (AoE date, hour).

        A continuous daily activity appears only in its start bucket: a
        daily record is suppressed when the same agent's previous tick had
        an identical daily activity.
        """
        latest_daily: dict[str, tuple[int, str]] = {}
        buckets: dict[tuple[str, int], list[dict]] = defaultdict(list)
        for behavior in self.behaviors:
            include = True
            if behavior["kind"] == "daily":
                previous = latest_daily.get(behavior["agent"])
                if previous is not None:
                    prev_tick, prev_detail = previous
                    if prev_tick == behavior["tick"] - 1 and prev_detail == behavior["detail"]:
                        include = False
                latest_daily[behavior["agent"]] = (behavior["tick"], behavior["detail"])
            if not include:
                continue
            if agent is not None and behavior["agent"] != agent:
                continue
            if behavior["importance"] < min_importance:
                continue
            if kinds is not None:
                group = "daily" if behavior["kind"] == "daily" else "social"
                if group not in kinds:
                    continue
            at = parse_aoe(behavior["at"])
            buckets[(at.date().isoformat(), at.hour)].append(behavior)
        return [
            {"date": date, "hour": hour, "records": rows}
            for (date, hour), rows in sorted(buckets.items())
        ]
