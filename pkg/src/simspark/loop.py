"""Tick scheduler: runs the per-interval pipeline over the configured
range with pause/resume/reset and mid-run event injection.

Per tick, phases execute in a fixed order:

  0. day boundary: wake hour (first tick of each agent's date) and the
     daily plan (first tick at or after the wake hour)
  1. perceive: due events reach their audience; due NPC posts publish
  2. daily actions for all agents (asleep agents just sleep, no model call)
  3. post decisions, then content for the agents that said yes
  4. routing of every spark published this tick
  5. engagement decisions (like, then follow, then reply) per delivered spark
  6. memory updates finalized, tick committed

Agents are processed in ascending agent_id order in every phase; sparks in
publish order. A tick executes against a copy of the world and commits
atomically, so pausing never observes a partial tick and a provider outage
retries the whole tick (three failures suspend the run).
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

from . import cognition
from .cognition import Intention
from .config import AUDIENCE_ALL, AgentProfile, EventSpec, Registry, SimulationConfig
from .errors import (
    PreconditionError,
    ProviderUnavailable,
    StateError,
    TimePastError,
)
from .memory import RetrievalQuery, append_memory
from .persistence import RunStore
from .providers import Provider
from .state import WorldState, day_key
from .timeutil import format_aoe, to_aoe

IDLE, RUNNING, PAUSED, FINISHED = "Idle", "Running", "Paused", "Finished"

TICK_RETRY_LIMIT = 3

BEHAVIOR_KINDS = ("daily", "post", "like", "follow", "reply")
ENGAGEMENT_ORDER = ("like", "follow", "reply")


@dataclass(frozen=True)
class Ablations:
    """Degraded workflow variants for the mechanical ablation pipeline."""

    no_daily_life: bool = False  # skip the daily-action phase entirely
    no_social_habits: bool = False  # omit habit slots from every prompt


@dataclass
class RunState:
    status: str
    current_tick: int
    tick_time: datetime
    seed: int
    run_id: str

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "current_tick": self.current_tick,
            "tick_time": format_aoe(self.tick_time),
            "seed": self.seed,
            "run_id": self.run_id,
        }


@dataclass
class BehaviorRecord:
    record_id: str
    agent: str
    tick: int
    at: datetime
    kind: str
    detail: str
    target: Optional[str]
    importance: int
    reasoning_ref: str

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "agent": self.agent,
            "tick": self.tick,
            "at": format_aoe(self.at),
            "kind": self.kind,
            "detail": self.detail,
            "target": self.target,
            "importance": self.importance,
            "reasoning_ref": self.reasoning_ref,
        }


@dataclass
class ReasoningTrace:
    trace_id: str
    subject: str
    tick: int
    action_kind: str
    target: Optional[str]
    spark_id: Optional[str]
    polarity: str  # acted | declined | skipped
    reasoning: str
    prompt_hash: str

    def to_json(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "subject": self.subject,
            "tick": self.tick,
            "action_kind": self.action_kind,
            "target": self.target,
            "spark_id": self.spark_id,
            "polarity": self.polarity,
            "reasoning": self.reasoning,
            "prompt_hash": self.prompt_hash,
        }


def derive_run_id(document: dict, seed: int, generation: int) -> str:
    digest = hashlib.sha256()
    digest.update(json.dumps(document, sort_keys=True).encode("utf-8"))
    digest.update(f"|{seed}|{generation}".encode("utf-8"))
    return f"run-{digest.hexdigest()[:12]}"


class _TickBuffer:
    """Records and transcript entries staged during one tick; flushed on
    commit, discarded on abort."""

    def __init__(self, world: WorldState, tick: int, tick_time: datetime):
        self.world = world
        self.tick = tick
        self.tick_time = tick_time
        self.records: list[dict] = []
        self.transcript: list[dict] = []

    def emit(self, record_type: str, payload: dict) -> None:
        self.records.append({"type": record_type, "tick": self.tick, **payload})

    def emit_trace(
        self,
        subject: str,
        action_kind: str,
        polarity: str,
        reasoning: str,
        *,
        target: Optional[str] = None,
        spark_id: Optional[str] = None,
        prompt_hash: str = "",
    ) -> str:
        trace = ReasoningTrace(
            trace_id=self.world.next_trace_id(),
            subject=subject,
            tick=self.tick,
            action_kind=action_kind,
            target=target,
            spark_id=spark_id,
            polarity=polarity,
            reasoning=reasoning,
            prompt_hash=prompt_hash,
        )
        self.emit("trace", trace.to_json())
        return trace.trace_id

    def emit_behavior(
        self,
        agent: str,
        kind: str,
        detail: str,
        *,
        target: Optional[str] = None,
        importance: int = 1,
        reasoning_ref: str = "",
    ) -> str:
        record = BehaviorRecord(
            record_id=self.world.next_behavior_id(),
            agent=agent,
            tick=self.tick,
            at=self.tick_time,
            kind=kind,
            detail=detail,
            target=target,
            importance=importance,
            reasoning_ref=reasoning_ref,
        )
        self.emit("behavior", record.to_json())
        return record.record_id


class Simulation:
    """One run driver. Control operations and tick execution are mutually
    exclusive; the in-flight tick always completes before a control action
    lands, so observers only ever see committed-tick state."""

    def __init__(
        self,
        registry: Registry,
        provider: Provider,
        data_dir: Path | str,
        ablations: Ablations = Ablations(),
    ):
        self.registry = registry
        # mutations are legal only while Idle or Paused
        self.registry.state_probe = lambda: self.state.status in (RUNNING, FINISHED)
        self.provider = provider
        self.data_dir = Path(data_dir)
        self.ablations = ablations
        self.generation = 0
        self.world = WorldState()
        self._pause_requested = False
        self.on_append: Optional[Callable[[dict], None]] = None
        self.on_state: Optional[Callable[[RunState, str], None]] = None
        self.store = self._new_store()
        self.state = RunState(
            status=IDLE,
            current_tick=0,
            tick_time=self.config.start_time,
            seed=self.config.random_seed,
            run_id=self.store.run_id,
        )

    @property
    def config(self) -> SimulationConfig:
        return self.registry.config

    def _new_store(self) -> RunStore:
        document = self.registry.to_document()
        ablated = [
            name
            for name, active in (
                ("no-daily-life", self.ablations.no_daily_life),
                ("no-social-habits", self.ablations.no_social_habits),
            )
            if active
        ]
        if ablated:
            document["ablations"] = ablated
        run_id = derive_run_id(document, self.registry.config.random_seed, self.generation)
        store = RunStore(self.data_dir / "runs" / run_id, run_id)
        store.save_config(document)
        self.provider.set_transcript_sink(None)
        return store

    def _append(self, record: dict) -> int:
        seq = self.store.append(record)
        if self.on_append is not None:
            self.on_append(self.store.records[seq])
        return seq

    def _log_run_state(self, reason: str) -> None:
        """Control transitions are audit records outside log.jsonl, so
        pausing and resuming never perturbs the simulated history."""
        self.store.append_control({**self.state.to_json(), "reason": reason})
        if self.on_state is not None:
            self.on_state(self.state, reason)

    # -- control -------------------------------------------------------------------

    def start(self) -> RunState:
        if self.state.status != IDLE:
            raise StateError(f"cannot start from {self.state.status}")
        report = self.registry.validate()
        if not report.ok:
            raise PreconditionError(
                f"configuration invalid: {', '.join(report.codes())}", code="CONFIG_INVALID"
            )
        # a pause requested too late to land in the previous run must not
        # leak into this one
        self._pause_requested = False
        self.state.status = RUNNING
        self._log_run_state("started")
        if self.config.truncates_span:
            self._append(
                {
                    "type": "note",
                    "tick": self.state.current_tick,
                    "text": "simulation span is not a whole number of ticks; the final partial interval is truncated",
                }
            )
        self._note_unreachable_items()
        return self.state

    def pause(self) -> RunState:
        if self.state.status != RUNNING:
            raise StateError(f"cannot pause from {self.state.status}")
        self.state.status = PAUSED
        self._pause_requested = False
        self._log_run_state("paused")
        return self.state

    def request_pause(self) -> None:
        """Ask the driver to pause at the next tick boundary."""
        self._pause_requested = True

    def boundary_pause_due(self) -> bool:
        return self._pause_requested

    def resume(self) -> RunState:
        if self.state.status != PAUSED:
            raise StateError(f"cannot resume from {self.state.status}")
        self.state.status = RUNNING
        self._log_run_state("resumed")
        return self.state

    def reset(self) -> RunState:
        """Back to Idle: configuration kept, simulated state cleared, the
        previous run directory left intact as the archive."""
        if self.state.status not in (RUNNING, PAUSED, FINISHED):
            raise StateError(f"cannot reset from {self.state.status}")
        self._log_run_state("reset")
        self.store.finish()
        self.store.close()
        self.generation += 1
        self.world = WorldState()
        self.provider.reset_cache()
        self.store = self._new_store()
        self.state = RunState(
            status=IDLE,
            current_tick=0,
            tick_time=self.config.start_time,
            seed=self.config.random_seed,
            run_id=self.store.run_id,
        )
        return self.state

    def inject_event(self, event: EventSpec) -> None:
        """Register an event mid-run; it must land at or after the next tick."""
        if self.state.status not in (PAUSED, IDLE):
            raise StateError(f"cannot inject events while {self.state.status}")
        if event.event_time < self.state.tick_time:
            raise TimePastError(
                f"event time {format_aoe(event.event_time)} precedes the next tick "
                f"{format_aoe(self.state.tick_time)}"
            )
        self.registry.add_event(event)
        self._drain_config_changes()
        if self.config.tick_of(event.event_time) is None:
            self._append(
                {
                    "type": "note",
                    "tick": self.state.current_tick,
                    "text": f"event {event.event_id} falls outside every executed tick window and will not be perceived",
                }
            )

    def mutate(self, action: Callable[[Registry], None]) -> None:
        """Apply a registry mutation and log it as a configuration event."""
        action(self.registry)
        self._drain_config_changes()

    def _drain_config_changes(self) -> None:
        for change in self.registry.changes:
            self._append(
                {
                    "type": "config_change",
                    "tick": self.state.current_tick,
                    "effective_tick": self.state.current_tick,
                    **change,
                }
            )
        self.registry.changes.clear()

    def _note_unreachable_items(self) -> None:
        for event in self.registry.event_list():
            if self.config.tick_of(event.event_time) is None:
                self._append(
                    {
                        "type": "note",
                        "tick": self.state.current_tick,
                        "text": f"event {event.event_id} falls outside every executed tick window and will not be perceived",
                    }
                )
        for npc in self.registry.npc_list():
            for index, (post_time, _) in enumerate(npc.scheduled_posts):
                if self.config.tick_of(post_time) is None:
                    self._append(
                        {
                            "type": "note",
                            "tick": self.state.current_tick,
                            "text": f"scheduled post {index} of NPC {npc.npc_id} falls outside every executed tick window",
                        }
                    )

    # -- ticking -------------------------------------------------------------------

    def run_until_done(self) -> RunState:
        """Drive ticks until Finished, a pause request, or suspension."""
        while self.state.status == RUNNING:
            self.step_tick()
            if self._pause_requested and self.state.status == RUNNING:
                self.pause()
        return self.state

    def step_tick(self) -> None:
        """Execute one whole tick atomically (copy, run, commit)."""
        if self.state.status != RUNNING:
            raise StateError(f"cannot tick while {self.state.status}")
        if self.state.current_tick >= self.config.tick_count:
            self._finish()
            return

        failures = 0
        while True:
            world = copy.deepcopy(self.world)
            buffer = _TickBuffer(world, self.state.current_tick, self.state.tick_time)
            self.provider.set_transcript_sink(buffer.transcript.append)
            try:
                self._execute_tick(buffer)
                break
            except ProviderUnavailable as exc:
                failures += 1
                self.provider.reset_cache()
                if failures >= TICK_RETRY_LIMIT:
                    self.provider.set_transcript_sink(None)
                    self.state.status = PAUSED
                    self._append(
                        {
                            "type": "note",
                            "tick": self.state.current_tick,
                            "text": f"RUN_SUSPENDED: tick aborted {failures} times ({exc})",
                        }
                    )
                    self._log_run_state("suspended")
                    return
            finally:
                self.provider.set_transcript_sink(None)

        # commit: swap the world, then flush the staged records
        self.world = buffer.world
        for entry in buffer.transcript:
            self.store.append_transcript(entry)
        for record in buffer.records:
            self._append(record)
        self.state.current_tick += 1
        self.state.tick_time = self.config.tick_time(self.state.current_tick)
        self._append({"type": "tick_commit", "tick": self.state.current_tick - 1})
        if self.state.tick_time + self.config.tick_interval > self.config.end_time:
            self._finish()

    def _finish(self) -> None:
        self.state.status = FINISHED
        self._log_run_state("finished")

    # -- the pipeline ----------------------------------------------------------------

    def _execute_tick(self, buffer: _TickBuffer) -> None:
        world = buffer.world
        tick = buffer.tick
        now = buffer.tick_time
        config = self.config
        agents = self.registry.agent_list()
        npcs = self.registry.npc_list()
        npc_ids = {n.npc_id for n in npcs}
        known_authors = {a.agent_id for a in agents} | npc_ids
        profile_of = lambda a: cognition.profile_text(a, not self.ablations.no_social_habits)

        buffer.emit("tick_begin", {"tick_time": format_aoe(now)})

        intentions: dict[str, Intention] = {a.agent_id: Intention(a.agent_id, tick) for a in agents}
        for agent in agents:
            previous = world.prev_action.get(agent.agent_id)
            if previous:
                intentions[agent.agent_id].add("daily_experience", previous)

        # phase 0: wake hours and day-boundary plans
        day = to_aoe(now).date()
        for agent in agents:
            key = day_key(agent.agent_id, day)
            if key not in world.wake_hours:
                hour, failed = cognition.generate_wake_hour(
                    self.provider, agent, day, tick, omit_social_habits=self.ablations.no_social_habits
                )
                world.wake_hours[key] = hour
                if failed:
                    buffer.emit_trace(
                        agent.agent_id,
                        "wake",
                        "acted",
                        f"PARSE_FAILURE: unusable wake hour; defaulted to {hour}",
                    )
            if key not in world.plans and to_aoe(now).hour >= world.wake_hours[key]:
                plan, failed = cognition.generate_daily_plan(
                    self.provider,
                    agent,
                    day,
                    world.wake_hours[key],
                    tick,
                    omit_social_habits=self.ablations.no_social_habits,
                )
                world.plans[key] = plan
                if failed:
                    buffer.emit_trace(
                        agent.agent_id,
                        "plan",
                        "acted",
                        "PARSE_FAILURE: unusable plan; fell back to a single free slot",
                    )
                for entry in plan.entries:
                    text = f"Plan for {day.isoformat()}: at {to_aoe(entry.start_time).strftime('%H:%M')}, {entry.activity}"
                    self._remember(buffer, agent, kind="plan", text=text)

        # phase 1: perceive events; publish due NPC posts
        for event in self.registry.event_list():
            if config.tick_of(event.event_time) != tick:
                continue
            recipients = agents if event.audience == AUDIENCE_ALL else [
                a for a in agents if a.agent_id == event.audience
            ]
            tag = "public_event" if event.audience == AUDIENCE_ALL else "private_event"
            for agent in recipients:
                intentions[agent.agent_id].add(tag, event.description)
                self._remember(buffer, agent, kind="perception_event", text=event.description)

        for npc in npcs:
            for post_time, content in npc.scheduled_posts:
                if config.tick_of(post_time) != tick:
                    continue
                spark = world.engine.publish_spark(npc.npc_id, content, post_time, tick, known_authors)
                buffer.emit("spark", spark.to_json())

        # phase 2: daily actions
        asleep: dict[str, bool] = {}
        for agent in agents:
            key = day_key(agent.agent_id, day)
            asleep[agent.agent_id] = self._is_asleep(world, agent.agent_id, key, now)
        if not self.ablations.no_daily_life:
            for agent in agents:
                intention = intentions[agent.agent_id]
                if asleep[agent.agent_id]:
                    activity = cognition.SLEEP_ACTIVITY
                    record, _ = self._remember(
                        buffer,
                        agent,
                        kind="daily_action",
                        text=f"{agent.name} is {activity}",
                        fixed_importance=1,
                    )
                    buffer.emit_behavior(agent.agent_id, "daily", activity, importance=record.importance)
                else:
                    planned = self._planned_activity(world, agent.agent_id, day, now)
                    activity, failed = cognition.generate_daily_action(
                        self.provider,
                        agent,
                        tick,
                        now,
                        planned,
                        intention,
                        omit_social_habits=self.ablations.no_social_habits,
                    )
                    reasoning_ref = ""
                    if failed:
                        reasoning_ref = buffer.emit_trace(
                            agent.agent_id,
                            "daily",
                            "acted",
                            f"PARSE_FAILURE: unusable activity; continuing previous activity",
                        )
                    record, importance_failed = self._remember(
                        buffer, agent, kind="daily_action", text=f"{agent.name} is {activity}"
                    )
                    buffer.emit_behavior(
                        agent.agent_id,
                        "daily",
                        activity,
                        importance=record.importance,
                        reasoning_ref=reasoning_ref,
                    )
                world.prev_action[agent.agent_id] = activity
                intention.add("plan", f"planned for now: {self._planned_activity(world, agent.agent_id, day, now)}")

        # phase 3: post decisions and contents
        for agent in agents:
            if asleep[agent.agent_id]:
                continue
            intention = intentions[agent.agent_id]
            retrieved = self._retrieve(world, agent.agent_id, intention, now, config)
            decision = cognition.decide_post(
                self.provider,
                agent,
                tick,
                now,
                intention,
                retrieved,
                world.last_post.get(agent.agent_id),
                omit_social_habits=self.ablations.no_social_habits,
            )
            trace_id = buffer.emit_trace(
                agent.agent_id,
                "post",
                "acted" if decision.answer else "declined",
                decision.reasoning,
                prompt_hash=decision.prompt_hash,
            )
            if not decision.answer:
                continue
            content = cognition.act_post(
                self.provider,
                agent,
                tick,
                now,
                intention,
                retrieved,
                world.last_post.get(agent.agent_id),
                decision,
                omit_social_habits=self.ablations.no_social_habits,
            )
            if content is None:
                buffer.emit_trace(
                    agent.agent_id,
                    "post",
                    "declined",
                    "post decision reversed: empty content",
                )
                continue
            spark = world.engine.publish_spark(agent.agent_id, content, now, tick, known_authors)
            buffer.emit("spark", spark.to_json())
            record, _ = self._remember(
                buffer, agent, kind="own_post", text=f"{agent.name} posted on Sparkle: {content}"
            )
            buffer.emit_behavior(
                agent.agent_id,
                "post",
                content,
                target=spark.spark_id,
                importance=record.importance,
                reasoning_ref=trace_id,
            )
            world.last_post[agent.agent_id] = (content, now)

        # phase 4: route everything published this tick
        agent_by_id = {a.agent_id: a for a in agents}
        tick_sparks = [world.engine.sparks[s] for s in world.engine.order if world.engine.sparks[s].tick == tick]
        for spark in tick_sparks:
            deliveries, outcomes = world.engine.route_spark(
                self.provider,
                spark,
                tick,
                config.recommendation_threshold,
                agents,
                npc_ids,
                profile_of,
            )
            for outcome in outcomes:
                if outcome.parse_failed:
                    buffer.emit_trace(
                        outcome.recipient,
                        "recommendation",
                        "declined",
                        "PARSE_FAILURE: unusable recommendation rating; spark not recommended",
                        target=spark.spark_id,
                        spark_id=spark.spark_id,
                    )
            for delivery in deliveries:
                buffer.emit("delivery", delivery.to_json())
                recipient = agent_by_id[delivery.recipient]
                text = f"{self._author_name(spark.author)} posted on Sparkle: {spark.content}"
                intentions[delivery.recipient].add("recommended_spark", text)
                self._remember(buffer, recipient, kind="perception_spark", text=text)

        # phase 5: engagement decisions over delivered sparks
        for agent in agents:
            agent_deliveries = [d for d in world.engine.deliveries if d.recipient == agent.agent_id and d.tick == tick]
            intention = intentions[agent.agent_id]
            for delivery in agent_deliveries:
                spark = world.engine.sparks[delivery.spark_id]
                if asleep[agent.agent_id]:
                    for kind in ENGAGEMENT_ORDER:
                        buffer.emit_trace(
                            agent.agent_id,
                            kind,
                            "skipped",
                            "skipped: asleep at this tick",
                            target=spark.author if kind == "follow" else spark.spark_id,
                            spark_id=spark.spark_id,
                        )
                    continue
                retrieved = self._retrieve(world, agent.agent_id, intention, now, config)
                self._engage(buffer, agent, spark, intention, retrieved, now)

        self._drain_registry_into(buffer)

    def _engage(self, buffer, agent, spark, intention, retrieved, now) -> None:
        world = buffer.world
        tick = buffer.tick
        author_name = self._author_name(spark.author)
        for kind in ENGAGEMENT_ORDER:
            if kind == "like" and spark.liked_by(agent.agent_id):
                buffer.emit_trace(
                    agent.agent_id,
                    "like",
                    "skipped",
                    "skipped: already liked this spark",
                    target=spark.spark_id,
                    spark_id=spark.spark_id,
                )
                continue
            if kind == "follow":
                if spark.author == agent.agent_id:
                    buffer.emit_trace(
                        agent.agent_id,
                        "follow",
                        "skipped",
                        "skipped: own spark",
                        target=spark.author,
                        spark_id=spark.spark_id,
                    )
                    continue
                if world.engine.follows(agent.agent_id, spark.author):
                    buffer.emit_trace(
                        agent.agent_id,
                        "follow",
                        "skipped",
                        "skipped: already following the author",
                        target=spark.author,
                        spark_id=spark.spark_id,
                    )
                    continue
            decision = cognition.decide_engagement(
                self.provider,
                agent,
                spark,
                kind,
                tick,
                now,
                intention,
                retrieved,
                author_name,
                omit_social_habits=self.ablations.no_social_habits,
            )
            trace_id = buffer.emit_trace(
                agent.agent_id,
                kind,
                "acted" if decision.answer else "declined",
                decision.reasoning,
                target=decision.target,
                spark_id=spark.spark_id,
                prompt_hash=decision.prompt_hash,
            )
            if not decision.answer:
                continue
            if kind == "like":
                if not world.engine.apply_like(agent.agent_id, spark.spark_id, tick, trace_id):
                    continue
                record, _ = self._remember(
                    buffer,
                    agent,
                    kind="own_engagement",
                    text=f"{agent.name} liked {author_name}'s spark: {spark.content}",
                )
                buffer.emit_behavior(
                    agent.agent_id,
                    "like",
                    spark.content,
                    target=spark.spark_id,
                    importance=record.importance,
                    reasoning_ref=trace_id,
                )
            elif kind == "follow":
                if not world.engine.apply_follow(agent.agent_id, spark.author, tick, trace_id):
                    continue
                record, _ = self._remember(
                    buffer,
                    agent,
                    kind="own_engagement",
                    text=f"{agent.name} followed {author_name} on Sparkle",
                )
                buffer.emit_behavior(
                    agent.agent_id,
                    "follow",
                    f"followed {author_name}",
                    target=spark.author,
                    importance=record.importance,
                    reasoning_ref=trace_id,
                )
                edge = world.engine.edges[-1]
                buffer.emit("edge", edge.to_json())
            else:  # reply
                content = cognition.act_reply(
                    self.provider,
                    agent,
                    spark,
                    tick,
                    now,
                    intention,
                    retrieved,
                    author_name,
                    decision,
                    omit_social_habits=self.ablations.no_social_habits,
                )
                if content is None:
                    buffer.emit_trace(
                        agent.agent_id,
                        "reply",
                        "declined",
                        "reply decision reversed: empty content",
                        target=spark.spark_id,
                        spark_id=spark.spark_id,
                    )
                    continue
                world.engine.apply_reply(agent.agent_id, spark.spark_id, content, now, trace_id)
                record, _ = self._remember(
                    buffer,
                    agent,
                    kind="own_engagement",
                    text=f"{agent.name} replied to {author_name}'s spark: {content}",
                )
                buffer.emit_behavior(
                    agent.agent_id,
                    "reply",
                    content,
                    target=spark.spark_id,
                    importance=record.importance,
                    reasoning_ref=trace_id,
                )

    # -- helpers -------------------------------------------------------------------

    def _author_name(self, author_id: str) -> str:
        if author_id in self.registry.agents:
            return self.registry.agents[author_id].name
        if author_id in self.registry.npcs:
            return self.registry.npcs[author_id].identity or author_id
        return author_id

    def _remember(self, buffer: _TickBuffer, agent: AgentProfile, *, kind: str, text: str, fixed_importance=None):
        world = buffer.world
        record, failed = append_memory(
            world.store_for(agent.agent_id),
            self.provider,
            kind=kind,
            text=text,
            created_at=buffer.tick_time,
            owner_name=agent.name,
            owner_profile=cognition.profile_text(agent, not self.ablations.no_social_habits),
            tick=buffer.tick,
            fixed_importance=fixed_importance,
        )
        if failed:
            buffer.emit_trace(
                agent.agent_id,
                "memory_importance",
                "acted",
                "PARSE_FAILURE: unusable importance rating; stored with importance 1",
            )
        buffer.emit("memory", record.to_json())
        return record, failed

    def _retrieve(self, world: WorldState, agent_id: str, intention: Intention, now, config):
        situation = intention.situation_text() or "(nothing of note)"
        query = RetrievalQuery(
            owner=agent_id,
            situation_text=situation,
            situation_embedding=self.provider.embed(situation),
            now=now,
            top_k=config.retrieval_top_k,
        )
        return world.store_for(agent_id).retrieve(query, config.retrieval_weights, config.recency_decay)

    def _is_asleep(self, world: WorldState, agent_id: str, key: str, now) -> bool:
        wake = world.wake_hours.get(key, cognition.DEFAULT_WAKE_HOUR)
        hour = to_aoe(now).hour
        if hour < wake:
            return True
        plan = world.plans.get(key)
        if plan is not None:
            sleep_start = plan.sleep_start_hour
            if sleep_start <= wake:
                sleep_start = cognition.BEDTIME_HOUR
            if hour >= sleep_start:
                return True
        return False

    def _planned_activity(self, world: WorldState, agent_id: str, day, now) -> str:
        plan = world.plans.get(day_key(agent_id, day))
        if plan is None:
            return cognition.FREE_SLOT_ACTIVITY
        return plan.activity_at(now) or cognition.FREE_SLOT_ACTIVITY

    def _drain_registry_into(self, buffer: _TickBuffer) -> None:
        for change in self.registry.changes:
            buffer.emit("config_change", {"effective_tick": buffer.tick, **change})
        self.registry.changes.clear()

    # -- snapshots -------------------------------------------------------------------

    def snapshot(self, tick: Optional[int] = None) -> str:
        """Snapshot the committed state; defaults to the latest commit."""
        if tick is None:
            tick = self.state.current_tick - 1
        if tick != self.state.current_tick - 1:
            raise PreconditionError(
                "only the latest committed tick can be snapshotted from live state"
            )
        if tick < 0:
            raise PreconditionError("no tick committed yet")
        return self.store.snapshot(
            tick,
            {"world": self.world.to_json(), "run_state": self.state.to_json()},
        )

    def restore(self, tick: int) -> RunState:
        """Rewind the run to a snapshot: world and log return exactly to the
        committed state at that tick; the transcript is left intact."""
        if self.state.status == RUNNING:
            raise StateError("pause before restoring")
        snapshot = self.store.load_snapshot(tick)
        self.world = WorldState.from_json(snapshot["world"])
        self.store.truncate_log(snapshot["log_length"])
        raw_state = snapshot["run_state"]
        self.state = RunState(
            status=PAUSED,
            current_tick=raw_state["current_tick"],
            tick_time=self.config.tick_time(raw_state["current_tick"]),
            seed=raw_state["seed"],
            run_id=raw_state["run_id"],
        )
        self.provider.reset_cache()
        self._log_run_state("restored")
        return self.state
