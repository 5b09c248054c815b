"""Simulation input: environment timing, agents, NPCs, and events.

The config document is a single JSON object with top-level keys
``simulation``, ``agents``, ``npcs``, ``events``. Demographic and habit
fields are free text stored verbatim; they are only ever interpreted
inside prompts. Defaults applied on load:

    recommendation_threshold  7
    random_seed               0
    retrieval_weights         (1, 1, 1)
    recency_decay             0.995 per hour
    retrieval_top_k           5
    avatar                    seeded from random_seed per agent
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from random import Random
from typing import Any, Optional, Union

from .errors import ParseError, PreconditionError, StateLockedError
from .timeutil import format_aoe, parse_aoe

AUDIENCE_ALL = "all"

DEFAULT_THRESHOLD = 7
DEFAULT_SEED = 0
DEFAULT_WEIGHTS = (1.0, 1.0, 1.0)
DEFAULT_DECAY = 0.995
DEFAULT_TOP_K = 5
AVATAR_COUNT = 16


@dataclass(frozen=True)
class SimulationConfig:
    start_time: datetime
    end_time: datetime
    tick_interval: timedelta
    recommendation_threshold: int = DEFAULT_THRESHOLD
    random_seed: int = DEFAULT_SEED
    retrieval_weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    recency_decay: float = DEFAULT_DECAY
    retrieval_top_k: int = DEFAULT_TOP_K

    @property
    def tick_count(self) -> int:
        """Number of whole ticks that fit in [start, end]; a trailing
        partial interval is truncated."""
        span = self.end_time - self.start_time
        if self.tick_interval <= timedelta(0):
            return 0
        return int(span / self.tick_interval)

    @property
    def truncates_span(self) -> bool:
        return self.start_time + self.tick_count * self.tick_interval != self.end_time

    def tick_time(self, tick: int) -> datetime:
        return self.start_time + tick * self.tick_interval

    def tick_of(self, at: datetime) -> Optional[int]:
        """Tick whose window [tick_time, tick_time+interval) contains ``at``,
        or None when ``at`` falls outside every executed window."""
        if at < self.start_time or self.tick_interval <= timedelta(0):
            return None
        tick = int((at - self.start_time) / self.tick_interval)
        return tick if tick < self.tick_count else None


@dataclass(frozen=True)
class SocialHabits:
    followers: str = ""
    post_frequency: str = ""
    post_content: str = ""
    engagement: str = ""

    def is_empty(self) -> bool:
        return not any((self.followers, self.post_frequency, self.post_content, self.engagement))


@dataclass(frozen=True)
class AgentProfile:
    agent_id: str
    name: str
    age: str = ""
    gender: str = ""
    residency: str = ""
    innate: str = ""
    job: str = ""
    lifestyle: str = ""
    avatar: int = 0
    habits: SocialHabits = field(default_factory=SocialHabits)


@dataclass(frozen=True)
class NpcProfile:
    npc_id: str
    identity: str = ""
    scheduled_posts: tuple[tuple[datetime, str], ...] = ()


@dataclass(frozen=True)
class EventSpec:
    event_id: str
    event_time: datetime
    description: str
    audience: str = AUDIENCE_ALL  # "all" or a regular agent_id


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    path: str = ""

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "path": self.path}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, code: str, message: str, path: str = "") -> None:
        self.violations.append(Violation(code, message, path))

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations]}


def validate_config(
    config: SimulationConfig,
    agents: list[AgentProfile],
    npcs: list[NpcProfile],
    events: list[EventSpec],
) -> ValidationReport:
    """Check every type invariant; all failures become report entries,
    never exceptions."""
    report = ValidationReport()

    if config.start_time >= config.end_time:
        report.add("TIME_RANGE_EMPTY", "start_time must be before end_time", "simulation.start_time")
    if config.tick_interval <= timedelta(0):
        report.add("TICK_INTERVAL_INVALID", "tick_interval must be positive", "simulation.tick_interval")
    elif config.start_time < config.end_time and config.tick_count < 1:
        report.add(
            "SPAN_TOO_SHORT",
            "simulation span must cover at least one tick interval",
            "simulation.tick_interval",
        )
    if not 1 <= config.recommendation_threshold <= 10:
        report.add(
            "THRESHOLD_OUT_OF_RANGE",
            f"recommendation_threshold must be in 1..10, got {config.recommendation_threshold}",
            "simulation.recommendation_threshold",
        )
    if any(w < 0 for w in config.retrieval_weights):
        report.add("WEIGHTS_NEGATIVE", "retrieval weights must be non-negative", "simulation.retrieval_weights")
    if not any(w > 0 for w in config.retrieval_weights):
        report.add("WEIGHTS_ALL_ZERO", "retrieval weights must not all be zero", "simulation.retrieval_weights")
    if not 0.0 < config.recency_decay < 1.0:
        report.add("DECAY_OUT_OF_RANGE", "recency_decay must lie in (0, 1)", "simulation.recency_decay")
    if config.retrieval_top_k < 1:
        report.add("TOP_K_INVALID", "retrieval_top_k must be positive", "simulation.retrieval_top_k")

    seen: dict[str, str] = {}
    for i, agent in enumerate(agents):
        path = f"agents[{i}]"
        if not agent.agent_id:
            report.add("ID_EMPTY", "agent_id must be non-empty", f"{path}.agent_id")
        elif agent.agent_id in seen:
            report.add("DUPLICATE_ID", f"id {agent.agent_id!r} already used by {seen[agent.agent_id]}", path)
        else:
            seen[agent.agent_id] = path
        if not agent.name:
            report.add("NAME_EMPTY", "agent name must be non-empty", f"{path}.name")
    for i, npc in enumerate(npcs):
        path = f"npcs[{i}]"
        if not npc.npc_id:
            report.add("ID_EMPTY", "npc_id must be non-empty", f"{path}.npc_id")
        elif npc.npc_id in seen:
            report.add("DUPLICATE_ID", f"id {npc.npc_id!r} already used by {seen[npc.npc_id]}", path)
        else:
            seen[npc.npc_id] = path
        last: Optional[datetime] = None
        for j, (post_time, content) in enumerate(npc.scheduled_posts):
            ppath = f"{path}.scheduled_posts[{j}]"
            if not (config.start_time <= post_time <= config.end_time):
                report.add("POST_TIME_OUT_OF_RANGE", "scheduled post outside the simulation span", ppath)
            if last is not None and post_time < last:
                report.add("POSTS_UNSORTED", "scheduled_posts must ascend by post_time", ppath)
            if not content.strip():
                report.add("CONTENT_EMPTY", "scheduled post content must be non-empty", ppath)
            last = post_time

    agent_ids = {a.agent_id for a in agents}
    event_ids: set[str] = set()
    for i, event in enumerate(events):
        path = f"events[{i}]"
        if not event.event_id:
            report.add("ID_EMPTY", "event_id must be non-empty", f"{path}.event_id")
        elif event.event_id in event_ids:
            report.add("DUPLICATE_ID", f"event id {event.event_id!r} repeated", path)
        event_ids.add(event.event_id)
        if not (config.start_time <= event.event_time <= config.end_time):
            report.add("EVENT_TIME_OUT_OF_RANGE", "event outside the simulation span", f"{path}.event_time")
        if event.audience != AUDIENCE_ALL and event.audience not in agent_ids:
            report.add(
                "UNKNOWN_AUDIENCE",
                f"private event targets unknown agent {event.audience!r}",
                f"{path}.audience",
            )
    return report


# -- document loading ---------------------------------------------------------


def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ParseError("required field missing", f"{path}.{key}")
    return obj[key]


def _get_str(obj: dict, key: str, path: str, *, required: bool = False, default: str = "") -> str:
    if key not in obj:
        if required:
            raise ParseError("required field missing", f"{path}.{key}")
        return default
    value = obj[key]
    if not isinstance(value, str):
        raise ParseError(f"expected text, got {type(value).__name__}", f"{path}.{key}")
    return value


def _get_time(obj: dict, key: str, path: str) -> datetime:
    raw = _require(obj, key, path)
    if not isinstance(raw, str):
        raise ParseError("expected an ISO-8601 timestamp string", f"{path}.{key}")
    try:
        return parse_aoe(raw)
    except ValueError as exc:
        raise ParseError(str(exc), f"{path}.{key}") from None


def load_config(
    document: Union[str, dict],
) -> tuple[SimulationConfig, list[AgentProfile], list[NpcProfile], list[EventSpec]]:
    """Parse a config document (JSON text or already-decoded object).

    Schema violations raise ParseError naming the offending field path;
    semantic problems are left to validate_config.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", "$") from None
    if not isinstance(document, dict):
        raise ParseError("top level must be an object", "$")

    sim = _require(document, "simulation", "$")
    if not isinstance(sim, dict):
        raise ParseError("expected an object", "$.simulation")
    start = _get_time(sim, "start_time", "simulation")
    end = _get_time(sim, "end_time", "simulation")
    interval_raw = _require(sim, "tick_interval", "simulation")
    if not isinstance(interval_raw, (int, float)) or isinstance(interval_raw, bool):
        raise ParseError("expected minutes as a number", "simulation.tick_interval")

    def _num(key: str, default: Any, kind: type) -> Any:
        value = sim.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"expected a number", f"simulation.{key}")
        return kind(value)

    weights_raw = sim.get("retrieval_weights", list(DEFAULT_WEIGHTS))
    if not isinstance(weights_raw, (list, tuple)) or len(weights_raw) != 3:
        raise ParseError("expected three numbers", "simulation.retrieval_weights")
    try:
        weights = tuple(float(w) for w in weights_raw)
    except (TypeError, ValueError):
        raise ParseError("expected three numbers", "simulation.retrieval_weights") from None

    config = SimulationConfig(
        start_time=start,
        end_time=end,
        tick_interval=timedelta(minutes=interval_raw),
        recommendation_threshold=_num("recommendation_threshold", DEFAULT_THRESHOLD, int),
        random_seed=_num("random_seed", DEFAULT_SEED, int),
        retrieval_weights=weights,  # type: ignore[arg-type]
        recency_decay=_num("recency_decay", DEFAULT_DECAY, float),
        retrieval_top_k=_num("retrieval_top_k", DEFAULT_TOP_K, int),
    )

    avatar_rng = Random(config.random_seed)
    agents: list[AgentProfile] = []
    for i, raw in enumerate(document.get("agents", [])):
        path = f"agents[{i}]"
        if not isinstance(raw, dict):
            raise ParseError("expected an object", path)
        habits_raw = raw.get("habits", {})
        if not isinstance(habits_raw, dict):
            raise ParseError("expected an object", f"{path}.habits")
        habits = SocialHabits(
            followers=_get_str(habits_raw, "followers", f"{path}.habits"),
            post_frequency=_get_str(habits_raw, "post_frequency", f"{path}.habits"),
            post_content=_get_str(habits_raw, "post_content", f"{path}.habits"),
            engagement=_get_str(habits_raw, "engagement", f"{path}.habits"),
        )
        default_avatar = avatar_rng.randrange(AVATAR_COUNT)
        avatar = raw.get("avatar", default_avatar)
        if isinstance(avatar, bool) or not isinstance(avatar, int):
            raise ParseError("expected a small integer", f"{path}.avatar")
        agents.append(
            AgentProfile(
                agent_id=_get_str(raw, "agent_id", path, required=True),
                name=_get_str(raw, "name", path, required=True),
                age=_get_str(raw, "age", path),
                gender=_get_str(raw, "gender", path),
                residency=_get_str(raw, "residency", path),
                innate=_get_str(raw, "innate", path),
                job=_get_str(raw, "job", path),
                lifestyle=_get_str(raw, "lifestyle", path),
                avatar=avatar,
                habits=habits,
            )
        )

    npcs: list[NpcProfile] = []
    for i, raw in enumerate(document.get("npcs", [])):
        path = f"npcs[{i}]"
        if not isinstance(raw, dict):
            raise ParseError("expected an object", path)
        posts: list[tuple[datetime, str]] = []
        for j, praw in enumerate(raw.get("scheduled_posts", [])):
            ppath = f"{path}.scheduled_posts[{j}]"
            if not isinstance(praw, dict):
                raise ParseError("expected an object", ppath)
            posts.append((_get_time(praw, "post_time", ppath), _get_str(praw, "content", ppath, required=True)))
        npcs.append(
            NpcProfile(
                npc_id=_get_str(raw, "npc_id", path, required=True),
                identity=_get_str(raw, "identity", path),
                scheduled_posts=tuple(posts),
            )
        )

    events: list[EventSpec] = []
    for i, raw in enumerate(document.get("events", [])):
        path = f"events[{i}]"
        if not isinstance(raw, dict):
            raise ParseError("expected an object", path)
        audience = raw.get("audience", AUDIENCE_ALL)
        if not isinstance(audience, str) or not audience:
            raise ParseError('expected "all" or an agent_id', f"{path}.audience")
        events.append(
            EventSpec(
                event_id=_get_str(raw, "event_id", path, required=True),
                event_time=_get_time(raw, "event_time", path),
                description=_get_str(raw, "description", path, required=True),
                audience=audience,
            )
        )
    return config, agents, npcs, events


def simulation_to_json(config: SimulationConfig) -> dict:
    return {
        "start_time": format_aoe(config.start_time),
        "end_time": format_aoe(config.end_time),
        "tick_interval": config.tick_interval.total_seconds() / 60,
        "recommendation_threshold": config.recommendation_threshold,
        "random_seed": config.random_seed,
        "retrieval_weights": list(config.retrieval_weights),
        "recency_decay": config.recency_decay,
        "retrieval_top_k": config.retrieval_top_k,
    }


def agent_to_json(a: AgentProfile) -> dict:
    return {
        "agent_id": a.agent_id,
        "name": a.name,
        "age": a.age,
        "gender": a.gender,
        "residency": a.residency,
        "innate": a.innate,
        "job": a.job,
        "lifestyle": a.lifestyle,
        "avatar": a.avatar,
        "habits": {
            "followers": a.habits.followers,
            "post_frequency": a.habits.post_frequency,
            "post_content": a.habits.post_content,
            "engagement": a.habits.engagement,
        },
    }


def npc_to_json(n: NpcProfile) -> dict:
    return {
        "npc_id": n.npc_id,
        "identity": n.identity,
        "scheduled_posts": [{"post_time": format_aoe(t), "content": c} for t, c in n.scheduled_posts],
    }


def event_to_json(e: EventSpec) -> dict:
    return {
        "event_id": e.event_id,
        "event_time": format_aoe(e.event_time),
        "description": e.description,
        "audience": e.audience,
    }


def serialize_config(
    config: SimulationConfig,
    agents: list[AgentProfile],
    npcs: list[NpcProfile],
    events: list[EventSpec],
) -> dict:
    """Inverse of load_config; load(serialize(x)) is structurally equal to x."""
    return {
        "simulation": simulation_to_json(config),
        "agents": [agent_to_json(a) for a in agents],
        "npcs": [npc_to_json(n) for n in npcs],
        "events": [event_to_json(e) for e in events],
    }


class Registry:
    """Single logical owner of the configured world.

    Mutations are rejected while the run is Running (the pause-then-modify
    flow is a state machine, not a live edit); accepted mutations surface
    to the loop at the next tick boundary. ``state_probe`` reports whether
    the owning run is currently Running.
    """

    def __init__(
        self,
        config: SimulationConfig,
        agents: list[AgentProfile] | None = None,
        npcs: list[NpcProfile] | None = None,
        events: list[EventSpec] | None = None,
        state_probe=None,
    ):
        self.config = config
        self.agents: dict[str, AgentProfile] = {a.agent_id: a for a in (agents or [])}
        self.npcs: dict[str, NpcProfile] = {n.npc_id: n for n in (npcs or [])}
        self.events: dict[str, EventSpec] = {e.event_id: e for e in (events or [])}
        self.state_probe = state_probe
        self.changes: list[dict] = []  # drained by the loop into the run log

    # snapshots hand out copies so readers never see in-place mutation
    def agent_list(self) -> list[AgentProfile]:
        return [self.agents[k] for k in sorted(self.agents)]

    def npc_list(self) -> list[NpcProfile]:
        return [self.npcs[k] for k in sorted(self.npcs)]

    def event_list(self) -> list[EventSpec]:
        return sorted(self.events.values(), key=lambda e: (e.event_time, e.event_id))

    def validate(self) -> ValidationReport:
        return validate_config(self.config, self.agent_list(), self.npc_list(), self.event_list())

    def _guard(self) -> None:
        if self.state_probe is not None and self.state_probe():
            raise StateLockedError(
                "configuration is locked unless the simulation is Idle or Paused"
            )

    def _record(self, action: str, entity: str, entity_id: str, payload=None) -> None:
        # payload carries the full entity so replay can re-apply the change
        self.changes.append(
            {"action": action, "entity": entity, "entity_id": entity_id, "payload": payload}
        )

    def replace_config(self, config: SimulationConfig) -> None:
        self._guard()
        self.config = config
        self._record("replace", "simulation", "", simulation_to_json(config))

    def upsert_agent(self, agent: AgentProfile) -> None:
        self._guard()
        if agent.agent_id in self.npcs:
            raise PreconditionError(f"id {agent.agent_id!r} already names an NPC", code="DUPLICATE_ID")
        self.agents[agent.agent_id] = agent
        self._record("upsert", "agent", agent.agent_id, agent_to_json(agent))

    def upsert_npc(self, npc: NpcProfile) -> None:
        self._guard()
        if npc.npc_id in self.agents:
            raise PreconditionError(f"id {npc.npc_id!r} already names an agent", code="DUPLICATE_ID")
        self.npcs[npc.npc_id] = npc
        self._record("upsert", "npc", npc.npc_id, npc_to_json(npc))

    def add_event(self, event: EventSpec) -> None:
        self._guard()
        self.events[event.event_id] = event
        self._record("upsert", "event", event.event_id, event_to_json(event))

    def remove_entity(self, entity_id: str) -> None:
        self._guard()
        if entity_id in self.agents:
            holders = [e.event_id for e in self.events.values() if e.audience == entity_id]
            if holders:
                raise PreconditionError(
                    f"agent {entity_id!r} is the audience of events {holders}",
                    code="REFERENCED_ELSEWHERE",
                )
            del self.agents[entity_id]
            self._record("remove", "agent", entity_id)
        elif entity_id in self.npcs:
            del self.npcs[entity_id]
            self._record("remove", "npc", entity_id)
        elif entity_id in self.events:
            del self.events[entity_id]
            self._record("remove", "event", entity_id)
        else:
            raise PreconditionError(f"no entity with id {entity_id!r}", code="NOT_FOUND")

    def to_document(self) -> dict:
        return serialize_config(self.config, self.agent_list(), self.npc_list(), self.event_list())


def with_threshold(config: SimulationConfig, threshold: int) -> SimulationConfig:
    return replace(config, recommendation_threshold=threshold)
