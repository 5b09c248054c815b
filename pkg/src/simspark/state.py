"""Mutable simulation state, grouped so a tick can execute on a copy and
commit atomically, and so snapshots can capture/restore a committed tick
exactly (memories, platform state, plans, and the cross-tick carry-overs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from .cognition import DailyPlan
from .engine import SparkleEngine
from .memory import MemoryStore
from .timeutil import format_aoe, parse_aoe


def day_key(agent_id: str, day) -> str:
    return f"{agent_id}|{day.isoformat()}"


@dataclass
class WorldState:
    stores: dict[str, MemoryStore] = field(default_factory=dict)
    engine: SparkleEngine = field(default_factory=SparkleEngine)
    wake_hours: dict[str, int] = field(default_factory=dict)  # day_key -> hour
    plans: dict[str, DailyPlan] = field(default_factory=dict)  # day_key -> plan
    prev_action: dict[str, str] = field(default_factory=dict)  # last tick's activity
    last_post: dict[str, tuple[str, datetime]] = field(default_factory=dict)
    behavior_counter: int = 0
    trace_counter: int = 0

    def store_for(self, agent_id: str) -> MemoryStore:
        if agent_id not in self.stores:
            self.stores[agent_id] = MemoryStore(agent_id)
        return self.stores[agent_id]

    def next_behavior_id(self) -> str:
        record_id = f"b-{self.behavior_counter:06d}"
        self.behavior_counter += 1
        return record_id

    def next_trace_id(self) -> str:
        trace_id = f"t-{self.trace_counter:06d}"
        self.trace_counter += 1
        return trace_id

    def to_json(self) -> dict:
        return {
            "stores": {owner: store.to_json() for owner, store in sorted(self.stores.items())},
            "engine": self.engine.to_json(),
            "wake_hours": dict(sorted(self.wake_hours.items())),
            "plans": {key: plan.to_json() for key, plan in sorted(self.plans.items())},
            "prev_action": dict(sorted(self.prev_action.items())),
            "last_post": {
                agent: {"content": content, "at": format_aoe(at)}
                for agent, (content, at) in sorted(self.last_post.items())
            },
            "behavior_counter": self.behavior_counter,
            "trace_counter": self.trace_counter,
        }

    @classmethod
    def from_json(cls, raw: dict) -> "WorldState":
        world = cls()
        world.stores = {owner: MemoryStore.from_json(s) for owner, s in raw["stores"].items()}
        world.engine = SparkleEngine.from_json(raw["engine"])
        world.wake_hours = dict(raw["wake_hours"])
        world.plans = {key: DailyPlan.from_json(p) for key, p in raw["plans"].items()}
        world.prev_action = dict(raw["prev_action"])
        world.last_post = {
            agent: (entry["content"], parse_aoe(entry["at"])) for agent, entry in raw["last_post"].items()
        }
        world.behavior_counter = raw["behavior_counter"]
        world.trace_counter = raw["trace_counter"]
        return world
