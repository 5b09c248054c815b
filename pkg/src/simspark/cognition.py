"""Per-agent cognitive pipeline: wake time, daily plan, daily actions,
post decisions, and engagement decisions, all with explicit reasoning.

Every decision prompt follows the same shape: current perceptions, the
time, the agent's profile, retrieved memories, then a yes/no question
answered as JSON with Reasoning and Answer fields. Reasoning is captured
for both answers; negative answers feed the hidden-reasoning store.

Parse failures never crash the pipeline: after the re-ask policy, each
operation falls back to a conservative default (don't post, don't engage,
wake at 7, a single free slot for the day) and flags the failure so the
loop can log a PARSE_FAILURE trace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date, datetime, time as dtime
from typing import Optional

from .config import AgentProfile
from .engine import Spark
from .errors import MalformedPayload, PreconditionError
from .memory import MemoryRecord
from .providers import Provider, ask_json, ask_score, request_hash
from .templates import build_prompt
from .timeutil import AOE, human_date, human_time

DEFAULT_WAKE_HOUR = 7
BEDTIME_HOUR = 23
SLEEP_ACTIVITY = "sleeping"
CONTINUE_ACTIVITY = "continues previous activity"
FREE_SLOT_ACTIVITY = "spending the day freely"

INTENTION_TAGS = ("plan", "public_event", "private_event", "daily_experience", "recommended_spark")

_HHMM_RE = re.compile(r"^\s*(\d{1,2}):(\d{2})\s*$")


@dataclass(frozen=True)
class PlanEntry:
    start_time: datetime
    activity: str


@dataclass
class DailyPlan:
    owner: str
    date: date
    wake_hour: int
    entries: list[PlanEntry] = field(default_factory=list)

    def activity_at(self, now: datetime) -> Optional[str]:
        current: Optional[str] = None
        for entry in self.entries:
            if entry.start_time <= now:
                current = entry.activity
            else:
                break
        return current

    @property
    def sleep_start_hour(self) -> int:
        """Sleep begins at the plan's last entry or 23:00, whichever first."""
        if not self.entries:
            return BEDTIME_HOUR
        return min(self.entries[-1].start_time.astimezone(AOE).hour, BEDTIME_HOUR)

    def to_json(self) -> dict:
        return {
            "owner": self.owner,
            "date": self.date.isoformat(),
            "wake_hour": self.wake_hour,
            "entries": [
                {"start_time": e.start_time.isoformat(), "activity": e.activity} for e in self.entries
            ],
        }

    @classmethod
    def from_json(cls, raw: dict) -> "DailyPlan":
        return cls(
            owner=raw["owner"],
            date=date.fromisoformat(raw["date"]),
            wake_hour=raw["wake_hour"],
            entries=[
                PlanEntry(datetime.fromisoformat(e["start_time"]), e["activity"])
                for e in raw["entries"]
            ],
        )


@dataclass(frozen=True)
class IntentionSource:
    tag: str
    text: str


@dataclass
class Intention:
    owner: str
    tick: int
    sources: list[IntentionSource] = field(default_factory=list)

    def add(self, tag: str, text: str) -> None:
        if tag not in INTENTION_TAGS:
            raise PreconditionError(f"unknown intention tag {tag!r}")
        self.sources.append(IntentionSource(tag, text))

    def situation_text(self) -> str:
        """The 'current situation' used for relevance: the concatenation of
        this tick's intention source texts, in perception order."""
        return "\n".join(s.text for s in self.sources)

    def perceptions_text(self) -> str:
        if not self.sources:
            return "(nothing of note)"
        return "\n".join(f"- ({s.tag.replace('_', ' ')}) {s.text}" for s in self.sources)


@dataclass
class Decision:
    subject: str
    action_kind: str  # post | like | follow | reply
    target: Optional[str]
    answer: bool
    reasoning: str
    tick: int
    parse_failed: bool = False
    prompt_hash: str = ""


def profile_text(agent: AgentProfile, include_habits: bool = True) -> str:
    """Free-text demographic block rendered into prompts verbatim; fields
    are never parsed, only surfaced."""
    fields = [
        ("Name", agent.name),
        ("Age", agent.age),
        ("Gender", agent.gender),
        ("Residency", agent.residency),
        ("Innate traits", agent.innate),
        ("Job", agent.job),
        ("Lifestyle", agent.lifestyle),
    ]
    lines = [f"{label}: {value}" for label, value in fields if value]
    if include_habits and not agent.habits.is_empty():
        habits = [
            ("followers", agent.habits.followers),
            ("posting frequency", agent.habits.post_frequency),
            ("typical posts", agent.habits.post_content),
            ("engagement", agent.habits.engagement),
        ]
        rendered = "; ".join(f"{label}: {value}" for label, value in habits if value)
        lines.append(f"Social media habits: {rendered}")
    return "\n".join(lines) if lines else f"Name: {agent.name}"


def memories_text(records: list[MemoryRecord]) -> str:
    if not records:
        return "(no relevant memories)"
    return "\n".join(f"- [{human_time(r.created_at)}] {r.text}" for r in records)


def _engagement_habit(agent: AgentProfile) -> str:
    return agent.habits.engagement or "engages when something genuinely interests them"


def _post_frequency(agent: AgentProfile) -> str:
    return agent.habits.post_frequency or "posts when something feels worth sharing"


def _normalize_answer(raw: str) -> bool:
    cleaned = raw.strip().rstrip(".!?,;: ").lower()
    if cleaned == "yes":
        return True
    if cleaned == "no":
        return False
    raise MalformedPayload(f"Answer must be yes or no, got {raw!r}")


# -- initializing ----------------------------------------------------------------


def generate_wake_hour(
    provider: Provider, agent: AgentProfile, day: date, tick: int, *, omit_social_habits: bool = False
) -> tuple[int, bool]:
    """Model-derived wake-up hour for the agent's day; falls back to 7."""
    parts = build_prompt(
        "wake_hour",
        {
            "Agent": agent.name,
            "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
            "Date": human_date(datetime.combine(day, dtime(), tzinfo=AOE)),
        },
    )
    try:
        hour = ask_score(provider, parts, 0, 23, template_id="wake_hour", agent_id=agent.agent_id, tick=tick)
        return hour, False
    except MalformedPayload:
        return DEFAULT_WAKE_HOUR, True


def _parse_plan_entries(raw_plan, day: date, wake_hour: int) -> list[PlanEntry]:
    if not isinstance(raw_plan, list):
        return []
    wake_dt = datetime.combine(day, dtime(hour=wake_hour), tzinfo=AOE)
    entries: list[PlanEntry] = []
    for item in raw_plan:
        if not isinstance(item, dict):
            continue
        time_raw = item.get("Time")
        activity = item.get("Activity")
        if not isinstance(time_raw, str) or not isinstance(activity, str) or not activity.strip():
            continue
        match = _HHMM_RE.match(time_raw)
        if not match:
            continue
        hour, minute = int(match.group(1)), int(match.group(2))
        if hour > 23 or minute > 59:
            continue
        start = datetime.combine(day, dtime(hour=hour, minute=minute), tzinfo=AOE)
        if start < wake_dt:
            start = wake_dt  # entries before waking shift to the wake hour
        entries.append(PlanEntry(start, activity.strip()))
    entries.sort(key=lambda e: e.start_time)
    return entries


def generate_daily_plan(
    provider: Provider,
    agent: AgentProfile,
    day: date,
    wake_hour: int,
    tick: int,
    *,
    omit_social_habits: bool = False,
) -> tuple[DailyPlan, bool]:
    """Timed plan for the day; an unparseable plan degrades to a single
    free slot starting at the wake hour."""
    parts = build_prompt(
        "daily_plan",
        {
            "Agent": agent.name,
            "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
            "Date": human_date(datetime.combine(day, dtime(), tzinfo=AOE)),
            "Wake Hour": f"{wake_hour:02d}:00",
        },
    )
    entries: list[PlanEntry] = []
    parse_failed = False
    try:
        payload = ask_json(provider, parts, [], template_id="daily_plan", agent_id=agent.agent_id, tick=tick)
        entries = _parse_plan_entries(payload.get("Plan"), day, wake_hour)
    except MalformedPayload:
        parse_failed = True
    if not entries:
        parse_failed = True
        wake_dt = datetime.combine(day, dtime(hour=wake_hour), tzinfo=AOE)
        entries = [PlanEntry(wake_dt, FREE_SLOT_ACTIVITY)]
    return DailyPlan(owner=agent.agent_id, date=day, wake_hour=wake_hour, entries=entries), parse_failed


# -- acting: daily life ------------------------------------------------------------


def generate_daily_action(
    provider: Provider,
    agent: AgentProfile,
    tick: int,
    now: datetime,
    planned_activity: str,
    intention: Intention,
    *,
    omit_social_habits: bool = False,
) -> tuple[str, bool]:
    """One natural-language activity for this tick ("having lunch")."""
    parts = build_prompt(
        "daily_action",
        {
            "Perceptions": intention.perceptions_text(),
            "Time": human_time(now),
            "Agent": agent.name,
            "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
            "Planned Activity": planned_activity,
        },
    )
    try:
        payload = ask_json(
            provider, parts, ["Activity"], template_id="daily_action", agent_id=agent.agent_id, tick=tick
        )
        activity = payload["Activity"].strip()
        if activity:
            return activity, False
    except MalformedPayload:
        pass
    return CONTINUE_ACTIVITY, True


# -- deciding and acting: social ----------------------------------------------------


def decide_post(
    provider: Provider,
    agent: AgentProfile,
    tick: int,
    now: datetime,
    intention: Intention,
    retrieved: list[MemoryRecord],
    last_post: Optional[tuple[str, datetime]],
    *,
    omit_social_habits: bool = False,
) -> Decision:
    last_content, last_time = _last_post_slots(last_post)
    slots = {
        "Perceptions": intention.perceptions_text(),
        "Time": [human_time(now), last_time],
        "Agent": agent.name,
        "Content": last_content,
        "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
        "Agent's Retrieved Memories": memories_text(retrieved),
    }
    if not omit_social_habits:
        slots["Post Frequency"] = _post_frequency(agent)
    parts = build_prompt("decide_post", slots, omit_social_habits=omit_social_habits)
    return _yes_no_decision(provider, parts, "decide_post", agent.agent_id, tick, "post", None)


def _require_positive(decision: Decision, agent_id: str, action_kind: str, tick: int) -> None:
    ok = (
        decision.subject == agent_id
        and decision.action_kind == action_kind
        and decision.tick == tick
        and decision.answer
    )
    if not ok:
        raise PreconditionError(
            f"act_{action_kind} requires a positive same-tick {action_kind} decision for {agent_id!r}"
        )


def act_post(
    provider: Provider,
    agent: AgentProfile,
    tick: int,
    now: datetime,
    intention: Intention,
    retrieved: list[MemoryRecord],
    last_post: Optional[tuple[str, datetime]],
    decision: Decision,
    *,
    omit_social_habits: bool = False,
) -> Optional[str]:
    """Post content; None when the model produced nothing usable (the
    caller reverses the post decision with a hidden trace)."""
    _require_positive(decision, agent.agent_id, "post", tick)
    last_content, last_time = _last_post_slots(last_post)
    parts = build_prompt(
        "act_post",
        {
            "Perceptions": intention.perceptions_text(),
            "Time": [human_time(now), last_time],
            "Agent": agent.name,
            "Content": last_content,
            "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
            "Agent's Retrieved Memories": memories_text(retrieved),
        },
    )
    try:
        payload = ask_json(provider, parts, ["Content"], template_id="act_post", agent_id=agent.agent_id, tick=tick)
    except MalformedPayload:
        return None
    content = payload["Content"].strip()
    return content or None


def decide_engagement(
    provider: Provider,
    agent: AgentProfile,
    spark: Spark,
    kind: str,
    tick: int,
    now: datetime,
    intention: Intention,
    retrieved: list[MemoryRecord],
    author_name: str,
    *,
    omit_social_habits: bool = False,
) -> Decision:
    if kind not in ("like", "follow", "reply"):
        raise PreconditionError(f"unknown engagement kind {kind!r}")
    template_id = f"decide_{kind}"
    slots = {
        "Perceptions": intention.perceptions_text(),
        "Time": human_time(now),
        "Author": author_name,
        "Content": spark.content,
        "Posted Time": human_time(spark.posted_at),
        "Agent": agent.name,
        "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
        "Agent's Retrieved Memories": memories_text(retrieved),
    }
    if not omit_social_habits:
        slots["Engagement"] = _engagement_habit(agent)
    parts = build_prompt(template_id, slots, omit_social_habits=omit_social_habits)
    target = spark.author if kind == "follow" else spark.spark_id
    return _yes_no_decision(provider, parts, template_id, agent.agent_id, tick, kind, target)


def act_reply(
    provider: Provider,
    agent: AgentProfile,
    spark: Spark,
    tick: int,
    now: datetime,
    intention: Intention,
    retrieved: list[MemoryRecord],
    author_name: str,
    decision: Decision,
    *,
    omit_social_habits: bool = False,
) -> Optional[str]:
    _require_positive(decision, agent.agent_id, "reply", tick)
    parts = build_prompt(
        "act_reply",
        {
            "Perceptions": intention.perceptions_text(),
            "Time": human_time(now),
            "Author": author_name,
            "Content": spark.content,
            "Posted Time": human_time(spark.posted_at),
            "Agent": agent.name,
            "Agent's Demographic Information": profile_text(agent, not omit_social_habits),
            "Agent's Retrieved Memories": memories_text(retrieved),
        },
    )
    try:
        payload = ask_json(provider, parts, ["Content"], template_id="act_reply", agent_id=agent.agent_id, tick=tick)
    except MalformedPayload:
        return None
    content = payload["Content"].strip()
    return content or None


def _last_post_slots(last_post: Optional[tuple[str, datetime]]) -> tuple[str, str]:
    if last_post is None:
        return "nothing yet", "no earlier time"
    content, at = last_post
    return content, human_time(at)


def _validate_decision_payload(payload: dict) -> None:
    _normalize_answer(payload["Answer"])
    if not payload["Reasoning"].strip():
        raise MalformedPayload("Reasoning must be non-empty")


def _yes_no_decision(
    provider: Provider,
    parts,
    template_id: str,
    agent_id: str,
    tick: int,
    action_kind: str,
    target: Optional[str],
) -> Decision:
    prompt_hash = request_hash(template_id, parts.render())
    try:
        payload = ask_json(
            provider,
            parts,
            ["Reasoning", "Answer"],
            template_id=template_id,
            agent_id=agent_id,
            tick=tick,
            validate=_validate_decision_payload,
        )
        answer = _normalize_answer(payload["Answer"])
        return Decision(
            subject=agent_id,
            action_kind=action_kind,
            target=target,
            answer=answer,
            reasoning=payload["Reasoning"],
            tick=tick,
            prompt_hash=prompt_hash,
        )
    except MalformedPayload as exc:
        return Decision(
            subject=agent_id,
            action_kind=action_kind,
            target=target,
            answer=False,
            reasoning=f"PARSE_FAILURE: {exc}",
            tick=tick,
            parse_failed=True,
            prompt_hash=prompt_hash,
        )
