"""The virtual platform: sparks, likes, replies, follows, and routing.

Routing of a freshly published spark, per regular agent other than the
author, in ascending agent_id order:

* author is an NPC            -> forced delivery, no scoring call
* recipient follows author    -> forced delivery, no scoring call
* otherwise                   -> model rates 1-10; deliver iff score >= threshold
  (a spark whose score falls below the threshold is not recommended)

Sparks are scored once, at their publish tick; they are never re-routed.
There is no unfollow or unlike, so the follow network grows monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

from .config import AgentProfile
from .errors import MalformedPayload, PreconditionError
from .providers import Provider, ask_score
from .templates import build_prompt
from .timeutil import format_aoe, human_time, parse_aoe

DELIVERY_CAUSES = ("npc_forced", "follow_forced", "scored")


@dataclass
class Reply:
    author: str
    replied_at: datetime
    content: str
    reasoning_ref: str

    def to_json(self) -> dict:
        return {
            "author": self.author,
            "replied_at": format_aoe(self.replied_at),
            "content": self.content,
            "reasoning_ref": self.reasoning_ref,
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Reply":
        return cls(raw["author"], parse_aoe(raw["replied_at"]), raw["content"], raw["reasoning_ref"])


@dataclass
class Spark:
    spark_id: str
    author: str
    posted_at: datetime
    content: str
    tick: int
    likes: list[tuple[str, int, str]] = field(default_factory=list)  # (agent, tick, reasoning_ref)
    replies: list[Reply] = field(default_factory=list)

    def liked_by(self, agent_id: str) -> bool:
        return any(agent == agent_id for agent, _, _ in self.likes)

    def to_json(self) -> dict:
        return {
            "spark_id": self.spark_id,
            "author": self.author,
            "posted_at": format_aoe(self.posted_at),
            "content": self.content,
            "tick": self.tick,
            "likes": [{"agent": a, "tick": t, "reasoning_ref": r} for a, t, r in self.likes],
            "replies": [r.to_json() for r in self.replies],
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Spark":
        return cls(
            spark_id=raw["spark_id"],
            author=raw["author"],
            posted_at=parse_aoe(raw["posted_at"]),
            content=raw["content"],
            tick=raw["tick"],
            likes=[(l["agent"], l["tick"], l["reasoning_ref"]) for l in raw["likes"]],
            replies=[Reply.from_json(r) for r in raw["replies"]],
        )


@dataclass(frozen=True)
class FollowEdge:
    follower: str
    followee: str
    created_at_tick: int
    reasoning_ref: str

    def to_json(self) -> dict:
        return {
            "follower": self.follower,
            "followee": self.followee,
            "created_at_tick": self.created_at_tick,
            "reasoning_ref": self.reasoning_ref,
        }


@dataclass(frozen=True)
class Delivery:
    spark_id: str
    recipient: str
    cause: str
    tick: int
    score: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "spark_id": self.spark_id,
            "recipient": self.recipient,
            "cause": self.cause,
            "tick": self.tick,
            "score": self.score,
        }


@dataclass
class ScoreOutcome:
    recipient: str
    score: int
    parse_failed: bool


class SparkleEngine:
    """Platform state; mutated only by the simulation loop's apply phase."""

    def __init__(self):
        self.sparks: dict[str, Spark] = {}
        self.order: list[str] = []  # publish order
        self.edges: list[FollowEdge] = []
        self.deliveries: list[Delivery] = []
        self._edge_pairs: set[tuple[str, str]] = set()
        self._delivered: set[tuple[str, str]] = set()
        self._counter = 0

    # -- queries ---------------------------------------------------------------

    def spark(self, spark_id: str) -> Spark:
        if spark_id not in self.sparks:
            raise PreconditionError(f"no spark {spark_id!r}", code="NOT_FOUND")
        return self.sparks[spark_id]

    def follows(self, follower: str, followee: str) -> bool:
        return (follower, followee) in self._edge_pairs

    def network_at(self, tick: int, current_tick: int) -> list[FollowEdge]:
        if tick < 0 or tick > current_tick:
            raise PreconditionError(f"tick {tick} outside 0..{current_tick}")
        return [e for e in self.edges if e.created_at_tick <= tick]

    def deliveries_for(self, recipient: str, tick: int) -> list[Delivery]:
        return [d for d in self.deliveries if d.recipient == recipient and d.tick == tick]

    # -- mutations ---------------------------------------------------------------

    def publish_spark(
        self,
        author: str,
        content: str,
        posted_at: datetime,
        tick: int,
        known_authors: Optional[set[str]] = None,
    ) -> Spark:
        if known_authors is not None and author not in known_authors:
            raise PreconditionError(f"unknown author {author!r}")
        content = content.strip()
        if not content:
            raise PreconditionError("spark content must be non-empty")
        spark = Spark(
            spark_id=f"s-{self._counter:06d}",
            author=author,
            posted_at=posted_at,
            content=content,
            tick=tick,
        )
        self._counter += 1
        self.sparks[spark.spark_id] = spark
        self.order.append(spark.spark_id)
        return spark

    def score_recommendation(
        self,
        provider: Provider,
        spark: Spark,
        recipient: AgentProfile,
        recipient_profile: str,
        tick: int,
    ) -> ScoreOutcome:
        """Rate how likely the platform recommends this spark to the
        recipient. On unusable output the spark is treated as score 1 and
        never recommended; the caller logs the parse-failure trace."""
        if recipient.agent_id == spark.author:
            raise PreconditionError("a spark is never recommended to its own author")
        parts = build_prompt(
            "recommendation",
            {
                "Agent1": recipient.name,
                "Agent1's Demographic Information": recipient_profile,
                "Agent2": spark.author,
                "Content": spark.content,
                "Time": human_time(spark.posted_at),
            },
        )
        try:
            score = ask_score(
                provider, parts, 1, 10, template_id="recommendation", agent_id=recipient.agent_id, tick=tick
            )
            return ScoreOutcome(recipient.agent_id, score, parse_failed=False)
        except MalformedPayload:
            return ScoreOutcome(recipient.agent_id, 1, parse_failed=True)

    def route_spark(
        self,
        provider: Provider,
        spark: Spark,
        tick: int,
        threshold: int,
        recipients: Sequence[AgentProfile],
        npc_ids: set[str],
        profile_of,
    ) -> tuple[list[Delivery], list[ScoreOutcome]]:
        """Deliver one freshly published spark; returns the new deliveries
        and every scoring outcome (delivered or not) for audit."""
        deliveries: list[Delivery] = []
        outcomes: list[ScoreOutcome] = []
        for agent in sorted(recipients, key=lambda a: a.agent_id):
            if agent.agent_id == spark.author:
                continue
            if (spark.spark_id, agent.agent_id) in self._delivered:
                continue
            if spark.author in npc_ids:
                delivery = Delivery(spark.spark_id, agent.agent_id, "npc_forced", tick)
            elif self.follows(agent.agent_id, spark.author):
                delivery = Delivery(spark.spark_id, agent.agent_id, "follow_forced", tick)
            else:
                outcome = self.score_recommendation(provider, spark, agent, profile_of(agent), tick)
                outcomes.append(outcome)
                if outcome.parse_failed or outcome.score < threshold:
                    continue
                delivery = Delivery(spark.spark_id, agent.agent_id, "scored", tick, score=outcome.score)
            self.deliveries.append(delivery)
            self._delivered.add((delivery.spark_id, delivery.recipient))
            deliveries.append(delivery)
        return deliveries, outcomes

    def apply_like(self, agent: str, spark_id: str, tick: int, reasoning_ref: str) -> bool:
        """Returns False on a duplicate like (idempotent no-op)."""
        spark = self.spark(spark_id)
        if spark.liked_by(agent):
            return False
        spark.likes.append((agent, tick, reasoning_ref))
        return True

    def apply_follow(self, follower: str, followee: str, tick: int, reasoning_ref: str) -> bool:
        """Returns False on a duplicate edge (idempotent no-op)."""
        if follower == followee:
            raise PreconditionError("an account cannot follow itself")
        if (follower, followee) in self._edge_pairs:
            return False
        self.edges.append(FollowEdge(follower, followee, tick, reasoning_ref))
        self._edge_pairs.add((follower, followee))
        return True

    def apply_reply(
        self, agent: str, spark_id: str, content: str, replied_at: datetime, reasoning_ref: str
    ) -> Reply:
        spark = self.spark(spark_id)
        content = content.strip()
        if not content:
            raise PreconditionError("reply content must be non-empty")
        reply = Reply(agent, replied_at, content, reasoning_ref)
        spark.replies.append(reply)
        return reply

    # -- snapshots ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "counter": self._counter,
            "order": list(self.order),
            "sparks": [self.sparks[s].to_json() for s in self.order],
            "edges": [e.to_json() for e in self.edges],
            "deliveries": [d.to_json() for d in self.deliveries],
        }

    @classmethod
    def from_json(cls, raw: dict) -> "SparkleEngine":
        engine = cls()
        engine._counter = raw["counter"]
        engine.order = list(raw["order"])
        for spark_raw in raw["sparks"]:
            spark = Spark.from_json(spark_raw)
            engine.sparks[spark.spark_id] = spark
        engine.edges = [
            FollowEdge(e["follower"], e["followee"], e["created_at_tick"], e["reasoning_ref"])
            for e in raw["edges"]
        ]
        engine._edge_pairs = {(e.follower, e.followee) for e in engine.edges}
        engine.deliveries = [
            Delivery(d["spark_id"], d["recipient"], d["cause"], d["tick"], d["score"])
            for d in raw["deliveries"]
        ]
        engine._delivered = {(d.spark_id, d.recipient) for d in engine.deliveries}
        return engine
