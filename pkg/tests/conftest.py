from __future__ import annotations

from datetime import datetime, timedelta

import pytest

from simspark.config import (
    AgentProfile,
    EventSpec,
    NpcProfile,
    Registry,
    SimulationConfig,
    SocialHabits,
)
from simspark.timeutil import AOE


def aoe(year=2024, month=7, day=1, hour=0, minute=0):
    return datetime(year, month, day, hour, minute, tzinfo=AOE)


@pytest.fixture
def base_config():
    return SimulationConfig(
        start_time=aoe(hour=0),
        end_time=aoe(day=2, hour=0),
        tick_interval=timedelta(hours=1),
        random_seed=42,
    )


def make_agent(agent_id: str, name: str | None = None, **kwargs) -> AgentProfile:
    habits = kwargs.pop("habits", None) or SocialHabits(
        followers="a few dozen",
        post_frequency="posts about once a day",
        post_content="everyday life",
        engagement="likes things that genuinely resonate",
    )
    return AgentProfile(agent_id=agent_id, name=name or agent_id.title(), habits=habits, **kwargs)


@pytest.fixture
def three_agents():
    return [make_agent("alice"), make_agent("bob"), make_agent("cara")]


@pytest.fixture
def registry(base_config, three_agents):
    return Registry(base_config, agents=three_agents)


def make_registry(config, agents=(), npcs=(), events=()):
    return Registry(config, agents=list(agents), npcs=list(npcs), events=list(events))


__all__ = ["aoe", "make_agent", "make_registry", "AgentProfile", "NpcProfile", "EventSpec"]
