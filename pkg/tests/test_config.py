from __future__ import annotations

import json
from datetime import timedelta

import pytest

from simspark.config import (
    AgentProfile,
    EventSpec,
    NpcProfile,
    Registry,
    SimulationConfig,
    load_config,
    serialize_config,
    validate_config,
)
from simspark.errors import ParseError, PreconditionError, StateLockedError

from .conftest import aoe, make_agent

MINIMAL_DOC = {
    "simulation": {
        "start_time": "2024-07-01T00:00:00-12:00",
        "end_time": "2024-07-02T00:00:00-12:00",
        "tick_interval": 60,
    },
    "agents": [{"agent_id": "ada", "name": "Ada"}],
}


def test_minimal_document_defaults():
    config, agents, npcs, events = load_config(json.dumps(MINIMAL_DOC))
    assert config.recommendation_threshold == 7
    assert config.retrieval_weights == (1.0, 1.0, 1.0)
    assert config.recency_decay == 0.995
    assert config.retrieval_top_k == 5
    assert agents[0].name == "Ada"
    assert npcs == [] and events == []


def test_round_trip_structural_equality():
    loaded = load_config(json.dumps(MINIMAL_DOC))
    document = serialize_config(*loaded)
    again = load_config(json.dumps(document))
    assert again == loaded
    # serialize is stable too
    assert serialize_config(*again) == document


def test_missing_name_errors_with_path():
    doc = {"simulation": MINIMAL_DOC["simulation"], "agents": [{"agent_id": "x"}]}
    with pytest.raises(ParseError) as err:
        load_config(doc)
    assert "agents[0].name" in str(err.value)


def test_free_text_age_accepted_verbatim():
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["agents"][0]["age"] = "from 16 to 24"
    _, agents, _, _ = load_config(doc)
    assert agents[0].age == "from 16 to 24"


def test_naive_timestamp_rejected():
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["simulation"]["start_time"] = "2024-07-01T00:00:00"
    with pytest.raises(ParseError) as err:
        load_config(doc)
    assert "simulation.start_time" in str(err.value)


def test_validate_empty_range():
    config = SimulationConfig(aoe(), aoe(), timedelta(hours=1))
    report = validate_config(config, [], [], [])
    assert "TIME_RANGE_EMPTY" in report.codes()


def test_validate_threshold_out_of_range(base_config):
    config = SimulationConfig(
        base_config.start_time,
        base_config.end_time,
        base_config.tick_interval,
        recommendation_threshold=11,
    )
    report = validate_config(config, [], [], [])
    assert "THRESHOLD_OUT_OF_RANGE" in report.codes()


def test_validate_unknown_audience(base_config, three_agents):
    event = EventSpec("e1", aoe(hour=3), "something happened", audience="nobody")
    report = validate_config(base_config, three_agents, [], [event])
    assert "UNKNOWN_AUDIENCE" in report.codes()


def test_validate_weights_all_zero(base_config):
    config = SimulationConfig(
        base_config.start_time,
        base_config.end_time,
        base_config.tick_interval,
        retrieval_weights=(0.0, 0.0, 0.0),
    )
    report = validate_config(config, [], [], [])
    assert "WEIGHTS_ALL_ZERO" in report.codes()


def test_validate_span_shorter_than_tick():
    config = SimulationConfig(aoe(hour=0), aoe(hour=1), timedelta(hours=2))
    report = validate_config(config, [], [], [])
    assert "SPAN_TOO_SHORT" in report.codes()


def test_validate_npc_posts_sorted_and_in_range(base_config):
    npc = NpcProfile(
        "brand",
        identity="advertiser",
        scheduled_posts=((aoe(hour=5), "later"), (aoe(hour=2), "earlier")),
    )
    report = validate_config(base_config, [], [npc], [])
    assert "POSTS_UNSORTED" in report.codes()
    npc2 = NpcProfile("brand2", scheduled_posts=((aoe(month=8, day=9), "way out"),))
    report2 = validate_config(base_config, [], [npc2], [])
    assert "POST_TIME_OUT_OF_RANGE" in report2.codes()


def test_duplicate_id_across_agents_and_npcs(base_config):
    agents = [make_agent("dup")]
    npcs = [NpcProfile("dup")]
    report = validate_config(base_config, agents, npcs, [])
    assert "DUPLICATE_ID" in report.codes()


def test_accepted_config_validates_clean(base_config, three_agents):
    event = EventSpec("e1", aoe(hour=3), "festival downtown", audience="alice")
    report = validate_config(base_config, three_agents, [], [event])
    assert report.ok, report.to_json()


def test_tick_count_truncates_partial_tail():
    config = SimulationConfig(aoe(hour=0), aoe(hour=5, minute=30), timedelta(hours=1))
    assert config.tick_count == 5
    assert config.truncates_span
    assert config.tick_of(aoe(hour=4, minute=59)) == 4
    assert config.tick_of(aoe(hour=5, minute=15)) is None


class TestRegistry:
    def test_mutation_locked_while_running(self, registry):
        registry.state_probe = lambda: True
        with pytest.raises(StateLockedError):
            registry.upsert_agent(make_agent("dan"))

    def test_remove_agent_referenced_by_event(self, registry):
        registry.add_event(EventSpec("e1", aoe(hour=2), "private note", audience="alice"))
        with pytest.raises(PreconditionError) as err:
            registry.remove_entity("alice")
        assert err.value.code == "REFERENCED_ELSEWHERE"

    def test_upsert_visible_and_recorded(self, registry):
        registry.upsert_agent(make_agent("dan"))
        assert "dan" in registry.agents
        change = registry.changes[-1]
        assert (change["action"], change["entity"], change["entity_id"]) == ("upsert", "agent", "dan")
        assert change["payload"]["name"] == "Dan"

    def test_remove_unknown(self, registry):
        with pytest.raises(PreconditionError):
            registry.remove_entity("ghost")
