from __future__ import annotations

import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from simspark.config import Registry, load_config
from simspark.loop import Simulation
from simspark.providers import Script, ScriptedProvider
from simspark.service import create_app

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


class ThrottledProvider(ScriptedProvider):
    """Scripted provider slowed enough that a run stays observably Running."""

    def __init__(self, script, delay=0.002):
        super().__init__(script)
        self.delay = delay

    def _complete(self, prompt, meta):
        time.sleep(self.delay)
        return super()._complete(prompt, meta)


def make_client(tmp_path, provider_cls=ScriptedProvider):
    loaded = load_config((SCENARIOS / "football.json").read_text("utf-8"))
    registry = Registry(loaded[0], agents=loaded[1], npcs=loaded[2], events=loaded[3])
    provider = provider_cls(Script.load(str(SCENARIOS / "football_script.json")))
    sim = Simulation(registry, provider, tmp_path)
    app = create_app(sim)
    client = TestClient(app)
    client.sim = sim
    return client


@pytest.fixture
def client(tmp_path):
    with make_client(tmp_path) as test_client:
        yield test_client


@pytest.fixture
def slow_client(tmp_path):
    with make_client(tmp_path, ThrottledProvider) as test_client:
        yield test_client


def wait_for_status(client, status, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = client.get("/v1/run").json()
        if state["status"] == status:
            return state
        time.sleep(0.02)
    raise AssertionError(f"run never reached {status}")


def run_to_finish(client):
    assert client.post("/v1/run/start").status_code == 200
    return wait_for_status(client, "Finished")


class TestConfigEndpoints:
    def test_get_config_round_trips(self, client):
        document = client.get("/v1/config").json()
        assert {"simulation", "agents", "npcs", "events"} <= set(document)
        assert any(a["agent_id"] == "leonardo" for a in document["agents"])

    def test_put_config_while_running_is_409(self, slow_client):
        document = slow_client.get("/v1/config").json()
        slow_client.post("/v1/run/start")
        response = slow_client.put("/v1/config", json=document)
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "STATE_LOCKED"
        slow_client.post("/v1/run/pause")

    def test_post_agent_natural_language_fields(self, client):
        payload = {
            "agent_id": "nova",
            "name": "Nova Reyes",
            "age": "from 16 to 24",
            "habits": {"post_frequency": "whenever inspiration strikes"},
        }
        response = client.post("/v1/agents", json=payload)
        assert response.status_code == 200 and response.json()["ok"]
        stored = client.get("/v1/config").json()
        nova = [a for a in stored["agents"] if a["agent_id"] == "nova"][0]
        assert nova["age"] == "from 16 to 24"

    def test_post_event_audience_checkbox_equivalent(self, client):
        public = {
            "event_id": "rain",
            "event_time": "2024-07-01T15:00:00-12:00",
            "description": "Sudden summer rain",
            "audience": "all",
        }
        private = dict(public, event_id="note", audience="elena", description="Editor pinged Elena")
        assert client.post("/v1/events", json=public).status_code == 200
        assert client.post("/v1/events", json=private).status_code == 200
        bad = dict(public, event_id="bad", audience="nobody")
        response = client.post("/v1/events", json=bad)
        assert response.status_code == 422
        assert any(v["code"] == "UNKNOWN_AUDIENCE" for v in response.json()["violations"])

    def test_invalid_config_rejected_with_report(self, client):
        document = client.get("/v1/config").json()
        document["simulation"]["recommendation_threshold"] = 11
        response = client.put("/v1/config", json=document)
        assert response.status_code == 422
        assert any(v["code"] == "THRESHOLD_OUT_OF_RANGE" for v in response.json()["violations"])


class TestRunControl:
    def test_start_pause_resume_roundtrip(self, slow_client):
        slow_client.post("/v1/run/start")
        paused = slow_client.post("/v1/run/pause")
        assert paused.status_code == 200 and paused.json()["status"] == "Paused"
        resumed = slow_client.post("/v1/run/resume")
        assert resumed.json()["status"] == "Running"

    def test_double_start_is_409(self, slow_client):
        slow_client.post("/v1/run/start")
        assert slow_client.post("/v1/run/start").status_code == 409
        slow_client.post("/v1/run/pause")

    def test_reset_returns_new_run_id(self, client):
        first = client.get("/v1/run").json()["run_id"]
        run_to_finish(client)
        reset = client.post("/v1/run/reset").json()
        assert reset["status"] == "Idle"
        assert reset["run_id"] != first


class TestQueries:
    def test_calendar_counts_and_filters(self, client):
        run_to_finish(client)
        buckets = client.get("/v1/calendar").json()
        total = sum(len(b["records"]) for b in buckets)
        assert total > 0
        high = client.get("/v1/calendar", params={"min_importance": 8}).json()
        for bucket in high:
            assert all(r["importance"] >= 8 for r in bucket["records"])
        social = client.get("/v1/calendar", params={"kinds": "social"}).json()
        assert all(r["kind"] != "daily" for b in social for r in b["records"])

    def test_sparks_list_detail_and_reasoning(self, client):
        run_to_finish(client)
        listing = client.get("/v1/sparks").json()
        assert listing["total"] == 4
        champion = [s for s in listing["items"] if "CHAMPIONS" in s["content"]][0]
        detail = client.get(f"/v1/sparks/{champion['spark_id']}").json()
        assert [l["agent"] for l in detail["likes"]] == ["elena"]
        reasoning = client.get(f"/v1/reasoning/{detail['likes'][0]['reasoning_ref']}").json()
        assert "passion" in reasoning["reasoning"]

    def test_hidden_reasons_for_spark(self, client):
        run_to_finish(client)
        listing = client.get("/v1/sparks").json()
        second = [s for s in listing["items"] if "second-half" in s["content"]][0]
        hidden = client.get(f"/v1/hidden/{second['spark_id']}").json()
        assert any(t["subject"] == "elena" and t["polarity"] == "declined" for t in hidden)

    def test_network_initial_and_final(self, client):
        run_to_finish(client)
        empty = client.get("/v1/network", params={"at_tick": 0}).json()
        assert empty["edges"] == []
        full = client.get("/v1/network").json()
        assert len(full["edges"]) == 2
        future = client.get("/v1/network", params={"at_tick": 999})
        assert future.status_code == 400
        bad_kinds = client.get("/v1/calendar", params={"kinds": "weird"})
        assert bad_kinds.status_code == 400

    def test_unknown_ids_are_404(self, client):
        run_to_finish(client)
        assert client.get("/v1/sparks/s-zzz").status_code == 404
        assert client.get("/v1/reasoning/b-999999").status_code == 404
        assert client.get("/v1/hidden/s-999999").status_code == 404

    def test_export_endpoint_matches_store(self, client):
        run_to_finish(client)
        body = client.get("/v1/export/behaviors").text.strip()
        lines = body.splitlines()
        assert len(lines) == len([r for r in client.sim.store.records if r["type"] == "behavior"])


class TestStream:
    def parse_events(self, text):
        events = []
        for block in text.strip().split("\n\n"):
            event = {}
            for line in block.splitlines():
                key, _, value = line.partition(": ")
                event.setdefault(key, value)
            events.append(event)
        return events

    def test_subscribe_zero_replays_full_history(self, client):
        run_to_finish(client)
        with client.stream("GET", "/v1/stream", params={"from_sequence": 0}) as response:
            text = "".join(response.iter_text())
        events = self.parse_events(text)
        ids = [int(e["id"]) for e in events if "id" in e]
        assert ids == sorted(ids)
        assert ids[0] == 0
        assert ids == list(range(len(ids)))
        assert events[-1]["event"] == "end"
        assert len(ids) == len(client.sim.store.records)

    def test_resume_from_sequence(self, client):
        run_to_finish(client)
        total = len(client.sim.store.records)
        with client.stream("GET", "/v1/stream", params={"from_sequence": total - 5}) as response:
            text = "".join(response.iter_text())
        ids = [int(e["id"]) for e in self.parse_events(text) if "id" in e]
        assert ids == list(range(total - 5, total))

    def test_two_subscribers_identical_sequences(self, client):
        run_to_finish(client)

        def collect():
            with client.stream("GET", "/v1/stream", params={"from_sequence": 0}) as response:
                return [e for e in self.parse_events("".join(response.iter_text())) if "id" in e]

        assert collect() == collect()

    def test_stream_order_equals_log_order(self, client):
        run_to_finish(client)
        with client.stream("GET", "/v1/stream", params={"from_sequence": 0}) as response:
            text = "".join(response.iter_text())
        events = [e for e in self.parse_events(text) if "id" in e]
        for event in events:
            record = client.sim.store.records[int(event["id"])]
            assert event["event"] == record["type"]
            assert json.loads(event["data"]) == record
