from __future__ import annotations

import math
import random
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simspark.errors import ComputeError, PreconditionError
from simspark.memory import (
    MemoryRecord,
    MemoryStore,
    RetrievalQuery,
    append_memory,
    recency_score,
    relevance_score,
    retrieval_score,
)
from simspark.providers import Script, ScriptedProvider, hash_embedding

from .conftest import aoe


def record_at(store_owner, created, *, importance=5, embedding=(1.0, 0.0), memory_id="m-x-000000", kind="daily_action"):
    return MemoryRecord(
        memory_id=memory_id,
        owner=store_owner,
        created_at=created,
        last_retrieved_at=created,
        kind=kind,
        text="something happened",
        importance=importance,
        embedding=embedding,
    )


class TestRecency:
    def test_zero_elapsed_is_one(self):
        record = record_at("ada", aoe(hour=5))
        assert recency_score(record, aoe(hour=5), 0.995) == 1.0

    def test_24h_decay_matches_direct_power(self):
        # independent evaluation: 0.995 ** 24
        record = record_at("ada", aoe(hour=0))
        value = recency_score(record, aoe(day=2, hour=0), 0.995)
        assert value == pytest.approx(0.8866535105013078, rel=1e-12)
        assert value == pytest.approx(0.8867, abs=5e-5)

    def test_exact_quarter(self):
        record = record_at("ada", aoe(hour=0))
        assert recency_score(record, aoe(hour=2), 0.5) == 0.25

    def test_now_before_last_retrieval_rejected(self):
        record = record_at("ada", aoe(hour=5))
        with pytest.raises(PreconditionError):
            recency_score(record, aoe(hour=4), 0.9)

    @settings(max_examples=200, deadline=None)
    @given(
        decay=st.floats(0.01, 0.999),
        a=st.floats(0.0, 200.0),
        b=st.floats(0.0, 200.0),
    )
    def test_multiplicative_over_concatenated_intervals(self, decay, a, b):
        combined = decay ** (a + b)
        split = (decay**a) * (decay**b)
        assert combined == pytest.approx(split, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(decay=st.floats(0.01, 0.999), hours=st.floats(0.001, 100.0))
    def test_strictly_decreasing(self, decay, hours):
        record = record_at("ada", aoe(hour=0))
        earlier = recency_score(record, aoe(hour=0) + timedelta(hours=hours / 2), decay)
        later = recency_score(record, aoe(hour=0) + timedelta(hours=hours), decay)
        assert later < earlier


class TestRelevance:
    def test_identical_vectors(self):
        assert relevance_score((0.3, 0.4), (0.3, 0.4)) == pytest.approx(1.0, rel=1e-12)

    def test_orthogonal(self):
        assert relevance_score((1.0, 0.0), (0.0, 1.0)) == 0.0

    def test_45_degrees_is_inverse_sqrt2(self):
        # hand computation: 1/sqrt(2)
        assert relevance_score((1.0, 0.0), (1.0, 1.0)) == pytest.approx(0.7071067811865475, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ComputeError):
            relevance_score((1.0, 0.0), (1.0, 0.0, 0.0))

    def test_zero_vector(self):
        with pytest.raises(ComputeError):
            relevance_score((0.0, 0.0), (1.0, 0.0))


class TestRetrievalScore:
    def make_query(self, embedding, now):
        return RetrievalQuery("ada", "situation", embedding, now, top_k=3)

    def test_unit_weights_sum(self):
        # independent calculation: 1*1.0 + 1*(5/10) + 1*0.5 = 2.0
        record = record_at("ada", aoe(hour=0), importance=5, embedding=(1.0, 0.0))
        situation = (math.cos(math.pi / 3), math.sin(math.pi / 3))  # cosine 0.5 with (1,0)
        query = self.make_query(situation, aoe(hour=0))
        value = retrieval_score(record, query, (1.0, 1.0, 1.0), 0.995)
        assert value == pytest.approx(2.0, rel=1e-12)

    def test_weight_isolation(self):
        record = record_at("ada", aoe(hour=0), importance=10, embedding=(0.2, 0.9))
        query = self.make_query((0.5, 0.1), aoe(hour=6))
        assert retrieval_score(record, query, (0.0, 1.0, 0.0), 0.5) == pytest.approx(1.0)

    def test_negative_relevance_clamped(self):
        record = record_at("ada", aoe(hour=0), importance=1, embedding=(1.0, 0.0))
        query = self.make_query((-1.0, 0.0), aoe(hour=0))
        with_rel = retrieval_score(record, query, (0.0, 0.0, 1.0), 0.5)
        assert with_rel == 0.0

    @settings(max_examples=100, deadline=None)
    @given(importance=st.integers(1, 9))
    def test_monotone_in_importance(self, importance):
        base = record_at("ada", aoe(hour=0), importance=importance, embedding=(1.0, 0.0))
        better = record_at("ada", aoe(hour=0), importance=importance + 1, embedding=(1.0, 0.0))
        query = self.make_query((0.4, 0.6), aoe(hour=1))
        weights = (0.7, 1.3, 0.2)
        assert retrieval_score(better, query, weights, 0.9) > retrieval_score(base, query, weights, 0.9)

    @settings(max_examples=100, deadline=None)
    @given(hours=st.floats(0.1, 48.0), extra=st.floats(0.1, 48.0))
    def test_monotone_in_recency(self, hours, extra):
        record = record_at("ada", aoe(hour=0), importance=5, embedding=(1.0, 0.0))
        fresher = self.make_query((0.4, 0.6), aoe(hour=0) + timedelta(hours=hours))
        staler = self.make_query((0.4, 0.6), aoe(hour=0) + timedelta(hours=hours + extra))
        weights = (1.1, 0.3, 0.3)
        assert retrieval_score(record, fresher, weights, 0.9) > retrieval_score(record, staler, weights, 0.9)

    @settings(max_examples=100, deadline=None)
    @given(angle=st.floats(0.05, math.pi / 2 - 0.05), delta=st.floats(0.01, 0.4))
    def test_monotone_in_relevance(self, angle, delta):
        closer_angle = max(angle - delta, 0.0)
        record = record_at("ada", aoe(hour=0), importance=5, embedding=(1.0, 0.0))
        near = self.make_query((math.cos(closer_angle), math.sin(closer_angle)), aoe(hour=1))
        far = self.make_query((math.cos(angle), math.sin(angle)), aoe(hour=1))
        weights = (0.5, 0.5, 1.5)
        assert retrieval_score(record, near, weights, 0.9) >= retrieval_score(record, far, weights, 0.9)


def brute_force_retrieve(records, query, weights, decay):
    """Independent oracle: score every record and fully sort."""

    def score(record):
        hours = (query.now - record.last_retrieved_at).total_seconds() / 3600.0
        rec = decay**hours
        dot = sum(a * b for a, b in zip(record.embedding, query.situation_embedding))
        na = math.sqrt(sum(a * a for a in record.embedding))
        nb = math.sqrt(sum(b * b for b in query.situation_embedding))
        rel = dot / (na * nb)
        rel = min(max(rel, 0.0), 1.0)
        return weights[0] * rec + weights[1] * (record.importance / 10.0) + weights[2] * rel

    ranked = sorted(
        records,
        key=lambda r: (-score(r), -r.created_at.timestamp(), r.memory_id),
    )
    return [r.memory_id for r in ranked[: query.top_k]]


class TestRetrieve:
    def build_store(self, rng, n, dim=4):
        store = MemoryStore("ada")
        start = aoe(hour=0)
        for i in range(n):
            created = start + timedelta(minutes=30 * i)
            embedding = tuple(rng.uniform(-1, 1) for _ in range(dim))
            if all(v == 0 for v in embedding):
                embedding = (1.0,) + embedding[1:]
            record = MemoryRecord(
                memory_id=store.next_id(),
                owner="ada",
                created_at=created,
                last_retrieved_at=created,
                kind="daily_action",
                text=f"event {i}",
                importance=rng.randint(1, 10),
                embedding=embedding,
            )
            store.append(record)
        return store

    def test_empty_store(self):
        store = MemoryStore("ada")
        query = RetrievalQuery("ada", "s", (1.0, 0.0), aoe(hour=1), top_k=5)
        assert store.retrieve(query, (1, 1, 1), 0.995) == []

    def test_matches_brute_force_oracle(self):
        rng = random.Random(7)
        store = self.build_store(rng, 100)
        situation = tuple(rng.uniform(-1, 1) for _ in range(4))
        query = RetrievalQuery("ada", "s", situation, aoe(day=4), top_k=10)
        expected = brute_force_retrieve(store.records, query, (1.0, 1.0, 1.0), 0.995)
        got = [r.memory_id for r in store.retrieve(query, (1.0, 1.0, 1.0), 0.995)]
        assert got == expected

    def test_tie_break_independent_of_insertion_order(self):
        # identical scores force the (created_at desc, memory_id asc) tie-break
        created = aoe(hour=3)
        records = [
            record_at("ada", created, importance=5, embedding=(1.0, 0.0), memory_id=f"m-ada-{i:06d}")
            for i in range(6)
        ]
        query = RetrievalQuery("ada", "s", (1.0, 0.0), aoe(hour=9), top_k=3)

        def run(order):
            store = MemoryStore("ada")
            for record in order:
                store.append(
                    MemoryRecord(
                        memory_id=record.memory_id,
                        owner="ada",
                        created_at=record.created_at,
                        last_retrieved_at=record.last_retrieved_at,
                        kind=record.kind,
                        text=record.text,
                        importance=record.importance,
                        embedding=record.embedding,
                    )
                )
            return [r.memory_id for r in store.retrieve(query, (1, 1, 1), 0.9)]

        base = run(records)
        shuffled = list(records)
        random.Random(3).shuffle(shuffled)
        assert run(shuffled) == base
        assert base == ["m-ada-000000", "m-ada-000001", "m-ada-000002"]

    def test_retrieve_updates_only_returned_records(self):
        rng = random.Random(11)
        store = self.build_store(rng, 20)
        now = aoe(day=2, hour=0)
        query = RetrievalQuery("ada", "s", (1.0, 0.0, 0.0, 0.0), now, top_k=5)
        returned = store.retrieve(query, (1, 1, 1), 0.995)
        returned_ids = {r.memory_id for r in returned}
        for record in store.records:
            if record.memory_id in returned_ids:
                assert record.last_retrieved_at == now
            else:
                assert record.last_retrieved_at < now

    def test_second_retrieve_differs_only_via_recency(self):
        rng = random.Random(13)
        store = self.build_store(rng, 30)
        now = aoe(day=2, hour=0)
        query = RetrievalQuery("ada", "s", (0.5, 0.5, 0.0, 0.0), now, top_k=4)
        first = store.retrieve(query, (1, 1, 1), 0.995)
        later = RetrievalQuery("ada", "s", (0.5, 0.5, 0.0, 0.0), now + timedelta(hours=1), top_k=4)
        second = store.retrieve(later, (1, 1, 1), 0.995)
        # the refreshed records now lead on recency
        assert {r.memory_id for r in first} <= {r.memory_id for r in second} or first != second


class TestAppendMemory:
    def make_provider(self, importance_rules=None):
        rules = importance_rules or []
        return ScriptedProvider(Script.from_json({"rules": rules}))

    def test_mundane_and_poignant_examples(self):
        # the scale examples inside the template mention both phrases, so
        # rules must anchor on the Event line
        provider = self.make_provider(
            [
                {"template_id": "importance", "contains": "Event: brushing teeth", "response": "1"},
                {"template_id": "importance", "contains": "Event: a break up", "response": "10"},
            ]
        )
        store = MemoryStore("ada")
        mundane, failed = append_memory(
            store,
            provider,
            kind="daily_action",
            text="brushing teeth",
            created_at=aoe(hour=7),
            owner_name="Ada",
            owner_profile="Name: Ada",
        )
        assert (mundane.importance, failed) == (1, False)
        poignant, _ = append_memory(
            store,
            provider,
            kind="perception_event",
            text="a break up",
            created_at=aoe(hour=8),
            owner_name="Ada",
            owner_profile="Name: Ada",
        )
        assert poignant.importance == 10

    def test_non_monotone_created_at_rejected(self):
        provider = self.make_provider()
        store = MemoryStore("ada")
        append_memory(
            store,
            provider,
            kind="daily_action",
            text="later event",
            created_at=aoe(hour=9),
            owner_name="Ada",
            owner_profile="Name: Ada",
        )
        with pytest.raises(PreconditionError):
            append_memory(
                store,
                provider,
                kind="daily_action",
                text="earlier event",
                created_at=aoe(hour=8),
                owner_name="Ada",
                owner_profile="Name: Ada",
            )

    def test_unusable_rating_falls_back_to_importance_one(self):
        provider = self.make_provider([{"template_id": "importance", "response": "not a number"}])
        store = MemoryStore("ada")
        record, failed = append_memory(
            store,
            provider,
            kind="daily_action",
            text="odd event",
            created_at=aoe(hour=7),
            owner_name="Ada",
            owner_profile="Name: Ada",
        )
        assert (record.importance, failed) == (1, True)

    def test_fixed_importance_skips_model(self):
        provider = self.make_provider()
        calls = []
        provider.set_transcript_sink(calls.append)
        store = MemoryStore("ada")
        record, failed = append_memory(
            store,
            provider,
            kind="daily_action",
            text="Ada is sleeping",
            created_at=aoe(hour=2),
            owner_name="Ada",
            owner_profile="Name: Ada",
            fixed_importance=1,
        )
        assert not failed and record.importance == 1
        assert all(entry["kind"] != "completion" for entry in calls)
        assert record.last_retrieved_at == record.created_at
