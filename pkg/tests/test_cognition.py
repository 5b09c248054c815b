from __future__ import annotations

import json

import pytest

from simspark.cognition import (
    DailyPlan,
    Decision,
    Intention,
    act_post,
    act_reply,
    decide_engagement,
    decide_post,
    generate_daily_action,
    generate_daily_plan,
    generate_wake_hour,
    profile_text,
)
from simspark.errors import PreconditionError
from simspark.engine import Spark
from simspark.providers import Script, ScriptedProvider
from simspark.timeutil import AOE

from .conftest import aoe, make_agent

REBECCA_PAYLOAD = (
    '{"Reasoning":"Rebecca is a data analyst who loves exploring data trends. '
    "She usually posts around 1 times a day, and has already posted once today. "
    'Therefore, it is unlikely that she would post again right now","Answer":"No"}'
)


def scripted(rules=None, defaults=None):
    return ScriptedProvider(Script.from_json({"rules": rules or [], "defaults": defaults or {}}))


@pytest.fixture
def rebecca():
    return make_agent("rebecca", "Rebecca", job="data analyst")


@pytest.fixture
def intention():
    intent = Intention("rebecca", 12)
    intent.add("public_event", "The quarterly report dropped")
    return intent


class TestWakeHour:
    def test_scripted_hour(self, rebecca):
        provider = scripted([{"template_id": "wake_hour", "response": "7"}])
        assert generate_wake_hour(provider, rebecca, aoe().date(), 0) == (7, False)

    def test_out_of_range_reprompts_then_defaults(self, rebecca):
        provider = scripted([{"template_id": "wake_hour", "response": "25"}])
        hour, failed = generate_wake_hour(provider, rebecca, aoe().date(), 0)
        assert (hour, failed) == (7, True)

    def test_night_shift_hour_accepted_verbatim(self, rebecca):
        provider = scripted([{"template_id": "wake_hour", "response": "14"}])
        assert generate_wake_hour(provider, rebecca, aoe().date(), 0) == (14, False)


class TestDailyPlan:
    def test_three_sorted_entries(self, rebecca):
        plan_json = json.dumps(
            {
                "Plan": [
                    {"Time": "12:00", "Activity": "lunch"},
                    {"Time": "08:00", "Activity": "gym"},
                    {"Time": "20:00", "Activity": "reading"},
                ]
            }
        )
        provider = scripted([{"template_id": "daily_plan", "response": plan_json}])
        plan, failed = generate_daily_plan(provider, rebecca, aoe().date(), 7, 0)
        assert not failed
        assert [e.activity for e in plan.entries] == ["gym", "lunch", "reading"]
        assert plan.entries[0].start_time.hour == 8

    def test_entry_before_wake_shifts_to_wake(self, rebecca):
        plan_json = json.dumps({"Plan": [{"Time": "05:00", "Activity": "early start"}]})
        provider = scripted([{"template_id": "daily_plan", "response": plan_json}])
        plan, _ = generate_daily_plan(provider, rebecca, aoe().date(), 7, 0)
        assert plan.entries[0].start_time.hour == 7

    def test_unparseable_plan_becomes_single_free_slot(self, rebecca):
        provider = scripted([{"template_id": "daily_plan", "response": "I have no plan"}])
        plan, failed = generate_daily_plan(provider, rebecca, aoe().date(), 9, 0)
        assert failed
        assert len(plan.entries) == 1
        assert plan.entries[0].start_time.hour == 9

    def test_sleep_start_from_last_entry_capped_at_23(self, rebecca):
        plan = DailyPlan(
            owner="rebecca",
            date=aoe().date(),
            wake_hour=7,
            entries=[],
        )
        assert plan.sleep_start_hour == 23


class TestDailyAction:
    def test_scripted_lunch(self, rebecca, intention):
        provider = scripted(
            [{"template_id": "daily_action", "response": '{"Activity": "having lunch"}'}]
        )
        activity, failed = generate_daily_action(
            provider, rebecca, 12, aoe(hour=12), "lunch", intention
        )
        assert (activity, failed) == ("having lunch", False)

    def test_provider_garbage_continues_previous_activity(self, rebecca, intention):
        provider = scripted([{"template_id": "daily_action", "response": "word salad"}])
        activity, failed = generate_daily_action(
            provider, rebecca, 12, aoe(hour=12), "lunch", intention
        )
        assert (activity, failed) == ("continues previous activity", True)


class TestDecidePost:
    def test_rebecca_example_payload(self, rebecca, intention):
        provider = scripted([{"template_id": "decide_post", "response": REBECCA_PAYLOAD}])
        decision = decide_post(provider, rebecca, 12, aoe(hour=12), intention, [], None)
        assert decision.answer is False
        assert decision.reasoning.startswith("Rebecca is a data analyst")
        assert not decision.parse_failed
        assert decision.prompt_hash

    def test_yes_answer(self, rebecca, intention):
        provider = scripted(
            [{"template_id": "decide_post", "response": '{"Reasoning":"momentum","Answer":"Yes"}'}]
        )
        decision = decide_post(provider, rebecca, 12, aoe(hour=12), intention, [], None)
        assert decision.answer is True

    def test_answer_normalization_with_punctuation(self, rebecca, intention):
        provider = scripted(
            [{"template_id": "decide_post", "response": '{"Reasoning":"sure","Answer":"YES."}'}]
        )
        decision = decide_post(provider, rebecca, 12, aoe(hour=12), intention, [], None)
        assert decision.answer is True

    def test_malformed_after_reprompts_is_negative_with_parse_failure(self, rebecca, intention):
        provider = scripted([{"template_id": "decide_post", "response": "not json"}])
        decision = decide_post(provider, rebecca, 12, aoe(hour=12), intention, [], None)
        assert decision.answer is False
        assert decision.parse_failed
        assert decision.reasoning.startswith("PARSE_FAILURE")

    def test_habit_text_present_normally_absent_when_ablated(self, rebecca, intention):
        rendered: list[str] = []

        class Spy(ScriptedProvider):
            def _complete(self, prompt, meta):
                rendered.append(prompt)
                return super()._complete(prompt, meta)

        provider = Spy()
        decide_post(provider, rebecca, 12, aoe(hour=12), intention, [], None)
        assert "posts about once a day" in rendered[0]
        decide_post(
            provider, rebecca, 12, aoe(hour=12), intention, [], None, omit_social_habits=True
        )
        assert "posts about once a day" not in rendered[1]
        assert "Social media habits" not in rendered[1]


def yes_decision(agent_id, kind, tick, target=None):
    return Decision(agent_id, kind, target, True, "scripted yes", tick)


class TestActPost:
    def test_hashtag_content_published_verbatim(self, rebecca, intention):
        content = (
            "Feeling grateful for this artistic journey. #ArtisticSoul"
        )
        provider = scripted(
            [{"template_id": "act_post", "response": json.dumps({"Content": content})}]
        )
        decision = yes_decision("rebecca", "post", 12)
        got = act_post(provider, rebecca, 12, aoe(hour=12), intention, [], None, decision)
        assert got == content

    def test_whitespace_content_treated_as_empty(self, rebecca, intention):
        provider = scripted([{"template_id": "act_post", "response": '{"Content": "   "}'}])
        decision = yes_decision("rebecca", "post", 12)
        assert act_post(provider, rebecca, 12, aoe(hour=12), intention, [], None, decision) is None

    def test_negative_decision_rejected(self, rebecca, intention):
        provider = scripted()
        declined = Decision("rebecca", "post", None, False, "no", 12)
        with pytest.raises(PreconditionError):
            act_post(provider, rebecca, 12, aoe(hour=12), intention, [], None, declined)

    def test_wrong_tick_rejected(self, rebecca, intention):
        provider = scripted()
        stale = yes_decision("rebecca", "post", 11)
        with pytest.raises(PreconditionError):
            act_post(provider, rebecca, 12, aoe(hour=12), intention, [], None, stale)


class TestEngagement:
    def make_spark(self):
        return Spark("s-000001", "leonardo", aoe(hour=20), "What a football match!", 20)

    def test_yes_like_with_innate_reasoning(self, rebecca, intention):
        provider = scripted(
            [
                {
                    "template_id": "decide_like",
                    "response": '{"Reasoning":"it aligns with her innate traits and interests","Answer":"Yes"}',
                }
            ]
        )
        decision = decide_engagement(
            provider, rebecca, self.make_spark(), "like", 20, aoe(hour=20), intention, [], "Leonardo"
        )
        assert decision.answer is True
        assert "innate traits" in decision.reasoning
        assert decision.target == "s-000001"

    def test_no_follow_records_hidden_reason(self, rebecca, intention):
        provider = scripted(
            [
                {
                    "template_id": "decide_follow",
                    "response": '{"Answer":"No","Reasoning":"lack of interest in fashion trends"}',
                }
            ]
        )
        decision = decide_engagement(
            provider, rebecca, self.make_spark(), "follow", 20, aoe(hour=20), intention, [], "Leonardo"
        )
        assert decision.answer is False
        assert decision.reasoning == "lack of interest in fashion trends"
        assert decision.target == "leonardo"

    def test_reply_content(self, rebecca, intention):
        provider = scripted(
            [{"template_id": "act_reply", "response": '{"Content": "Chin up, next match!"}'}]
        )
        decision = yes_decision("rebecca", "reply", 20, target="s-000001")
        content = act_reply(
            provider, rebecca, self.make_spark(), 20, aoe(hour=20), intention, [], "Leonardo", decision
        )
        assert content == "Chin up, next match!"

    def test_reply_without_positive_decision_rejected(self, rebecca, intention):
        provider = scripted()
        declined = Decision("rebecca", "reply", "s-000001", False, "no", 20)
        with pytest.raises(PreconditionError):
            act_reply(
                provider, rebecca, self.make_spark(), 20, aoe(hour=20), intention, [], "Leonardo", declined
            )


class TestProfileText:
    def test_includes_habits_by_default(self, rebecca):
        text = profile_text(rebecca)
        assert "Job: data analyst" in text
        assert "Social media habits" in text

    def test_empty_fields_skipped(self):
        agent = make_agent("zed", "Zed")
        text = profile_text(agent)
        assert "Age:" not in text

    def test_intention_situation_text_concatenates_sources(self, intention):
        intention.add("recommended_spark", "Bob posted on Sparkle: hello")
        situation = intention.situation_text()
        assert "The quarterly report dropped" in situation
        assert "Bob posted on Sparkle: hello" in situation
