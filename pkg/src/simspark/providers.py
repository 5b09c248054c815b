"""Text-completion and embedding backends behind one interface.

Three implementations:

* ScriptedProvider — deterministic stand-in for tests and offline runs.
  Rules match on (template_id, agent_id, tick) plus optional prompt
  substring or exact prompt hash; unmatched requests fall back to
  per-template defaults so any configuration can run offline.
* ReplayProvider — serves responses recorded in a transcript file, in
  recorded order per request hash, with no network.
* LiveProvider — HTTP chat-completion/embedding backend with retry and a
  simple requests-per-minute limiter. Bearer token comes from the
  SIMSPARK_LLM_TOKEN environment variable.

Every completion and embedding is appended to a transcript (JSON lines)
keyed by a stable request hash, which is what replay consumes.

Also home to the strict payload parsers (``extract_json``,
``score_from_text``) and the re-ask helpers implementing the
malformed-payload recovery policy.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import struct
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import httpx

from .errors import (
    MalformedPayload,
    ProviderContractViolation,
    ProviderUnavailable,
)
from .templates import PromptParts

Embedding = tuple[float, ...]

TOKEN_ENV_VAR = "SIMSPARK_LLM_TOKEN"

# Up to 2 re-asks after the first malformed response, then the caller's
# fallback applies.
REPROMPT_LIMIT = 2
JSON_REPROMPT_DIRECTIVE = "Return only the JSON object."
NUMBER_REPROMPT_DIRECTIVE = "Return only the number."

SCRIPTED_EMBEDDING_DIM = 8


def request_hash(template_id: str, prompt: str) -> str:
    digest = hashlib.sha256()
    digest.update(template_id.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(prompt.encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = ""
    embedding_endpoint: str = ""
    model_name: str = ""
    embedding_model: str = ""
    request_timeout: float = 30.0
    max_retries: int = 2
    rate_limit: float = 60.0  # requests per minute

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")


TranscriptSink = Callable[[dict], None]


class Provider:
    """Shared transcript recording and per-run embedding cache."""

    def __init__(self):
        self._sink: Optional[TranscriptSink] = None
        self._embedding_cache: dict[str, Embedding] = {}
        self._dimension: Optional[int] = None

    def set_transcript_sink(self, sink: Optional[TranscriptSink]) -> None:
        self._sink = sink

    def reset_cache(self) -> None:
        self._embedding_cache.clear()
        self._dimension = None

    # -- subclass surface ----------------------------------------------------

    def _complete(self, prompt: str, meta: dict) -> tuple[str, float]:
        raise NotImplementedError

    def _embed(self, text: str) -> tuple[Sequence[float], float]:
        raise NotImplementedError

    # -- public operations ---------------------------------------------------

    def complete(
        self,
        parts: PromptParts,
        *,
        template_id: str,
        agent_id: Optional[str] = None,
        tick: Optional[int] = None,
    ) -> str:
        prompt = parts.render()
        meta = {"template_id": template_id, "agent_id": agent_id, "tick": tick}
        response, latency_ms = self._complete(prompt, meta)
        if self._sink is not None:
            self._sink(
                {
                    "kind": "completion",
                    "hash": request_hash(template_id, prompt),
                    "template_id": template_id,
                    "agent_id": agent_id,
                    "tick": tick,
                    "prompt": prompt,
                    "response": response,
                    "latency_ms": latency_ms,
                }
            )
        return response

    def embed(self, text: str) -> Embedding:
        if text in self._embedding_cache:
            return self._embedding_cache[text]
        raw, latency_ms = self._embed(text)
        vector = tuple(float(v) for v in raw)
        if self._dimension is None:
            if not vector:
                raise ProviderContractViolation("backend returned an empty embedding")
            self._dimension = len(vector)
        elif len(vector) != self._dimension:
            raise ProviderContractViolation(
                f"embedding dimension changed from {self._dimension} to {len(vector)}"
            )
        self._embedding_cache[text] = vector
        if self._sink is not None:
            self._sink(
                {
                    "kind": "embedding",
                    "hash": hashlib.sha256(text.encode("utf-8")).hexdigest(),
                    "text": text,
                    "vector": list(vector),
                    "latency_ms": latency_ms,
                }
            )
        return vector


# -- scripted ------------------------------------------------------------------


def hash_embedding(text: str, dimension: int = SCRIPTED_EMBEDDING_DIM) -> Embedding:
    """Deterministic unit vector derived from the text digest."""
    values: list[float] = []
    counter = 0
    while len(values) < dimension:
        block = hashlib.sha256(f"{counter}:{text}".encode("utf-8")).digest()
        for offset in range(0, len(block) - 7, 8):
            (word,) = struct.unpack_from(">q", block, offset)
            values.append(word / 2**63)
            if len(values) == dimension:
                break
        counter += 1
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        values[0] = 1.0
        norm = 1.0
    return tuple(v / norm for v in values)


BUILTIN_DEFAULTS = {
    "importance": "5",
    "recommendation": "1",
    "wake_hour": "7",
    "daily_plan": json.dumps(
        {
            "Plan": [
                {"Time": "07:00", "Activity": "morning routine"},
                {"Time": "09:00", "Activity": "working"},
                {"Time": "12:00", "Activity": "having lunch"},
                {"Time": "14:00", "Activity": "working"},
                {"Time": "19:00", "Activity": "having dinner"},
                {"Time": "22:00", "Activity": "winding down for bed"},
            ]
        }
    ),
    "daily_action": '{"Activity": "going about the day"}',
    "decide_post": '{"Reasoning": "No strong impulse to post right now.", "Answer": "No"}',
    "decide_like": '{"Reasoning": "Nothing here calls for a like.", "Answer": "No"}',
    "decide_follow": '{"Reasoning": "No reason to follow this account.", "Answer": "No"}',
    "decide_reply": '{"Reasoning": "Nothing to add in a reply.", "Answer": "No"}',
    "act_post": '{"Content": "Just checking in on Sparkle."}',
    "act_reply": '{"Content": "Nice post!"}',
}


@dataclass(frozen=True)
class ScriptRule:
    response: str
    template_id: str
    agent_id: Optional[str] = None
    tick: Optional[int] = None
    contains: Optional[str] = None
    prompt_sha256: Optional[str] = None

    def specificity(self) -> int:
        return sum(
            1 for v in (self.agent_id, self.tick, self.contains, self.prompt_sha256) if v is not None
        )

    def matches(self, prompt: str, meta: dict) -> bool:
        if self.template_id != meta["template_id"]:
            return False
        if self.agent_id is not None and self.agent_id != meta["agent_id"]:
            return False
        if self.tick is not None and self.tick != meta["tick"]:
            return False
        if self.contains is not None and self.contains not in prompt:
            return False
        if self.prompt_sha256 is not None:
            if self.prompt_sha256 != hashlib.sha256(prompt.encode("utf-8")).hexdigest():
                return False
        return True


@dataclass
class Script:
    rules: list[ScriptRule] = field(default_factory=list)
    defaults: dict[str, str] = field(default_factory=dict)
    embeddings: dict[str, tuple[float, ...]] = field(default_factory=dict)
    embedding_dimension: int = SCRIPTED_EMBEDDING_DIM

    @classmethod
    def from_json(cls, document: str | dict) -> "Script":
        if isinstance(document, str):
            document = json.loads(document)
        rules = [
            ScriptRule(
                response=raw["response"],
                template_id=raw["template_id"],
                agent_id=raw.get("agent_id"),
                tick=raw.get("tick"),
                contains=raw.get("contains"),
                prompt_sha256=raw.get("prompt_sha256"),
            )
            for raw in document.get("rules", [])
        ]
        embeddings = {
            text: tuple(float(v) for v in vec)
            for text, vec in document.get("embeddings", {}).items()
        }
        return cls(
            rules=rules,
            defaults=dict(document.get("defaults", {})),
            embeddings=embeddings,
            embedding_dimension=int(document.get("embedding_dimension", SCRIPTED_EMBEDDING_DIM)),
        )

    @classmethod
    def load(cls, path: str) -> "Script":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))


class ScriptedProvider(Provider):
    """Pure function from request identity to response text.

    The most specific matching rule wins; ties go to file order. Unmatched
    requests fall back to the script's per-template defaults, then to the
    built-in defaults (conservative no-action answers).

    ``delay_ms`` pads each completion, keeping a demo run observable in
    real time (scripted runs otherwise finish in milliseconds).
    """

    def __init__(self, script: Optional[Script] = None, delay_ms: float = 0.0):
        super().__init__()
        self.script = script or Script()
        self.delay_ms = delay_ms

    def _complete(self, prompt: str, meta: dict) -> tuple[str, float]:
        if self.delay_ms > 0:
            time.sleep(self.delay_ms / 1000.0)
        best: Optional[ScriptRule] = None
        for rule in self.script.rules:
            if rule.matches(prompt, meta):
                if best is None or rule.specificity() > best.specificity():
                    best = rule
        if best is not None:
            return best.response, 0.0
        template_id = meta["template_id"]
        if template_id in self.script.defaults:
            return self.script.defaults[template_id], 0.0
        if template_id in BUILTIN_DEFAULTS:
            return BUILTIN_DEFAULTS[template_id], 0.0
        raise ProviderUnavailable(f"no scripted response for template {template_id!r}")

    def _embed(self, text: str) -> tuple[Sequence[float], float]:
        if text in self.script.embeddings:
            return self.script.embeddings[text], 0.0
        return hash_embedding(text, self.script.embedding_dimension), 0.0


# -- replay --------------------------------------------------------------------


class ReplayProvider(Provider):
    """Serves a recorded transcript back, without network access.

    Responses are keyed by request hash and consumed in recorded order, so
    repeated identical prompts replay exactly as they happened. A request
    whose hash was never recorded (or is over-consumed) is a divergence.
    """

    def __init__(self, transcript_lines: Sequence[dict]):
        super().__init__()
        self._completions: dict[str, deque[str]] = {}
        self._embeddings: dict[str, Embedding] = {}
        for entry in transcript_lines:
            if entry.get("kind") == "completion":
                self._completions.setdefault(entry["hash"], deque()).append(entry["response"])
            elif entry.get("kind") == "embedding":
                self._embeddings[entry["text"]] = tuple(float(v) for v in entry["vector"])

    @classmethod
    def from_file(cls, path: str) -> "ReplayProvider":
        lines: list[dict] = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    lines.append(json.loads(line))
        return cls(lines)

    def _complete(self, prompt: str, meta: dict) -> tuple[str, float]:
        key = request_hash(meta["template_id"], prompt)
        queue = self._completions.get(key)
        if not queue:
            raise ProviderUnavailable(
                f"transcript has no remaining response for template "
                f"{meta['template_id']!r} (hash {key[:12]}…)",
                code="REPLAY_MISS",
            )
        return queue.popleft(), 0.0

    def _embed(self, text: str) -> tuple[Sequence[float], float]:
        if text not in self._embeddings:
            raise ProviderUnavailable(
                f"transcript has no embedding for text {text[:60]!r}", code="REPLAY_MISS"
            )
        return self._embeddings[text], 0.0


# -- live ----------------------------------------------------------------------


class LiveProvider(Provider):
    """HTTP chat-completion backend (OpenAI-compatible wire shape)."""

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        super().__init__()
        self.config = config
        self._client = httpx.Client(timeout=config.request_timeout, transport=transport)
        self._min_interval = 60.0 / config.rate_limit
        self._last_request = 0.0

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict:
        token = os.environ.get(TOKEN_ENV_VAR, "")
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _throttle(self) -> None:
        now = time.monotonic()
        wait = self._min_interval - (now - self._last_request)
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()

    def _post(self, url: str, body: dict) -> dict:
        attempts = self.config.max_retries + 1
        last_error: Optional[Exception] = None
        for _ in range(attempts):
            self._throttle()
            try:
                response = self._client.post(url, json=body, headers=self._headers())
                if response.status_code >= 500:
                    last_error = ProviderUnavailable(f"backend returned {response.status_code}")
                    continue
                response.raise_for_status()
                return response.json()
            except (httpx.TransportError, httpx.TimeoutException) as exc:
                last_error = exc
        raise ProviderUnavailable(f"retries exhausted after {attempts} attempts: {last_error}")

    def _complete(self, prompt: str, meta: dict) -> tuple[str, float]:
        started = time.monotonic()
        payload = self._post(
            self.config.endpoint,
            {
                "model": self.config.model_name,
                "messages": [{"role": "user", "content": prompt}],
            },
        )
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProviderContractViolation("completion response missing choices[0].message.content")
        return text, (time.monotonic() - started) * 1000.0

    def _embed(self, text: str) -> tuple[Sequence[float], float]:
        started = time.monotonic()
        payload = self._post(
            self.config.embedding_endpoint or self.config.endpoint,
            {"model": self.config.embedding_model or self.config.model_name, "input": text},
        )
        try:
            vector = payload["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError):
            raise ProviderContractViolation("embedding response missing data[0].embedding")
        return vector, (time.monotonic() - started) * 1000.0


# -- payload parsing -------------------------------------------------------------


def extract_json(raw: str, required_fields: Sequence[str]) -> dict:
    """Locate the first well-formed JSON object in ``raw`` and check that
    every required field is present and string-valued.

    Models wrap JSON in prose or code fences; scanning for the first
    decodable object handles both.
    """
    decoder = json.JSONDecoder()
    index = raw.find("{")
    while index != -1:
        try:
            value, _ = decoder.raw_decode(raw, index)
        except ValueError:
            index = raw.find("{", index + 1)
            continue
        if isinstance(value, dict):
            missing = [f for f in required_fields if f not in value]
            if missing:
                raise MalformedPayload(f"payload missing required field(s) {missing}")
            wrong = [f for f in required_fields if not isinstance(value[f], str)]
            if wrong:
                raise MalformedPayload(f"field(s) {wrong} must be string-valued")
            return value
        index = raw.find("{", index + 1)
    raise MalformedPayload("no JSON object found in model output")


_INT_RE = re.compile(r"[-+]?\d+")


def score_from_text(raw: str, lo: int, hi: int) -> int:
    """Parse the first integer token; it must fall inside [lo, hi]."""
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    match = _INT_RE.search(raw)
    if match is None:
        raise MalformedPayload("no integer found in model output")
    value = int(match.group())
    if not lo <= value <= hi:
        raise MalformedPayload(f"rating {value} outside [{lo}, {hi}]")
    return value


# -- re-ask policy ---------------------------------------------------------------


def ask_json(
    provider: Provider,
    parts: PromptParts,
    required_fields: Sequence[str],
    *,
    template_id: str,
    agent_id: Optional[str] = None,
    tick: Optional[int] = None,
    validate: Optional[Callable[[dict], None]] = None,
) -> dict:
    """complete + extract_json with up to REPROMPT_LIMIT re-asks.

    ``validate`` may raise MalformedPayload to reject a structurally valid
    payload (e.g. an Answer that is neither yes nor no); rejection counts
    as a malformed response and re-asks like any other.
    """
    attempt_parts = parts
    last: Optional[MalformedPayload] = None
    for attempt in range(REPROMPT_LIMIT + 1):
        raw = provider.complete(attempt_parts, template_id=template_id, agent_id=agent_id, tick=tick)
        try:
            payload = extract_json(raw, required_fields)
            if validate is not None:
                validate(payload)
            return payload
        except MalformedPayload as exc:
            last = exc
            attempt_parts = attempt_parts.reprompted(JSON_REPROMPT_DIRECTIVE)
    raise last  # type: ignore[misc]


def ask_score(
    provider: Provider,
    parts: PromptParts,
    lo: int,
    hi: int,
    *,
    template_id: str,
    agent_id: Optional[str] = None,
    tick: Optional[int] = None,
) -> int:
    """complete + score_from_text with up to REPROMPT_LIMIT re-asks."""
    attempt_parts = parts
    last: Optional[MalformedPayload] = None
    for attempt in range(REPROMPT_LIMIT + 1):
        raw = provider.complete(attempt_parts, template_id=template_id, agent_id=agent_id, tick=tick)
        try:
            return score_from_text(raw, lo, hi)
        except MalformedPayload as exc:
            last = exc
            attempt_parts = attempt_parts.reprompted(NUMBER_REPROMPT_DIRECTIVE)
    raise last  # type: ignore[misc]
