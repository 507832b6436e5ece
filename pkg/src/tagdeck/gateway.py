"""Completion backends (live HTTP, record, replay) and defensive parsing
of model replies.

The replay backend is a pure function of the request's canonical hash,
which makes every generative flow deterministic and testable offline.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path
from typing import Any, Protocol

import httpx

from .board import GROUP_BY_NAME, Group, parse_attr_value
from .errors import BackendError, MalformedReplyError, ReplayMissError

DEFAULT_MODEL = "gpt-4o"
DEFAULT_TEMPERATURE = 0.7  # pinned so recorded fixtures stay coherent


@dataclass(frozen=True)
class CompletionRequest:
    system_prompt: str
    user_message: str
    attachments: tuple[str, ...] = field(default_factory=tuple)  # base64 images
    purpose: str = ""
    max_retries: int = 1

    def __post_init__(self):
        if not self.user_message and not self.attachments:
            raise BackendError("empty completion request")

    def canonical_hash(self) -> str:
        """Stable content hash; formatting-equivalent requests hash equal."""
        payload = json.dumps(
            {
                "systemPrompt": self.system_prompt,
                "userMessage": self.user_message,
                "attachments": list(self.attachments),
                "purpose": self.purpose,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class RawCompletion:
    text: str
    usage: dict | None = None
    latency: float = 0.0


class CompletionBackend(Protocol):
    mode: str

    def complete(self, request: CompletionRequest) -> RawCompletion: ...


class ReplayStore:
    """JSON file mapping request hash -> recorded response text."""

    def __init__(self, path: str | Path | None = None, entries: dict[str, str] | None = None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        if entries is not None:
            self.entries = dict(entries)
        elif self.path and self.path.exists():
            self.entries = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.entries = {}

    def get(self, request_hash: str) -> str | None:
        return self.entries.get(request_hash)

    def put(self, request_hash: str, text: str) -> None:
        with self._lock:
            self.entries[request_hash] = text
            if self.path:
                self.path.write_text(
                    json.dumps(self.entries, indent=2, ensure_ascii=False, sort_keys=True),
                    encoding="utf-8",
                )


class ReplayBackend:
    mode = "replay"

    def __init__(self, store: ReplayStore):
        self.store = store

    def complete(self, request: CompletionRequest) -> RawCompletion:
        request_hash = request.canonical_hash()
        text = self.store.get(request_hash)
        if text is None:
            raise ReplayMissError(request_hash)
        return RawCompletion(text=text)


class LiveBackend:
    """OpenAI-compatible chat-completions client."""

    mode = "live"

    def __init__(
        self,
        api_key: str,
        base_url: str = "https://api.openai.com/v1",
        model: str = DEFAULT_MODEL,
        temperature: float = DEFAULT_TEMPERATURE,
        max_inflight: int = 4,
        timeout: float = 120.0,
    ):
        if not api_key:
            raise BackendError("live backend requires an API key")
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self._gate = threading.Semaphore(max_inflight)

    def complete(self, request: CompletionRequest) -> RawCompletion:
        user_content: Any = request.user_message
        if request.attachments:
            user_content = [{"type": "text", "text": request.user_message}] + [
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/png;base64,{payload}"},
                }
                for payload in request.attachments
            ]
        body = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": user_content},
            ],
        }
        started = time.monotonic()
        with self._gate:
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers={"Authorization": f"Bearer {self.api_key}"},
                    timeout=self.timeout,
                )
                response.raise_for_status()
                payload = response.json()
            except (httpx.HTTPError, ValueError) as exc:
                raise BackendError(f"completion request failed: {exc}") from exc
        try:
            text = payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected completion response shape: {exc}") from exc
        return RawCompletion(
            text=text, usage=payload.get("usage"), latency=time.monotonic() - started
        )


class RecordBackend:
    """Live calls persisted to a replay store; replays hits when present so
    re-recording a session is idempotent."""

    mode = "record"

    def __init__(self, live: LiveBackend, store: ReplayStore):
        self.live = live
        self.store = store

    def complete(self, request: CompletionRequest) -> RawCompletion:
        request_hash = request.canonical_hash()
        cached = self.store.get(request_hash)
        if cached is not None:
            return RawCompletion(text=cached)
        result = self.live.complete(request)
        self.store.put(request_hash, result.text)
        return result


def complete(backend: CompletionBackend, request: CompletionRequest) -> RawCompletion:
    return backend.complete(request)


# ---------------------------------------------------------------------------
# Reply parsing

_FENCE_RE = re.compile(r"\A```[A-Za-z0-9_-]*\s*\n(.*)\n?```\s*\Z", re.DOTALL)

_REPAIR_INSTRUCTION = (
    "Your previous reply was not valid JSON. Return only valid JSON, with no "
    "Markdown wrapper code blocks and no commentary."
)


def extract_json(raw: str):
    """Parse a model reply as JSON, tolerating one wrapping code fence
    (with or without a language tag) and surrounding whitespace."""
    text = raw.strip()
    fenced = _FENCE_RE.match(text)
    if fenced:
        text = fenced.group(1).strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedReplyError(f"reply is not JSON: {exc}", raw=raw) from exc


def complete_json(backend: CompletionBackend, request: CompletionRequest):
    """Complete and parse, with one bounded repair retry on malformed JSON."""
    raw = backend.complete(request)
    try:
        return extract_json(raw.text)
    except MalformedReplyError:
        if request.max_retries < 1:
            raise
        retry = CompletionRequest(
            system_prompt=request.system_prompt,
            user_message=f"{request.user_message}\n\n{_REPAIR_INSTRUCTION}",
            attachments=request.attachments,
            purpose=request.purpose,
            max_retries=0,
        )
        return extract_json(backend.complete(retry).text)


def _parse_buckets(payload) -> dict[Group, list[tuple[str, str]]]:
    if not isinstance(payload, dict):
        raise MalformedReplyError(f"expected a JSON object, got {type(payload).__name__}")
    out: dict[Group, list[tuple[str, str]]] = {g: [] for g in Group}
    for key, entries in payload.items():
        group = GROUP_BY_NAME.get(key)
        if group is None:
            continue  # never invent groups outside the fixed three
        if not isinstance(entries, list):
            raise MalformedReplyError(f"bucket {key!r} is not a list")
        for entry in entries:
            out[group].append(parse_attr_value(str(entry)))
    return out


def parse_suggestions(payload) -> dict[Group, list[tuple[str, str]]]:
    """Bucketed ``label:value`` strings -> per-group (label, value) pairs.
    Missing buckets yield empty lists."""
    return _parse_buckets(payload)


GROUNDING_MIN, GROUNDING_MAX = 2, 6


def parse_grounding(payload) -> tuple[dict[Group, list[tuple[str, str]]], set[Group]]:
    """Like parse_suggestions, plus flags (not rejections) for buckets whose
    count falls outside the requested 2..6 range."""
    parsed = _parse_buckets(payload)
    flagged = {
        g
        for g, entries in parsed.items()
        if entries and not GROUNDING_MIN <= len(entries) <= GROUNDING_MAX
    }
    return parsed, flagged
