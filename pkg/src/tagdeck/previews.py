"""Background pre-generation and caching of per-tag adaptive UI data:
drop-down alternatives, opposite-slider specs, and slide previews.

Freshness contract: a cache entry is only served if the revision it was
computed at equals the tag's current revision.  Reads are wait-free —
anything not fresh comes back as PENDING.
"""

from __future__ import annotations

import copy
import threading
import uuid
from dataclasses import dataclass, field

from .board import (
    TAG_DELETED,
    TAG_EDITED,
    TAG_MOVED,
    ConceptTag,
    TagBoard,
)
from .errors import BadInputError, NotFoundError

KIND_ALTERNATIVES = "alternatives"
KIND_SLIDER = "slider"
PREVIEW_KINDS = (KIND_ALTERNATIVES, KIND_SLIDER)

PENDING = object()
"""Sentinel returned when no fresh entry exists yet."""

SLIDER_STEPS = 5
DEFAULT_ALTERNATIVES_COUNT = 5
DEFAULT_AUTO_BUDGET = 8


@dataclass
class SliderStep:
    value: str
    description: str

    def to_dict(self) -> dict:
        return {"value": self.value, "description": self.description}


@dataclass
class SliderSpec:
    tag_id: str
    left_value: str
    right_value: str
    steps: list[SliderStep]
    current_step: int = 0

    def to_dict(self) -> dict:
        return {
            "tagId": self.tag_id,
            "leftValue": self.left_value,
            "rightValue": self.right_value,
            "steps": [s.to_dict() for s in self.steps],
            "currentStep": self.current_step,
        }


@dataclass
class AlternativeSet:
    tag_id: str
    tag_revision: int
    options: list[str]
    previews: dict[str, str | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tagId": self.tag_id,
            "tagRevision": self.tag_revision,
            "options": list(self.options),
            "previews": dict(self.previews),
        }


def build_slider_spec(tag: ConceptTag, payload: dict) -> SliderSpec:
    """Shape a model reply into a five-step spec with endpoints anchored to
    the tag's current value and the generated opposite, whatever the model
    said the endpoints were."""
    opposite = str(payload.get("oppositeValue", "")).strip()
    raw_steps = payload.get("steps")
    if not opposite:
        raise BadInputError("slider reply is missing oppositeValue")
    steps: list[SliderStep] = []
    if isinstance(raw_steps, list):
        for entry in raw_steps[:SLIDER_STEPS]:
            if isinstance(entry, dict):
                steps.append(
                    SliderStep(str(entry.get("value", "")), str(entry.get("description", "")))
                )
    while len(steps) < SLIDER_STEPS:
        steps.append(SliderStep("", ""))
    steps[0].value = tag.value
    steps[-1].value = opposite
    return SliderSpec(
        tag_id=tag.id, left_value=tag.value, right_value=opposite, steps=steps
    )


def build_alternative_set(tag: ConceptTag, payload: dict) -> AlternativeSet:
    options_raw = payload.get("alternatives")
    if not isinstance(options_raw, list):
        raise BadInputError("alternatives reply is missing the alternatives list")
    options = [str(o) for o in options_raw if str(o) and str(o) != tag.value]
    return AlternativeSet(
        tag_id=tag.id,
        tag_revision=tag.revision,
        options=options,
        previews={o: None for o in options},
    )


@dataclass
class PreviewJob:
    job_id: str
    tag_id: str
    kind: str
    revision: int
    status: str = "queued"  # queued | running | done | cancelled | discarded | failed
    error: str | None = None


@dataclass
class _CacheEntry:
    revision: int
    value: object


class PreviewEngine:
    """Per-board preview scheduler and cache.

    Generators are injected so the engine is agnostic to how slider specs,
    alternative sets, and slide previews are produced.  With an executor
    the jobs run on its workers; without one, callers (tests) drive jobs
    via ``run_next``/``drain``.
    """

    def __init__(
        self,
        board: TagBoard,
        generate_alternatives,  # (tag) -> AlternativeSet
        generate_slider,  # (tag) -> SliderSpec
        generate_preview=None,  # (tag, value) -> artifact, or None
        slide_context=None,  # () -> (slide dict, revision) or None
        executor=None,
        auto_budget: int = DEFAULT_AUTO_BUDGET,
    ):
        self.board = board
        self._generators = {
            KIND_ALTERNATIVES: generate_alternatives,
            KIND_SLIDER: generate_slider,
        }
        self.generate_preview = generate_preview
        self.slide_context = slide_context
        self.executor = executor
        self.auto_budget = auto_budget
        self._lock = threading.RLock()
        self._cache: dict[tuple[str, str], _CacheEntry] = {}
        self._jobs: dict[str, PreviewJob] = {}
        self._queue: list[str] = []
        self._preview_cache: dict[tuple[str, str, int], object] = {}
        board.listeners.append(self._on_board_event)

    # -- board events ------------------------------------------------------

    def _on_board_event(self, event: str, tag_id: str) -> None:
        if event in (TAG_EDITED, TAG_MOVED):
            self.invalidate(tag_id)
        elif event == TAG_DELETED:
            self.invalidate(tag_id)
            self.cancel_for_tag(tag_id)

    # -- scheduling --------------------------------------------------------

    def schedule(self, tag_id: str, kinds=PREVIEW_KINDS) -> list[str]:
        """Queue one job per kind unless a fresh entry or an in-flight job
        for the same (tag, kind) already covers it."""
        tag = self._tag(tag_id)
        if tag.group is None:
            raise BadInputError("previews are only generated for active tags")
        scheduled: list[str] = []
        with self._lock:
            for kind in kinds:
                entry = self._cache.get((tag_id, kind))
                if entry is not None and entry.revision == tag.revision:
                    continue
                if any(
                    j.tag_id == tag_id and j.kind == kind and j.status in ("queued", "running")
                    for j in self._jobs.values()
                ):
                    continue  # coalesce
                job = PreviewJob(
                    job_id="pv-" + uuid.uuid4().hex[:10],
                    tag_id=tag_id,
                    kind=kind,
                    revision=tag.revision,
                )
                self._jobs[job.job_id] = job
                self._queue.append(job.job_id)
                scheduled.append(job.job_id)
        if self.executor is not None:
            for job_id in scheduled:
                self.executor.submit(self._run, job_id)
        return scheduled

    def auto_schedule_board(self) -> list[str]:
        """Schedule previews for at most the first ``auto_budget`` active
        concept tags; the rest stay on demand (cost guard)."""
        scheduled: list[str] = []
        budget = self.auto_budget
        for tags in self.board.active_tags_by_group().values():
            for tag in tags:
                if budget <= 0:
                    return scheduled
                if isinstance(tag, ConceptTag):
                    scheduled.extend(self.schedule(tag.id))
                    budget -= 1
        return scheduled

    # -- job execution -----------------------------------------------------

    def _run(self, job_id: str) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None or job.status != "queued":
                return
            job.status = "running"
            if job_id in self._queue:
                self._queue.remove(job_id)
        try:
            tag = self._tag(job.tag_id)
            value = self._generators[job.kind](tag)
        except Exception as exc:  # noqa: BLE001 - job boundary
            with self._lock:
                if job.status == "running":
                    job.status = "failed"
                    job.error = str(exc)
            return
        with self._lock:
            if job.status != "running":
                return  # cancelled mid-flight; result dropped
            current = self.board.tags.get(job.tag_id)
            if current is None or current.revision != job.revision:
                job.status = "discarded"  # stale result, never cached
                return
            self._cache[(job.tag_id, job.kind)] = _CacheEntry(job.revision, value)
            job.status = "done"

    def run_next(self) -> bool:
        """Execute one queued job inline; returns False when idle."""
        with self._lock:
            if not self._queue:
                return False
            job_id = self._queue[0]
        self._run(job_id)
        return True

    def drain(self) -> None:
        while self.run_next():
            pass

    # -- serving -----------------------------------------------------------

    def _tag(self, tag_id: str):
        tag = self.board.tags.get(tag_id)
        if tag is None:
            raise NotFoundError(f"unknown tag {tag_id!r}")
        return tag

    def _serve(self, tag_id: str, kind: str):
        tag = self._tag(tag_id)
        with self._lock:
            entry = self._cache.get((tag_id, kind))
            if entry is not None and entry.revision == tag.revision:
                return entry.value
        return PENDING

    def get_alternatives(self, tag_id: str):
        return self._serve(tag_id, KIND_ALTERNATIVES)

    def get_slider(self, tag_id: str):
        return self._serve(tag_id, KIND_SLIDER)

    def preview_for_value(self, tag_id: str, value: str):
        """Render (and memoize) a single-slide preview with the tag's value
        overridden. Needs a current slide context and a preview generator."""
        tag = self._tag(tag_id)
        context = self.slide_context() if self.slide_context else None
        if context is None or self.generate_preview is None:
            raise BadInputError("no slide context yet; previews unavailable")
        slide, slide_revision = context
        key = (tag_id, value, slide_revision)
        with self._lock:
            if key in self._preview_cache:
                return self._preview_cache[key]
        override = copy.copy(tag)
        override.value = value
        artifact = self.generate_preview(override, slide)
        with self._lock:
            self._preview_cache[key] = artifact
        return artifact

    # -- invalidation ------------------------------------------------------

    def invalidate(self, tag_id: str) -> None:
        """Drop cached entries and cancel pending work for a tag. No-op for
        unknown tags."""
        with self._lock:
            for kind in PREVIEW_KINDS:
                self._cache.pop((tag_id, kind), None)
        self.cancel_for_tag(tag_id)

    def cancel_for_tag(self, tag_id: str) -> int:
        """Cancel every queued or running job for a tag; returns the count."""
        cancelled = 0
        with self._lock:
            for job in self._jobs.values():
                if job.tag_id == tag_id and job.status in ("queued", "running"):
                    job.status = "cancelled"
                    if job.job_id in self._queue:
                        self._queue.remove(job.job_id)
                    cancelled += 1
        return cancelled

    # -- introspection (metrics endpoint / tests) --------------------------

    def jobs(self) -> list[PreviewJob]:
        with self._lock:
            return list(self._jobs.values())

    def metrics(self) -> dict:
        with self._lock:
            states: dict[str, int] = {}
            for job in self._jobs.values():
                states[job.status] = states.get(job.status, 0) + 1
            return {
                "cacheEntries": len(self._cache),
                "previewCacheEntries": len(self._preview_cache),
                "jobs": states,
                "queued": len(self._queue),
            }
