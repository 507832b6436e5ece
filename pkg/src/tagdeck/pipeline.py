"""Orchestration of the generative flows: suggestions, outline, deck, text
and slide grounding, slide variations, and style propagation.

All flows go through the completion backend, so under a replay backend
every operation here is a deterministic function of its inputs.  Board
state is only ever mutated through tag-board operations.
"""

from __future__ import annotations

import json
import math
import uuid
from dataclasses import dataclass, field

from . import prompts
from .artifacts import Outline, SlideDeck, parse_outline, restyle_deck, validate_deck
from .board import ConceptTag, Group, Position, Tag, TagBoard
from .errors import BadInputError, ConflictError, MalformedReplyError, NotFoundError
from .gateway import (
    CompletionBackend,
    CompletionRequest,
    complete_json,
    parse_grounding,
    parse_suggestions,
)

JOB_KINDS = ("suggestions", "outline", "deck", "textGrounding", "slideGrounding", "slideVariation")


@dataclass
class GenerationJob:
    job_id: str
    kind: str
    input_revision: int
    status: str = "queued"  # queued | running | done | failed
    result: object = None
    error: str | None = None
    stale: bool = False

    def to_dict(self) -> dict:
        return {
            "jobId": self.job_id,
            "kind": self.kind,
            "inputRevision": self.input_revision,
            "status": self.status,
            "error": self.error,
            "stale": self.stale,
        }


@dataclass
class ScopedSlideSession:
    """Single-slide steering scope, seeded by grounding the slide.

    Board-level tags are deliberately not injected; the scoped board starts
    from the grounding result only.
    """

    session_id: str
    parent_deck_id: str
    parent_deck_revision: int
    slide_number: int
    scoped_board: TagBoard
    mode: str  # image | json
    flagged_groups: list[str] = field(default_factory=list)
    variations: list[dict] = field(default_factory=list)
    status: str = "open"


def _bundle_to_request(bundle: prompts.PromptBundle, suffix: str = "") -> CompletionRequest:
    user = bundle.user_context + suffix
    return CompletionRequest(
        system_prompt=bundle.system_prompt,
        user_message=user,
        attachments=bundle.attachments,
        purpose=bundle.purpose,
    )


def _ring_position(group_geometry, index: int, total: int, inside: bool) -> Position:
    """Spread tags around (inside) or just past (outside) a group circle."""
    angle = 2 * math.pi * index / max(total, 1)
    radius = group_geometry.radius * 0.55 if inside else group_geometry.radius + 80.0
    return Position(
        round(group_geometry.center.x + radius * math.cos(angle), 2),
        round(group_geometry.center.y + radius * math.sin(angle), 2),
    )


def _float_position(board: TagBoard, group_geometry, index: int, total: int) -> Position:
    """Outside ring position, nudged outward until it clears every circle
    (the ring around one group can otherwise land inside a neighbour)."""
    angle = 2 * math.pi * index / max(total, 1)
    radius = group_geometry.radius + 80.0
    while True:
        position = Position(
            round(group_geometry.center.x + radius * math.cos(angle), 2),
            round(group_geometry.center.y + radius * math.sin(angle), 2),
        )
        if board.group_for_position(position) is None:
            return position
        radius += 60.0


class Engine:
    """Holds backend + artifact registries and runs the generative flows."""

    def __init__(self, backend: CompletionBackend, rasterizer=None):
        self.backend = backend
        self.rasterizer = rasterizer  # callable: slide html -> png bytes, optional
        self.boards: dict[str, TagBoard] = {}
        self.outlines: dict[str, Outline] = {}
        self.decks: dict[str, SlideDeck] = {}
        self.assets: dict[str, object] = {}  # docId/assetId -> ingested object
        self.sessions: dict[str, ScopedSlideSession] = {}

    # -- board registry ----------------------------------------------------

    def new_board(self) -> TagBoard:
        board = TagBoard()
        self.boards[board.board_id] = board
        return board

    def get_board(self, board_id: str) -> TagBoard:
        try:
            return self.boards[board_id]
        except KeyError:
            raise NotFoundError(f"unknown board {board_id!r}") from None

    # -- generative flows --------------------------------------------------

    def request_suggestions(self, board: TagBoard) -> list[Tag]:
        """Ask for 7 concepts per bucket and float them outside the group
        circles; duplicates of already-active (label, value) pairs are
        dropped."""
        bundle = prompts.build_suggestion_prompt(board, self.assets)
        parsed = parse_suggestions(complete_json(self.backend, _bundle_to_request(bundle)))
        active_pairs = {
            (t.label, t.value)
            for tags in board.active_tags_by_group().values()
            for t in tags
            if isinstance(t, ConceptTag)
        }
        created: list[Tag] = []
        for group in Group:
            geometry = board.groups[group]
            fresh = [p for p in parsed[group] if p not in active_pairs]
            for i, (label, value) in enumerate(fresh):
                created.append(
                    board.create_tag(
                        label,
                        value,
                        group=None,
                        position=_float_position(board, geometry, i, len(fresh)),
                        origin="suggested",
                    )
                )
        return created

    def generate_outline(self, board: TagBoard) -> Outline:
        bundle = prompts.build_outline_prompt(board, self.assets)
        raw = self.backend.complete(_bundle_to_request(bundle))
        outline = parse_outline(raw.text)
        outline_id = board.outline_ref or ("out-" + uuid.uuid4().hex[:10])
        self.outlines[outline_id] = outline
        board.outline_ref = outline_id
        return outline

    def set_outline(self, board: TagBoard, markdown: str) -> Outline:
        """Manual outline edits are first-class and survive deck generation."""
        outline = parse_outline(markdown)
        outline_id = board.outline_ref or ("out-" + uuid.uuid4().hex[:10])
        previous = self.outlines.get(outline_id)
        outline.revision = (previous.revision + 1) if previous else 0
        self.outlines[outline_id] = outline
        board.outline_ref = outline_id
        return outline

    def generate_deck(
        self,
        board: TagBoard,
        outline: Outline | None = None,
        template: list | None = None,
    ) -> SlideDeck:
        """Outline + active tags (+ optional template) -> validated deck.
        Violations are attached to the result, never fatal; only a
        non-array reply fails the job (raw reply retained)."""
        if outline is None:
            if not board.outline_ref or board.outline_ref not in self.outlines:
                raise BadInputError("board has no outline; generate or set one first")
            outline = self.outlines[board.outline_ref]
        bundle = prompts.build_deck_prompt(outline.markdown, board, template, self.assets)
        payload = complete_json(self.backend, _bundle_to_request(bundle))
        if not isinstance(payload, list):
            raise MalformedReplyError(
                "deck reply is not a JSON array", raw=json.dumps(payload)
            )
        deck = SlideDeck(slides=payload)
        deck.violations = validate_deck(payload)
        self.decks[deck.deck_id] = deck
        board.deck_ref = deck.deck_id
        return deck

    def ground_from_text(self, board: TagBoard, free_text: str) -> list[Tag]:
        """Decompose a free-text prompt into tags placed inside their
        buckets — active immediately, unlike suggestions."""
        bundle = prompts.build_text_grounding_prompt(free_text)
        parsed = parse_suggestions(complete_json(self.backend, _bundle_to_request(bundle)))
        created: list[Tag] = []
        for group in Group:
            geometry = board.groups[group]
            entries = [p for p in parsed[group] if p[1]]
            for i, (label, value) in enumerate(entries):
                created.append(
                    board.create_tag(
                        label,
                        value,
                        group=group,
                        position=_ring_position(geometry, i, len(entries), inside=True),
                        origin="grounded",
                    )
                )
        return created

    # -- slide sessions ----------------------------------------------------

    def get_deck(self, deck_id: str) -> SlideDeck:
        try:
            return self.decks[deck_id]
        except KeyError:
            raise NotFoundError(f"unknown deck {deck_id!r}") from None

    def open_slide_session(self, deck: SlideDeck, slide_number: int) -> ScopedSlideSession:
        """Ground a slide into a scoped board. Primary path rasterizes the
        rendered slide; without a rasterizer the slide JSON itself is the
        grounding input (deterministic fallback)."""
        slide = deck.slide(slide_number)
        if self.rasterizer is not None:
            from .artifacts import render_slide

            image = self.rasterizer(render_slide(slide))
            bundle = prompts.build_slide_grounding_prompt(image)
            mode = "image"
        else:
            bundle = prompts.build_slide_grounding_text_prompt(slide)
            mode = "json"
        parsed, flagged = parse_grounding(
            complete_json(self.backend, _bundle_to_request(bundle))
        )
        scoped = TagBoard()
        for group in Group:
            geometry = scoped.groups[group]
            entries = [p for p in parsed[group] if p[1]]
            for i, (label, value) in enumerate(entries):
                scoped.create_tag(
                    label,
                    value,
                    group=group,
                    position=_ring_position(geometry, i, len(entries), inside=True),
                    origin="grounded",
                )
        session = ScopedSlideSession(
            session_id="sess-" + uuid.uuid4().hex[:10],
            parent_deck_id=deck.deck_id,
            parent_deck_revision=deck.revision,
            slide_number=slide_number,
            scoped_board=scoped,
            mode=mode,
            flagged_groups=[g.value for g in sorted(flagged, key=lambda g: g.value)],
        )
        self.sessions[session.session_id] = session
        return session

    @staticmethod
    def _slide_outline(slide: dict) -> str:
        content = slide.get("content", {})
        title = content.get("title") or f"Slide {slide.get('slideNumber', '')}"
        lines = [f"## {title}"]
        if isinstance(content.get("list"), list):
            lines += [f"- {item}" for item in content["list"]]
        elif isinstance(content.get("paragraph"), str):
            lines.append(content["paragraph"])
        return "\n".join(lines) + "\n"

    def generate_slide_variations(
        self, session: ScopedSlideSession, count: int = 1
    ) -> list[dict]:
        """Regenerate one slide ``count`` times under the scoped board."""
        deck = self.get_deck(session.parent_deck_id)
        slide = deck.slide(session.slide_number)
        outline_md = self._slide_outline(slide)
        variations: list[dict] = []
        for i in range(count):
            bundle = prompts.build_deck_prompt(outline_md, session.scoped_board)
            request = _bundle_to_request(bundle, suffix=f"\n\nVARIATION: {i + 1}")
            payload = complete_json(self.backend, request)
            if isinstance(payload, list):
                if not payload:
                    raise MalformedReplyError("variation reply is an empty array")
                candidate = payload[0]
            elif isinstance(payload, dict):
                candidate = payload
            else:
                raise MalformedReplyError("variation reply is not a slide object")
            candidate = dict(candidate)
            candidate["slideNumber"] = session.slide_number
            probe = dict(candidate, slideNumber=1)
            candidate["violations"] = [v.to_dict() for v in validate_deck([probe])]
            variations.append(candidate)
        session.variations = variations
        return variations

    def _variation(self, session: ScopedSlideSession, index: int) -> dict:
        if not 0 <= index < len(session.variations):
            raise BadInputError(
                f"variation index {index} out of range 0..{len(session.variations) - 1}"
            )
        slide = dict(session.variations[index])
        slide.pop("violations", None)
        return slide

    def _check_fresh(self, deck: SlideDeck, session: ScopedSlideSession) -> None:
        if deck.revision != session.parent_deck_revision:
            raise ConflictError(
                f"deck {deck.deck_id} is at revision {deck.revision}, session saw "
                f"{session.parent_deck_revision}; refresh the session"
            )

    def apply_variation(
        self, deck: SlideDeck, session: ScopedSlideSession, index: int
    ) -> SlideDeck:
        """Accept one variation into the deck: exactly one slide changes."""
        self._check_fresh(deck, session)
        variation = self._variation(session, index)
        slides = [
            variation if s.get("slideNumber") == session.slide_number else s
            for s in deck.slides
        ]
        updated = SlideDeck(slides=slides, deck_id=deck.deck_id, revision=deck.revision + 1)
        updated.violations = validate_deck(slides)
        self.decks[deck.deck_id] = updated
        return updated

    def apply_style_to_deck(
        self, deck: SlideDeck, session: ScopedSlideSession, index: int
    ) -> SlideDeck:
        """Accept a variation, then propagate its theme to every slide."""
        updated = self.apply_variation(deck, session, index)
        restyled = restyle_deck(updated, updated.slide(session.slide_number))
        restyled.violations = validate_deck(restyled.slides)
        self.decks[deck.deck_id] = restyled
        return restyled

    # -- tag widget generation (used by the preview engine) ----------------

    def fetch_slider(self, board: TagBoard, tag: ConceptTag) -> dict:
        bundle = prompts.build_slider_prompt(tag, board, self.assets)
        return complete_json(self.backend, _bundle_to_request(bundle))

    def fetch_alternatives(self, board: TagBoard, tag: ConceptTag) -> dict:
        bundle = prompts.build_alternatives_prompt(tag, board, self.assets)
        return complete_json(self.backend, _bundle_to_request(bundle))
