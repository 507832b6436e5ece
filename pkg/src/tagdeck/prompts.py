"""Prompt assembly: static system-prompt fixtures plus dynamic user context
built from board, outline, and slide state.

The system prompts live as plain-text files under ``fixtures/prompts`` and
are never mutated at runtime; golden tests pin their hashes.  All builders
are pure functions of their inputs.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .board import ConceptTag, Group, ReferenceTag, TagBoard
from .errors import BadInputError

PROMPTS_DIR = Path(__file__).parent / "fixtures" / "prompts"

PURPOSES = (
    "suggestions",
    "outline",
    "deck",
    "slideGrounding",
    "textGrounding",
    "sliderSpec",
    "alternatives",
)

_FIXTURE_FILES = {
    "suggestions": "suggestions.txt",
    "outline": "outline.txt",
    "deck": "deck.txt",
    "slideGrounding": "slide_grounding.txt",
    "textGrounding": "text_grounding.txt",
    "sliderSpec": "slider.txt",
    "alternatives": "alternatives.txt",
}


@lru_cache(maxsize=None)
def load_system_prompt(purpose: str) -> str:
    """Load the static system prompt for a purpose. Cached; read-only."""
    try:
        filename = _FIXTURE_FILES[purpose]
    except KeyError:
        raise BadInputError(f"unknown prompt purpose {purpose!r}") from None
    return (PROMPTS_DIR / filename).read_text(encoding="utf-8")


@dataclass(frozen=True)
class PromptBundle:
    system_prompt: str
    user_context: str
    purpose: str
    attachments: tuple[str, ...] = field(default_factory=tuple)  # base64 payloads


def _document_entry(tag: ReferenceTag, assets: dict | None) -> str:
    document = (assets or {}).get(tag.source)
    if document is None:
        return f"Document:{tag.source}"
    selected = tag.selection
    bodies = [
        s.body
        for s in document.sections
        if (selected is None or s.section_id in selected) and s.body
    ]
    entry = f"Document:{document.title}"
    if bodies:
        entry += " " + " ".join(bodies)
    return entry


def _tag_entry(tag, assets: dict | None) -> str | None:
    if isinstance(tag, ConceptTag):
        return tag.prompt_text()
    if tag.ref_kind == "image":
        return f"ImageUrl:{tag.source}"
    if tag.ref_kind == "document":
        return _document_entry(tag, assets)
    return None  # deck templates travel via the deck prompt's template block


def render_user_context(board: TagBoard, assets: dict | None = None) -> str:
    """Three lines, one per group in fixed order, each listing active tags
    as ``label:value`` joined by ", ". Label-less tags emit the bare value;
    image references emit ``ImageUrl:<url>``; documents inline their
    selected section text. Floating tags never appear."""
    active = board.active_tags_by_group()
    lines = []
    for group in (Group.NARRATIVE, Group.VISUAL_STYLE, Group.CONTENT_SOURCES):
        entries = [
            e for e in (_tag_entry(t, assets) for t in active[group]) if e is not None
        ]
        header = f"**{group.display}**"
        lines.append(f"{header} {', '.join(entries)}" if entries else header)
    return "\n".join(lines)


def build_suggestion_prompt(board: TagBoard, assets: dict | None = None) -> PromptBundle:
    return PromptBundle(
        system_prompt=load_system_prompt("suggestions"),
        user_context=render_user_context(board, assets),
        purpose="suggestions",
    )


def build_outline_prompt(board: TagBoard, assets: dict | None = None) -> PromptBundle:
    return PromptBundle(
        system_prompt=load_system_prompt("outline"),
        user_context=render_user_context(board, assets),
        purpose="outline",
    )


def build_deck_prompt(
    outline: str,
    board: TagBoard,
    template: list | None = None,
    assets: dict | None = None,
) -> PromptBundle:
    """Deck-generation bundle: outline + meta information + optional
    reference template JSON (embedded un-minified so the model can copy
    backgroundImage urls)."""
    if not outline.strip():
        raise BadInputError("deck generation needs a non-empty outline")
    user_context = (
        f"PRESENTATION OUTLINE:\n{outline}\n\n"
        f"META INFORMATION:\n{render_user_context(board, assets)}"
    )
    if template is not None:
        template_json = json.dumps(template, ensure_ascii=False, indent=2)
        user_context += f"\n\nREFERENCE SLIDE DECK TEMPLATE:\n{template_json}"
    return PromptBundle(
        system_prompt=load_system_prompt("deck"), user_context=user_context, purpose="deck"
    )


_IMAGE_MAGICS = (b"\x89PNG\r\n\x1a\n", b"\xff\xd8\xff", b"GIF8")


def build_slide_grounding_prompt(slide_image: bytes) -> PromptBundle:
    """Grounding bundle carrying exactly one base64 image attachment."""
    if not slide_image or not any(slide_image.startswith(m) for m in _IMAGE_MAGICS):
        raise BadInputError("slide image does not decode as PNG/JPEG/GIF")
    return PromptBundle(
        system_prompt=load_system_prompt("slideGrounding"),
        user_context="",
        purpose="slideGrounding",
        attachments=(base64.b64encode(slide_image).decode("ascii"),),
    )


def build_slide_grounding_text_prompt(slide_json: dict) -> PromptBundle:
    """Fallback grounding bundle when no rasterizer is available: the slide
    JSON stands in for the slide image."""
    return PromptBundle(
        system_prompt=load_system_prompt("slideGrounding"),
        user_context=json.dumps(slide_json, ensure_ascii=False, indent=2),
        purpose="slideGrounding",
    )


def build_text_grounding_prompt(free_text: str) -> PromptBundle:
    if not free_text.strip():
        raise BadInputError("text grounding needs non-empty input")
    return PromptBundle(
        system_prompt=load_system_prompt("textGrounding"),
        user_context=free_text,
        purpose="textGrounding",
    )


def _tag_context(tag: ConceptTag, board: TagBoard, assets: dict | None) -> str:
    if not tag.active:
        raise BadInputError("tag widgets apply to active tags only")
    return f"TAG: {tag.prompt_text()}\n\nBOARD CONTEXT:\n{render_user_context(board, assets)}"


def build_slider_prompt(
    tag: ConceptTag, board: TagBoard, assets: dict | None = None
) -> PromptBundle:
    return PromptBundle(
        system_prompt=load_system_prompt("sliderSpec"),
        user_context=_tag_context(tag, board, assets),
        purpose="sliderSpec",
    )


def build_alternatives_prompt(
    tag: ConceptTag, board: TagBoard, assets: dict | None = None
) -> PromptBundle:
    return PromptBundle(
        system_prompt=load_system_prompt("alternatives"),
        user_context=_tag_context(tag, board, assets),
        purpose="alternatives",
    )
