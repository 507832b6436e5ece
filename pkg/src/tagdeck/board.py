"""Steering-board domain model: tags, the three fixed groups, board state.

The board is the single mutation path for tag state.  Every mutation bumps
``board_revision`` (optimistic-concurrency token for the HTTP API) and the
touched tag's own ``revision`` (freshness token for the preview cache).
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable

from .errors import BadInputError, NotFoundError

SCHEMA_VERSION = 1


class Group(str, Enum):
    """The three fixed tag groups. Names are closed: no custom groups."""

    NARRATIVE = "Narrative"
    VISUAL_STYLE = "VisualStyle"
    CONTENT_SOURCES = "ContentSources"

    @property
    def display(self) -> str:
        return _DISPLAY[self]


_DISPLAY = {
    Group.NARRATIVE: "Narrative",
    Group.VISUAL_STYLE: "Visual Style",
    Group.CONTENT_SOURCES: "Content Sources",
}

# LLM replies key buckets by display name; accept both spellings.
GROUP_BY_NAME = {g.value: g for g in Group} | {g.display: g for g in Group}


def parse_attr_value(text: str) -> tuple[str, str]:
    """Split ``label:value`` on the first colon.

    No colon means the whole text is a value with an empty label.  Both
    parts are stripped of surrounding whitespace.  Total: never raises.
    """
    head, sep, tail = text.partition(":")
    if not sep:
        return "", text.strip()
    return head.strip(), tail.strip()


@dataclass(frozen=True)
class Position:
    x: float = 0.0
    y: float = 0.0

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}

    @staticmethod
    def from_dict(d: dict) -> "Position":
        return Position(float(d.get("x", 0.0)), float(d.get("y", 0.0)))


@dataclass
class ConceptTag:
    """A ``[label:value]`` micro-prompt. Label may be empty; an active tag
    must carry a non-empty value."""

    id: str
    label: str
    value: str
    group: Group | None = None
    position: Position = field(default_factory=Position)
    origin: str = "user"  # user | suggested | grounded
    revision: int = 0

    kind = "concept"

    @property
    def active(self) -> bool:
        return self.group is not None

    def prompt_text(self) -> str:
        """Render as ``label:value``, or bare value when label-less."""
        return f"{self.label}:{self.value}" if self.label else self.value

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": "concept",
            "label": self.label,
            "value": self.value,
            "group": self.group.value if self.group else None,
            "position": self.position.to_dict(),
            "origin": self.origin,
            "revision": self.revision,
        }


@dataclass
class ReferenceTag:
    """A tag anchoring an external document, image, or deck template."""

    id: str
    ref_kind: str  # document | image | deckTemplate
    source: str  # asset id or URL
    selection: list[str] | None = None  # documents only: selected section ids
    group: Group | None = None
    position: Position = field(default_factory=Position)
    origin: str = "user"
    revision: int = 0

    @property
    def kind(self) -> str:
        return self.ref_kind

    @property
    def active(self) -> bool:
        return self.group is not None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.ref_kind,
            "source": self.source,
            "selection": list(self.selection) if self.selection is not None else None,
            "group": self.group.value if self.group else None,
            "position": self.position.to_dict(),
            "origin": self.origin,
            "revision": self.revision,
        }


Tag = ConceptTag | ReferenceTag

REFERENCE_KINDS = ("document", "image", "deckTemplate")


@dataclass(frozen=True)
class TagGroup:
    """Canvas geometry of one group circle."""

    name: Group
    center: Position
    radius: float

    def contains(self, p: Position) -> bool:
        return (p.x - self.center.x) ** 2 + (p.y - self.center.y) ** 2 <= self.radius**2

    def to_dict(self) -> dict:
        return {"name": self.name.value, "center": self.center.to_dict(), "radius": self.radius}


def default_groups() -> dict[Group, TagGroup]:
    return {
        Group.NARRATIVE: TagGroup(Group.NARRATIVE, Position(-300.0, 0.0), 220.0),
        Group.VISUAL_STYLE: TagGroup(Group.VISUAL_STYLE, Position(300.0, 0.0), 220.0),
        Group.CONTENT_SOURCES: TagGroup(Group.CONTENT_SOURCES, Position(0.0, 380.0), 220.0),
    }


# Events emitted to listeners: (event, tag_id)
TAG_EDITED = "tag_edited"
TAG_MOVED = "tag_moved"
TAG_DELETED = "tag_deleted"

EventListener = Callable[[str, str], None]


class TagBoard:
    """Mutable steering-board state machine.

    Mutations for one board must be serialized by the owning session;
    reads can run concurrently against a snapshot (``to_dict``).
    """

    def __init__(self, board_id: str | None = None):
        self.board_id = board_id or uuid.uuid4().hex[:12]
        self.groups = default_groups()
        self.tags: dict[str, Tag] = {}  # insertion-ordered
        self.outline_ref: str | None = None
        self.deck_ref: str | None = None
        self.board_revision = 0
        self.listeners: list[EventListener] = []
        self.load_warnings: list[str] = []

    # -- internals ---------------------------------------------------------

    def _bump(self) -> None:
        self.board_revision += 1

    def _emit(self, event: str, tag_id: str) -> None:
        for listener in self.listeners:
            listener(event, tag_id)

    def _get(self, tag_id: str) -> Tag:
        try:
            return self.tags[tag_id]
        except KeyError:
            raise NotFoundError(f"unknown tag {tag_id!r}") from None

    @staticmethod
    def _new_id(existing: Iterable[str]) -> str:
        taken = set(existing)
        while True:
            candidate = uuid.uuid4().hex[:12]
            if candidate not in taken:
                return candidate

    # -- mutations ---------------------------------------------------------

    def create_tag(
        self,
        label: str,
        value: str,
        group: Group | str | None = None,
        position: Position | None = None,
        origin: str = "user",
    ) -> ConceptTag:
        group = Group(group) if group is not None else None
        if group is not None and not value:
            raise BadInputError("an active tag needs a non-empty value")
        tag = ConceptTag(
            id=self._new_id(self.tags),
            label=label,
            value=value,
            group=group,
            position=position or Position(),
            origin=origin,
        )
        self.tags[tag.id] = tag
        self._bump()
        return tag

    def create_reference_tag(
        self,
        ref_kind: str,
        source: str,
        group: Group | str | None = None,
        position: Position | None = None,
        origin: str = "user",
        selection: list[str] | None = None,
    ) -> ReferenceTag:
        if ref_kind not in REFERENCE_KINDS:
            raise BadInputError(f"unknown reference kind {ref_kind!r}")
        tag = ReferenceTag(
            id=self._new_id(self.tags),
            ref_kind=ref_kind,
            source=source,
            selection=selection,
            group=Group(group) if group is not None else None,
            position=position or Position(),
            origin=origin,
        )
        self.tags[tag.id] = tag
        self._bump()
        return tag

    def move_tag(
        self, tag_id: str, position: Position, group: Group | str | None = None
    ) -> Tag:
        """Reposition a tag; crossing a group boundary (de)activates it."""
        tag = self._get(tag_id)
        group = Group(group) if group is not None else None
        if group is not None and isinstance(tag, ConceptTag) and not tag.value:
            raise BadInputError("cannot activate a tag with an empty value")
        tag.position = position
        tag.group = group
        tag.revision += 1
        self._bump()
        self._emit(TAG_MOVED, tag_id)
        return tag

    def edit_tag(self, tag_id: str, label: str, value: str) -> ConceptTag:
        """Replace label/value verbatim; always bumps revision and emits an
        invalidation event, even when the text is unchanged."""
        tag = self._get(tag_id)
        if not isinstance(tag, ConceptTag):
            raise BadInputError("only concept tags carry label/value")
        tag.label = label
        tag.value = value
        tag.revision += 1
        self._bump()
        self._emit(TAG_EDITED, tag_id)
        return tag

    def select_sections(self, tag_id: str, section_ids: list[str]) -> ReferenceTag:
        tag = self._get(tag_id)
        if not isinstance(tag, ReferenceTag) or tag.ref_kind != "document":
            raise BadInputError("section selection applies to document tags only")
        tag.selection = list(section_ids)
        tag.revision += 1
        self._bump()
        self._emit(TAG_EDITED, tag_id)
        return tag

    def delete_tag(self, tag_id: str) -> None:
        self._get(tag_id)
        del self.tags[tag_id]
        self._bump()
        self._emit(TAG_DELETED, tag_id)

    # -- queries -----------------------------------------------------------

    def active_tags_by_group(self) -> dict[Group, list[Tag]]:
        """Active tags per group, insertion-ordered; floating tags excluded.
        All three groups are always present, possibly empty."""
        out: dict[Group, list[Tag]] = {g: [] for g in Group}
        for tag in self.tags.values():
            if tag.group is not None:
                out[tag.group].append(tag)
        return out

    def floating_tags(self) -> list[Tag]:
        return [t for t in self.tags.values() if t.group is None]

    def group_for_position(self, position: Position) -> Group | None:
        """Hit test: inside iff within radius of a group circle center."""
        for g in self.groups.values():
            if g.contains(position):
                return g.name
        return None

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "boardId": self.board_id,
            "groups": [self.groups[g].to_dict() for g in Group],
            "tags": [t.to_dict() for t in self.tags.values()],
            "outlineRef": self.outline_ref,
            "deckRef": self.deck_ref,
            "boardRevision": self.board_revision,
        }

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, TagBoard) and self.to_dict() == other.to_dict()


def _tag_from_dict(d: dict) -> Tag:
    group = Group(d["group"]) if d.get("group") else None
    position = Position.from_dict(d.get("position", {}))
    kind = d.get("kind", "concept")
    if kind == "concept":
        return ConceptTag(
            id=d["id"],
            label=d.get("label", ""),
            value=d.get("value", ""),
            group=group,
            position=position,
            origin=d.get("origin", "user"),
            revision=int(d.get("revision", 0)),
        )
    if kind in REFERENCE_KINDS:
        return ReferenceTag(
            id=d["id"],
            ref_kind=kind,
            source=d.get("source", ""),
            selection=d.get("selection"),
            group=group,
            position=position,
            origin=d.get("origin", "user"),
            revision=int(d.get("revision", 0)),
        )
    raise BadInputError(f"unknown tag kind {kind!r}")


def serialize_board(board: TagBoard) -> bytes:
    return json.dumps(board.to_dict(), ensure_ascii=False, indent=2).encode("utf-8")


def deserialize_board(data: bytes, known_assets: set[str] | None = None) -> TagBoard:
    """Parse a serialized board. Malformed input raises with a location;
    references to assets missing from ``known_assets`` are collected as
    warnings, not errors."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadInputError(f"malformed board file: {exc}") from exc
    if not isinstance(payload, dict):
        raise BadInputError("malformed board file: top-level value is not an object")
    version = payload.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise BadInputError(f"unsupported board schemaVersion {version!r}")

    board = TagBoard(board_id=payload.get("boardId"))
    for entry in payload.get("groups", []):
        try:
            name = Group(entry["name"])
        except (KeyError, ValueError) as exc:
            raise BadInputError(f"malformed board file: bad group entry {entry!r}") from exc
        board.groups[name] = TagGroup(
            name, Position.from_dict(entry.get("center", {})), float(entry.get("radius", 220.0))
        )
    for i, entry in enumerate(payload.get("tags", [])):
        try:
            tag = _tag_from_dict(entry)
        except (KeyError, ValueError, TypeError) as exc:
            raise BadInputError(f"malformed board file: tags[{i}]: {exc}") from exc
        if tag.id in board.tags:
            raise BadInputError(f"malformed board file: duplicate tag id {tag.id!r}")
        board.tags[tag.id] = tag
        if (
            known_assets is not None
            and isinstance(tag, ReferenceTag)
            and not tag.source.startswith(("http://", "https://", "url("))
            and tag.source not in known_assets
        ):
            board.load_warnings.append(f"tag {tag.id} references missing asset {tag.source!r}")
    board.outline_ref = payload.get("outlineRef")
    board.deck_ref = payload.get("deckRef")
    board.board_revision = int(payload.get("boardRevision", 0))
    return board
