"""Single-file project persistence: board + outline + deck + assets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .artifacts import DeckTemplate, Outline, SlideDeck, parse_outline, validate_deck
from .board import TagBoard, deserialize_board, serialize_board
from .errors import BadInputError
from .ingest import ImageAsset, IngestedDocument

PROJECT_SCHEMA_VERSION = 1


def _asset_to_dict(asset) -> dict:
    if isinstance(asset, IngestedDocument):
        return {"type": "document", **asset.to_dict()}
    if isinstance(asset, ImageAsset):
        return {"type": "image", **asset.to_dict()}
    if isinstance(asset, DeckTemplate):
        return {
            "type": "deckTemplate",
            "themes": asset.themes,
            "backgroundUrls": asset.background_urls,
            "deckJson": asset.deck_json,
        }
    raise BadInputError(f"unknown asset type {type(asset).__name__}")


def _asset_from_dict(d: dict):
    kind = d.get("type")
    if kind == "document":
        return IngestedDocument.from_dict(d)
    if kind == "image":
        return ImageAsset(
            asset_id=d["assetId"],
            url=d.get("url", ""),
            width=int(d.get("width", 0)),
            height=int(d.get("height", 0)),
            source_kind=d.get("sourceKind", "upload"),
        )
    if kind == "deckTemplate":
        return DeckTemplate(
            themes=d.get("themes", []),
            background_urls=d.get("backgroundUrls", []),
            deck_json=d.get("deckJson", []),
        )
    raise BadInputError(f"unknown asset type {kind!r}")


@dataclass
class Project:
    project_id: str
    board: TagBoard
    outline: Outline | None = None
    deck: SlideDeck | None = None
    assets: dict[str, object] = field(default_factory=dict)
    saved_at: str = ""
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schemaVersion": PROJECT_SCHEMA_VERSION,
            "projectId": self.project_id,
            "savedAt": self.saved_at,
            "board": self.board.to_dict(),
            "outline": (
                {"markdown": self.outline.markdown, "revision": self.outline.revision}
                if self.outline
                else None
            ),
            "deck": (
                {
                    "deckId": self.deck.deck_id,
                    "revision": self.deck.revision,
                    "slides": self.deck.slides,
                }
                if self.deck
                else None
            ),
            "assets": {aid: _asset_to_dict(a) for aid, a in sorted(self.assets.items())},
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, Project) and self.to_dict() == other.to_dict()


def save_project(project: Project) -> bytes:
    if not project.saved_at:
        project.saved_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(project.to_dict(), ensure_ascii=False, indent=2).encode("utf-8")


def load_project(data: bytes) -> Project:
    """Load a saved project. Dangling asset references become warnings; a
    future schemaVersion is an explicit migration error."""
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadInputError(f"malformed project file: {exc}") from exc
    version = payload.get("schemaVersion")
    if not isinstance(version, int) or version > PROJECT_SCHEMA_VERSION:
        raise BadInputError(
            f"project schemaVersion {version!r} is newer than supported "
            f"{PROJECT_SCHEMA_VERSION}; migration required"
        )

    assets = {aid: _asset_from_dict(a) for aid, a in payload.get("assets", {}).items()}
    board = deserialize_board(
        json.dumps(payload["board"]).encode("utf-8"), known_assets=set(assets)
    )
    warnings = list(board.load_warnings)

    outline = None
    if payload.get("outline"):
        outline = parse_outline(payload["outline"].get("markdown", ""))
        outline.revision = int(payload["outline"].get("revision", 0))
        if board.outline_ref is None:
            warnings.append("project has an outline but the board has no outlineRef")

    deck = None
    if payload.get("deck"):
        entry = payload["deck"]
        deck = SlideDeck(
            slides=entry.get("slides", []),
            deck_id=entry.get("deckId", ""),
            revision=int(entry.get("revision", 0)),
        )
        deck.violations = validate_deck(deck.slides)
        if board.deck_ref is None:
            warnings.append("project has a deck but the board has no deckRef")

    if board.outline_ref and outline is None:
        warnings.append(f"board outlineRef {board.outline_ref!r} has no outline in the file")
    if board.deck_ref and deck is None:
        warnings.append(f"board deckRef {board.deck_ref!r} has no deck in the file")

    return Project(
        project_id=payload.get("projectId", ""),
        board=board,
        outline=outline,
        deck=deck,
        assets=assets,
        saved_at=payload.get("savedAt", ""),
        warnings=warnings,
    )


def roundtrip_equal(a: Project, b: Project) -> bool:
    return a.to_dict() == b.to_dict()
