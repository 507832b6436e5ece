"""Shared test helpers: replay-backed engines, docx builders, deck builders."""

from __future__ import annotations

import io
import json
import zipfile

import pytest

from tagdeck.gateway import ReplayBackend, ReplayStore
from tagdeck.pipeline import Engine, _bundle_to_request
from tagdeck.prompts import PromptBundle

W_NS = "http://schemas.openxmlformats.org/wordprocessingml/2006/main"


def stub_reply(store: ReplayStore, bundle: PromptBundle, text: str, suffix: str = "") -> None:
    """Record a canned response for the exact request a bundle produces."""
    request = _bundle_to_request(bundle, suffix)
    store.entries[request.canonical_hash()] = text


@pytest.fixture
def store() -> ReplayStore:
    return ReplayStore()


@pytest.fixture
def engine(store) -> Engine:
    return Engine(ReplayBackend(store))


def make_docx(sections: list[tuple[str, list[str]]]) -> bytes:
    """Build a minimal .docx: (heading, paragraphs) pairs; empty heading
    means leading body text before any heading."""

    def para(text: str, style: str | None = None) -> str:
        props = f'<w:pPr><w:pStyle w:val="{style}"/></w:pPr>' if style else ""
        return f"<w:p>{props}<w:r><w:t>{text}</w:t></w:r></w:p>"

    body = []
    for heading, paragraphs in sections:
        if heading:
            body.append(para(heading, "Heading1"))
        body.extend(para(p) for p in paragraphs)
    xml = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<w:document xmlns:w="{W_NS}"><w:body>{"".join(body)}</w:body></w:document>'
    )
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr(
            "[Content_Types].xml",
            '<?xml version="1.0"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"/>',
        )
        archive.writestr("word/document.xml", xml)
    return buffer.getvalue()


def make_theme(header: str = '"Playfair Display", serif', text: str = '"Quicksand", sans-serif') -> dict:
    return {
        "fonts": {"header": header, "text": text},
        "colors": {"primary": "#000", "secondary": "#333", "tertiary": "#fff"},
        "fontSizes": {"h1": "100px", "text": "44px"},
        "space": [16, 24, 32],
    }


def make_slide(number: int, layout: str = "listOrParagraph", **overrides) -> dict:
    if layout == "title":
        content = {"title": f"Title {number}", "subtitle": "by someone"}
    elif layout == "fullImage":
        content = {"title": f"Title {number}", "image": f"https://img.example/{number}.png"}
    else:
        content = {"title": f"Title {number}", "list": [f"point {number}a", f"point {number}b"]}
    slide = {"slideNumber": number, "layout": layout, "content": content, "theme": make_theme()}
    slide.update(overrides)
    return slide


def make_deck_json(count: int) -> list[dict]:
    slides = [make_slide(1, "title")]
    slides += [make_slide(n) for n in range(2, count + 1)]
    return slides


def deck_reply(count: int) -> str:
    return json.dumps(make_deck_json(count))
