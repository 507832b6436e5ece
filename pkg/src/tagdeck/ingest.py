"""External content intake: Word documents, images, image search, deck
templates."""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from hashlib import sha1
from xml.etree import ElementTree

import httpx

from .artifacts import DeckTemplate, SlideDeck, extract_template, validate_deck
from .errors import BadInputError, ImportFormatError

_W_NS = "http://schemas.openxmlformats.org/wordprocessingml/2006/main"


def _w(tag: str) -> str:
    return f"{{{_W_NS}}}{tag}"


@dataclass
class DocumentSection:
    section_id: str
    heading: str
    body: str

    def to_dict(self) -> dict:
        return {"sectionId": self.section_id, "heading": self.heading, "body": self.body}


@dataclass
class IngestedDocument:
    doc_id: str
    title: str
    sections: list[DocumentSection]
    source_filename: str = ""

    def section_ids(self) -> set[str]:
        return {s.section_id for s in self.sections}

    def to_dict(self) -> dict:
        return {
            "docId": self.doc_id,
            "title": self.title,
            "sections": [s.to_dict() for s in self.sections],
            "sourceFilename": self.source_filename,
        }

    @staticmethod
    def from_dict(d: dict) -> "IngestedDocument":
        return IngestedDocument(
            doc_id=d["docId"],
            title=d.get("title", ""),
            sections=[
                DocumentSection(s["sectionId"], s.get("heading", ""), s.get("body", ""))
                for s in d.get("sections", [])
            ],
            source_filename=d.get("sourceFilename", ""),
        )


def _paragraph_text(element) -> str:
    return "".join(t.text or "" for t in element.iter(_w("t")))


def _heading_level(paragraph) -> int | None:
    """Heading level 1-3 from the paragraph style, else None."""
    style = paragraph.find(f"{_w('pPr')}/{_w('pStyle')}")
    if style is None:
        return None
    val = style.get(_w("val"), "")
    if val.lower().startswith("heading"):
        suffix = val[len("heading"):]
        if suffix.isdigit() and 1 <= int(suffix) <= 3:
            return int(suffix)
    return None


def import_docx(data: bytes, filename: str = "") -> IngestedDocument:
    """Extract a section-structured text document from .docx bytes.

    Headings (levels 1-3) open sections; paragraph and list text is kept in
    order; table rows are flattened to lines; embedded media is skipped.
    Deterministic: identical bytes yield identical documents, ids included.
    """
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
        xml = archive.read("word/document.xml")
        root = ElementTree.fromstring(xml)
    except (zipfile.BadZipFile, KeyError, ElementTree.ParseError) as exc:
        raise ImportFormatError(f"not a readable .docx file: {exc}") from exc

    doc_id = "doc-" + sha1(data).hexdigest()[:12]
    sections: list[DocumentSection] = []
    heading = ""
    body_lines: list[str] = []
    started = False

    def flush() -> None:
        nonlocal body_lines
        sections.append(
            DocumentSection(f"s{len(sections) + 1}", heading, "\n".join(body_lines).strip())
        )
        body_lines = []

    body = root.find(_w("body"))
    for element in body if body is not None else []:
        if element.tag == _w("p"):
            text = _paragraph_text(element).strip()
            if _heading_level(element) is not None:
                if started:
                    flush()
                heading = text
                started = True
            elif text:
                started = True
                body_lines.append(text)
        elif element.tag == _w("tbl"):
            started = True
            for row in element.iter(_w("tr")):
                cells = [_paragraph_text(c).strip() for c in row.iter(_w("tc"))]
                body_lines.append(" | ".join(c for c in cells if c))
    flush()

    title = next((s.heading for s in sections if s.heading), filename or doc_id)
    return IngestedDocument(doc_id, title, sections, source_filename=filename)


def select_sections(document: IngestedDocument, section_ids: list[str]) -> list[str]:
    """Validate a selection mask against the document's sections."""
    known = document.section_ids()
    unknown = [s for s in section_ids if s not in known]
    if unknown:
        raise BadInputError(f"unknown section ids {unknown} for document {document.doc_id}")
    return list(section_ids)


# ---------------------------------------------------------------------------
# Image search


@dataclass
class ImageAsset:
    asset_id: str
    url: str
    width: int = 0
    height: int = 0
    source_kind: str = "search"  # upload | search

    def to_dict(self) -> dict:
        return {
            "assetId": self.asset_id,
            "url": self.url,
            "width": self.width,
            "height": self.height,
            "sourceKind": self.source_kind,
        }


RESULTS_PER_SEARCH = 5


class ImageSearchError(BadInputError):
    """Provider failure; callers degrade to a warning, not a crash."""

    code = "backendFailure"


class MockImageSearchClient:
    """Deterministic search client cycling through fixture pages.

    Fixtures map query string to a list of pages, each page a list of five
    urls. Unknown queries get synthesized pages so consecutive calls still
    differ. An empty query mirrors the live provider's failure path.
    """

    mode = "mock"

    def __init__(self, fixtures: dict[str, list[list[str]]] | None = None):
        self.fixtures = fixtures or {}
        self._cursor: dict[str, int] = {}

    @staticmethod
    def from_file(path: str) -> "MockImageSearchClient":
        with open(path, encoding="utf-8") as fh:
            return MockImageSearchClient(json.load(fh))

    def search(self, query: str) -> list[str]:
        if not query.strip():
            raise ImageSearchError("empty query")
        page = self._cursor.get(query, 0)
        self._cursor[query] = page + 1
        pages = self.fixtures.get(query)
        if pages:
            urls = pages[page % len(pages)]
        else:
            slug = "-".join(query.lower().split())[:40] or "image"
            urls = [
                f"https://images.example/{slug}/p{page}/{i}.jpg"
                for i in range(RESULTS_PER_SEARCH)
            ]
        if len(urls) != RESULTS_PER_SEARCH:
            raise ImageSearchError(
                f"fixture page for {query!r} has {len(urls)} urls, expected {RESULTS_PER_SEARCH}"
            )
        return list(urls)


class BingImageSearchClient:
    """Bing-compatible image search over HTTP; pages forward on each call."""

    mode = "live"

    def __init__(self, api_key: str, endpoint: str = "https://api.bing.microsoft.com/v7.0/images/search"):
        self.api_key = api_key
        self.endpoint = endpoint
        self._cursor: dict[str, int] = {}

    def search(self, query: str) -> list[str]:
        if not query.strip():
            raise ImageSearchError("empty query")
        offset = self._cursor.get(query, 0)
        self._cursor[query] = offset + RESULTS_PER_SEARCH
        try:
            response = httpx.get(
                self.endpoint,
                params={"q": query, "count": RESULTS_PER_SEARCH, "offset": offset},
                headers={"Ocp-Apim-Subscription-Key": self.api_key},
                timeout=20.0,
            )
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ImageSearchError(f"image search failed: {exc}") from exc
        urls = [item.get("contentUrl", "") for item in payload.get("value", [])][
            :RESULTS_PER_SEARCH
        ]
        if len(urls) != RESULTS_PER_SEARCH:
            raise ImageSearchError(f"provider returned {len(urls)} results, expected 5")
        return urls


def build_image_query(board) -> str:
    """Most recent active Narrative concept values, up to five, joined by
    spaces. Declared heuristic config, capped for provider sanity."""
    from .board import ConceptTag, Group

    values = [
        t.value
        for t in board.active_tags_by_group()[Group.NARRATIVE]
        if isinstance(t, ConceptTag) and t.value
    ]
    return " ".join(reversed(values[-5:]))[:200]


@dataclass
class ImageSearchResult:
    assets: list[ImageAsset]
    tags: list = field(default_factory=list)
    warning: str | None = None


def search_images(board, client) -> ImageSearchResult:
    """Fetch five images for the board's narrative and float them onto the
    canvas as suggested image reference tags. Provider failure degrades to
    a warning with an empty result, never a pipeline failure."""
    from .board import Position

    query = build_image_query(board)
    try:
        urls = client.search(query)
    except ImageSearchError as exc:
        return ImageSearchResult(assets=[], warning=str(exc))
    assets, tags = [], []
    anchor = board.groups[list(board.groups)[2]].center
    for i, url in enumerate(urls):
        asset = ImageAsset(
            asset_id="img-" + sha1(url.encode("utf-8")).hexdigest()[:12], url=url
        )
        assets.append(asset)
        tag = board.create_reference_tag(
            "image",
            source=url,
            group=None,
            position=Position(anchor.x - 300 + i * 150, anchor.y + 320),
            origin="suggested",
        )
        tags.append(tag)
    return ImageSearchResult(assets=assets, tags=tags)


# ---------------------------------------------------------------------------
# Deck templates


def import_deck_template(data: bytes) -> DeckTemplate:
    """Import a reference deck (this tool's deck JSON) as a visual template."""
    if data[:2] == b"PK":
        raise ImportFormatError(
            "binary presentation formats are not supported; provide deck JSON"
        )
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ImportFormatError(f"not valid deck JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise ImportFormatError("deck JSON must be an array of slides")
    violations = validate_deck(payload)
    if violations:
        raise ImportFormatError(
            f"deck JSON failed validation: {[v.to_dict() for v in violations]}"
        )
    return extract_template(SlideDeck(slides=payload))
