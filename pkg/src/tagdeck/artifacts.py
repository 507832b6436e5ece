"""Generated artifacts: markdown outlines and JSON slide decks.

The deck schema mirrors the generation prompt's contract: each slide is
``{slideNumber, layout, content, theme}``.  Validation reports violations,
it never repairs — the pipeline's recourse is regeneration.
"""

from __future__ import annotations

import copy
import html
import json
import re
import uuid
from dataclasses import dataclass, field

from .errors import BadInputError

LAYOUTS = ("title", "listOrParagraph", "verticalImage", "fullImage")

FONT_FAMILIES = (
    "Quicksand",
    "Playfair Display",
    "Montserrat",
    "Merriweather",
    "Roboto",
    "Roboto Condensed",
)

MAX_BULLETS = 3


# ---------------------------------------------------------------------------
# Outline


@dataclass
class OutlineSection:
    title: str
    bullets: list[str] = field(default_factory=list)
    paragraphs: list[str] = field(default_factory=list)
    images: list[str] = field(default_factory=list)


@dataclass
class Outline:
    markdown: str
    sections: list[OutlineSection]
    revision: int = 0


_IMAGE_RE = re.compile(r"!\[[^\]]*\]\(([^)\s]+)\)")
_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*)$")
_BULLET_RE = re.compile(r"^\s*[-*+]\s+(.*)$")


def parse_outline(markdown: str) -> Outline:
    """Parse markdown into sections; total over arbitrary input.

    Headings open sections, list items become bullets, markdown images are
    collected per section, everything else passes through as paragraph
    text. Content before the first heading lands in an untitled section.
    """
    sections: list[OutlineSection] = []
    current: OutlineSection | None = None

    def ensure() -> OutlineSection:
        nonlocal current
        if current is None:
            current = OutlineSection(title="")
            sections.append(current)
        return current

    for raw_line in markdown.splitlines():
        line = raw_line.rstrip()
        if not line.strip():
            continue
        heading = _HEADING_RE.match(line)
        if heading:
            current = OutlineSection(title=heading.group(2).strip())
            sections.append(current)
            continue
        section = ensure()
        urls = _IMAGE_RE.findall(line)
        if urls:
            section.images.extend(urls)
            remainder = _IMAGE_RE.sub("", line).strip()
            if not remainder or remainder in ("-", "*", "+"):
                continue
            line = remainder
        bullet = _BULLET_RE.match(line)
        if bullet:
            section.bullets.append(bullet.group(1).strip())
        else:
            section.paragraphs.append(line.strip())
    return Outline(markdown=markdown, sections=sections)


def serialize_outline(outline: Outline) -> str:
    """Emit the canonical form: ``## `` headings, ``- `` bullets."""
    lines: list[str] = []
    for section in outline.sections:
        if section.title:
            lines.append(f"## {section.title}")
        for paragraph in section.paragraphs:
            lines.append(paragraph)
        for bullet in section.bullets:
            lines.append(f"- {bullet}")
        for url in section.images:
            lines.append(f"![image]({url})")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n" if lines else ""


# ---------------------------------------------------------------------------
# Slide deck


@dataclass(frozen=True)
class Violation:
    slide_number: int | None
    rule: str
    detail: str

    def to_dict(self) -> dict:
        return {"slideNumber": self.slide_number, "rule": self.rule, "detail": self.detail}


@dataclass
class SlideDeck:
    slides: list[dict]
    deck_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    revision: int = 0
    violations: list[Violation] = field(default_factory=list)

    def slide(self, slide_number: int) -> dict:
        for s in self.slides:
            if s.get("slideNumber") == slide_number:
                return s
        raise BadInputError(f"deck has no slide {slide_number}")

    def to_json(self) -> str:
        return json.dumps(self.slides, ensure_ascii=False, indent=2)


@dataclass
class DeckTemplate:
    """Theme + background material of a reference deck, with the full JSON
    retained for verbatim prompt embedding."""

    themes: list[dict]
    background_urls: list[str]
    deck_json: list[dict]


def _leading_family(font: str) -> str:
    head = font.split(",")[0].strip()
    return head.strip("'\"").strip()


def _check_fonts(slide_number: int, theme: dict, out: list[Violation]) -> None:
    fonts = theme.get("fonts")
    if not isinstance(fonts, dict):
        out.append(Violation(slide_number, "themeShape", "theme.fonts missing or not an object"))
        return
    for key in ("header", "text"):
        value = fonts.get(key)
        if not isinstance(value, str):
            out.append(Violation(slide_number, "themeShape", f"theme.fonts.{key} missing"))
        elif _leading_family(value) not in FONT_FAMILIES:
            out.append(
                Violation(
                    slide_number,
                    "fontEnum",
                    f"theme.fonts.{key} = {value!r} is not one of the six fonts",
                )
            )


def _iter_lists(content: dict):
    value = content.get("list")
    if isinstance(value, list):
        yield value


def validate_deck(deck_json: object) -> list[Violation]:
    """Validate a parsed deck against the generation schema.

    Returns every violation found; an empty list means the deck is valid.
    Structurally non-array input is a fatal shape error instead.
    """
    if not isinstance(deck_json, list):
        raise BadInputError("deck JSON must be an array of slides")
    out: list[Violation] = []
    numbers: list[object] = []
    for i, slide in enumerate(deck_json):
        number = slide.get("slideNumber") if isinstance(slide, dict) else None
        position = number if isinstance(number, int) else i + 1
        if not isinstance(slide, dict):
            out.append(Violation(position, "slideShape", "slide is not an object"))
            continue
        numbers.append(number)
        missing = [k for k in ("layout", "content", "theme") if k not in slide]
        if missing:
            out.append(
                Violation(position, "missingField", f"slide missing {', '.join(missing)}")
            )
            continue
        layout = slide["layout"]
        content = slide["content"]
        theme = slide["theme"]
        if layout not in LAYOUTS:
            out.append(
                Violation(position, "layoutEnum", f"layout {layout!r} is not one of {LAYOUTS}")
            )
        elif isinstance(content, dict):
            has_list = isinstance(content.get("list"), list)
            has_paragraph = isinstance(content.get("paragraph"), str)
            if layout == "title" and has_list:
                out.append(Violation(position, "contentShape", "title layout takes no list"))
            if layout in ("listOrParagraph", "verticalImage") and has_list == has_paragraph:
                out.append(
                    Violation(
                        position,
                        "contentShape",
                        f"{layout} layout takes exactly one of list/paragraph",
                    )
                )
        if not isinstance(content, dict):
            out.append(Violation(position, "contentShape", "content is not an object"))
        else:
            for bullets in _iter_lists(content):
                if len(bullets) > MAX_BULLETS:
                    out.append(
                        Violation(
                            position,
                            "maxBullets",
                            f"list has {len(bullets)} bullets, max is {MAX_BULLETS}",
                        )
                    )
        if isinstance(theme, dict):
            _check_fonts(position, theme, out)
        else:
            out.append(Violation(position, "themeShape", "theme is not an object"))
    if numbers and numbers != list(range(1, len(numbers) + 1)):
        out.append(
            Violation(None, "slideNumbering", f"slideNumbers {numbers} are not contiguous 1..N")
        )
    return out


def extract_template(deck: SlideDeck) -> DeckTemplate:
    """Pull themes and background urls out of a valid deck for reuse as a
    visual template. Per-slide themes are retained, never averaged."""
    violations = validate_deck(deck.slides)
    if violations:
        raise BadInputError(f"cannot template an invalid deck: {[v.to_dict() for v in violations]}")
    themes = [copy.deepcopy(s.get("theme", {})) for s in deck.slides]
    backgrounds = []
    for s in deck.slides:
        url = s.get("content", {}).get("backgroundImage")
        if url:
            backgrounds.append(url)
    return DeckTemplate(
        themes=themes, background_urls=backgrounds, deck_json=copy.deepcopy(deck.slides)
    )


def restyle_deck(deck: SlideDeck, source_slide: dict) -> SlideDeck:
    """Apply one slide's theme and background image to every slide.

    Content and layout are untouched; slide count, order, and numbering are
    preserved. Idempotent by construction.
    """
    theme = copy.deepcopy(source_slide.get("theme", {}))
    background = source_slide.get("content", {}).get("backgroundImage")
    slides = []
    for s in deck.slides:
        restyled = copy.deepcopy(s)
        restyled["theme"] = copy.deepcopy(theme)
        if background is not None:
            restyled.setdefault("content", {})["backgroundImage"] = background
        else:
            restyled.get("content", {}).pop("backgroundImage", None)
        slides.append(restyled)
    return SlideDeck(slides=slides, deck_id=deck.deck_id, revision=deck.revision + 1)


# ---------------------------------------------------------------------------
# HTML rendering

_FONT_LINK = (
    '<link rel="stylesheet" href="https://fonts.googleapis.com/css2'
    "?family=Quicksand&family=Playfair+Display&family=Montserrat"
    '&family=Merriweather&family=Roboto&family=Roboto+Condensed&display=swap">'
)

# Fixed internal padding scale; the theme's "space" values are carried
# through the JSON but not interpreted here.
_SLIDE_PADDING = "48px"


def _css_background(content: dict, theme: dict) -> str:
    image = content.get("backgroundImage")
    if image:
        value = image if image.startswith("url(") else f"url({image})"
        return f"background-image:{value};background-size:cover;background-position:center"
    tertiary = theme.get("colors", {}).get("tertiary", "#fff")
    return f"background-color:{tertiary}"


def render_slide(slide: dict, badges: list[Violation] | None = None) -> str:
    """Render one slide to a deterministic HTML fragment."""
    layout = slide.get("layout", "")
    content = slide.get("content", {})
    theme = slide.get("theme", {})
    fonts = theme.get("fonts", {})
    colors = theme.get("colors", {})
    sizes = theme.get("fontSizes", {})
    header_style = (
        f"font-family:{fonts.get('header', 'sans-serif')};"
        f"font-size:{sizes.get('h1', '64px')};"
        f"color:{colors.get('primary', '#000')};margin:0 0 0.4em 0"
    )
    text_style = (
        f"font-family:{fonts.get('text', 'sans-serif')};"
        f"font-size:{sizes.get('text', '32px')};"
        f"color:{colors.get('primary', '#000')}"
    )
    parts = [
        f'<section class="slide layout-{html.escape(layout)}" '
        f'data-slide-number="{slide.get("slideNumber", "")}" '
        f'style="{_css_background(content, theme)};padding:{_SLIDE_PADDING};'
        'aspect-ratio:16/9;box-sizing:border-box;overflow:hidden">'
    ]
    for violation in badges or []:
        parts.append(
            f'<mark class="violation" title="{html.escape(violation.detail)}">'
            f"{html.escape(violation.rule)}</mark>"
        )
    if content.get("title"):
        parts.append(f'<h1 style="{header_style}">{html.escape(content["title"])}</h1>')
    if content.get("subtitle"):
        parts.append(
            f'<h2 style="{text_style};color:{colors.get("secondary", "#000")}">'
            f"{html.escape(content['subtitle'])}</h2>"
        )
    if isinstance(content.get("list"), list):
        items = "".join(f"<li>{html.escape(str(item))}</li>" for item in content["list"])
        parts.append(f'<ul style="{text_style}">{items}</ul>')
    elif isinstance(content.get("paragraph"), str):
        parts.append(f'<p style="{text_style}">{html.escape(content["paragraph"])}</p>')
    image = content.get("image")
    if image and layout in ("verticalImage", "fullImage"):
        parts.append(
            f'<img src="{html.escape(str(image))}" alt="" '
            f'style="max-width:100%;max-height:60%;object-fit:contain">'
        )
    parts.append("</section>")
    return "".join(parts)


def render_deck(deck: SlideDeck, title: str = "Slide deck") -> str:
    """Render a whole deck as one standalone HTML document."""
    by_slide: dict[int | None, list[Violation]] = {}
    for v in deck.violations:
        by_slide.setdefault(v.slide_number, []).append(v)
    body = "\n".join(
        render_slide(s, by_slide.get(s.get("slideNumber"))) for s in deck.slides
    )
    return (
        "<!DOCTYPE html>\n<html><head>\n"
        f'<meta charset="utf-8">\n<title>{html.escape(title)}</title>\n'
        f"{_FONT_LINK}\n"
        "<style>.slide{margin:24px auto;max-width:960px;"
        "box-shadow:0 2px 12px rgba(0,0,0,.25)}</style>\n"
        f"</head><body>\n{body}\n</body></html>\n"
    )
