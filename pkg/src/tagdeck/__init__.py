"""tagdeck: intent-tag steering engine for generative slide deck creation.

Users express intent as granular ``[label:value]`` tags in three fixed
groups (Narrative, Visual Style, Content Sources); the engine assembles
prompts from the active tags, orchestrates an LLM backend, and produces
outlines, slide decks, tag suggestions, grounding tags, and pre-generated
tag previews.
"""

from .board import (
    ConceptTag,
    Group,
    Position,
    ReferenceTag,
    TagBoard,
    TagGroup,
    deserialize_board,
    parse_attr_value,
    serialize_board,
)
from .artifacts import (
    DeckTemplate,
    Outline,
    SlideDeck,
    Violation,
    extract_template,
    parse_outline,
    render_deck,
    render_slide,
    restyle_deck,
    serialize_outline,
    validate_deck,
)
from .gateway import (
    CompletionRequest,
    LiveBackend,
    RawCompletion,
    RecordBackend,
    ReplayBackend,
    ReplayStore,
    complete,
    complete_json,
    extract_json,
    parse_grounding,
    parse_suggestions,
)
from .pipeline import Engine, GenerationJob, ScopedSlideSession
from .previews import (
    PENDING,
    AlternativeSet,
    PreviewEngine,
    SliderSpec,
    build_alternative_set,
    build_slider_spec,
)
from .prompts import (
    PromptBundle,
    build_alternatives_prompt,
    build_deck_prompt,
    build_outline_prompt,
    build_slide_grounding_prompt,
    build_slider_prompt,
    build_suggestion_prompt,
    build_text_grounding_prompt,
    load_system_prompt,
    render_user_context,
)
from .ingest import (
    BingImageSearchClient,
    ImageAsset,
    IngestedDocument,
    MockImageSearchClient,
    import_deck_template,
    import_docx,
    search_images,
    select_sections,
)
from .project import Project, load_project, save_project

__version__ = "0.1.0"
