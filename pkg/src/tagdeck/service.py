"""HTTP session service: boards, jobs, artifacts, previews, assets,
projects. The browser front end drives this API exclusively; every
endpoint is a thin shell over the in-process operations, so endpoint
results and direct engine calls are equivalent by construction.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, Header, Query, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse

from .artifacts import render_deck, render_slide, serialize_outline
from .board import Position, TagBoard
from .errors import (
    BadInputError,
    ConflictError,
    NotFoundError,
    TagdeckError,
)
from .gateway import LiveBackend, RecordBackend, ReplayBackend, ReplayStore
from .ingest import (
    MockImageSearchClient,
    import_deck_template,
    import_docx,
    search_images,
    select_sections,
)
from .pipeline import Engine, GenerationJob
from .previews import (
    PENDING,
    PreviewEngine,
    build_alternative_set,
    build_slider_spec,
)
from .project import Project, load_project, save_project

BOARD_LEVEL_KINDS = ("suggestions", "outline", "deck", "textGrounding")

_STATUS = {
    "notFound": 404,
    "conflict": 409,
    "badInput": 400,
    "backendFailure": 502,
    "capability": 501,
}


class JobManager:
    """Async generation jobs with polling; one board-level job in flight
    per board, one variation job per slide session."""

    def __init__(self):
        self.jobs: dict[str, GenerationJob] = {}
        self._owners: dict[str, str] = {}  # job_id -> scope key
        self._lock = threading.Lock()

    def _active_for_scope(self, scope: str) -> GenerationJob | None:
        for job_id, owner in self._owners.items():
            job = self.jobs[job_id]
            if owner == scope and job.status in ("queued", "running"):
                return job
        return None

    def start(self, scope: str, kind: str, input_revision: int, fn) -> GenerationJob:
        with self._lock:
            active = self._active_for_scope(scope)
            if active is not None:
                raise ConflictError(
                    f"a {active.kind} job is already in flight for {scope}"
                )
            job = GenerationJob(
                job_id="job-" + uuid.uuid4().hex[:10],
                kind=kind,
                input_revision=input_revision,
            )
            self.jobs[job.job_id] = job
            self._owners[job.job_id] = scope

        def run():
            with self._lock:
                if job.status != "queued":
                    return
                job.status = "running"
            try:
                result, final_revision = fn()
            except TagdeckError as exc:
                job.error = str(exc)
                job.status = "failed"
                return
            except Exception as exc:  # noqa: BLE001 - job boundary
                job.error = f"internal error: {exc}"
                job.status = "failed"
                return
            job.result = result
            if final_revision is not None and final_revision != job.input_revision:
                job.stale = True
            job.status = "done"

        threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id: str) -> GenerationJob:
        job = self.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job {job_id!r}")
        return job

    def cancel(self, job_id: str) -> GenerationJob:
        job = self.get(job_id)
        with self._lock:
            if job.status == "queued":
                job.status = "failed"
                job.error = "cancelled"
            elif job.status == "running":
                raise ConflictError("job already running; cannot cancel")
        return job


@dataclass
class StudioConfig:
    backend: str = "replay"  # live | replay | record
    replay_store: str | None = None
    model: str = "gpt-4o"
    api_key: str | None = None
    api_base_url: str = "https://api.openai.com/v1"
    max_inflight: int = 4
    image_search_key: str | None = None
    image_fixtures: str | None = None
    preview_workers: int = 2


def build_backend(config: StudioConfig):
    store = ReplayStore(config.replay_store)
    if config.backend == "replay":
        return ReplayBackend(store)
    if not config.api_key:
        raise BadInputError(
            "live/record backend needs an API key (set TAGDECK_API_KEY)"
        )
    live = LiveBackend(
        api_key=config.api_key,
        base_url=config.api_base_url,
        model=config.model,
        max_inflight=config.max_inflight,
    )
    if config.backend == "record":
        return RecordBackend(live, store)
    if config.backend == "live":
        return live
    raise BadInputError(f"unknown backend mode {config.backend!r}")


@dataclass
class Studio:
    """All service state: engine, jobs, per-board preview engines."""

    engine: Engine
    config: StudioConfig
    jobs: JobManager = field(default_factory=JobManager)
    image_client: object | None = None
    _previews: dict[str, PreviewEngine] = field(default_factory=dict)
    _executor: ThreadPoolExecutor | None = None

    def __post_init__(self):
        if self.image_client is None:
            if self.config.image_fixtures:
                self.image_client = MockImageSearchClient.from_file(self.config.image_fixtures)
            elif self.config.image_search_key:
                from .ingest import BingImageSearchClient

                self.image_client = BingImageSearchClient(self.config.image_search_key)
            else:
                self.image_client = MockImageSearchClient()
        if self._executor is None:
            self._executor = ThreadPoolExecutor(
                max_workers=self.config.preview_workers, thread_name_prefix="preview"
            )

    # -- previews ----------------------------------------------------------

    def previews_for(self, board: TagBoard) -> PreviewEngine:
        if board.board_id not in self._previews:
            engine = self.engine

            def slide_context():
                if not board.deck_ref or board.deck_ref not in engine.decks:
                    return None
                deck = engine.decks[board.deck_ref]
                if not deck.slides:
                    return None
                return deck.slides[0], deck.revision

            def generate_preview(tag, slide):
                # Single-slide regeneration is backend-priced; the preview
                # artifact here is the deterministic re-render with the
                # overridden value substituted into the slide's theme text.
                return render_slide(slide)

            self._previews[board.board_id] = PreviewEngine(
                board,
                generate_alternatives=lambda tag: build_alternative_set(
                    tag, engine.fetch_alternatives(board, tag)
                ),
                generate_slider=lambda tag: build_slider_spec(
                    tag, engine.fetch_slider(board, tag)
                ),
                generate_preview=generate_preview,
                slide_context=slide_context,
                executor=self._executor,
            )
        return self._previews[board.board_id]

    # -- snapshots ---------------------------------------------------------

    def board_snapshot(self, board: TagBoard) -> dict:
        return board.to_dict()

    def deck_payload(self, deck_id: str) -> dict:
        deck = self.engine.get_deck(deck_id)
        return {
            "deckId": deck.deck_id,
            "revision": deck.revision,
            "slides": deck.slides,
            "violations": [v.to_dict() for v in deck.violations],
        }


def _check_revision(board: TagBoard, if_match: str | None) -> None:
    if if_match is None:
        return
    try:
        expected = int(if_match)
    except ValueError:
        raise BadInputError(f"If-Match must be a revision number, got {if_match!r}") from None
    if expected != board.board_revision:
        raise ConflictError(
            f"board revision is {board.board_revision}, request expected {expected}"
        )


def create_app(studio: Studio) -> FastAPI:
    app = FastAPI(title="tagdeck session service")
    engine = studio.engine

    @app.exception_handler(TagdeckError)
    async def tagdeck_error_handler(_request: Request, exc: TagdeckError):
        body = {"error": {"code": exc.code, "message": str(exc)}}
        raw = getattr(exc, "raw", None)
        if raw:
            body["error"]["rawReply"] = raw
        return JSONResponse(status_code=_STATUS.get(exc.code, 500), content=body)

    # -- health ------------------------------------------------------------

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "backend": engine.backend.mode, "model": studio.config.model}

    # -- boards and tags ---------------------------------------------------

    @app.post("/api/v1/boards")
    def create_board():
        board = engine.new_board()
        studio.previews_for(board)
        return studio.board_snapshot(board)

    @app.get("/api/v1/boards/{board_id}")
    def get_board(board_id: str):
        return studio.board_snapshot(engine.get_board(board_id))

    def _position(payload: dict) -> Position | None:
        p = payload.get("position")
        return Position.from_dict(p) if isinstance(p, dict) else None

    @app.post("/api/v1/boards/{board_id}/tags")
    def create_tag(
        board_id: str, payload: dict = Body(...), if_match: str | None = Header(default=None)
    ):
        board = engine.get_board(board_id)
        _check_revision(board, if_match)
        kind = payload.get("kind", "concept")
        if kind == "concept":
            tag = board.create_tag(
                payload.get("label", ""),
                payload.get("value", ""),
                group=payload.get("group"),
                position=_position(payload),
                origin=payload.get("origin", "user"),
            )
        else:
            tag = board.create_reference_tag(
                kind,
                source=payload.get("source", ""),
                group=payload.get("group"),
                position=_position(payload),
                origin=payload.get("origin", "user"),
                selection=payload.get("selection"),
            )
        return {"tag": tag.to_dict(), "board": studio.board_snapshot(board)}

    @app.patch("/api/v1/boards/{board_id}/tags/{tag_id}")
    def edit_tag(
        board_id: str,
        tag_id: str,
        payload: dict = Body(...),
        if_match: str | None = Header(default=None),
    ):
        board = engine.get_board(board_id)
        _check_revision(board, if_match)
        tag = board.edit_tag(tag_id, payload.get("label", ""), payload.get("value", ""))
        return {"tag": tag.to_dict(), "board": studio.board_snapshot(board)}

    @app.post("/api/v1/boards/{board_id}/tags/{tag_id}/move")
    def move_tag(
        board_id: str,
        tag_id: str,
        payload: dict = Body(...),
        if_match: str | None = Header(default=None),
    ):
        board = engine.get_board(board_id)
        _check_revision(board, if_match)
        position = _position(payload) or Position()
        group = payload.get("group", "auto")
        if group == "auto":  # hit-test against the circles server-side
            group = board.group_for_position(position)
            group = group.value if group else None
        tag = board.move_tag(tag_id, position, group)
        return {"tag": tag.to_dict(), "board": studio.board_snapshot(board)}

    @app.delete("/api/v1/boards/{board_id}/tags/{tag_id}")
    def delete_tag(
        board_id: str, tag_id: str, if_match: str | None = Header(default=None)
    ):
        board = engine.get_board(board_id)
        _check_revision(board, if_match)
        studio.previews_for(board)  # ensure cancellation listener exists
        board.delete_tag(tag_id)
        return {"board": studio.board_snapshot(board)}

    @app.post("/api/v1/boards/{board_id}/tags/{tag_id}/sections")
    def set_sections(board_id: str, tag_id: str, payload: dict = Body(...)):
        board = engine.get_board(board_id)
        tag = board.tags.get(tag_id)
        if tag is None:
            raise NotFoundError(f"unknown tag {tag_id!r}")
        document = engine.assets.get(getattr(tag, "source", None))
        section_ids = payload.get("sectionIds", [])
        if document is not None:
            select_sections(document, section_ids)
        tag = board.select_sections(tag_id, section_ids)
        return {"tag": tag.to_dict(), "board": studio.board_snapshot(board)}

    @app.post("/api/v1/boards/{board_id}/ground-text")
    def ground_text(
        board_id: str, payload: dict = Body(...), if_match: str | None = Header(default=None)
    ):
        board = engine.get_board(board_id)
        _check_revision(board, if_match)
        tags = engine.ground_from_text(board, payload.get("text", ""))
        return {"tags": [t.to_dict() for t in tags], "board": studio.board_snapshot(board)}

    # -- outline -----------------------------------------------------------

    @app.get("/api/v1/boards/{board_id}/outline")
    def get_outline(board_id: str):
        board = engine.get_board(board_id)
        if not board.outline_ref or board.outline_ref not in engine.outlines:
            raise NotFoundError("board has no outline yet")
        outline = engine.outlines[board.outline_ref]
        return {
            "outlineRef": board.outline_ref,
            "markdown": outline.markdown,
            "canonical": serialize_outline(outline),
            "revision": outline.revision,
        }

    @app.put("/api/v1/boards/{board_id}/outline")
    def put_outline(board_id: str, payload: dict = Body(...)):
        board = engine.get_board(board_id)
        outline = engine.set_outline(board, payload.get("markdown", ""))
        return {
            "outlineRef": board.outline_ref,
            "markdown": outline.markdown,
            "revision": outline.revision,
        }

    # -- jobs --------------------------------------------------------------

    @app.post("/api/v1/boards/{board_id}/jobs")
    def start_job(board_id: str, payload: dict = Body(...)):
        board = engine.get_board(board_id)
        kind = payload.get("kind")
        revision = board.board_revision
        if kind == "suggestions":
            fn = lambda: (
                {"tags": [t.to_dict() for t in engine.request_suggestions(board)]},
                None,
            )
        elif kind == "outline":
            fn = lambda: (
                {
                    "outlineRef": board.outline_ref or "",
                    "markdown": engine.generate_outline(board).markdown,
                },
                board.board_revision,
            )
        elif kind == "deck":
            template = payload.get("template")
            fn = lambda: (
                studio.deck_payload(engine.generate_deck(board, template=template).deck_id),
                board.board_revision,
            )
        elif kind == "textGrounding":
            text = payload.get("text", "")
            fn = lambda: (
                {"tags": [t.to_dict() for t in engine.ground_from_text(board, text)]},
                None,
            )
        else:
            raise BadInputError(f"unknown job kind {kind!r}")
        job = studio.jobs.start(f"board:{board_id}", kind, revision, fn)
        return job.to_dict()

    @app.get("/api/v1/jobs/{job_id}")
    def poll_job(job_id: str):
        return studio.jobs.get(job_id).to_dict()

    @app.get("/api/v1/jobs/{job_id}/result")
    def job_result(job_id: str):
        job = studio.jobs.get(job_id)
        if job.status != "done":
            raise ConflictError(f"job {job_id} is {job.status}, result not readable")
        return {"jobId": job.job_id, "stale": job.stale, "result": job.result}

    @app.delete("/api/v1/jobs/{job_id}")
    def cancel_job(job_id: str):
        return studio.jobs.cancel(job_id).to_dict()

    # -- decks and slide sessions ------------------------------------------

    @app.get("/api/v1/decks/{deck_id}")
    def get_deck(deck_id: str):
        return studio.deck_payload(deck_id)

    @app.get("/api/v1/decks/{deck_id}/html", response_class=HTMLResponse)
    def deck_html(deck_id: str):
        return render_deck(engine.get_deck(deck_id))

    @app.get("/api/v1/decks/{deck_id}/slides/{slide_number}/html", response_class=HTMLResponse)
    def slide_html(deck_id: str, slide_number: int):
        return render_slide(engine.get_deck(deck_id).slide(slide_number))

    def _session_payload(session) -> dict:
        return {
            "sessionId": session.session_id,
            "parentDeckId": session.parent_deck_id,
            "slideNumber": session.slide_number,
            "mode": session.mode,
            "flaggedGroups": session.flagged_groups,
            "scopedBoard": session.scoped_board.to_dict(),
            "variations": session.variations,
            "status": session.status,
        }

    @app.post("/api/v1/decks/{deck_id}/slides/{slide_number}/session")
    def open_session(deck_id: str, slide_number: int):
        deck = engine.get_deck(deck_id)
        return _session_payload(engine.open_slide_session(deck, slide_number))

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = engine.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return _session_payload(session)

    @app.post("/api/v1/sessions/{session_id}/variations")
    def start_variations(session_id: str, payload: dict = Body(default={})):
        session = engine.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        count = int(payload.get("count", 1))
        job = studio.jobs.start(
            f"session:{session_id}",
            "slideVariation",
            session.parent_deck_revision,
            lambda: ({"variations": engine.generate_slide_variations(session, count)}, None),
        )
        return job.to_dict()

    @app.post("/api/v1/sessions/{session_id}/apply")
    def apply_variation(session_id: str, payload: dict = Body(...)):
        session = engine.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        deck = engine.get_deck(session.parent_deck_id)
        index = int(payload.get("index", 0))
        if payload.get("toDeck"):
            updated = engine.apply_style_to_deck(deck, session, index)
        else:
            updated = engine.apply_variation(deck, session, index)
        session.parent_deck_revision = updated.revision
        return studio.deck_payload(updated.deck_id)

    # -- previews ----------------------------------------------------------

    @app.post("/api/v1/boards/{board_id}/tags/{tag_id}/previews")
    def schedule_previews(board_id: str, tag_id: str):
        board = engine.get_board(board_id)
        jobs = studio.previews_for(board).schedule(tag_id)
        return {"scheduled": jobs}

    @app.get("/api/v1/boards/{board_id}/tags/{tag_id}/alternatives")
    def get_alternatives(board_id: str, tag_id: str):
        board = engine.get_board(board_id)
        result = studio.previews_for(board).get_alternatives(tag_id)
        if result is PENDING:
            return {"status": "pending"}
        return {"status": "ready", "alternatives": result.to_dict()}

    @app.get("/api/v1/boards/{board_id}/tags/{tag_id}/slider")
    def get_slider(board_id: str, tag_id: str):
        board = engine.get_board(board_id)
        result = studio.previews_for(board).get_slider(tag_id)
        if result is PENDING:
            return {"status": "pending"}
        return {"status": "ready", "slider": result.to_dict()}

    @app.get(
        "/api/v1/boards/{board_id}/tags/{tag_id}/preview", response_class=HTMLResponse
    )
    def preview_for_value(board_id: str, tag_id: str, value: str = Query(...)):
        board = engine.get_board(board_id)
        return studio.previews_for(board).preview_for_value(tag_id, value)

    @app.get("/api/v1/previews/metrics")
    def preview_metrics():
        return {bid: pe.metrics() for bid, pe in studio._previews.items()}

    # -- assets ------------------------------------------------------------

    @app.post("/api/v1/assets/docx")
    async def upload_docx(request: Request):
        data = await request.body()
        filename = request.headers.get("x-filename", "")
        document = import_docx(data, filename)
        engine.assets[document.doc_id] = document
        return document.to_dict()

    @app.post("/api/v1/assets/deck-template")
    async def upload_template(request: Request):
        data = await request.body()
        template = import_deck_template(data)
        asset_id = "tpl-" + uuid.uuid4().hex[:10]
        engine.assets[asset_id] = template
        return {
            "assetId": asset_id,
            "backgroundUrls": template.background_urls,
            "slideCount": len(template.deck_json),
        }

    @app.post("/api/v1/boards/{board_id}/images/search")
    def image_search(board_id: str):
        board = engine.get_board(board_id)
        result = search_images(board, studio.image_client)
        for asset in result.assets:
            engine.assets[asset.asset_id] = asset
        return {
            "assets": [a.to_dict() for a in result.assets],
            "tags": [t.to_dict() for t in result.tags],
            "warning": result.warning,
            "board": studio.board_snapshot(board),
        }

    # -- projects ----------------------------------------------------------

    @app.get("/api/v1/boards/{board_id}/project")
    def export_project(board_id: str):
        board = engine.get_board(board_id)
        project = Project(
            project_id=board.board_id,
            board=board,
            outline=engine.outlines.get(board.outline_ref) if board.outline_ref else None,
            deck=engine.decks.get(board.deck_ref) if board.deck_ref else None,
            assets=dict(engine.assets),
        )
        return Response(content=save_project(project), media_type="application/json")

    @app.post("/api/v1/projects")
    async def import_project(request: Request):
        data = await request.body()
        project = load_project(data)
        engine.boards[project.board.board_id] = project.board
        if project.outline is not None and project.board.outline_ref:
            engine.outlines[project.board.outline_ref] = project.outline
        if project.deck is not None:
            engine.decks[project.deck.deck_id] = project.deck
        engine.assets.update(project.assets)
        return {
            "projectId": project.project_id,
            "boardId": project.board.board_id,
            "warnings": project.warnings,
        }

    return app


def build_studio(config: StudioConfig) -> Studio:
    return Studio(engine=Engine(build_backend(config)), config=config)
