"""HTTP face of the interactive session engine.

The API surface is small and fixed:

    POST /sessions                   start an episode, get the first bottom
    POST /sessions/{id}/feedback     score the pending bottom, get the next
    GET  /sessions/{id}              full snapshot (history, status, pending)
    GET  /catalog/tops               paginated tops for the picker
    GET  /healthz                    liveness + active session count

Errors are always ``{code, message}`` JSON.  Handlers are sync; FastAPI
runs them on a threadpool and each session's lock serializes its
mutations, so interleaved requests against different sessions never
share mutable state.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..agent.episode import EpisodeRunner
from ..errors import FitpickError, StateError
from .config import ServiceConfig
from .schemas import (
    BottomView,
    FeedbackRequest,
    FeedbackResponse,
    HealthView,
    HistorySummary,
    PendingView,
    RecommendationResponse,
    SessionSnapshot,
    StartSessionRequest,
    StepRecord,
    TopView,
    TopsPage,
)
from .state import Bundle, ServiceError, SessionStore, feature_swatch

MAX_PAGE_LIMIT = 500


def _summary(runner: EpisodeRunner) -> HistorySummary:
    steps = runner.log.steps
    if not steps:
        return HistorySummary(steps=0, episode_return=0.0)
    scores = [s.feedback for s in steps]
    return HistorySummary(
        steps=len(steps),
        last_score=scores[-1],
        best_score=max(scores),
        mean_score=sum(scores) / len(scores),
        episode_return=runner.log.episode_return(),
    )


def create_app(bundle: Bundle, config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="fitpick session service", version=__version__)
    store = SessionStore(config)
    app.state.bundle = bundle
    app.state.store = store
    app.state.config = config

    def record(step) -> StepRecord:
        return StepRecord(
            step=step.step + 1,
            bottom=BottomView(**bundle.bottom_payload(step.bottom)),
            score=step.feedback,
            raw_score=step.raw_score,
            reward=step.reward,
        )

    @app.exception_handler(ServiceError)
    async def service_error(request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        message = f"{where}: {first.get('msg', 'invalid request')}"
        return JSONResponse(
            status_code=400, content={"code": "invalid_request", "message": message}
        )

    @app.exception_handler(FitpickError)
    async def domain_error(request, exc: FitpickError):
        status = 409 if isinstance(exc, StateError) else 400
        code = "conflict" if status == 409 else "bad_request"
        return JSONResponse(status_code=status, content={"code": code, "message": str(exc)})

    @app.post("/sessions", response_model=RecommendationResponse, status_code=201)
    def start_session(body: StartSessionRequest) -> RecommendationResponse:
        top = bundle.dataset.garments.get(body.top_id)
        if top is None or top.category != "top":
            raise ServiceError(404, "unknown_top", f"no top {body.top_id!r}")
        if body.mode == "proxy":
            if body.user_tag is None:
                raise ServiceError(
                    400, "missing_user", "proxy mode needs user_tag naming a dataset user"
                )
            if body.user_tag not in bundle.dataset.users:
                raise ServiceError(404, "unknown_user", f"no user {body.user_tag!r}")
        runner = EpisodeRunner(
            bundle.policy_factory(),
            body.user_tag or "human",
            top,
            bundle.dataset.garments,
            bundle.candidates,
            config.n_steps,
        )
        session = store.create(body.user_tag, body.top_id, body.mode, runner)
        with session.lock:
            action = runner.next_action(None)
        return RecommendationResponse(
            session_id=session.session_id,
            step=1,
            n_steps=config.n_steps,
            bottom=BottomView(**bundle.bottom_payload(bundle.candidates[action])),
        )

    @app.post("/sessions/{session_id}/feedback", response_model=FeedbackResponse)
    def post_feedback(session_id: str, body: FeedbackRequest) -> FeedbackResponse:
        session = store.get(session_id)
        with session.lock:
            if body.idempotency_key is not None:
                cached = session.replies.get(body.idempotency_key)
                if cached is not None:
                    return cached
            if session.done:
                raise ServiceError(
                    409, "no_pending", "session is done; no pending recommendation"
                )
            runner = session.runner
            # an active session always has a pinned proposal: one is issued
            # at start and after every feedback
            bottom = bundle.dataset.garments[bundle.candidates[runner.pending_action]]
            if session.mode == "proxy":
                raw = float(bundle.proxy.score(runner.user, runner.top, bottom))
                step = runner.apply_feedback(bundle.normalizer.feedback(raw), raw_score=raw)
            else:
                if body.score is None:
                    raise ServiceError(
                        400, "missing_score", "human mode requires a score in [0, 1]"
                    )
                step = runner.apply_feedback(body.score)
                if body.score >= config.satisfaction:
                    session.stopped = True
            next_bottom = None
            if not session.done:
                action = runner.next_action(None)
                next_bottom = BottomView(**bundle.bottom_payload(bundle.candidates[action]))
            response = FeedbackResponse(
                session_id=session.session_id,
                done=session.done,
                recorded=record(step),
                step=len(runner.log.steps) + (0 if session.done else 1),
                n_steps=config.n_steps,
                bottom=next_bottom,
                history_summary=_summary(runner),
            )
            if body.idempotency_key is not None:
                session.replies[body.idempotency_key] = response
            if session.done:
                store.journal(session)
            return response

    @app.get("/sessions/{session_id}", response_model=SessionSnapshot)
    def get_session(session_id: str) -> SessionSnapshot:
        session = store.get(session_id)
        with session.lock:
            runner = session.runner
            pending = None
            if not session.done and runner.pending_action is not None:
                pending = PendingView(
                    step=len(runner.log.steps) + 1,
                    bottom=BottomView(
                        **bundle.bottom_payload(bundle.candidates[runner.pending_action])
                    ),
                )
            return SessionSnapshot(
                session_id=session.session_id,
                user_tag=session.user_tag,
                top_id=session.top_id,
                mode=session.mode,
                status=session.status,
                n_steps=config.n_steps,
                pending=pending,
                history=[record(s) for s in runner.log.steps],
                history_summary=_summary(runner),
            )

    @app.get("/catalog/tops", response_model=TopsPage)
    def catalog_tops(offset: int = 0, limit: int | None = None) -> TopsPage:
        if limit is None:
            limit = config.page_limit
        if offset < 0 or limit < 1:
            raise ServiceError(400, "bad_page", "offset must be >= 0 and limit >= 1")
        limit = min(limit, MAX_PAGE_LIMIT)
        items = bundle.tops[offset : offset + limit]
        return TopsPage(
            items=[
                TopView(id=g.id, image_url=g.image_url, swatch=feature_swatch(g.feature))
                for g in items
            ],
            total=len(bundle.tops),
            offset=offset,
            limit=limit,
        )

    @app.get("/healthz", response_model=HealthView)
    def healthz() -> HealthView:
        return HealthView(status="ok", sessions=store.active_count())

    return app


def app_from_config(config: ServiceConfig) -> FastAPI:
    return create_app(Bundle.load(config), config)
