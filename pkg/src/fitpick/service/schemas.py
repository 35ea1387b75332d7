"""Request and response bodies for the session API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class BottomView(BaseModel):
    """Display payload for one recommended bottom.

    ``swatch`` is a short hex digest of the garment's feature vector so a
    client can render a deterministic placeholder when no image exists.
    """

    id: str
    cluster: int
    image_url: str | None = None
    swatch: str


class StartSessionRequest(BaseModel):
    top_id: str
    mode: Literal["proxy", "human"]
    user_tag: str | None = None


class RecommendationResponse(BaseModel):
    """``step`` is the 1-based number of the proposal being offered."""

    session_id: str
    step: int
    n_steps: int
    bottom: BottomView


class FeedbackRequest(BaseModel):
    score: float | None = Field(default=None, ge=0.0, le=1.0)
    idempotency_key: str | None = None


class StepRecord(BaseModel):
    step: int
    bottom: BottomView
    score: float
    raw_score: float | None = None
    reward: float


class HistorySummary(BaseModel):
    steps: int
    last_score: float | None = None
    best_score: float | None = None
    mean_score: float | None = None
    episode_return: float


class FeedbackResponse(BaseModel):
    """``step`` numbers the proposal now offered in ``bottom``, matching
    :class:`RecommendationResponse` and the snapshot's pending view; once
    the session is done it stays at the final recorded step.
    """

    session_id: str
    done: bool
    recorded: StepRecord
    step: int
    n_steps: int
    bottom: BottomView | None = None
    history_summary: HistorySummary


class PendingView(BaseModel):
    step: int
    bottom: BottomView


class SessionSnapshot(BaseModel):
    session_id: str
    user_tag: str | None = None
    top_id: str
    mode: Literal["proxy", "human"]
    status: Literal["active", "done"]
    n_steps: int
    pending: PendingView | None = None
    history: list[StepRecord]
    history_summary: HistorySummary


class TopView(BaseModel):
    id: str
    image_url: str | None = None
    swatch: str


class TopsPage(BaseModel):
    items: list[TopView]
    total: int
    offset: int
    limit: int


class HealthView(BaseModel):
    status: Literal["ok"]
    sessions: int


class ErrorBody(BaseModel):
    code: str
    message: str
