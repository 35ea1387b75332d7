"""Live session service: HTTP API, session state, and a thin client."""

from .app import app_from_config, create_app
from .config import ServiceConfig, service_config
from .schemas import (
    BottomView,
    FeedbackRequest,
    FeedbackResponse,
    RecommendationResponse,
    SessionSnapshot,
    StartSessionRequest,
    TopsPage,
)
from .state import Bundle, ServiceError, SessionStore, feature_swatch

__all__ = [
    "Bundle",
    "BottomView",
    "FeedbackRequest",
    "FeedbackResponse",
    "RecommendationResponse",
    "ServiceConfig",
    "ServiceError",
    "SessionSnapshot",
    "SessionStore",
    "StartSessionRequest",
    "TopsPage",
    "app_from_config",
    "create_app",
    "feature_swatch",
    "service_config",
]
