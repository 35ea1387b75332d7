"""Live session state over shared frozen artifacts.

The loaded models are read-only and shared by every session; each
session owns its episode runner and a lock serializing its mutations.
Sessions live in memory with TTL eviction; completed episodes are
appended to a JSON-lines journal so nothing is lost when they expire.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from ..agent.episode import EpisodeRunner
from ..agent.policy import Policy, QPolicy
from ..agent.qnet import QNetwork
from ..baselines.lstm import LstmPolicy, LstmRecommender
from ..data.manifest import load_manifest
from ..data.schema import Dataset, Garment
from ..errors import FitpickError, LoadError
from ..gpbpr.io import load_proxy
from ..gpbpr.model import GpbprModel
from ..gpbpr.normalize import ScoreNormalizer
from ..pipeline import peek_kind
from ..preprocess.cluster import ClusterModel, candidate_hash, load_clusters
from .config import ServiceConfig


class ServiceError(FitpickError):
    """An API-level failure with an HTTP status and a stable error code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def feature_swatch(feature: np.ndarray) -> str:
    """Short stable digest of a feature vector, for placeholder rendering.

    Hashes the f32 wire form so the swatch matches what a checkpoint
    round-trip of the same vector would produce.
    """
    blob = np.ascontiguousarray(feature, dtype="<f4").tobytes()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class Bundle:
    """Everything the service scores and recommends with, loaded once."""

    dataset: Dataset
    proxy: GpbprModel
    normalizer: ScoreNormalizer
    clusters: ClusterModel
    candidates: list[str]
    policy_factory: Callable[[], Policy]
    tops: list[Garment]

    @classmethod
    def load(cls, config: ServiceConfig) -> "Bundle":
        dataset = load_manifest(config.dataset)
        proxy, normalizer = load_proxy(config.proxy)
        if normalizer is None:
            raise LoadError(f"proxy at {config.proxy} was saved without a score normalizer")
        if proxy.feature_dim != dataset.feature_dim:
            raise LoadError(
                f"proxy expects {proxy.feature_dim}-d features,"
                f" dataset provides {dataset.feature_dim}-d"
            )
        clusters = load_clusters(config.clusters)
        candidates = clusters.candidate_set()
        bottoms = {g.id for g in dataset.bottoms()}
        missing = [c for c in candidates if c not in bottoms]
        if missing:
            raise LoadError(f"clustering medoids missing from dataset: {missing[:5]}")

        kind = peek_kind(config.agent)
        expected = candidate_hash(candidates)
        if kind == "mlp":
            qnet = QNetwork.load(config.agent)
            if candidate_hash(qnet.candidates) != expected:
                raise LoadError(
                    f"{config.agent} was trained on a different candidate set"
                    " than this clustering"
                )
            factory: Callable[[], Policy] = lambda: QPolicy(qnet, epsilon=0.0)
        elif kind == "lstm-recommender":
            model = LstmRecommender.load(config.agent)
            if candidate_hash(model.candidates) != expected:
                raise LoadError(
                    f"{config.agent} was trained on a different candidate set"
                    " than this clustering"
                )
            factory = lambda: LstmPolicy(model)
        else:
            raise LoadError(f"{config.agent}: kind {kind!r} is not a recommender checkpoint")

        tops = sorted(dataset.tops(), key=lambda g: g.id)
        return cls(
            dataset=dataset,
            proxy=proxy,
            normalizer=normalizer,
            clusters=clusters,
            candidates=candidates,
            policy_factory=factory,
            tops=tops,
        )

    def bottom_payload(self, bottom_id: str) -> dict:
        garment = self.dataset.garments[bottom_id]
        return {
            "id": garment.id,
            "cluster": self.clusters.assignment[garment.id],
            "image_url": garment.image_url,
            "swatch": feature_swatch(garment.feature),
        }


@dataclass
class Session:
    session_id: str
    user_tag: str | None
    top_id: str
    mode: str
    runner: EpisodeRunner
    lock: threading.RLock = field(default_factory=threading.RLock)
    touched: float = field(default_factory=time.monotonic)
    stopped: bool = False
    replies: dict[str, object] = field(default_factory=dict)
    journaled: bool = False

    @property
    def done(self) -> bool:
        return self.stopped or self.runner.done

    @property
    def status(self) -> str:
        return "done" if self.done else "active"

    def touch(self) -> None:
        self.touched = time.monotonic()


class SessionStore:
    """Sessions by id, with capacity limits and idle-TTL eviction."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self._sessions: dict[str, Session] = {}
        self._lock = threading.RLock()
        self._journal_lock = threading.Lock()

    def _evict_expired(self) -> None:
        now = time.monotonic()
        expired = [
            sid
            for sid, s in self._sessions.items()
            if now - s.touched > self.config.session_ttl
        ]
        for sid in expired:
            session = self._sessions.pop(sid)
            self.journal(session)

    def active_count(self) -> int:
        with self._lock:
            self._evict_expired()
            return sum(1 for s in self._sessions.values() if not s.done)

    def create(self, user_tag: str | None, top_id: str, mode: str, runner) -> Session:
        with self._lock:
            self._evict_expired()
            active = sum(1 for s in self._sessions.values() if not s.done)
            if active >= self.config.max_sessions:
                raise ServiceError(
                    503, "capacity", f"at most {self.config.max_sessions} concurrent sessions"
                )
            session = Session(
                session_id=uuid.uuid4().hex,
                user_tag=user_tag,
                top_id=top_id,
                mode=mode,
                runner=runner,
            )
            self._sessions[session.session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._evict_expired()
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
        session.touch()
        return session

    def journal(self, session: Session) -> None:
        """Append a completed episode to the journal file, once."""
        if self.config.journal is None or session.journaled or not session.runner.log.steps:
            return
        entry = {
            "session_id": session.session_id,
            "user_tag": session.user_tag,
            "top_id": session.top_id,
            "mode": session.mode,
            "status": session.status,
            "completed": datetime.now(timezone.utc).isoformat(),
            "steps": [
                {
                    "step": s.step,
                    "action": s.action,
                    "bottom": s.bottom,
                    "feedback": s.feedback,
                    "reward": s.reward,
                    "raw_score": s.raw_score,
                }
                for s in session.runner.log.steps
            ],
        }
        path = Path(self.config.journal)
        with self._journal_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a") as fh:
                fh.write(json.dumps(entry) + "\n")
        session.journaled = True
