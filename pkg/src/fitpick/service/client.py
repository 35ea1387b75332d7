"""Minimal HTTP client for driving a live session from scripts.

Speaks only the documented JSON API, so anything it can do a browser
client can do too.  ``drive_episode`` runs a whole proxy-mode episode
and returns the server's final snapshot.
"""

from __future__ import annotations

import uuid

import httpx

from ..errors import FitpickError


class RemoteError(FitpickError):
    """The service answered with an error body."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"[{status} {code}] {message}")
        self.status = status
        self.code = code


def _check(response: httpx.Response) -> dict:
    body = response.json()
    if response.status_code >= 400:
        raise RemoteError(
            response.status_code,
            str(body.get("code", "error")),
            str(body.get("message", response.text)),
        )
    return body


class SessionClient:
    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(base_url=self.base_url, timeout=30.0)

    def health(self) -> dict:
        return _check(self.client.get("/healthz"))

    def tops(self, offset: int = 0, limit: int | None = None) -> dict:
        params = {"offset": offset}
        if limit is not None:
            params["limit"] = limit
        return _check(self.client.get("/catalog/tops", params=params))

    def start(self, top_id: str, mode: str = "proxy", user_tag: str | None = None) -> dict:
        payload = {"top_id": top_id, "mode": mode}
        if user_tag is not None:
            payload["user_tag"] = user_tag
        return _check(self.client.post("/sessions", json=payload))

    def feedback(
        self,
        session_id: str,
        score: float | None = None,
        idempotency_key: str | None = None,
    ) -> dict:
        payload: dict = {}
        if score is not None:
            payload["score"] = score
        if idempotency_key is not None:
            payload["idempotency_key"] = idempotency_key
        return _check(self.client.post(f"/sessions/{session_id}/feedback", json=payload))

    def snapshot(self, session_id: str) -> dict:
        return _check(self.client.get(f"/sessions/{session_id}"))

    def drive_episode(self, top_id: str, user_tag: str, mode: str = "proxy") -> dict:
        """Start a session and advance it until done; returns the snapshot.

        Each advance carries a fresh idempotency key, mirroring how a UI
        should guard against double submission.
        """
        started = self.start(top_id, mode=mode, user_tag=user_tag)
        session_id = started["session_id"]
        done = False
        while not done:
            reply = self.feedback(session_id, idempotency_key=uuid.uuid4().hex)
            done = reply["done"]
        return self.snapshot(session_id)
