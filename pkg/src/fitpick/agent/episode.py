"""Recommendation episodes: state updates, rewards, and step logs.

An episode fixes a user and a top.  The state starts as the top's
feature vector; after each recommended bottom the state moves by the
feedback-weighted bottom feature, so well-received bottoms pull the
query toward themselves.  The reward of a step is the change in
feedback score, against a neutral 0.5 before the first step.

Feedback enters on a dyadic grid (multiples of 2^-20).  Grid scores make
every reward difference and running sum exact in float64, which the
bookkeeping identities in the tests rely on; a 2^-20 grid is far below
any behavioral resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import Garment
from ..errors import ContractViolation, LoadError, StateError

FEEDBACK_GRID = 1 << 20
BASELINE_FEEDBACK = 0.5


def quantize_feedback(score: float) -> float:
    """Snap a unit-interval score to the nearest grid point."""
    if not 0.0 <= score <= 1.0:
        raise ContractViolation(f"feedback must lie in [0, 1], got {score}")
    if math.isnan(score):
        raise ContractViolation("feedback is NaN")
    return round(score * FEEDBACK_GRID) / FEEDBACK_GRID


@dataclass(frozen=True)
class EpisodeStep:
    step: int
    action: int
    bottom: str
    feedback: float
    reward: float
    raw_score: float | None = None


@dataclass
class EpisodeLog:
    user: str
    top: str
    steps: list[EpisodeStep] = field(default_factory=list)

    def final_feedback(self) -> float:
        if not self.steps:
            raise StateError("episode has no steps")
        return self.steps[-1].feedback

    def episode_return(self) -> float:
        return sum(step.reward for step in self.steps)

    def bottoms(self) -> list[str]:
        return [step.bottom for step in self.steps]


class EpisodeRunner:
    """Drives one episode step by step.

    ``next_action`` proposes (and pins) a bottom; ``apply_feedback``
    consumes the pending proposal with a unit-interval score.  The same
    runner backs both the offline loops and the live session service, so
    a score sequence produces bit-identical states in either path.
    """

    def __init__(
        self,
        policy,
        user: str,
        top: Garment,
        garments: dict[str, Garment],
        candidates: list[str],
        n_steps: int,
    ):
        if top.category != "top":
            raise ContractViolation(f"episode anchor {top.id!r} is not a top")
        if n_steps < 1:
            raise ContractViolation(f"n_steps must be >= 1, got {n_steps}")
        if n_steps > len(candidates):
            raise ContractViolation(
                f"cannot take {n_steps} distinct actions from {len(candidates)} candidates"
            )
        for cid in candidates:
            garment = garments.get(cid)
            if garment is None or garment.category != "bottom":
                raise ContractViolation(f"candidate {cid!r} is not a known bottom")
        self.policy = policy
        self.user = user
        self.top = top
        self.garments = garments
        self.candidates = list(candidates)
        self.n_steps = n_steps
        self.state = top.feature.copy()
        self.available = np.ones(len(candidates), dtype=bool)
        self.prev_feedback = BASELINE_FEEDBACK
        self.log = EpisodeLog(user=user, top=top.id)
        self._pending: int | None = None
        policy.begin(top.feature)

    @property
    def done(self) -> bool:
        return len(self.log.steps) >= self.n_steps

    @property
    def pending_action(self) -> int | None:
        return self._pending

    def next_action(self, rng: np.random.Generator | None = None) -> int:
        """Pick the next bottom; repeated calls return the pinned choice."""
        if self.done:
            raise StateError("episode is finished")
        if self._pending is None:
            action = int(self.policy.select(self.state, self.available, rng))
            if not 0 <= action < len(self.candidates):
                raise ContractViolation(f"policy chose out-of-range action {action}")
            if not self.available[action]:
                raise ContractViolation(
                    f"policy repeated bottom {self.candidates[action]!r}"
                )
            self._pending = action
        return self._pending

    def apply_feedback(self, score: float, raw_score: float | None = None) -> EpisodeStep:
        """Record feedback for the pending proposal and advance the state."""
        if self._pending is None:
            raise StateError("no pending proposal; call next_action first")
        action = self._pending
        self._pending = None
        feedback = quantize_feedback(score)
        bottom = self.garments[self.candidates[action]]
        step = EpisodeStep(
            step=len(self.log.steps),
            action=action,
            bottom=bottom.id,
            feedback=feedback,
            reward=feedback - self.prev_feedback,
            raw_score=raw_score,
        )
        self.available[action] = False
        self.log.steps.append(step)
        self.policy.observe(action, feedback)
        self.state = self.state + feedback * bottom.feature
        self.prev_feedback = feedback
        return step


def run_episode(
    policy,
    user: str,
    top: Garment,
    *,
    garments: dict[str, Garment],
    candidates: list[str],
    scorer,
    normalizer,
    n_steps: int = 10,
    rng: np.random.Generator | None = None,
) -> EpisodeLog:
    """Run a full episode scored by ``scorer(user, top, bottom) -> raw``."""
    runner = EpisodeRunner(policy, user, top, garments, candidates, n_steps)
    while not runner.done:
        action = runner.next_action(rng)
        bottom = garments[candidates[action]]
        raw = float(scorer(user, top, bottom))
        runner.apply_feedback(normalizer.feedback(raw), raw_score=raw)
    return runner.log


def save_episode_logs(logs: list[EpisodeLog], path: str | Path) -> None:
    """One JSON object per line; a step carries its episode index."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for episode, log in enumerate(logs):
            for step in log.steps:
                fh.write(
                    json.dumps(
                        {
                            "episode": episode,
                            "user": log.user,
                            "top": log.top,
                            "step": step.step,
                            "action": step.action,
                            "bottom": step.bottom,
                            "feedback": step.feedback,
                            "reward": step.reward,
                            "raw_score": step.raw_score,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def load_episode_logs(path: str | Path) -> list[EpisodeLog]:
    path = Path(path)
    if not path.exists():
        raise LoadError(f"missing episode log {path}")
    logs: dict[int, EpisodeLog] = {}
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}:{line_no}: bad JSON: {exc}") from exc
        episode = row["episode"]
        log = logs.setdefault(episode, EpisodeLog(user=row["user"], top=row["top"]))
        if (log.user, log.top) != (row["user"], row["top"]):
            raise LoadError(f"{path}:{line_no}: episode {episode} changes identity")
        if row["step"] != len(log.steps):
            raise LoadError(
                f"{path}:{line_no}: episode {episode} step {row['step']} out of order"
            )
        log.steps.append(
            EpisodeStep(
                step=row["step"],
                action=row["action"],
                bottom=row["bottom"],
                feedback=row["feedback"],
                reward=row["reward"],
                raw_score=row.get("raw_score"),
            )
        )
    return [logs[i] for i in sorted(logs)]
