"""Episode-level quality metrics.

Every evaluation episode descends from a held-out quadruple, which
supplies two reference points: the raw proxy score of the bottom the
user actually wore (positive) and of the one they passed over
(negative).  An episode "beats the negative" when its best recommended
bottom outscores the negative reference strictly; likewise for the
positive.  Metrics use raw proxy scores throughout; the normalized
feedback scale exists only for the interaction loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..agent import EpisodeLog
from ..errors import ContractViolation


@dataclass(frozen=True)
class EpisodeEval:
    log: EpisodeLog
    pos_score: float
    neg_score: float

    def raw_scores(self) -> list[float]:
        scores = []
        for step in self.log.steps:
            if step.raw_score is None:
                raise ContractViolation(
                    f"episode ({self.log.user}, {self.log.top}) step {step.step}"
                    " lacks a raw score; metrics need proxy-scored episodes"
                )
            scores.append(step.raw_score)
        return scores


@dataclass
class MetricsReport:
    policy: str
    episodes: int
    n_steps: int
    hit_negative: float
    hit_positive: float
    hit_negative_at: list[float] = field(default_factory=list)
    hit_positive_at: list[float] = field(default_factory=list)
    mean_score_at: list[float] = field(default_factory=list)
    distinct_bottoms: int = 0
    mean_above_negative: float = 0.0
    mean_final_feedback: float = 0.0


def hit_rate_at(evals: list[EpisodeEval], t: int, against: str) -> float:
    """Fraction of episodes whose best raw score in the first ``t`` steps
    strictly exceeds the chosen reference."""
    if t < 1:
        raise ContractViolation(f"prefix length must be >= 1, got {t}")
    hits = 0
    for ev in evals:
        reference = ev.neg_score if against == "negative" else ev.pos_score
        prefix = ev.raw_scores()[:t]
        if prefix and max(prefix) > reference:
            hits += 1
    return hits / len(evals)


def aggregate(policy: str, evals: list[EpisodeEval]) -> MetricsReport:
    if not evals:
        raise ContractViolation("cannot aggregate zero episodes")
    n_steps = max(len(ev.log.steps) for ev in evals)
    report = MetricsReport(
        policy=policy,
        episodes=len(evals),
        n_steps=n_steps,
        hit_negative=hit_rate_at(evals, n_steps, "negative"),
        hit_positive=hit_rate_at(evals, n_steps, "positive"),
    )
    for t in range(1, n_steps + 1):
        report.hit_negative_at.append(hit_rate_at(evals, t, "negative"))
        report.hit_positive_at.append(hit_rate_at(evals, t, "positive"))
        step_scores = [
            ev.raw_scores()[t - 1] for ev in evals if len(ev.log.steps) >= t
        ]
        report.mean_score_at.append(float(np.mean(step_scores)))

    seen: set[str] = set()
    above_counts = []
    for ev in evals:
        seen.update(ev.log.bottoms())
        above_counts.append(
            sum(1 for score in ev.raw_scores() if score > ev.neg_score)
        )
    report.distinct_bottoms = len(seen)
    report.mean_above_negative = float(np.mean(above_counts))
    report.mean_final_feedback = float(
        np.mean([ev.log.final_feedback() for ev in evals])
    )
    return report
