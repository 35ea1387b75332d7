"""Mapping raw compatibility scores onto the unit feedback scale.

Raw scores are unbounded, so the feedback loop rescales them against the
empirical spread of known-good outfits: the 5th and 95th nearest-rank
percentiles of validation positive-triple scores become 0 and 1, and
everything is clamped into [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..data import Dataset
from ..errors import ContractViolation, TrainingError
from .model import GpbprModel

MIN_FIT_QUADRUPLES = 20


def nearest_rank(sorted_values: list[float], percentile: float) -> float:
    """Smallest element with at least ``percentile`` percent at or below it."""
    if not sorted_values:
        raise ContractViolation("cannot take a percentile of nothing")
    if not 0 < percentile <= 100:
        raise ContractViolation(f"percentile must be in (0, 100], got {percentile}")
    rank = math.ceil(percentile / 100.0 * len(sorted_values))
    return sorted_values[rank - 1]


@dataclass(frozen=True)
class ScoreNormalizer:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise TrainingError(
                f"degenerate score spread: lo {self.lo} must be < hi {self.hi}"
            )

    def feedback(self, raw: float) -> float:
        """Clamp the affinely rescaled raw score into [0, 1]."""
        value = (raw - self.lo) / (self.hi - self.lo)
        return min(1.0, max(0.0, value))


def fit_normalizer(
    model: GpbprModel,
    dataset: Dataset,
    split: str = "val",
    lo_percentile: float = 5.0,
    hi_percentile: float = 95.0,
) -> ScoreNormalizer:
    quads = dataset.quadruples.get(split, [])
    if len(quads) < MIN_FIT_QUADRUPLES:
        raise TrainingError(
            f"normalizer needs at least {MIN_FIT_QUADRUPLES} quadruples in"
            f" {split!r}, got {len(quads)}"
        )
    scores = sorted(
        model.score(q.user, dataset.garments[q.top], dataset.garments[q.pos])
        for q in quads
    )
    return ScoreNormalizer(
        lo=nearest_rank(scores, lo_percentile),
        hi=nearest_rank(scores, hi_percentile),
    )
