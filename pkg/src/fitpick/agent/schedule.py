"""Exploration-rate decay for epsilon-greedy action selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ContractViolation


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exponential decay from ``start`` to ``end`` with time constant ``decay``.

    ``value(i)`` is evaluated per training epoch, so exploration fades as
    the run progresses independent of how many episodes an epoch holds.
    """

    start: float = 0.9
    end: float = 0.25
    decay: float = 200.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.end <= self.start <= 1.0:
            raise ContractViolation(
                f"need 0 <= end <= start <= 1, got start={self.start} end={self.end}"
            )
        if self.decay <= 0:
            raise ContractViolation(f"decay must be positive, got {self.decay}")

    def value(self, epoch: int) -> float:
        if epoch < 0:
            raise ContractViolation(f"epoch must be >= 0, got {epoch}")
        return self.end + (self.start - self.end) * math.exp(-epoch / self.decay)
