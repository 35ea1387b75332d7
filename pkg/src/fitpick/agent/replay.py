"""Experience replay: a fixed-capacity ring of transitions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation


@dataclass(frozen=True)
class Transition:
    """One environment step, with enough context to form a TD target.

    ``next_available`` marks which actions remain proposable from
    ``next_state``; the target max must skip already-proposed bottoms.
    """

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    next_available: np.ndarray
    done: bool


class ReplayMemory:
    """Keeps the most recent ``capacity`` transitions, overwriting oldest first."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ContractViolation(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ContractViolation(
                f"cannot sample {batch_size} from {len(self._items)} transitions"
            )
        indices = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in indices]
