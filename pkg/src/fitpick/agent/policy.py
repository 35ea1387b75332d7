"""Action-selection policies over a shared episode interface.

A policy may keep per-episode state: ``begin`` resets it with the
anchoring top's feature, ``select`` picks an action index among the
still-available candidates, and ``observe`` reports the feedback the
chosen action earned.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractViolation
from .qnet import QNetwork


class Policy:
    def begin(self, top_feature: np.ndarray) -> None:
        pass

    def select(
        self, state: np.ndarray, available: np.ndarray, rng: np.random.Generator | None
    ) -> int:
        raise NotImplementedError

    def observe(self, action: int, feedback: float) -> None:
        pass


def masked_argmax(values: np.ndarray, available: np.ndarray) -> int:
    """Index of the best available entry; unavailable ones rank below everything."""
    if not available.any():
        raise ContractViolation("no available actions")
    masked = np.where(available, values, -np.inf)
    return int(np.argmax(masked))


class QPolicy(Policy):
    """Epsilon-greedy over network action values.

    With ``epsilon == 0`` selection is fully deterministic and never
    touches the generator, so greedy runs need no RNG at all.
    """

    def __init__(self, qnet: QNetwork, epsilon: float = 0.0):
        if not 0.0 <= epsilon <= 1.0:
            raise ContractViolation(f"epsilon must lie in [0, 1], got {epsilon}")
        self.qnet = qnet
        self.epsilon = epsilon

    def select(
        self, state: np.ndarray, available: np.ndarray, rng: np.random.Generator | None
    ) -> int:
        if self.epsilon > 0.0:
            if rng is None:
                raise ContractViolation("exploring policy needs an RNG")
            if rng.random() < self.epsilon:
                options = np.flatnonzero(available)
                return int(options[rng.integers(len(options))])
        return masked_argmax(self.qnet.q_values(state), available)


class RandomPolicy(Policy):
    def select(
        self, state: np.ndarray, available: np.ndarray, rng: np.random.Generator | None
    ) -> int:
        if rng is None:
            raise ContractViolation("random policy needs an RNG")
        options = np.flatnonzero(available)
        if len(options) == 0:
            raise ContractViolation("no available actions")
        return int(options[rng.integers(len(options))])
