"""Greedy-from-the-start ablation of the main trainer.

Identical training loop, but epsilon is pinned to zero so the policy
only ever exploits its current value estimates.  Kept as a separate
entry point so evaluation runs can name it explicitly.
"""

from __future__ import annotations

from dataclasses import replace

from ..agent import DqnConfig, EpsilonSchedule, QNetwork, TrainStats, train_dqn
from ..data import Dataset


def no_exploration_train(
    dataset: Dataset,
    scorer,
    normalizer,
    candidates: list[str],
    config: DqnConfig,
) -> tuple[QNetwork, TrainStats]:
    greedy = replace(config, schedule=EpsilonSchedule(start=0.0, end=0.0, decay=config.schedule.decay))
    return train_dqn(dataset, scorer, normalizer, candidates, greedy)
