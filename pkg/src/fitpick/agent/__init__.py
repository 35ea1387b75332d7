from .schedule import EpsilonSchedule
from .replay import ReplayMemory, Transition
from .episode import (
    BASELINE_FEEDBACK,
    FEEDBACK_GRID,
    EpisodeLog,
    EpisodeRunner,
    EpisodeStep,
    load_episode_logs,
    quantize_feedback,
    run_episode,
    save_episode_logs,
)
from .policy import Policy, QPolicy, RandomPolicy, masked_argmax
from .qnet import QNetwork
from .dqn import (
    DqnConfig,
    TrainStats,
    td_gradients,
    td_loss,
    train_dqn,
    training_pairs,
)

__all__ = [
    "EpsilonSchedule",
    "ReplayMemory",
    "Transition",
    "BASELINE_FEEDBACK",
    "FEEDBACK_GRID",
    "EpisodeLog",
    "EpisodeRunner",
    "EpisodeStep",
    "load_episode_logs",
    "quantize_feedback",
    "run_episode",
    "save_episode_logs",
    "Policy",
    "QPolicy",
    "RandomPolicy",
    "masked_argmax",
    "QNetwork",
    "DqnConfig",
    "TrainStats",
    "td_gradients",
    "td_loss",
    "train_dqn",
    "training_pairs",
]
