from .lstm import (
    LstmConfig,
    LstmPolicy,
    LstmRecommender,
    TeachingSample,
    lstm_train,
    sequence_gradients,
    sequence_loss,
    teaching_samples,
)
from .noexplore import no_exploration_train

__all__ = [
    "LstmConfig",
    "LstmPolicy",
    "LstmRecommender",
    "TeachingSample",
    "lstm_train",
    "sequence_gradients",
    "sequence_loss",
    "teaching_samples",
    "no_exploration_train",
]
