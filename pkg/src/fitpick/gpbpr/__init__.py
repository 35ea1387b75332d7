from .model import GpbprConfig, GpbprModel, bpr_gradients, bpr_loss
from .normalize import ScoreNormalizer, fit_normalizer, nearest_rank
from .train import build_model, ranking_accuracy, train_bpr
from .io import load_proxy, save_proxy

__all__ = [
    "GpbprConfig",
    "GpbprModel",
    "bpr_gradients",
    "bpr_loss",
    "ScoreNormalizer",
    "fit_normalizer",
    "nearest_rank",
    "build_model",
    "ranking_accuracy",
    "train_bpr",
    "load_proxy",
    "save_proxy",
]
