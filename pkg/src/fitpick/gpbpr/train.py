"""Pairwise ranking trainer for the compatibility scorer."""

from __future__ import annotations

import numpy as np

from ..data import Dataset
from ..errors import ContractViolation, TrainingError
from ..nn import Optimizer
from .model import GpbprConfig, GpbprModel, bpr_gradients, bpr_loss


def build_model(dataset: Dataset, config: GpbprConfig) -> GpbprModel:
    bottoms = [g.id for g in dataset.bottoms()]
    return GpbprModel(
        config=config,
        feature_dim=dataset.feature_dim,
        context_dim=dataset.context_dim,
        users=dataset.users,
        bottoms=bottoms,
    )


def train_bpr(dataset: Dataset, config: GpbprConfig) -> tuple[GpbprModel, list[float]]:
    """Fit on the train split; returns the model and per-epoch mean losses."""
    train = dataset.quadruples["train"]
    if not train:
        raise ContractViolation("train split is empty")
    model = build_model(dataset, config)
    optimizer = Optimizer(kind=config.optimizer, learning_rate=config.learning_rate)
    names = model.parameter_names()
    rng = np.random.default_rng(config.seed + 1)

    losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(train), config.batch_size):
            batch = [train[i] for i in order[start : start + config.batch_size]]
            loss, grads = bpr_gradients(model, batch, dataset.garments)
            if not np.isfinite(loss):
                raise TrainingError(f"ranking loss diverged to {loss}")
            optimizer.step(model.parameters(), grads, names)
            epoch_losses.append(loss)
        losses.append(float(np.mean(epoch_losses)))
    return model, losses


def ranking_accuracy(model: GpbprModel, dataset: Dataset, split: str) -> float:
    """Fraction of quadruples whose positive outscores its negative.

    Ties count half, so a constant scorer sits at 0.5 exactly.
    """
    quads = dataset.quadruples.get(split, [])
    if not quads:
        raise ContractViolation(f"split {split!r} is empty")
    wins = 0.0
    for quad in quads:
        top = dataset.garments[quad.top]
        pos = model.score(quad.user, top, dataset.garments[quad.pos])
        neg = model.score(quad.user, top, dataset.garments[quad.neg])
        if pos > neg:
            wins += 1.0
        elif pos == neg:
            wins += 0.5
    return wins / len(quads)


__all__ = ["build_model", "train_bpr", "ranking_accuracy", "bpr_loss"]
