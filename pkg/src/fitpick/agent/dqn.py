"""Q-learning trainer for the interactive recommender.

Episodes are generated against a frozen scorer (the user proxy, or any
callable with the same shape) under an epsilon-greedy policy whose
epsilon decays per epoch.  Steps land in replay memory; each step also
draws one minibatch and takes a TD(0) step toward a periodically synced
target network.  Bottoms already proposed in an episode are excluded
both from action selection and from the target-side max, so the value
estimate never counts an impossible repeat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..errors import ContractViolation, TrainingError
from ..nn import Mlp, Optimizer
from .episode import EpisodeRunner
from .policy import QPolicy
from .qnet import QNetwork
from .replay import ReplayMemory, Transition
from .schedule import EpsilonSchedule


@dataclass
class DqnConfig:
    hidden_dims: tuple[int, ...] = (64, 64)
    gamma: float = 0.9
    batch_size: int = 64
    replay_capacity: int = 10_000
    target_sync: int = 100
    n_steps: int = 10
    epochs: int = 30
    episodes_per_epoch: int | None = None
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    seed: int = 0


@dataclass
class TrainStats:
    final_feedback: list[float] = field(default_factory=list)
    mean_return: list[float] = field(default_factory=list)
    epsilon: list[float] = field(default_factory=list)
    td_loss: list[float] = field(default_factory=list)
    updates: int = 0


def _batch_arrays(batch: list[Transition]):
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch])
    rewards = np.array([t.reward for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    next_available = np.stack([t.next_available for t in batch])
    done = np.array([t.done for t in batch])
    return states, actions, rewards, next_states, next_available, done


def _targets(
    target_mlp: Mlp,
    rewards: np.ndarray,
    next_states: np.ndarray,
    next_available: np.ndarray,
    done: np.ndarray,
    gamma: float,
) -> np.ndarray:
    next_q = target_mlp.forward(next_states)
    masked = np.where(next_available, next_q, -np.inf)
    best = masked.max(axis=1)
    best = np.where(done, 0.0, best)
    if not np.isfinite(best).all():
        raise TrainingError("non-terminal transition with no available actions")
    return rewards + gamma * best


def td_loss(qmlp: Mlp, target_mlp: Mlp, batch: list[Transition], gamma: float) -> float:
    """Mean squared TD error of the batch against the frozen target."""
    states, actions, rewards, next_states, next_available, done = _batch_arrays(batch)
    q = qmlp.forward(states)
    predicted = q[np.arange(len(batch)), actions]
    y = _targets(target_mlp, rewards, next_states, next_available, done, gamma)
    return float(np.mean((predicted - y) ** 2))


def td_gradients(
    qmlp: Mlp, target_mlp: Mlp, batch: list[Transition], gamma: float
) -> tuple[float, list[np.ndarray]]:
    """TD loss and its gradients for the online network only."""
    states, actions, rewards, next_states, next_available, done = _batch_arrays(batch)
    q = qmlp.forward_cached(states)
    rows = np.arange(len(batch))
    predicted = q[rows, actions]
    y = _targets(target_mlp, rewards, next_states, next_available, done, gamma)
    diff = predicted - y
    loss = float(np.mean(diff**2))
    if not np.isfinite(loss):
        raise TrainingError(f"TD loss diverged to {loss}")
    grad_q = np.zeros_like(q)
    grad_q[rows, actions] = 2.0 * diff / len(batch)
    layer_grads, _ = qmlp.backward(grad_q)
    return loss, qmlp.grads_as_list(layer_grads)


def training_pairs(dataset: Dataset) -> list[tuple[str, str]]:
    """Distinct (user, top) anchors of the train split, in stable order."""
    return sorted({(q.user, q.top) for q in dataset.quadruples["train"]})


def train_dqn(
    dataset: Dataset,
    scorer,
    normalizer,
    candidates: list[str],
    config: DqnConfig,
) -> tuple[QNetwork, TrainStats]:
    pairs = training_pairs(dataset)
    if not pairs:
        raise ContractViolation("no (user, top) training pairs")
    rng = np.random.default_rng(config.seed)
    qnet = QNetwork.build(
        feature_dim=dataset.feature_dim,
        candidates=candidates,
        hidden_dims=config.hidden_dims,
        gamma=config.gamma,
        schedule=config.schedule,
        rng=rng,
    )
    target = qnet.clone_mlp()
    memory = ReplayMemory(config.replay_capacity)
    optimizer = Optimizer(kind=config.optimizer, learning_rate=config.learning_rate)
    names = qnet.mlp.parameter_names("q")
    stats = TrainStats()

    for epoch in range(config.epochs):
        epsilon = config.schedule.value(epoch)
        order = rng.permutation(len(pairs))
        if config.episodes_per_epoch is not None:
            order = order[: config.episodes_per_epoch]
        policy = QPolicy(qnet, epsilon=epsilon)
        finals: list[float] = []
        returns: list[float] = []
        losses: list[float] = []
        for pair_idx in order:
            user, top_id = pairs[pair_idx]
            runner = EpisodeRunner(
                policy, user, dataset.garments[top_id], dataset.garments,
                candidates, config.n_steps,
            )
            while not runner.done:
                action = runner.next_action(rng)
                state_before = runner.state.copy()
                top = dataset.garments[top_id]
                bottom = dataset.garments[candidates[action]]
                raw = float(scorer(user, top, bottom))
                step = runner.apply_feedback(normalizer.feedback(raw), raw_score=raw)
                memory.push(
                    Transition(
                        state=state_before,
                        action=action,
                        reward=step.reward,
                        next_state=runner.state.copy(),
                        next_available=runner.available.copy(),
                        done=runner.done,
                    )
                )
                if len(memory) >= config.batch_size:
                    batch = memory.sample(config.batch_size, rng)
                    loss, grads = td_gradients(qnet.mlp, target, batch, config.gamma)
                    optimizer.step(qnet.mlp.parameters(), grads, names)
                    stats.updates += 1
                    losses.append(loss)
                    if stats.updates % config.target_sync == 0:
                        target = qnet.clone_mlp()
            finals.append(runner.log.final_feedback())
            returns.append(runner.log.episode_return())
        stats.final_feedback.append(float(np.mean(finals)))
        stats.mean_return.append(float(np.mean(returns)))
        stats.epsilon.append(epsilon)
        stats.td_loss.append(float(np.mean(losses)) if losses else float("nan"))
    return qnet, stats
