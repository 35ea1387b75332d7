"""Sequence-to-item recommender used as a learned baseline.

The recurrent state starts at the anchoring top's feature vector, so the
hidden width equals the feature dimension.  Each step feeds the previous
feedback score, lifted from a scalar to feature width by a learned
linear map; a linear head turns the hidden state into one logit per
candidate.  Training is teacher-forced: for every (user, top, positive)
triple the model unrolls a fixed number of steps, always targeting the
positive bottom's cluster representative and always hearing that
representative's own feedback, with a cross-entropy loss at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agent import BASELINE_FEEDBACK, Policy, masked_argmax
from ..data import Dataset
from ..errors import ContractViolation, LoadError, TrainingError
from ..nn import DenseLayer, LstmCell, Optimizer, load_arrays, save_arrays
from ..preprocess import ClusterModel, candidate_hash

LSTM_KIND = "lstm-recommender"


@dataclass
class LstmConfig:
    unroll: int = 5
    epochs: int = 12
    learning_rate: float = 0.05
    batch_size: int = 16
    optimizer: str = "sgd"
    seed: int = 0


@dataclass
class LstmRecommender:
    cell: LstmCell
    lift: DenseLayer
    head: DenseLayer
    candidates: list[str]

    @classmethod
    def build(
        cls, feature_dim: int, candidates: list[str], rng: np.random.Generator
    ) -> "LstmRecommender":
        if not candidates:
            raise ContractViolation("candidate set is empty")
        return cls(
            cell=LstmCell.init(feature_dim, feature_dim, rng),
            lift=DenseLayer.init(1, feature_dim, "identity", rng),
            head=DenseLayer.init(feature_dim, len(candidates), "identity", rng),
            candidates=list(candidates),
        )

    @property
    def feature_dim(self) -> int:
        return self.cell.hidden_dim

    def parameters(self) -> list[np.ndarray]:
        return self.cell.parameters() + [
            self.lift.weights, self.lift.bias, self.head.weights, self.head.bias,
        ]

    def parameter_names(self) -> list[str]:
        return self.cell.parameter_names("cell") + [
            "lift.weights", "lift.bias", "head.weights", "head.bias",
        ]

    def step_logits(self, state, feedback: float):
        """Advance one step on a feedback score; returns (new_state, logits)."""
        x = self.lift.weights[:, 0] * feedback + self.lift.bias
        state = self.cell.step(state, x)
        return state, self.head.weights @ state.h + self.head.bias

    def save(self, path: str | Path) -> None:
        arrays = {
            "cell.w_x": self.cell.w_x,
            "cell.w_h": self.cell.w_h,
            "cell.bias": self.cell.bias,
            "lift.weights": self.lift.weights,
            "lift.bias": self.lift.bias,
            "head.weights": self.head.weights,
            "head.bias": self.head.bias,
        }
        extra = {
            "candidates": self.candidates,
            "candidate_hash": candidate_hash(self.candidates),
        }
        save_arrays(Path(path), LSTM_KIND, arrays, extra=extra)

    @classmethod
    def load(cls, path: str | Path) -> "LstmRecommender":
        arrays, extra = load_arrays(Path(path), LSTM_KIND)
        candidates = [str(c) for c in extra.get("candidates", [])]
        if not candidates:
            raise LoadError(f"{path} header is missing candidates")
        if candidate_hash(candidates) != extra.get("candidate_hash"):
            raise LoadError(f"{path}: candidate list does not match its digest")
        return cls(
            cell=LstmCell(arrays["cell.w_x"], arrays["cell.w_h"], arrays["cell.bias"]),
            lift=DenseLayer(arrays["lift.weights"], arrays["lift.bias"], "identity"),
            head=DenseLayer(arrays["head.weights"], arrays["head.bias"], "identity"),
            candidates=candidates,
        )


class LstmPolicy(Policy):
    """Greedy decoding over the recurrent recommender.

    The policy advances its hidden state inside ``select``, so it must
    see exactly one ``select`` per episode step; the episode runner's
    proposal pinning guarantees that.
    """

    def __init__(self, model: LstmRecommender):
        self.model = model
        self._state = None
        self._prev_feedback = BASELINE_FEEDBACK

    def begin(self, top_feature: np.ndarray) -> None:
        if top_feature.shape != (self.model.feature_dim,):
            raise ContractViolation(
                f"state width {top_feature.shape} does not match hidden width"
                f" {self.model.feature_dim}"
            )
        self._state = self.model.cell.initial_state(top_feature)
        self._prev_feedback = BASELINE_FEEDBACK

    def select(self, state, available, rng):
        if self._state is None:
            raise ContractViolation("policy used before begin()")
        self._state, logits = self.model.step_logits(self._state, self._prev_feedback)
        return masked_argmax(logits, available)

    def observe(self, action: int, feedback: float) -> None:
        self._prev_feedback = feedback


@dataclass(frozen=True)
class TeachingSample:
    top_feature: np.ndarray
    target: int
    teacher_feedback: float


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def sequence_loss(model: LstmRecommender, sample: TeachingSample, unroll: int) -> float:
    """Mean cross-entropy toward the target over the unrolled steps."""
    state = model.cell.initial_state(sample.top_feature)
    total = 0.0
    feedback = BASELINE_FEEDBACK
    for _ in range(unroll):
        state, logits = model.step_logits(state, feedback)
        total += -np.log(_softmax(logits)[sample.target])
        feedback = sample.teacher_feedback
    return float(total / unroll)


def sequence_gradients(
    model: LstmRecommender, sample: TeachingSample, unroll: int
) -> tuple[float, list[np.ndarray]]:
    """Loss and gradients in ``model.parameters()`` order, via full BPTT."""
    state = model.cell.initial_state(sample.top_feature)
    feedback = BASELINE_FEEDBACK
    caches = []
    total = 0.0
    for _ in range(unroll):
        x = model.lift.weights[:, 0] * feedback + model.lift.bias
        new_state, cache = model.cell.step_cached(state, x)
        logits = model.head.weights @ new_state.h + model.head.bias
        probs = _softmax(logits)
        total += -np.log(probs[sample.target])
        caches.append((cache, new_state.h, probs, feedback))
        state = new_state
        feedback = sample.teacher_feedback

    grads = [np.zeros_like(p) for p in model.parameters()]
    d_wx, d_wh, d_bias, d_lift_w, d_lift_b, d_head_w, d_head_b = (
        grads[0], grads[1], grads[2], grads[3], grads[4], grads[5], grads[6],
    )
    dh_next = np.zeros(model.feature_dim)
    dc_next = np.zeros(model.feature_dim)
    for cache, h, probs, fb in reversed(caches):
        d_logits = probs.copy()
        d_logits[sample.target] -= 1.0
        d_logits /= unroll
        d_head_w += np.outer(d_logits, h)
        d_head_b += d_logits
        dh = model.head.weights.T @ d_logits + dh_next
        dwx, dwh, db, dx, dh_prev, dc_prev = model.cell.backward_step(cache, dh, dc_next)
        d_wx += dwx
        d_wh += dwh
        d_bias += db
        d_lift_w[:, 0] += dx * fb
        d_lift_b += dx
        dh_next, dc_next = dh_prev, dc_prev
    return float(total / unroll), grads


def teaching_samples(
    dataset: Dataset,
    clusters: ClusterModel,
    scorer,
    normalizer,
) -> list[TeachingSample]:
    """One sample per train quadruple, targeting the positive's representative."""
    samples = []
    medoid_index = {mid: i for i, mid in enumerate(clusters.medoids)}
    for quad in dataset.quadruples["train"]:
        cluster = clusters.assignment.get(quad.pos)
        if cluster is None:
            raise ContractViolation(f"bottom {quad.pos!r} has no cluster assignment")
        medoid = clusters.medoids[cluster]
        top = dataset.garments[quad.top]
        raw = float(scorer(quad.user, top, dataset.garments[medoid]))
        samples.append(
            TeachingSample(
                top_feature=top.feature,
                target=medoid_index[medoid],
                teacher_feedback=normalizer.feedback(raw),
            )
        )
    return samples


def lstm_train(
    dataset: Dataset,
    clusters: ClusterModel,
    scorer,
    normalizer,
    config: LstmConfig,
) -> tuple[LstmRecommender, list[float]]:
    samples = teaching_samples(dataset, clusters, scorer, normalizer)
    if not samples:
        raise ContractViolation("no teaching samples; train split is empty")
    rng = np.random.default_rng(config.seed)
    model = LstmRecommender.build(dataset.feature_dim, clusters.candidate_set(), rng)
    optimizer = Optimizer(kind=config.optimizer, learning_rate=config.learning_rate)
    names = model.parameter_names()

    losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(samples))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            accum = [np.zeros_like(p) for p in model.parameters()]
            chunk = order[start : start + config.batch_size]
            for idx in chunk:
                loss, grads = sequence_gradients(model, samples[idx], config.unroll)
                if not np.isfinite(loss):
                    raise TrainingError(f"sequence loss diverged to {loss}")
                for acc, grad in zip(accum, grads):
                    acc += grad
                epoch_losses.append(loss)
            for acc in accum:
                acc /= len(chunk)
            optimizer.step(model.parameters(), accum, names)
        losses.append(float(np.mean(epoch_losses)))
    return model, losses
