"""Recurrent recommender baseline and the no-exploration ablation."""

import math

import numpy as np
import pytest

from fitpick.agent import (
    DqnConfig,
    EpsilonSchedule,
    QNetwork,
    QPolicy,
    RandomPolicy,
    run_episode,
)
from fitpick.baselines import (
    LstmConfig,
    LstmPolicy,
    LstmRecommender,
    TeachingSample,
    lstm_train,
    no_exploration_train,
    sequence_gradients,
    sequence_loss,
    teaching_samples,
)
from fitpick.data import Garment, OutfitQuadruple, SyntheticWorld, generate_synthetic, split
from fitpick.errors import ContractViolation, LoadError
from fitpick.gpbpr import ScoreNormalizer
from fitpick.nn import check_gradients
from fitpick.preprocess import ClusterModel


def zeroed_model(feature_dim=3, n_actions=3) -> LstmRecommender:
    model = LstmRecommender.build(
        feature_dim, [f"b{i}" for i in range(n_actions)], np.random.default_rng(0)
    )
    for param in model.parameters():
        param[:] = 0.0
    return model


class TestForwardPass:
    def test_zero_weights_leave_only_head_bias(self):
        # All-zero gates give h = 0 after one step, so logits equal the bias.
        model = zeroed_model()
        model.head.bias[:] = [0.1, 0.9, 0.3]
        policy = LstmPolicy(model)
        policy.begin(np.array([5.0, -2.0, 7.0]))
        assert policy.select(None, np.array([True, True, True]), None) == 1
        policy.begin(np.array([5.0, -2.0, 7.0]))
        assert policy.select(None, np.array([True, False, True]), None) == 2

    def test_uniform_logits_cost_log_n(self):
        model = zeroed_model(n_actions=4)
        sample = TeachingSample(
            top_feature=np.array([1.0, 2.0, 3.0]), target=2, teacher_feedback=0.8
        )
        for unroll in (1, 3):
            assert sequence_loss(model, sample, unroll) == pytest.approx(math.log(4.0))

    def test_hidden_width_must_match_feature_dim(self):
        model = zeroed_model(feature_dim=3)
        policy = LstmPolicy(model)
        with pytest.raises(ContractViolation, match="hidden width"):
            policy.begin(np.zeros(5))


class TestSequenceGradients:
    def test_match_finite_differences(self):
        rng = np.random.default_rng(9)
        model = LstmRecommender.build(4, ["a", "b", "c"], rng)
        sample = TeachingSample(
            top_feature=rng.standard_normal(4), target=1, teacher_feedback=0.7
        )
        loss, grads = sequence_gradients(model, sample, unroll=4)
        assert loss == pytest.approx(sequence_loss(model, sample, unroll=4))
        err = check_gradients(
            lambda: sequence_loss(model, sample, unroll=4), model.parameters(), grads
        )
        assert err < 1e-4


def manual_clusters() -> ClusterModel:
    return ClusterModel(
        k=2,
        seed=0,
        centroids=np.zeros((2, 3)),
        assignment={"b0": 0, "b1": 0, "b2": 1, "b3": 1},
        medoids=["b0", "b2"],
    )


def four_bottom_dataset(seed=1):
    rng = np.random.default_rng(seed)
    garments = {"t0": Garment(id="t0", category="top", feature=rng.standard_normal(3))}
    for i in range(4):
        garments[f"b{i}"] = Garment(
            id=f"b{i}", category="bottom", feature=rng.standard_normal(3)
        )
    from fitpick.data import Dataset

    return Dataset(
        feature_dim=3,
        context_dim=None,
        garments=garments,
        users=["u0"],
        quadruples={
            "train": [OutfitQuadruple(user="u0", top="t0", pos="b1", neg="b3")],
            "val": [],
            "test": [],
        },
    )


class TestTeachingSamples:
    def test_targets_the_positives_representative(self):
        dataset = four_bottom_dataset()
        clusters = manual_clusters()
        # b1 sits in cluster 0, represented by b0: the teacher feedback must
        # come from b0, not from b1 itself.
        scorer = lambda user, top, bottom: {"b0": 3.0, "b1": -100.0}.get(bottom.id, 0.0)
        samples = teaching_samples(dataset, clusters, scorer, ScoreNormalizer(0.0, 4.0))
        assert len(samples) == 1
        assert samples[0].target == 0
        assert samples[0].teacher_feedback == 0.75


class TestLstmTraining:
    def test_memorizes_a_single_preference(self):
        dataset = four_bottom_dataset(seed=3)
        clusters = manual_clusters()
        scorer = lambda user, top, bottom: 1.0 if bottom.id == "b2" else 0.0
        dataset.quadruples["train"] = [
            OutfitQuadruple(user="u0", top="t0", pos="b2", neg="b0")
        ]
        config = LstmConfig(unroll=3, epochs=60, learning_rate=0.3, seed=3)
        model, losses = lstm_train(
            dataset, clusters, scorer, ScoreNormalizer(0.0, 1.0), config
        )
        assert losses[-1] < losses[0]
        policy = LstmPolicy(model)
        policy.begin(dataset.garments["t0"].feature)
        assert policy.select(None, np.array([True, True]), None) == 1  # medoid b2

    def test_checkpoint_round_trip(self, tmp_path):
        model = LstmRecommender.build(3, ["a", "b"], np.random.default_rng(4))
        model.save(tmp_path / "lstm.nn")
        loaded = LstmRecommender.load(tmp_path / "lstm.nn")
        state_a = model.cell.initial_state(np.array([1.0, 2.0, 3.0]))
        state_b = loaded.cell.initial_state(np.array([1.0, 2.0, 3.0]))
        _, logits_a = model.step_logits(state_a, 0.5)
        _, logits_b = loaded.step_logits(state_b, 0.5)
        assert np.allclose(logits_a, logits_b, atol=1e-7)
        assert loaded.candidates == ["a", "b"]

    def test_tampered_checkpoint_rejected(self, tmp_path):
        import json

        model = LstmRecommender.build(3, ["a", "b"], np.random.default_rng(4))
        path = tmp_path / "lstm.nn"
        model.save(path)
        blob = path.read_bytes()
        cut = blob.index(b"\n")
        header = json.loads(blob[:cut])
        header["extra"]["candidates"] = ["a", "c"]
        path.write_bytes(json.dumps(header).encode() + blob[cut:])
        with pytest.raises(LoadError, match="digest"):
            LstmRecommender.load(path)


class TestNoExploration:
    def test_epsilon_stays_at_zero(self):
        world = SyntheticWorld(seed=5, feature_dim=6)
        dataset = split(generate_synthetic(world, 2, 3, 8, 40), (1.0, 0.0, 0.0), seed=5)
        candidates = [g.id for g in dataset.bottoms()][:5]
        config = DqnConfig(
            hidden_dims=(8,), batch_size=8, epochs=3, n_steps=3,
            schedule=EpsilonSchedule(0.9, 0.25, 200.0), seed=5,
        )
        qnet, stats = no_exploration_train(
            dataset, lambda u, t, b: 0.5, ScoreNormalizer(0.0, 1.0), candidates, config
        )
        assert stats.epsilon == [0.0, 0.0, 0.0]
        assert isinstance(qnet, QNetwork)


class TestPolicyInterchangeability:
    def test_all_policies_drive_full_episodes(self):
        world = SyntheticWorld(seed=6, feature_dim=6)
        dataset = split(generate_synthetic(world, 2, 3, 8, 40), (1.0, 0.0, 0.0), seed=6)
        candidates = [g.id for g in dataset.bottoms()][:6]
        scorer = lambda user, top, bottom: float(top.feature @ bottom.feature)
        normalizer = ScoreNormalizer(lo=-3.0, hi=3.0)
        rng = np.random.default_rng(6)

        qnet = QNetwork.build(
            feature_dim=6, candidates=candidates, hidden_dims=(8,),
            gamma=0.9, schedule=EpsilonSchedule(), rng=rng,
        )
        lstm = LstmRecommender.build(6, candidates, rng)
        policies = [QPolicy(qnet, epsilon=0.0), RandomPolicy(), LstmPolicy(lstm)]
        for policy in policies:
            log = run_episode(
                policy, "u0000", dataset.garments["t0000"],
                garments=dataset.garments, candidates=candidates,
                scorer=scorer, normalizer=normalizer, n_steps=4, rng=rng,
            )
            assert len(log.steps) == 4
            assert len(set(log.bottoms())) == 4
