"""Metric definitions checked against independent brute-force recomputation."""

import csv
import json

import numpy as np
import pytest

from fitpick.agent import EpisodeLog, EpisodeStep, RandomPolicy
from fitpick.data import SyntheticWorld, generate_synthetic, split
from fitpick.errors import ContractViolation
from fitpick.evaluation import (
    EpisodeEval,
    aggregate,
    evaluate_policy,
    hit_rate_at,
    write_curves,
    write_report,
)
from fitpick.gpbpr import ScoreNormalizer


def make_eval(raw_scores, neg, pos, user="u", top="t"):
    steps = [
        EpisodeStep(
            step=i, action=i, bottom=f"b{i}", feedback=0.5, reward=0.0, raw_score=s
        )
        for i, s in enumerate(raw_scores)
    ]
    return EpisodeEval(
        log=EpisodeLog(user=user, top=top, steps=steps), pos_score=pos, neg_score=neg
    )


def random_evals(n, rng, n_steps=10):
    out = []
    for i in range(n):
        raw = rng.normal(size=n_steps).tolist()
        out.append(
            make_eval(
                raw,
                neg=float(rng.normal()),
                pos=float(rng.normal()),
                user=f"u{rng.integers(6)}",
                top=f"t{i}",
            )
        )
        # Reuse a few bottom ids across episodes so distinct counting matters.
        renamed = [
            EpisodeStep(
                step=s.step, action=s.action,
                bottom=f"b{rng.integers(25)}",
                feedback=s.feedback, reward=s.reward, raw_score=s.raw_score,
            )
            for s in out[-1].log.steps
        ]
        out[-1] = EpisodeEval(
            log=EpisodeLog(user=out[-1].log.user, top=out[-1].log.top, steps=renamed),
            pos_score=out[-1].pos_score,
            neg_score=out[-1].neg_score,
        )
    return out


class TestHitRates:
    def test_hand_case(self):
        ev = make_eval([1.0, 3.0], neg=2.0, pos=3.5)
        assert hit_rate_at([ev], 1, "negative") == 0.0
        assert hit_rate_at([ev], 2, "negative") == 1.0
        assert hit_rate_at([ev], 2, "positive") == 0.0

    def test_equal_score_is_not_a_hit(self):
        ev = make_eval([3.0], neg=3.0, pos=3.0)
        assert hit_rate_at([ev], 1, "negative") == 0.0
        assert hit_rate_at([ev], 1, "positive") == 0.0

    def test_matches_brute_force_everywhere(self):
        rng = np.random.default_rng(21)
        evals = random_evals(120, rng)
        report = aggregate("probe", evals)

        for t in range(1, 11):
            hn = sum(
                1 for ev in evals
                if max(s.raw_score for s in ev.log.steps[:t]) > ev.neg_score
            ) / len(evals)
            hp = sum(
                1 for ev in evals
                if max(s.raw_score for s in ev.log.steps[:t]) > ev.pos_score
            ) / len(evals)
            assert report.hit_negative_at[t - 1] == hn
            assert report.hit_positive_at[t - 1] == hp
            mean_t = sum(ev.log.steps[t - 1].raw_score for ev in evals) / len(evals)
            assert report.mean_score_at[t - 1] == pytest.approx(mean_t)

        assert report.hit_negative == report.hit_negative_at[-1]
        assert report.hit_positive == report.hit_positive_at[-1]

        distinct = set()
        for ev in evals:
            distinct.update(s.bottom for s in ev.log.steps)
        assert report.distinct_bottoms == len(distinct)

        above = [
            sum(1 for s in ev.log.steps if s.raw_score > ev.neg_score) for ev in evals
        ]
        assert report.mean_above_negative == pytest.approx(sum(above) / len(above))

    def test_prefix_rates_never_decrease(self):
        rng = np.random.default_rng(22)
        report = aggregate("probe", random_evals(60, rng))
        for series in (report.hit_negative_at, report.hit_positive_at):
            assert all(b >= a for a, b in zip(series, series[1:]))

    def test_missing_raw_score_rejected(self):
        ev = make_eval([1.0], neg=0.0, pos=0.0)
        broken = EpisodeEval(
            log=EpisodeLog(
                user="u", top="t",
                steps=[EpisodeStep(0, 0, "b0", feedback=0.5, reward=0.0)],
            ),
            pos_score=0.0,
            neg_score=0.0,
        )
        with pytest.raises(ContractViolation, match="raw score"):
            aggregate("probe", [ev, broken])


class TestArtifacts:
    def reports(self):
        rng = np.random.default_rng(30)
        return [
            aggregate("alpha", random_evals(20, rng, n_steps=4)),
            aggregate("beta", random_evals(20, rng, n_steps=4)),
        ]

    def test_report_json_structure(self, tmp_path):
        reports = self.reports()
        write_report(reports, tmp_path / "report.json")
        payload = json.loads((tmp_path / "report.json").read_text())
        assert set(payload["policies"]) == {"alpha", "beta"}
        entry = payload["policies"]["alpha"]
        assert entry["episodes"] == 20
        assert len(entry["hit_negative_at"]) == 4

    def test_curves_csv_round_trip(self, tmp_path):
        reports = self.reports()
        write_curves(reports, tmp_path / "curves.csv")
        with (tmp_path / "curves.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        assert set(rows[0]) == {"policy", "T", "mean_score", "HN_at_T", "HP_at_T"}
        first = rows[0]
        assert first["policy"] == "alpha"
        assert int(first["T"]) == 1
        assert float(first["HN_at_T"]) == reports[0].hit_negative_at[0]


class TestEvaluatePolicy:
    def test_runs_one_episode_per_quadruple(self):
        world = SyntheticWorld(seed=8, feature_dim=6)
        dataset = split(generate_synthetic(world, 3, 4, 10, 80), (0.5, 0.25, 0.25), seed=8)
        candidates = [g.id for g in dataset.bottoms()][:8]
        scorer = lambda user, top, bottom: float(top.feature @ bottom.feature)
        report, evals = evaluate_policy(
            RandomPolicy(), "random", dataset, scorer, ScoreNormalizer(-3.0, 3.0),
            candidates, split="test", n_steps=5, rng=np.random.default_rng(8),
        )
        assert report.episodes == len(dataset.quadruples["test"]) == len(evals)
        assert report.n_steps == 5
        assert all(len(ev.log.steps) == 5 for ev in evals)

    def test_episode_cap(self):
        world = SyntheticWorld(seed=8, feature_dim=6)
        dataset = split(generate_synthetic(world, 3, 4, 10, 80), (0.5, 0.25, 0.25), seed=8)
        candidates = [g.id for g in dataset.bottoms()][:8]
        report, _ = evaluate_policy(
            RandomPolicy(), "random", dataset,
            lambda u, t, b: 0.0, ScoreNormalizer(-1.0, 1.0),
            candidates, split="test", n_steps=3, episodes=4,
            rng=np.random.default_rng(9),
        )
        assert report.episodes == 4

    def test_empty_split_rejected(self):
        world = SyntheticWorld(seed=8, feature_dim=6)
        dataset = generate_synthetic(world, 2, 2, 6, 10)
        with pytest.raises(ContractViolation, match="no quadruples"):
            evaluate_policy(
                RandomPolicy(), "random", dataset,
                lambda u, t, b: 0.0, ScoreNormalizer(-1.0, 1.0),
                [g.id for g in dataset.bottoms()], split="test",
            )
