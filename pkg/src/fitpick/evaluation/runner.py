"""Evaluation drives: run a policy over held-out quadruples and write artifacts."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..agent import run_episode
from ..data import Dataset
from ..errors import ContractViolation
from .metrics import EpisodeEval, MetricsReport, aggregate

REPORT_NAME = "report.json"
CURVES_NAME = "curves.csv"


def evaluate_policy(
    policy,
    policy_name: str,
    dataset: Dataset,
    scorer,
    normalizer,
    candidates: list[str],
    *,
    split: str = "test",
    n_steps: int = 10,
    episodes: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[MetricsReport, list[EpisodeEval]]:
    """One episode per held-out quadruple, scored against its references."""
    quads = dataset.quadruples.get(split, [])
    if not quads:
        raise ContractViolation(f"split {split!r} has no quadruples")
    if episodes is not None:
        quads = quads[:episodes]
    evals: list[EpisodeEval] = []
    for quad in quads:
        top = dataset.garments[quad.top]
        log = run_episode(
            policy, quad.user, top,
            garments=dataset.garments, candidates=candidates,
            scorer=scorer, normalizer=normalizer, n_steps=n_steps, rng=rng,
        )
        evals.append(
            EpisodeEval(
                log=log,
                pos_score=float(scorer(quad.user, top, dataset.garments[quad.pos])),
                neg_score=float(scorer(quad.user, top, dataset.garments[quad.neg])),
            )
        )
    return aggregate(policy_name, evals), evals


def write_report(reports: list[MetricsReport], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"policies": {report.policy: asdict(report) for report in reports}}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_curves(reports: list[MetricsReport], path: str | Path) -> None:
    """Per-step curves, one row per (policy, prefix length)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "T", "mean_score", "HN_at_T", "HP_at_T"])
        for report in reports:
            for t in range(1, report.n_steps + 1):
                writer.writerow(
                    [
                        report.policy,
                        t,
                        f"{report.mean_score_at[t - 1]:.10g}",
                        f"{report.hit_negative_at[t - 1]:.10g}",
                        f"{report.hit_positive_at[t - 1]:.10g}",
                    ]
                )
