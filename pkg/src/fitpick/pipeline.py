"""Pipeline stages gluing data, preprocessing, proxy, agent, and evaluation.

Each stage reads artifact directories produced by earlier stages, writes
its own directory, and drops a ``run.json`` manifest beside the outputs
recording the stage name, the resolved configuration, and a sha256 per
input file.  Stages that combine artifacts check that they belong
together: an agent checkpoint remembers the digest of the candidate set
it was trained on, and mixing it with a different clustering is refused.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .agent.dqn import DqnConfig, train_dqn
from .agent.episode import EpisodeLog, run_episode, save_episode_logs
from .agent.policy import Policy, QPolicy, RandomPolicy
from .agent.qnet import QNetwork
from .agent.schedule import EpsilonSchedule
from .baselines.lstm import LstmConfig, LstmPolicy, LstmRecommender, lstm_train
from .baselines.noexplore import no_exploration_train
from .config import build, section
from .data.manifest import load_manifest, save_manifest
from .data.schema import Dataset
from .data.synthetic import SyntheticWorld, generate_synthetic, split
from .errors import ContractViolation, LoadError
from .evaluation.runner import evaluate_policy, write_curves, write_report
from .gpbpr.io import load_proxy, save_proxy
from .gpbpr.normalize import fit_normalizer
from .gpbpr.train import ranking_accuracy, train_bpr
from .preprocess.autoencoder import Autoencoder, AutoencoderConfig, train_autoencoder
from .preprocess.cluster import (
    ClusterModel,
    candidate_hash,
    fit_clusters,
    load_clusters,
    save_clusters,
)

VARIANTS = ("dqn", "no-exploration", "lstm")


@dataclass
class SynthConfig:
    """Knobs for the synthetic closet generator."""

    seed: int = 7
    noise_level: float = 0.3
    feature_dim: int = 32
    style_dim: int = 4
    context_dim: int | None = None
    users: int = 20
    tops: int = 40
    bottoms: int = 60
    quadruples: int = 2400
    ratios: tuple = (0.7, 0.15, 0.15)
    split_seed: int = 7


@dataclass
class ClusterConfig:
    k: int = 12
    seed: int = 0
    max_iter: int = 100


@dataclass
class EvaluateConfig:
    split: str = "test"
    n_steps: int = 10
    episodes: int | None = None
    seed: int = 0


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _jsonable(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def write_run_manifest(
    directory: Path,
    stage: str,
    config,
    inputs: dict[str, Path],
    notes: dict | None = None,
) -> None:
    """Record what produced this artifact directory, for later audits."""
    manifest = {
        "stage": stage,
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": _jsonable(config),
        "inputs": {
            name: {"path": str(path), "sha256": _sha256(path)}
            for name, path in sorted(inputs.items())
        },
    }
    if notes:
        manifest["notes"] = _jsonable(notes)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "run.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _dataset_inputs(dataset_dir: Path) -> dict[str, Path]:
    inputs = {"dataset": dataset_dir / "dataset.json"}
    for blob in sorted(dataset_dir.glob("*.f32")):
        inputs[blob.stem] = blob
    return inputs


def run_synth(out_dir: str | Path, config: dict) -> Dataset:
    cfg = build(SynthConfig, section(config, "synth"), "synth")
    world = SyntheticWorld(
        seed=cfg.seed,
        noise_level=cfg.noise_level,
        style_dim=cfg.style_dim,
        feature_dim=cfg.feature_dim,
        context_dim=cfg.context_dim,
    )
    dataset = generate_synthetic(
        world,
        n_users=cfg.users,
        n_tops=cfg.tops,
        n_bottoms=cfg.bottoms,
        n_quadruples=cfg.quadruples,
    )
    dataset = split(dataset, ratios=tuple(cfg.ratios), seed=cfg.split_seed)
    out_dir = Path(out_dir)
    save_manifest(dataset, out_dir)
    counts = {name: len(quads) for name, quads in dataset.quadruples.items()}
    write_run_manifest(out_dir, "synth", cfg, {}, notes={"quadruples": counts})
    return dataset


def run_preprocess(
    dataset_dir: str | Path, out_dir: str | Path, config: dict
) -> tuple[Autoencoder, ClusterModel]:
    dataset_dir, out_dir = Path(dataset_dir), Path(out_dir)
    dataset = load_manifest(dataset_dir)
    pre = section(config, "preprocess")
    auto_cfg = build(AutoencoderConfig, section(pre, "autoencoder"), "preprocess.autoencoder")
    cluster_cfg = build(ClusterConfig, section(pre, "cluster"), "preprocess.cluster")

    rows = np.stack([dataset.garments[gid].feature for gid in sorted(dataset.garments)])
    auto = train_autoencoder(rows, auto_cfg)
    codes = {gid: auto.encode(g.feature) for gid, g in dataset.garments.items() if g.category == "bottom"}
    clusters = fit_clusters(codes, k=cluster_cfg.k, seed=cluster_cfg.seed, max_iter=cluster_cfg.max_iter)

    auto.save(out_dir / "autoencoder")
    save_clusters(clusters, out_dir)
    write_run_manifest(
        out_dir,
        "preprocess",
        {"autoencoder": auto_cfg, "cluster": cluster_cfg},
        _dataset_inputs(dataset_dir),
        notes={
            "reconstruction_loss": auto.losses[-1] if auto.losses else None,
            "candidate_hash": candidate_hash(clusters.medoids),
        },
    )
    return auto, clusters


def run_train_proxy(dataset_dir: str | Path, out_dir: str | Path, config: dict):
    from .gpbpr.model import GpbprConfig

    dataset_dir, out_dir = Path(dataset_dir), Path(out_dir)
    dataset = load_manifest(dataset_dir)
    values = section(config, "proxy")
    if dataset.context_dim is None:
        # datasets without context features need the visual-only blend;
        # only fill it in when the config does not take a position
        values.setdefault("phi", 1.0)
        values.setdefault("eta", 1.0)
    cfg = build(GpbprConfig, values, "proxy")
    model, losses = train_bpr(dataset, cfg)
    normalizer = fit_normalizer(model, dataset)
    save_proxy(model, out_dir, normalizer=normalizer)
    notes = {
        "loss_first": losses[0],
        "loss_last": losses[-1],
        "val_accuracy": ranking_accuracy(model, dataset, "val"),
        "normalizer": {"lo": normalizer.lo, "hi": normalizer.hi},
    }
    write_run_manifest(out_dir, "train-proxy", cfg, _dataset_inputs(dataset_dir), notes=notes)
    return model, normalizer


def _load_world(dataset_dir: Path, proxy_dir: Path):
    """Dataset + proxy + normalizer, with the cross-checks they share."""
    dataset = load_manifest(dataset_dir)
    model, normalizer = load_proxy(proxy_dir)
    if model.feature_dim != dataset.feature_dim:
        raise LoadError(
            f"proxy expects {model.feature_dim}-d features,"
            f" dataset provides {dataset.feature_dim}-d"
        )
    if normalizer is None:
        raise LoadError(f"proxy at {proxy_dir} was saved without a score normalizer")
    return dataset, model, normalizer


def _check_candidates(clusters: ClusterModel, dataset: Dataset) -> list[str]:
    candidates = clusters.candidate_set()
    bottoms = {g.id for g in dataset.bottoms()}
    missing = [c for c in candidates if c not in bottoms]
    if missing:
        raise LoadError(f"clustering medoids missing from dataset: {missing[:5]}")
    return candidates


def run_train_agent(
    dataset_dir: str | Path,
    proxy_dir: str | Path,
    clusters_dir: str | Path,
    out_dir: str | Path,
    config: dict,
    variant: str = "dqn",
):
    if variant not in VARIANTS:
        raise ContractViolation(f"variant must be one of {VARIANTS}, got {variant!r}")
    dataset_dir, proxy_dir = Path(dataset_dir), Path(proxy_dir)
    out_dir = Path(out_dir)
    dataset, model, normalizer = _load_world(dataset_dir, proxy_dir)
    clusters = load_clusters(clusters_dir)
    candidates = _check_candidates(clusters, dataset)
    inputs = _dataset_inputs(dataset_dir)
    inputs["clustering"] = Path(clusters_dir) / "clustering.json"
    inputs["proxy_factors"] = proxy_dir / "factors.nn"

    if variant == "lstm":
        cfg = build(LstmConfig, section(config, "lstm"), "lstm")
        recommender, losses = lstm_train(dataset, clusters, model.score, normalizer, cfg)
        recommender.save(out_dir / "lstm.nn")
        notes = {"losses": losses, "candidate_hash": candidate_hash(candidates)}
        write_run_manifest(out_dir, f"train-agent[{variant}]", cfg, inputs, notes=notes)
        return recommender, losses

    agent_section = section(config, "agent")
    schedule = EpsilonSchedule(
        start=agent_section.pop("epsilon_start", 0.9),
        end=agent_section.pop("epsilon_end", 0.25),
        decay=agent_section.pop("epsilon_decay", 200.0),
    )
    cfg = build(DqnConfig, agent_section, "agent")
    cfg = dataclasses.replace(cfg, schedule=schedule)
    trainer = no_exploration_train if variant == "no-exploration" else train_dqn
    qnet, stats = trainer(dataset, model.score, normalizer, candidates, cfg)
    qnet.save(out_dir / "qnet.nn")
    write_run_manifest(
        out_dir, f"train-agent[{variant}]", cfg, inputs, notes=dataclasses.asdict(stats)
    )
    return qnet, stats


def peek_kind(path: str | Path) -> str:
    """Checkpoint kind from the header line, without loading the blob."""
    path = Path(path)
    if not path.exists():
        raise LoadError(f"checkpoint file not found: {path}")
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError(f"{path} is not a checkpoint: {exc}") from exc
    return str(header.get("kind", ""))


def load_policy_file(path: str | Path, clusters: ClusterModel) -> Policy:
    """Build a greedy policy from a model checkpoint, verifying its candidates."""
    kind = peek_kind(path)
    expected = candidate_hash(clusters.candidate_set())
    if kind == "mlp":
        qnet = QNetwork.load(path)
        got = candidate_hash(qnet.candidates)
        policy: Policy = QPolicy(qnet, epsilon=0.0)
    elif kind == "lstm-recommender":
        model = LstmRecommender.load(path)
        got = candidate_hash(model.candidates)
        policy = LstmPolicy(model)
    else:
        raise LoadError(f"{path}: kind {kind!r} is not a recommender checkpoint")
    if got != expected:
        raise LoadError(
            f"{path} was trained on a different candidate set than this clustering"
        )
    return policy


def parse_policy_spec(spec: str) -> tuple[str, str | None]:
    """``random`` or ``label=path`` or bare ``path`` (label from the stem)."""
    if spec == "random":
        return "random", None
    if "=" in spec:
        label, _, path = spec.partition("=")
        if not label or not path:
            raise ContractViolation(f"bad policy spec {spec!r}; use label=path")
        return label, path
    return Path(spec).stem, spec


def run_evaluate(
    dataset_dir: str | Path,
    proxy_dir: str | Path,
    clusters_dir: str | Path,
    out_dir: str | Path,
    policy_specs: list[str],
    config: dict,
    episodes: int | None = None,
):
    if not policy_specs:
        raise ContractViolation("evaluate needs at least one policy")
    cfg = build(EvaluateConfig, section(config, "evaluate"), "evaluate")
    if episodes is not None:
        cfg = dataclasses.replace(cfg, episodes=episodes)
    dataset, model, normalizer = _load_world(Path(dataset_dir), Path(proxy_dir))
    clusters = load_clusters(clusters_dir)
    candidates = _check_candidates(clusters, dataset)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    inputs = _dataset_inputs(Path(dataset_dir))
    inputs["clustering"] = Path(clusters_dir) / "clustering.json"
    seen = set()
    for spec in policy_specs:
        label, path = parse_policy_spec(spec)
        if label in seen:
            raise ContractViolation(f"duplicate policy label {label!r}")
        seen.add(label)
        if path is None:
            policy: Policy = RandomPolicy()
        else:
            policy = load_policy_file(path, clusters)
            inputs[f"policy[{label}]"] = Path(path)
        rng = np.random.default_rng(cfg.seed)
        report, evals = evaluate_policy(
            policy,
            label,
            dataset,
            model.score,
            normalizer,
            candidates,
            split=cfg.split,
            n_steps=cfg.n_steps,
            episodes=cfg.episodes,
            rng=rng,
        )
        save_episode_logs([e.log for e in evals], out_dir / f"episodes_{label}.jsonl")
        reports.append(report)

    write_report(reports, out_dir / "report.json")
    write_curves(reports, out_dir / "curves.csv")
    write_run_manifest(
        out_dir,
        "evaluate",
        cfg,
        inputs,
        notes={"policies": [r.policy for r in reports]},
    )
    return reports


def run_simulate(
    dataset_dir: str | Path,
    proxy_dir: str | Path,
    clusters_dir: str | Path,
    agent_path: str | Path | None,
    user: str | None,
    top: str | None,
    config: dict,
    seed: int = 0,
) -> EpisodeLog:
    """One offline episode; defaults to the first held-out (user, top) pair."""
    cfg = build(EvaluateConfig, section(config, "evaluate"), "evaluate")
    dataset, model, normalizer = _load_world(Path(dataset_dir), Path(proxy_dir))
    clusters = load_clusters(clusters_dir)
    candidates = _check_candidates(clusters, dataset)
    if user is None or top is None:
        quads = dataset.quadruples.get(cfg.split) or dataset.all_quadruples()
        if not quads:
            raise ContractViolation("dataset has no quadruples to pick a pair from")
        user = user or quads[0].user
        top = top or quads[0].top
    if user not in dataset.users:
        raise ContractViolation(f"unknown user {user!r}")
    top_garment = dataset.garments.get(top)
    if top_garment is None or top_garment.category != "top":
        raise ContractViolation(f"{top!r} is not a top in this dataset")
    if agent_path is None:
        policy: Policy = RandomPolicy()
    else:
        policy = load_policy_file(agent_path, clusters)
    return run_episode(
        policy,
        user,
        top_garment,
        garments=dataset.garments,
        candidates=candidates,
        scorer=model.score,
        normalizer=normalizer,
        n_steps=cfg.n_steps,
        rng=np.random.default_rng(seed),
    )
