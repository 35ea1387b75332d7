"""Command line for the full pipeline and the live service.

Every stage reads the same ``--config`` file (TOML or JSON, sectioned
per stage); flags name the artifact directories.  Usage mistakes exit
with status 2 (click's convention); missing or mutually inconsistent
artifacts exit with status 1 and a message naming the problem.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline
from .config import load_config
from .errors import FitpickError

_dir_out = click.Path(file_okay=False)


def _run(fn, *args, **kwargs):
    """Call a stage, converting domain errors to exit status 1."""
    try:
        return fn(*args, **kwargs)
    except FitpickError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _config(ctx) -> dict:
    return _run(load_config, ctx.obj.get("config_path"))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    "config_path",
    default=None,
    help="TOML or JSON config file with per-stage sections.",
)
@click.pass_context
def main(ctx, config_path):
    """Interactive garment recommendation: data, training, evaluation, serving."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@main.command()
@click.option("--out", required=True, type=_dir_out, help="Dataset output directory.")
@click.pass_context
def synth(ctx, out):
    """Generate a synthetic dataset and write its manifest."""
    dataset = _run(pipeline.run_synth, out, _config(ctx))
    counts = {name: len(quads) for name, quads in dataset.quadruples.items()}
    click.echo(
        f"dataset -> {out}: {len(dataset.users)} users,"
        f" {len(dataset.garments)} garments, quadruples {counts}"
    )


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=_dir_out)
@click.option("--out", required=True, type=_dir_out, help="Artifact output directory.")
@click.pass_context
def preprocess(ctx, dataset_dir, out):
    """Train the feature autoencoder and cluster bottoms into candidates."""
    auto, clusters = _run(pipeline.run_preprocess, dataset_dir, out, _config(ctx))
    click.echo(
        f"preprocess -> {out}: reconstruction loss {auto.losses[-1]:.6f},"
        f" {len(clusters.medoids)} candidate bottoms"
    )


@main.command("train-proxy")
@click.option("--dataset", "dataset_dir", required=True, type=_dir_out)
@click.option("--out", required=True, type=_dir_out)
@click.pass_context
def train_proxy(ctx, dataset_dir, out):
    """Train the compatibility proxy and fit its score normalizer."""
    model, normalizer = _run(pipeline.run_train_proxy, dataset_dir, out, _config(ctx))
    manifest = json.loads((Path(out) / "run.json").read_text())
    acc = manifest["notes"]["val_accuracy"]
    click.echo(
        f"proxy -> {out}: val ranking accuracy {acc:.3f},"
        f" normalizer [{normalizer.lo:.4f}, {normalizer.hi:.4f}]"
    )


@main.command("train-agent")
@click.option("--dataset", "dataset_dir", required=True, type=_dir_out)
@click.option("--proxy", "proxy_dir", required=True, type=_dir_out)
@click.option("--clusters", "clusters_dir", required=True, type=_dir_out)
@click.option("--out", required=True, type=_dir_out)
@click.option(
    "--variant",
    type=click.Choice(pipeline.VARIANTS),
    default="dqn",
    show_default=True,
    help="Training recipe: exploring agent, greedy ablation, or recurrent baseline.",
)
@click.pass_context
def train_agent(ctx, dataset_dir, proxy_dir, clusters_dir, out, variant):
    """Train a recommender against the proxy's feedback."""
    result = _run(
        pipeline.run_train_agent,
        dataset_dir,
        proxy_dir,
        clusters_dir,
        out,
        _config(ctx),
        variant=variant,
    )
    if variant == "lstm":
        _, losses = result
        click.echo(f"agent[{variant}] -> {out}: loss {losses[0]:.4f} -> {losses[-1]:.4f}")
    else:
        _, stats = result
        click.echo(
            f"agent[{variant}] -> {out}: final feedback {stats.final_feedback[-1]:.3f},"
            f" mean return {stats.mean_return[-1]:.3f}, {stats.updates} updates"
        )


@main.command()
@click.option("--dataset", "dataset_dir", required=True, type=_dir_out)
@click.option("--proxy", "proxy_dir", required=True, type=_dir_out)
@click.option("--clusters", "clusters_dir", required=True, type=_dir_out)
@click.option("--out", required=True, type=_dir_out)
@click.option(
    "--policy",
    "policies",
    multiple=True,
    required=True,
    help="Either 'random' or label=path to a trained checkpoint; repeatable.",
)
@click.option("--episodes", type=int, default=None, help="Cap on evaluation episodes.")
@click.pass_context
def evaluate(ctx, dataset_dir, proxy_dir, clusters_dir, out, policies, episodes):
    """Run held-out episodes for each policy and write report.json + curves.csv."""
    reports = _run(
        pipeline.run_evaluate,
        dataset_dir,
        proxy_dir,
        clusters_dir,
        out,
        list(policies),
        _config(ctx),
        episodes=episodes,
    )
    for report in reports:
        click.echo(
            f"{report.policy}: episodes={report.episodes}"
            f" HN={report.hit_negative:.3f} HP={report.hit_positive:.3f}"
            f" distinct={report.distinct_bottoms}"
            f" final={report.mean_final_feedback:.3f}"
        )
    click.echo(f"report -> {Path(out) / 'report.json'}")


@main.command()
@click.option("--dataset", "dataset_dir", type=_dir_out, default=None)
@click.option("--proxy", "proxy_dir", type=_dir_out, default=None)
@click.option("--clusters", "clusters_dir", type=_dir_out, default=None)
@click.option("--agent", "agent_path", default=None, help="Checkpoint; omit for random picks.")
@click.option("--user", default=None, help="User id; defaults to the first held-out pair.")
@click.option("--top", default=None, help="Top id; defaults to the first held-out pair.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--url", default=None, help="Drive a running service instead of local models.")
@click.option("--as-json", is_flag=True, help="Print the episode as JSON instead of lines.")
@click.pass_context
def simulate(ctx, dataset_dir, proxy_dir, clusters_dir, agent_path, user, top, seed, url, as_json):
    """Play one proxy-scored episode and print its steps."""
    if url is not None:
        _simulate_remote(url, user, top, as_json)
        return
    missing = [
        name
        for name, value in (
            ("--dataset", dataset_dir),
            ("--proxy", proxy_dir),
            ("--clusters", clusters_dir),
        )
        if value is None
    ]
    if missing:
        raise click.UsageError(f"offline simulate needs {', '.join(missing)} (or --url)")
    log = _run(
        pipeline.run_simulate,
        dataset_dir,
        proxy_dir,
        clusters_dir,
        agent_path,
        user,
        top,
        _config(ctx),
        seed=seed,
    )
    if as_json:
        payload = {
            "user": log.user,
            "top": log.top,
            "steps": [
                {
                    "step": s.step,
                    "bottom": s.bottom,
                    "feedback": s.feedback,
                    "reward": s.reward,
                    "raw_score": s.raw_score,
                }
                for s in log.steps
            ],
        }
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"user {log.user}, top {log.top}")
    for s in log.steps:
        click.echo(
            f"  step {s.step + 1}: {s.bottom} feedback={s.feedback:.4f} reward={s.reward:+.4f}"
        )
    click.echo(
        f"final feedback {log.final_feedback():.4f},"
        f" return {log.episode_return():+.4f},"
        f" {len(set(log.bottoms()))} distinct bottoms"
    )


def _simulate_remote(url: str, user: str | None, top: str | None, as_json: bool) -> None:
    from .service.client import SessionClient

    client = SessionClient(url)
    if top is None:
        page = _run(client.tops, 0, 1)
        if not page["items"]:
            click.echo("error: service has no tops in its catalog", err=True)
            sys.exit(1)
        top = page["items"][0]["id"]
    if user is None:
        click.echo("error: --user is required with --url (proxy mode scores a known user)", err=True)
        sys.exit(1)
    snapshot = _run(client.drive_episode, top, user)
    if as_json:
        click.echo(json.dumps(snapshot, indent=2))
        return
    click.echo(f"user {user}, top {top} via {url}")
    for s in snapshot["history"]:
        click.echo(
            f"  step {s['step']}: {s['bottom']['id']}"
            f" feedback={s['score']:.4f} reward={s['reward']:+.4f}"
        )
    summary = snapshot["history_summary"]
    click.echo(f"final feedback {summary['last_score']:.4f}, return {summary['episode_return']:+.4f}")


@main.command()
@click.option("--dataset", "dataset_dir", type=_dir_out, default=None)
@click.option("--proxy", "proxy_dir", type=_dir_out, default=None)
@click.option("--clusters", "clusters_dir", type=_dir_out, default=None)
@click.option("--agent", "agent_path", default=None)
@click.option("--host", envvar="FITPICK_HOST", default=None, help="Bind address [env: FITPICK_HOST].")
@click.option("--port", envvar="FITPICK_PORT", type=int, default=None, help="Bind port [env: FITPICK_PORT].")
@click.option("--journal", default=None, help="JSONL file that completed episodes append to.")
@click.pass_context
def serve(ctx, dataset_dir, proxy_dir, clusters_dir, agent_path, host, port, journal):
    """Host live recommendation sessions over HTTP."""
    import uvicorn

    from .service import app_from_config, service_config

    cfg = _run(
        service_config,
        _config(ctx),
        dataset=dataset_dir,
        proxy=proxy_dir,
        clusters=clusters_dir,
        agent=agent_path,
        host=host,
        port=port,
        journal=journal,
    )
    app = _run(app_from_config, cfg)
    click.echo(f"serving on http://{cfg.host}:{cfg.port}")
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


if __name__ == "__main__":
    main()
