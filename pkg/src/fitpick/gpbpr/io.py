"""Checkpoint layout for the compatibility scorer.

A proxy directory holds one ``.nn`` file per projection network plus
``factors.nn`` carrying the id-keyed factor tables; its header records
the user/bottom registries, the scoring configuration, and the fitted
feedback normalizer when present.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

from ..errors import LoadError
from ..nn import load_arrays, load_mlp, save_arrays, save_mlp
from .model import GpbprConfig, GpbprModel
from .normalize import ScoreNormalizer

FACTOR_KIND = "gpbpr-factors"


def save_proxy(
    model: GpbprModel,
    directory: str | Path,
    normalizer: ScoreNormalizer | None = None,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, net in model._nets():
        save_mlp(directory / f"{name}.nn", net)
    users = sorted(model.user_index, key=model.user_index.get)
    bottoms = sorted(model.bottom_index, key=model.bottom_index.get)
    config = asdict(model.config)
    config["hidden_dims"] = list(config["hidden_dims"])
    extra = {
        "users": users,
        "bottoms": bottoms,
        "config": config,
        "feature_dim": model.feature_dim,
        "context_dim": model.context_dim,
        "normalizer": None
        if normalizer is None
        else {"lo": normalizer.lo, "hi": normalizer.hi},
    }
    save_arrays(
        directory / "factors.nn",
        FACTOR_KIND,
        dict(model._factors()),
        extra=extra,
    )


def load_proxy(directory: str | Path) -> tuple[GpbprModel, ScoreNormalizer | None]:
    directory = Path(directory)
    factors_path = directory / "factors.nn"
    if not factors_path.exists():
        raise LoadError(f"missing {factors_path}")
    arrays, extra = load_arrays(factors_path, FACTOR_KIND)
    for key in ("users", "bottoms", "config", "feature_dim"):
        if key not in extra:
            raise LoadError(f"{factors_path} header is missing {key!r}")

    raw_config = dict(extra["config"])
    raw_config["hidden_dims"] = tuple(raw_config.get("hidden_dims", ()))
    config = GpbprConfig(**raw_config)
    model = GpbprModel(
        config=config,
        feature_dim=extra["feature_dim"],
        context_dim=extra.get("context_dim"),
        users=extra["users"],
        bottoms=extra["bottoms"],
    )
    for name, _ in model._nets():
        path = directory / f"{name}.nn"
        if not path.exists():
            raise LoadError(f"missing projection network {path}")
        net, _ = load_mlp(path)
        setattr(model, f"{name}_net", net)
    for name, current in model._factors():
        if name not in arrays:
            raise LoadError(f"{factors_path} is missing factor {name!r}")
        if arrays[name].shape != current.shape:
            raise LoadError(
                f"factor {name!r} has shape {arrays[name].shape},"
                f" expected {current.shape}"
            )
        setattr(model, name, arrays[name])

    normalizer = None
    if extra.get("normalizer") is not None:
        normalizer = ScoreNormalizer(
            lo=extra["normalizer"]["lo"], hi=extra["normalizer"]["hi"]
        )
    return model, normalizer
