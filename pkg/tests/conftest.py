"""Shared fixture: a tiny trained artifact workspace, built once per run."""

import pytest

from fitpick import pipeline

TINY_CONFIG = {
    "synth": {
        "seed": 11,
        "users": 4,
        "tops": 6,
        "bottoms": 16,
        "quadruples": 240,
        "feature_dim": 8,
        "style_dim": 3,
        "noise_level": 0.2,
        "split_seed": 3,
    },
    "preprocess": {
        "autoencoder": {"latent_dim": 4, "epochs": 20, "batch_size": 16, "seed": 1},
        "cluster": {"k": 8, "seed": 2},
    },
    "proxy": {"embed_dim": 6, "mf_dim": 3, "epochs": 10, "batch_size": 32, "seed": 4},
    "agent": {
        "hidden_dims": [16],
        "epochs": 3,
        "n_steps": 4,
        "batch_size": 16,
        "seed": 5,
    },
    "lstm": {"unroll": 3, "epochs": 2, "seed": 6},
    "evaluate": {"n_steps": 4, "episodes": 6, "seed": 7},
}


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """Full artifact chain at desk scale: dataset, clusters, proxy, two agents."""
    root = tmp_path_factory.mktemp("workspace")
    paths = {
        "root": root,
        "data": root / "data",
        "prep": root / "prep",
        "proxy": root / "proxy",
        "qnet": root / "agent" / "qnet.nn",
        "lstm": root / "lstm" / "lstm.nn",
    }
    pipeline.run_synth(paths["data"], TINY_CONFIG)
    pipeline.run_preprocess(paths["data"], paths["prep"], TINY_CONFIG)
    pipeline.run_train_proxy(paths["data"], paths["proxy"], TINY_CONFIG)
    pipeline.run_train_agent(
        paths["data"], paths["proxy"], paths["prep"], root / "agent", TINY_CONFIG
    )
    pipeline.run_train_agent(
        paths["data"],
        paths["proxy"],
        paths["prep"],
        root / "lstm",
        TINY_CONFIG,
        variant="lstm",
    )
    return {"paths": paths, "config": TINY_CONFIG}
