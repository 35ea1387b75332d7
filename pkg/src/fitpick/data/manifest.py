"""On-disk dataset layout.

A dataset directory holds ``dataset.json`` plus raw little-endian
float32 feature files, one per category:

    dataset.json          ids, categories, row indices, quadruples
    features_top.f32      row-major, one row per top, in row order
    features_bottom.f32   likewise for bottoms
    context_top.f32       only when context_dim is set
    context_bottom.f32

Values live in float64 in memory; the f32 files are the interchange
format, so loading quantizes features to float32 precision.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import LoadError
from .schema import CATEGORIES, Dataset, Garment, OutfitQuadruple, SPLITS

MANIFEST_NAME = "dataset.json"


def _feature_path(directory: Path, kind: str, category: str) -> Path:
    return directory / f"{kind}_{category}.f32"


def _write_rows(path: Path, rows: list[np.ndarray], dim: int) -> None:
    block = np.zeros((len(rows), dim), dtype="<f4")
    for idx, row in enumerate(rows):
        block[idx] = row.astype("<f4")
    path.write_bytes(block.tobytes())


def _read_rows(path: Path, count: int, dim: int) -> np.ndarray:
    if not path.exists():
        raise LoadError(f"missing feature file {path}")
    blob = path.read_bytes()
    expected = count * dim * 4
    if len(blob) != expected:
        raise LoadError(
            f"{path} holds {len(blob)} bytes, expected {expected}"
            f" ({count} rows x {dim} floats)"
        )
    data = np.frombuffer(blob, dtype="<f4").reshape(count, dim)
    return data.astype(np.float64)


def save_manifest(dataset: Dataset, directory: str | Path) -> None:
    """Write the dataset directory, creating it if needed."""
    dataset.validate()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    garment_entries = []
    rows: dict[str, list[np.ndarray]] = {c: [] for c in CATEGORIES}
    ctx_rows: dict[str, list[np.ndarray]] = {c: [] for c in CATEGORIES}
    for garment in dataset.garments.values():
        row = len(rows[garment.category])
        entry: dict[str, object] = {
            "id": garment.id,
            "category": garment.category,
            "row": row,
        }
        if garment.image_url is not None:
            entry["image_url"] = garment.image_url
        garment_entries.append(entry)
        rows[garment.category].append(garment.feature)
        if dataset.context_dim is not None:
            ctx_rows[garment.category].append(garment.context_feature)

    quad_entries = [
        {"user": q.user, "top": q.top, "pos": q.pos, "neg": q.neg, "split": name}
        for name in SPLITS
        for q in dataset.quadruples.get(name, [])
    ]
    manifest = {
        "feature_dim": dataset.feature_dim,
        "context_dim": dataset.context_dim,
        "users": list(dataset.users),
        "garments": garment_entries,
        "quadruples": quad_entries,
    }
    (directory / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )

    for category in CATEGORIES:
        _write_rows(
            _feature_path(directory, "features", category),
            rows[category],
            dataset.feature_dim,
        )
        if dataset.context_dim is not None:
            _write_rows(
                _feature_path(directory, "context", category),
                ctx_rows[category],
                dataset.context_dim,
            )


def load_manifest(directory: str | Path) -> Dataset:
    """Read a dataset directory back into memory, validating as it goes."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise LoadError(f"missing {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise LoadError(f"{manifest_path} is not valid JSON: {exc}") from exc

    for key in ("feature_dim", "context_dim", "users", "garments", "quadruples"):
        if key not in manifest:
            raise LoadError(f"{manifest_path} is missing key {key!r}")
    feature_dim = manifest["feature_dim"]
    context_dim = manifest["context_dim"]

    by_category: dict[str, list[dict]] = {c: [] for c in CATEGORIES}
    for entry in manifest["garments"]:
        category = entry.get("category")
        if category not in CATEGORIES:
            raise LoadError(f"garment {entry.get('id')!r}: bad category {category!r}")
        by_category[category].append(entry)

    features: dict[str, np.ndarray] = {}
    contexts: dict[str, np.ndarray] = {}
    for category in CATEGORIES:
        entries = by_category[category]
        expected_rows = set(range(len(entries)))
        seen_rows = {e.get("row") for e in entries}
        if seen_rows != expected_rows:
            raise LoadError(
                f"{category} rows must cover 0..{len(entries) - 1} exactly,"
                f" got {sorted(seen_rows)}"
            )
        features[category] = _read_rows(
            _feature_path(directory, "features", category), len(entries), feature_dim
        )
        if context_dim is not None:
            contexts[category] = _read_rows(
                _feature_path(directory, "context", category), len(entries), context_dim
            )

    garments: dict[str, Garment] = {}
    for entry in manifest["garments"]:
        gid = entry["id"]
        if gid in garments:
            raise LoadError(f"duplicate garment id {gid!r}")
        category = entry["category"]
        row = entry["row"]
        garments[gid] = Garment(
            id=gid,
            category=category,
            feature=features[category][row],
            context_feature=None if context_dim is None else contexts[category][row],
            image_url=entry.get("image_url"),
        )

    quadruples: dict[str, list[OutfitQuadruple]] = {name: [] for name in SPLITS}
    for entry in manifest["quadruples"]:
        name = entry.get("split")
        if name not in SPLITS:
            raise LoadError(f"quadruple has unknown split {name!r}")
        quadruples[name].append(
            OutfitQuadruple(
                user=entry["user"], top=entry["top"], pos=entry["pos"], neg=entry["neg"]
            )
        )

    dataset = Dataset(
        feature_dim=feature_dim,
        context_dim=context_dim,
        garments=garments,
        users=list(manifest["users"]),
        quadruples=quadruples,
    )
    try:
        dataset.validate()
    except Exception as exc:
        raise LoadError(f"{directory}: {exc}") from exc
    return dataset
