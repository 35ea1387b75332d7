"""Checkpoint I/O: a one-line JSON header followed by a little-endian f32 blob.

For an MLP the blob is laid out in layer order, each layer's weights
(row-major) followed by its bias. Parameters are float64 in memory and f32 on
disk, so loading is lossy once; re-saving a loaded model is bit-stable.

``save_arrays``/``load_arrays`` reuse the same container for non-MLP models
(named arrays in header order).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import LoadError
from .layers import ACTIVATIONS, DenseLayer, Mlp

FORMAT_NAME = "fitpick-nn"
FORMAT_VERSION = 1


def _write(path: Path, header: dict, arrays: Sequence[np.ndarray]) -> None:
    blob = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in arrays)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        fh.write(blob)


def _read(path: Path) -> Tuple[dict, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise LoadError(f"checkpoint file not found: {path}")
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError(f"bad checkpoint header in {path}: {exc}") from exc
    if header.get("format") != FORMAT_NAME:
        raise LoadError(f"{path} is not a {FORMAT_NAME} checkpoint")
    flat = np.frombuffer(blob, dtype="<f4")
    return header, flat


def _take(flat: np.ndarray, offset: int, shape: Tuple[int, ...]) -> Tuple[np.ndarray, int]:
    n = int(np.prod(shape))
    if offset + n > flat.size:
        raise LoadError("checkpoint blob shorter than header declares")
    chunk = flat[offset:offset + n].astype(np.float64).reshape(shape)
    return chunk, offset + n


def save_mlp(path, mlp: Mlp, extra: dict | None = None) -> None:
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": "mlp",
        "layers": [
            {"in": l.in_dim, "out": l.out_dim, "activation": l.activation}
            for l in mlp.layers
        ],
    }
    if extra:
        header["extra"] = extra
    arrays: List[np.ndarray] = []
    for layer in mlp.layers:
        arrays.append(layer.weights)
        arrays.append(layer.bias)
    _write(Path(path), header, arrays)


def load_mlp(path) -> Tuple[Mlp, dict]:
    header, flat = _read(Path(path))
    if header.get("kind") != "mlp":
        raise LoadError(f"{path}: expected kind 'mlp', got {header.get('kind')!r}")
    layers: List[DenseLayer] = []
    offset = 0
    for spec in header["layers"]:
        act = spec["activation"]
        if act not in ACTIVATIONS:
            raise LoadError(f"{path}: unknown activation {act!r}")
        w, offset = _take(flat, offset, (spec["out"], spec["in"]))
        b, offset = _take(flat, offset, (spec["out"],))
        layers.append(DenseLayer(w, b, act))
    if offset != flat.size:
        raise LoadError(f"{path}: {flat.size - offset} trailing values in blob")
    return Mlp(layers), header.get("extra", {})


def save_arrays(path, kind: str, arrays: Dict[str, np.ndarray], extra: dict | None = None) -> None:
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    if extra:
        header["extra"] = extra
    _write(Path(path), header, list(arrays.values()))


def load_arrays(path, expected_kind: str) -> Tuple[Dict[str, np.ndarray], dict]:
    header, flat = _read(Path(path))
    if header.get("kind") != expected_kind:
        raise LoadError(f"{path}: expected kind {expected_kind!r}, got {header.get('kind')!r}")
    out: Dict[str, np.ndarray] = {}
    offset = 0
    for spec in header.get("arrays", []):
        arr, offset = _take(flat, offset, tuple(spec["shape"]))
        out[spec["name"]] = arr
    if offset != flat.size:
        raise LoadError(f"{path}: {flat.size - offset} trailing values in blob")
    return out, header.get("extra", {})
