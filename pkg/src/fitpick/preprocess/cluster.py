"""K-means over latent codes, with medoid representatives.

Seeding follows the k-means++ rule (each new centre drawn with
probability proportional to squared distance from the chosen ones),
then Lloyd's iterations run to convergence.  A cluster that loses all
its points is re-seeded at the point currently farthest from its
assigned centre.  Each cluster is represented by its medoid: the member
nearest the centroid, smallest id on ties.  The ordered medoid list is
the action space downstream.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ContractViolation, LoadError

CLUSTERS_NAME = "clustering.json"
CENTROIDS_NAME = "centroids.f32"


@dataclass
class ClusterModel:
    k: int
    seed: int
    centroids: np.ndarray
    assignment: dict[str, int]
    medoids: list[str]
    sse_trace: list[float] = field(default_factory=list)

    def candidate_set(self) -> list[str]:
        return list(self.medoids)


def candidate_hash(medoids: list[str]) -> str:
    """Stable digest of an ordered candidate set, for artifact consistency."""
    return hashlib.sha256(json.dumps(list(medoids)).encode()).hexdigest()


def _nearest(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dist = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    return labels, dist


def _seed_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        dist = ((points[:, None, :] - points[chosen][None, :, :]) ** 2).sum(axis=2)
        nearest = dist.min(axis=1)
        total = nearest.sum()
        if total == 0:
            chosen.append(int(rng.integers(n)))
            continue
        chosen.append(int(rng.choice(n, p=nearest / total)))
    return points[chosen].copy()


def fit_clusters(
    points: dict[str, np.ndarray],
    k: int,
    seed: int,
    max_iter: int = 100,
) -> ClusterModel:
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    if len(points) < k:
        raise ContractViolation(f"cannot form {k} clusters from {len(points)} points")
    ids = sorted(points)
    matrix = np.stack([np.asarray(points[i], dtype=np.float64) for i in ids])
    rng = np.random.default_rng(seed)

    centroids = _seed_centroids(matrix, k, rng)
    labels = np.full(len(ids), -1)
    sse_trace: list[float] = []
    for _ in range(max_iter):
        new_labels, dist = _nearest(matrix, centroids)
        for cluster in range(k):
            if not (new_labels == cluster).any():
                # Re-seed a dead cluster at the point farthest from its
                # current centre, then re-assign.
                farthest = int(dist[np.arange(len(ids)), new_labels].argmax())
                centroids[cluster] = matrix[farthest]
                new_labels, dist = _nearest(matrix, centroids)
        sse_trace.append(float(dist[np.arange(len(ids)), new_labels].sum()))
        if (new_labels == labels).all():
            break
        labels = new_labels
        for cluster in range(k):
            members = matrix[labels == cluster]
            if len(members):
                centroids[cluster] = members.mean(axis=0)

    medoids = []
    for cluster in range(k):
        member_ids = [ids[i] for i in range(len(ids)) if labels[i] == cluster]
        if not member_ids:
            raise ContractViolation(f"cluster {cluster} is empty after convergence")
        best = min(
            member_ids,
            key=lambda gid: (
                float(((points[gid] - centroids[cluster]) ** 2).sum()),
                gid,
            ),
        )
        medoids.append(best)

    return ClusterModel(
        k=k,
        seed=seed,
        centroids=centroids,
        assignment={ids[i]: int(labels[i]) for i in range(len(ids))},
        medoids=medoids,
        sse_trace=sse_trace,
    )


def save_clusters(model: ClusterModel, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {
        "k": model.k,
        "seed": model.seed,
        "medoids": model.medoids,
        "assignment": model.assignment,
    }
    (directory / CLUSTERS_NAME).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n"
    )
    (directory / CENTROIDS_NAME).write_bytes(
        model.centroids.astype("<f4").tobytes()
    )


def load_clusters(directory: str | Path) -> ClusterModel:
    directory = Path(directory)
    payload_path = directory / CLUSTERS_NAME
    if not payload_path.exists():
        raise LoadError(f"missing {payload_path}")
    payload = json.loads(payload_path.read_text())
    for key in ("k", "seed", "medoids", "assignment"):
        if key not in payload:
            raise LoadError(f"{payload_path} is missing key {key!r}")
    k = payload["k"]
    blob = (directory / CENTROIDS_NAME).read_bytes()
    if k < 1 or len(blob) % (4 * k) != 0:
        raise LoadError(
            f"centroid blob holds {len(blob)} bytes, not divisible into {k} rows"
        )
    dim = len(blob) // (4 * k)
    centroids = np.frombuffer(blob, dtype="<f4").reshape(k, dim).astype(np.float64)

    assignment = {str(gid): int(c) for gid, c in payload["assignment"].items()}
    medoids = [str(m) for m in payload["medoids"]]
    if len(medoids) != k:
        raise LoadError(f"expected {k} medoids, got {len(medoids)}")
    for cluster, medoid in enumerate(medoids):
        if medoid not in assignment:
            raise LoadError(f"medoid {medoid!r} is not an assigned point")
        if assignment[medoid] != cluster:
            raise LoadError(
                f"medoid {medoid!r} belongs to cluster {assignment[medoid]}, not {cluster}"
            )
    for gid, cluster in assignment.items():
        if not 0 <= cluster < k:
            raise LoadError(f"point {gid!r} assigned to out-of-range cluster {cluster}")
    return ClusterModel(
        k=k, seed=payload["seed"], centroids=centroids, assignment=assignment,
        medoids=medoids,
    )
