"""Synthetic wardrobe generator with a known ground-truth affinity.

Each user has a hidden taste vector and each garment a hidden style
vector, all drawn from a standard normal.  The true affinity of a
(user, top, bottom) triple is

    taste_u . style_b + style_t . style_b

so a bottom is good when it matches both the user's taste and the top's
style.  Observable features are a fixed random linear projection of the
style vectors; quadruples pick the positive as the bottom with the
higher noisy affinity.  With noise 0 the positive strictly beats the
negative under the true affinity, which gives tests an exact oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from .schema import Dataset, Garment, OutfitQuadruple, SPLITS


@dataclass
class SyntheticWorld:
    """Hidden state behind a generated dataset.

    Construct with the knobs only; ``generate_synthetic`` fills the
    hidden vectors in place so the same object then serves as the
    ground-truth scorer.
    """

    seed: int
    noise_level: float = 0.0
    style_dim: int = 4
    feature_dim: int = 32
    context_dim: int | None = None
    taste: dict[str, np.ndarray] = field(default_factory=dict)
    style: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.noise_level < 0:
            raise ContractViolation(f"noise_level must be >= 0, got {self.noise_level}")
        if self.style_dim <= 0 or self.feature_dim <= 0:
            raise ContractViolation("style_dim and feature_dim must be positive")
        if self.style_dim > self.feature_dim:
            raise ContractViolation("style_dim cannot exceed feature_dim")
        if self.context_dim is not None and self.style_dim > self.context_dim:
            raise ContractViolation("style_dim cannot exceed context_dim")

    def true_affinity(self, user: str, top: str, bottom: str) -> float:
        """Ground-truth score of wearing ``bottom`` with ``top`` for ``user``."""
        taste = self.taste[user]
        style_t = self.style[top]
        style_b = self.style[bottom]
        return float(taste @ style_b + style_t @ style_b)


def _projection(rng: np.random.Generator, style_dim: int, out_dim: int) -> np.ndarray:
    # Orthonormal rows keep feature norms equal to style norms, so the
    # observable features span an exact style_dim subspace.
    gaussian = rng.standard_normal((out_dim, style_dim))
    q, _ = np.linalg.qr(gaussian)
    return q.T.copy()


def generate_synthetic(
    world: SyntheticWorld,
    n_users: int,
    n_tops: int,
    n_bottoms: int,
    n_quadruples: int,
) -> Dataset:
    """Populate ``world`` with hidden vectors and emit a dataset.

    All quadruples land in the train split; use ``split`` to carve out
    validation and test portions.  Everything is a pure function of the
    world's seed and the sizes, so the same call twice yields identical
    datasets.
    """
    if min(n_users, n_tops, n_quadruples) < 1 or n_bottoms < 2:
        raise ContractViolation("need at least 1 user, 1 top, 2 bottoms, 1 quadruple")
    rng = np.random.default_rng(world.seed)

    users = [f"u{idx:04d}" for idx in range(n_users)]
    top_ids = [f"t{idx:04d}" for idx in range(n_tops)]
    bottom_ids = [f"b{idx:04d}" for idx in range(n_bottoms)]

    world.taste = {uid: rng.standard_normal(world.style_dim) for uid in users}
    world.style = {
        gid: rng.standard_normal(world.style_dim) for gid in top_ids + bottom_ids
    }

    feat_proj = _projection(rng, world.style_dim, world.feature_dim)
    ctx_proj = None
    if world.context_dim is not None:
        ctx_proj = _projection(rng, world.style_dim, world.context_dim)

    garments: dict[str, Garment] = {}
    for gid in top_ids + bottom_ids:
        category = "top" if gid.startswith("t") else "bottom"
        style = world.style[gid]
        garments[gid] = Garment(
            id=gid,
            category=category,
            feature=style @ feat_proj,
            context_feature=None if ctx_proj is None else style @ ctx_proj,
        )

    quadruples: list[OutfitQuadruple] = []
    while len(quadruples) < n_quadruples:
        user = users[int(rng.integers(n_users))]
        top = top_ids[int(rng.integers(n_tops))]
        first, second = rng.choice(n_bottoms, size=2, replace=False)
        pair = (bottom_ids[int(first)], bottom_ids[int(second)])
        observed = []
        for bottom in pair:
            score = world.true_affinity(user, top, bottom)
            if world.noise_level > 0:
                score += world.noise_level * float(rng.standard_normal())
            observed.append(score)
        if observed[0] == observed[1]:
            continue
        pos, neg = pair if observed[0] > observed[1] else pair[::-1]
        quadruples.append(OutfitQuadruple(user=user, top=top, pos=pos, neg=neg))

    dataset = Dataset(
        feature_dim=world.feature_dim,
        context_dim=world.context_dim,
        garments=garments,
        users=users,
        quadruples={"train": quadruples, "val": [], "test": []},
    )
    dataset.validate()
    return dataset


def split(
    dataset: Dataset,
    ratios: tuple[float, float, float],
    seed: int,
) -> Dataset:
    """Re-split all quadruples into train/val/test by (user, top) group.

    Quadruples sharing a (user, top) pair always land in the same split,
    which keeps evaluation pairs unseen during training.  Ratios must sum
    to 1; any split with a positive ratio must end up non-empty.
    """
    if len(ratios) != len(SPLITS):
        raise ContractViolation(f"need {len(SPLITS)} ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ContractViolation(f"ratios must be >= 0, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ContractViolation(f"ratios must sum to 1, got {sum(ratios)}")

    groups: dict[tuple[str, str], list[OutfitQuadruple]] = {}
    for quad in dataset.all_quadruples():
        groups.setdefault((quad.user, quad.top), []).append(quad)
    keys = sorted(groups)
    rng = np.random.default_rng(seed)
    rng.shuffle(keys)

    total = sum(len(groups[key]) for key in keys)
    # Largest-remainder apportionment of the quadruple count.
    raw = [r * total for r in ratios]
    targets = [int(np.floor(x)) for x in raw]
    remainders = sorted(range(len(SPLITS)), key=lambda i: raw[i] - targets[i], reverse=True)
    for idx in remainders[: total - sum(targets)]:
        targets[idx] += 1

    assigned: dict[str, list[OutfitQuadruple]] = {name: [] for name in SPLITS}
    counts = [0, 0, 0]
    for key in keys:
        group = groups[key]
        slot = None
        for idx, name in enumerate(SPLITS):
            if ratios[idx] > 0 and counts[idx] < targets[idx]:
                slot = idx
                break
        if slot is None:
            slot = max(range(len(SPLITS)), key=lambda i: ratios[i])
        counts[slot] += len(group)
        assigned[SPLITS[slot]].extend(group)

    for idx, name in enumerate(SPLITS):
        if ratios[idx] > 0 and not assigned[name]:
            raise ContractViolation(
                f"split {name!r} has ratio {ratios[idx]} but received no quadruples"
            )

    result = Dataset(
        feature_dim=dataset.feature_dim,
        context_dim=dataset.context_dim,
        garments=dataset.garments,
        users=dataset.users,
        quadruples=assigned,
    )
    result.validate()
    return result
