"""Dataset records: garments, outfit quadruples, and the split container.

A quadruple states that for a given (user, top) pair one bottom was worn
(positive) and another was not (negative).  All referential integrity
checks live in ``Dataset.validate`` so that every loader and generator
shares the same notion of a well-formed dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation

CATEGORIES = ("top", "bottom")
SPLITS = ("train", "val", "test")


@dataclass
class Garment:
    id: str
    category: str
    feature: np.ndarray
    context_feature: np.ndarray | None = None
    image_url: str | None = None

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ContractViolation(
                f"garment {self.id!r}: unknown category {self.category!r}"
            )
        self.feature = np.asarray(self.feature, dtype=np.float64)
        if self.feature.ndim != 1:
            raise ContractViolation(
                f"garment {self.id!r}: feature must be a vector, got shape {self.feature.shape}"
            )
        if self.context_feature is not None:
            self.context_feature = np.asarray(self.context_feature, dtype=np.float64)
            if self.context_feature.ndim != 1:
                raise ContractViolation(
                    f"garment {self.id!r}: context feature must be a vector"
                )


@dataclass(frozen=True)
class OutfitQuadruple:
    user: str
    top: str
    pos: str
    neg: str


@dataclass
class Dataset:
    feature_dim: int
    context_dim: int | None
    garments: dict[str, Garment]
    users: list[str]
    quadruples: dict[str, list[OutfitQuadruple]] = field(
        default_factory=lambda: {name: [] for name in SPLITS}
    )

    def validate(self) -> None:
        if self.feature_dim <= 0:
            raise ContractViolation(f"feature_dim must be positive, got {self.feature_dim}")
        if self.context_dim is not None and self.context_dim <= 0:
            raise ContractViolation(f"context_dim must be positive, got {self.context_dim}")
        if len(set(self.users)) != len(self.users):
            raise ContractViolation("duplicate user ids")
        for gid, garment in self.garments.items():
            if gid != garment.id:
                raise ContractViolation(f"garment key {gid!r} != id {garment.id!r}")
            if garment.feature.shape != (self.feature_dim,):
                raise ContractViolation(
                    f"garment {gid!r}: feature dim {garment.feature.shape[0]}"
                    f" != dataset dim {self.feature_dim}"
                )
            if self.context_dim is None:
                if garment.context_feature is not None:
                    raise ContractViolation(
                        f"garment {gid!r} carries a context feature but context_dim is null"
                    )
            else:
                if garment.context_feature is None:
                    raise ContractViolation(f"garment {gid!r} is missing its context feature")
                if garment.context_feature.shape != (self.context_dim,):
                    raise ContractViolation(
                        f"garment {gid!r}: context dim {garment.context_feature.shape[0]}"
                        f" != dataset dim {self.context_dim}"
                    )
        unknown = set(self.quadruples) - set(SPLITS)
        if unknown:
            raise ContractViolation(f"unknown split names: {sorted(unknown)}")
        user_set = set(self.users)
        pair_owner: dict[tuple[str, str], str] = {}
        for split_name in SPLITS:
            for quad in self.quadruples.get(split_name, []):
                if quad.user not in user_set:
                    raise ContractViolation(f"quadruple references unknown user {quad.user!r}")
                self._check_ref(quad.top, "top")
                self._check_ref(quad.pos, "bottom")
                self._check_ref(quad.neg, "bottom")
                if quad.pos == quad.neg:
                    raise ContractViolation(
                        f"quadruple ({quad.user!r}, {quad.top!r}) has pos == neg == {quad.pos!r}"
                    )
                pair = (quad.user, quad.top)
                owner = pair_owner.setdefault(pair, split_name)
                if owner != split_name:
                    raise ContractViolation(
                        f"(user, top) pair {pair!r} appears in both"
                        f" {owner!r} and {split_name!r}"
                    )

    def _check_ref(self, gid: str, category: str) -> None:
        garment = self.garments.get(gid)
        if garment is None:
            raise ContractViolation(f"quadruple references unknown garment {gid!r}")
        if garment.category != category:
            raise ContractViolation(
                f"garment {gid!r} is a {garment.category}, expected a {category}"
            )

    def by_category(self, category: str) -> list[Garment]:
        if category not in CATEGORIES:
            raise ContractViolation(f"unknown category {category!r}")
        return [g for g in self.garments.values() if g.category == category]

    def tops(self) -> list[Garment]:
        return self.by_category("top")

    def bottoms(self) -> list[Garment]:
        return self.by_category("bottom")

    def all_quadruples(self) -> list[OutfitQuadruple]:
        return [q for name in SPLITS for q in self.quadruples.get(name, [])]
