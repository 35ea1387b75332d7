"""Action-value network over the candidate set.

Input is the episode state (feature-space vector); output is one value
per candidate bottom, in candidate order.  The checkpoint pins the
candidate list and a digest of it, so downstream consumers can refuse
to pair the network with a different clustering.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractViolation, LoadError
from ..nn import Mlp, load_mlp, save_mlp
from ..preprocess import candidate_hash
from .schedule import EpsilonSchedule


@dataclass
class QNetwork:
    mlp: Mlp
    candidates: list[str]
    gamma: float
    schedule: EpsilonSchedule

    @classmethod
    def build(
        cls,
        feature_dim: int,
        candidates: list[str],
        hidden_dims: tuple[int, ...],
        gamma: float,
        schedule: EpsilonSchedule,
        rng: np.random.Generator,
    ) -> "QNetwork":
        if not candidates:
            raise ContractViolation("candidate set is empty")
        if not 0.0 <= gamma < 1.0:
            raise ContractViolation(f"gamma must lie in [0, 1), got {gamma}")
        dims = [feature_dim, *hidden_dims, len(candidates)]
        acts = ["relu"] * (len(dims) - 2) + ["identity"]
        return cls(
            mlp=Mlp.init(dims, acts, rng),
            candidates=list(candidates),
            gamma=gamma,
            schedule=schedule,
        )

    @property
    def feature_dim(self) -> int:
        return self.mlp.layers[0].weights.shape[1]

    @property
    def n_actions(self) -> int:
        return self.mlp.layers[-1].weights.shape[0]

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self.mlp.forward(state)

    def clone_mlp(self) -> Mlp:
        """Detached copy of the network, for TD targets."""
        from ..nn import DenseLayer

        return Mlp(
            [
                DenseLayer(l.weights.copy(), l.bias.copy(), l.activation)
                for l in self.mlp.layers
            ]
        )

    def save(self, path: str | Path) -> None:
        extra = {
            "candidates": self.candidates,
            "candidate_hash": candidate_hash(self.candidates),
            "gamma": self.gamma,
            "schedule": {
                "start": self.schedule.start,
                "end": self.schedule.end,
                "decay": self.schedule.decay,
            },
        }
        save_mlp(Path(path), self.mlp, extra=extra)

    @classmethod
    def load(cls, path: str | Path) -> "QNetwork":
        mlp, extra = load_mlp(Path(path))
        for key in ("candidates", "candidate_hash", "gamma", "schedule"):
            if key not in extra:
                raise LoadError(f"{path} header is missing {key!r}")
        candidates = [str(c) for c in extra["candidates"]]
        if candidate_hash(candidates) != extra["candidate_hash"]:
            raise LoadError(f"{path}: candidate list does not match its digest")
        if mlp.layers[-1].weights.shape[0] != len(candidates):
            raise LoadError(
                f"{path}: network emits {mlp.layers[-1].weights.shape[0]} values"
                f" for {len(candidates)} candidates"
            )
        sched = extra["schedule"]
        return cls(
            mlp=mlp,
            candidates=candidates,
            gamma=float(extra["gamma"]),
            schedule=EpsilonSchedule(
                start=sched["start"], end=sched["end"], decay=sched["decay"]
            ),
        )
