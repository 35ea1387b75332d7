"""Plain SGD (optional momentum) and Adam, updating parameter arrays in place."""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from ..errors import ShapeError, TrainingError


class Optimizer:
    """Gradient-descent step rule bound to a fixed parameter list.

    State (momentum / Adam moments) is kept per parameter position, so the
    same ``params`` sequence must be passed on every call.
    """

    def __init__(
        self,
        kind: str = "sgd",
        learning_rate: float = 0.01,
        momentum: float = 0.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        if kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer kind {kind!r}")
        if learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        self.kind = kind
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._t = 0
        self._m: List[np.ndarray] | None = None
        self._v: List[np.ndarray] | None = None

    def step(
        self,
        params: Sequence[np.ndarray],
        grads: Sequence[np.ndarray],
        names: Optional[Sequence[str]] = None,
    ) -> Sequence[np.ndarray]:
        if len(params) != len(grads):
            raise ShapeError("params and grads length mismatch")
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(self._m) != len(params):
            raise ShapeError("optimizer was bound to a different parameter list")

        for i, (p, g) in enumerate(zip(params, grads)):
            if p.shape != g.shape:
                raise ShapeError(f"grad shape {g.shape} != param shape {p.shape}")
            if not np.isfinite(g).all():
                label = names[i] if names is not None else f"param[{i}]"
                raise TrainingError(f"non-finite gradient for {label}")

        self._t += 1
        lr = self.learning_rate
        if self.kind == "sgd":
            for i, (p, g) in enumerate(zip(params, grads)):
                if self.momentum:
                    self._m[i] = self.momentum * self._m[i] + g
                    p -= lr * self._m[i]
                else:
                    p -= lr * g
        else:  # adam
            b1, b2 = self.beta1, self.beta2
            bc1 = 1.0 - b1 ** self._t
            bc2 = 1.0 - b2 ** self._t
            for i, (p, g) in enumerate(zip(params, grads)):
                self._m[i] = b1 * self._m[i] + (1.0 - b1) * g
                self._v[i] = b2 * self._v[i] + (1.0 - b2) * g * g
                m_hat = self._m[i] / bc1
                v_hat = self._v[i] / bc2
                p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params
