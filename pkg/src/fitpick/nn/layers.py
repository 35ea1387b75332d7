"""Dense layers and MLPs with explicit forward/backward passes.

All math runs in float64. Inputs may be single vectors ``(in,)`` or batches
``(n, in)``; outputs mirror the input rank. ``forward`` is pure; training
code uses ``forward_cached`` + ``backward``, which stage intermediates on the
layer objects (single-writer: never share one instance across concurrent
training loops; frozen models may be read from many threads via ``forward``).
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from ..errors import ShapeError, StateError

ACTIVATIONS = ("relu", "sigmoid", "tanh", "identity")


def apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        # clip keeps exp() finite; saturation is exact 0/1 anyway at |z|>500
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))
    if name == "tanh":
        return np.tanh(z)
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


def activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """d activation / d z, expressed via pre-activation z and output a."""
    if name == "relu":
        # subgradient at exactly 0 is 0
        return (z > 0.0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    if name == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {name!r}")


class DenseLayer:
    """Fully connected layer: ``a = act(W @ x + b)``.

    ``weights`` has shape (out, in) and ``bias`` shape (out,).
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray, activation: str = "identity"):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.ndim != 1 or weights.shape[0] != bias.shape[0]:
            raise ShapeError(f"inconsistent layer shapes W{weights.shape} b{bias.shape}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise ValueError("layer parameters must be finite")
        self.weights = weights
        self.bias = bias
        self.activation = activation
        self._cache: Tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @classmethod
    def init(cls, in_dim: int, out_dim: int, activation: str, rng: np.random.Generator) -> "DenseLayer":
        # uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
        limit = 1.0 / np.sqrt(in_dim)
        w = rng.uniform(-limit, limit, size=(out_dim, in_dim))
        b = np.zeros(out_dim)
        return cls(w, b, activation)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def _lift(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ShapeError(f"expected input dim {self.in_dim}, got shape {x.shape}")
        return x, single

    def forward(self, x: np.ndarray) -> np.ndarray:
        x2, single = self._lift(x)
        a = apply_activation(self.activation, x2 @ self.weights.T + self.bias)
        return a[0] if single else a

    def forward_cached(self, x: np.ndarray) -> np.ndarray:
        x2, single = self._lift(x)
        z = x2 @ self.weights.T + self.bias
        a = apply_activation(self.activation, z)
        self._cache = (x2, z, a)
        return a[0] if single else a

    def backward(self, grad_a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (dW, db, dx) for the last cached forward.

        ``grad_a`` is dLoss/d output, shaped like that output.
        """
        if self._cache is None:
            raise StateError("backward called before forward_cached")
        x2, z, a = self._cache
        g = np.asarray(grad_a, dtype=np.float64)
        single = g.ndim == 1
        if single:
            g = g[None, :]
        if g.shape != a.shape:
            raise ShapeError(f"upstream grad shape {g.shape} != output shape {a.shape}")
        dz = g * activation_grad(self.activation, z, a)
        dw = dz.T @ x2
        db = dz.sum(axis=0)
        dx = dz @ self.weights
        return dw, db, dx[0] if single else dx


class Mlp:
    """Stack of DenseLayers with chained dimensions."""

    def __init__(self, layers: Sequence[DenseLayer]):
        layers = list(layers)
        if not layers:
            raise ShapeError("Mlp needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ShapeError(f"layer dims do not chain: {prev.out_dim} -> {nxt.in_dim}")
        self.layers: List[DenseLayer] = layers

    @classmethod
    def init(cls, dims: Sequence[int], activations: Sequence[str], rng: np.random.Generator) -> "Mlp":
        """Build from ``dims = [in, h1, ..., out]`` and one activation per layer."""
        if len(activations) != len(dims) - 1:
            raise ShapeError("need one activation per layer")
        return cls([
            DenseLayer.init(dims[i], dims[i + 1], activations[i], rng)
            for i in range(len(dims) - 1)
        ])

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward_cached(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward_cached(x)
        return x

    def backward(self, grad_out: np.ndarray) -> Tuple[List[Tuple[np.ndarray, np.ndarray]], np.ndarray]:
        """Return ([(dW, db) per layer], d input) for the last cached forward."""
        grads: List[Tuple[np.ndarray, np.ndarray]] = []
        g = grad_out
        for layer in reversed(self.layers):
            dw, db, g = layer.backward(g)
            grads.append((dw, db))
        grads.reverse()
        return grads, g

    def parameters(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        return out

    def parameter_names(self, prefix: str = "mlp") -> List[str]:
        names: List[str] = []
        for i in range(len(self.layers)):
            names.append(f"{prefix}.layer{i}.weights")
            names.append(f"{prefix}.layer{i}.bias")
        return names

    def grads_as_list(self, layer_grads: Sequence[Tuple[np.ndarray, np.ndarray]]) -> List[np.ndarray]:
        """Flatten backward() layer grads to match parameters() order."""
        out: List[np.ndarray] = []
        for dw, db in layer_grads:
            out.append(dw)
            out.append(db)
        return out
