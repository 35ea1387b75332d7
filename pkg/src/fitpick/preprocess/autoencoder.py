"""Feature compression with a mirrored dense autoencoder.

The encoder stacks relu layers down to a small latent code; the decoder
mirrors the stack back up, linear at the output so reconstructions can
take any sign.  Training minimizes mean squared reconstruction error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ShapeError
from ..nn import Mlp, Optimizer, load_mlp, save_mlp


@dataclass
class AutoencoderConfig:
    latent_dim: int = 8
    hidden_dims: tuple[int, ...] = ()
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    optimizer: str = "adam"


@dataclass
class Autoencoder:
    encoder: Mlp
    decoder: Mlp
    losses: list[float] = field(default_factory=list)

    @classmethod
    def build(cls, input_dim: int, config: AutoencoderConfig) -> "Autoencoder":
        rng = np.random.default_rng(config.seed)
        down = [input_dim, *config.hidden_dims, config.latent_dim]
        up = down[::-1]
        enc_acts = ["relu"] * (len(down) - 1)
        dec_acts = ["relu"] * (len(up) - 2) + ["identity"]
        return cls(
            encoder=Mlp.init(down, enc_acts, rng),
            decoder=Mlp.init(up, dec_acts, rng),
        )

    @property
    def input_dim(self) -> int:
        return self.encoder.layers[0].weights.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.encoder.layers[-1].weights.shape[0]

    def encode(self, x: np.ndarray) -> np.ndarray:
        return self.encoder.forward(x)

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return self.decoder.forward(self.encoder.forward(x))

    def parameters(self) -> list[np.ndarray]:
        return self.encoder.parameters() + self.decoder.parameters()

    def parameter_names(self) -> list[str]:
        return self.encoder.parameter_names("encoder") + self.decoder.parameter_names(
            "decoder"
        )

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        save_mlp(directory / "encoder.nn", self.encoder)
        save_mlp(directory / "decoder.nn", self.decoder)

    @classmethod
    def load(cls, directory: str | Path) -> "Autoencoder":
        directory = Path(directory)
        encoder, _ = load_mlp(directory / "encoder.nn")
        decoder, _ = load_mlp(directory / "decoder.nn")
        return cls(encoder=encoder, decoder=decoder)


def reconstruction_loss(model: Autoencoder, batch: np.ndarray) -> float:
    """Mean squared error over every element of the batch."""
    recon = model.reconstruct(batch)
    return float(np.mean((recon - batch) ** 2))


def reconstruction_gradients(
    model: Autoencoder, batch: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Loss and analytic gradients in ``model.parameters()`` order."""
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    code = model.encoder.forward_cached(batch)
    recon = model.decoder.forward_cached(code)
    diff = recon - batch
    loss = float(np.mean(diff**2))
    grad_out = 2.0 * diff / diff.size
    dec_grads, d_code = model.decoder.backward(grad_out)
    enc_grads, _ = model.encoder.backward(d_code)
    return loss, model.encoder.grads_as_list(enc_grads) + model.decoder.grads_as_list(
        dec_grads
    )


def train_autoencoder(
    features: np.ndarray, config: AutoencoderConfig
) -> Autoencoder:
    """Fit an autoencoder to the feature rows; per-epoch losses land on the model."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError(f"features must be 2-d, got shape {features.shape}")
    model = Autoencoder.build(features.shape[1], config)
    optimizer = Optimizer(kind=config.optimizer, learning_rate=config.learning_rate)
    rng = np.random.default_rng(config.seed + 1)
    names = model.parameter_names()

    model.losses = [reconstruction_loss(model, features)]
    n = features.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = features[order[start : start + config.batch_size]]
            _, grads = reconstruction_gradients(model, batch)
            optimizer.step(model.parameters(), grads, names)
        model.losses.append(reconstruction_loss(model, features))
    return model
