from .autoencoder import (
    Autoencoder,
    AutoencoderConfig,
    reconstruction_gradients,
    reconstruction_loss,
    train_autoencoder,
)
from .cluster import (
    ClusterModel,
    candidate_hash,
    fit_clusters,
    load_clusters,
    save_clusters,
)

__all__ = [
    "Autoencoder",
    "AutoencoderConfig",
    "reconstruction_gradients",
    "reconstruction_loss",
    "train_autoencoder",
    "ClusterModel",
    "candidate_hash",
    "fit_clusters",
    "load_clusters",
    "save_clusters",
]
