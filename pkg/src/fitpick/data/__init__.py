from .schema import Garment, OutfitQuadruple, Dataset, SPLITS
from .synthetic import SyntheticWorld, generate_synthetic, split
from .manifest import load_manifest, save_manifest

__all__ = [
    "Garment",
    "OutfitQuadruple",
    "Dataset",
    "SPLITS",
    "SyntheticWorld",
    "generate_synthetic",
    "split",
    "load_manifest",
    "save_manifest",
]
