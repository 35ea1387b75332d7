from .layers import ACTIVATIONS, DenseLayer, Mlp
from .optim import Optimizer
from .recurrent import LstmCell, LstmState
from .checkpoint import save_mlp, load_mlp, save_arrays, load_arrays
from .gradcheck import numeric_gradient, relative_error, check_gradients

__all__ = [
    "ACTIVATIONS",
    "DenseLayer",
    "Mlp",
    "Optimizer",
    "LstmCell",
    "LstmState",
    "save_mlp",
    "load_mlp",
    "save_arrays",
    "load_arrays",
    "numeric_gradient",
    "relative_error",
    "check_gradients",
]
