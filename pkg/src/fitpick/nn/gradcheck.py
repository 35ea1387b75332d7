"""Central finite-difference gradient checking.

Used by the test suite to validate every hand-written backward pass. The
numeric side only ever calls the loss function, so it stays independent of
the analytic code path it checks.
"""

from __future__ import annotations

from typing import Callable, List, Sequence

import numpy as np

DEFAULT_STEP = 1e-5


def numeric_gradient(loss_fn: Callable[[], float], param: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences of ``loss_fn`` w.r.t. every entry of ``param``.

    ``param`` is perturbed in place and restored; ``loss_fn`` must read it.
    """
    grad = np.zeros_like(param)
    flat = param.reshape(-1)
    gflat = grad.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + step
        above = loss_fn()
        flat[idx] = orig - step
        below = loss_fn()
        flat[idx] = orig
        gflat[idx] = (above - below) / (2.0 * step)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Norm-ratio error ||a-b|| / max(||a||, ||b||), robust near zero."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-12)
    return float(np.linalg.norm(a - b)) / denom


def check_gradients(
    loss_fn: Callable[[], float],
    params: Sequence[np.ndarray],
    analytic: Sequence[np.ndarray],
    step: float = DEFAULT_STEP,
) -> float:
    """Worst relative error between analytic grads and central differences."""
    worst = 0.0
    for p, g in zip(params, analytic):
        numeric = numeric_gradient(loss_fn, p, step)
        worst = max(worst, relative_error(g, numeric))
    return worst


def numeric_gradients(
    loss_fn: Callable[[], float],
    params: Sequence[np.ndarray],
    step: float = DEFAULT_STEP,
) -> List[np.ndarray]:
    return [numeric_gradient(loss_fn, p, step) for p in params]
