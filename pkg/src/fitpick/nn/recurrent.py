"""Gated recurrent (LSTM) cell with explicit per-step caches for BPTT.

Gate layout in the stacked weight matrices is [input, forget, output, cell],
each block of size ``hidden_dim``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..errors import ShapeError
from .layers import apply_activation


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    def copy(self) -> "LstmState":
        return LstmState(self.h.copy(), self.c.copy())


@dataclass
class LstmStepCache:
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray


class LstmCell:
    def __init__(self, w_x: np.ndarray, w_h: np.ndarray, bias: np.ndarray):
        w_x = np.asarray(w_x, dtype=np.float64)
        w_h = np.asarray(w_h, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        hidden = w_h.shape[1]
        if w_x.shape[0] != 4 * hidden or w_h.shape[0] != 4 * hidden or bias.shape != (4 * hidden,):
            raise ShapeError(f"inconsistent cell shapes Wx{w_x.shape} Wh{w_h.shape} b{bias.shape}")
        self.w_x = w_x
        self.w_h = w_h
        self.bias = bias
        self.input_dim = w_x.shape[1]
        self.hidden_dim = hidden

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator) -> "LstmCell":
        lim_x = 1.0 / np.sqrt(input_dim)
        lim_h = 1.0 / np.sqrt(hidden_dim)
        w_x = rng.uniform(-lim_x, lim_x, size=(4 * hidden_dim, input_dim))
        w_h = rng.uniform(-lim_h, lim_h, size=(4 * hidden_dim, hidden_dim))
        return cls(w_x, w_h, np.zeros(4 * hidden_dim))

    def initial_state(self, h0: np.ndarray) -> LstmState:
        h0 = np.asarray(h0, dtype=np.float64)
        if h0.shape != (self.hidden_dim,):
            raise ShapeError(f"expected hidden dim {self.hidden_dim}, got {h0.shape}")
        return LstmState(h0.copy(), np.zeros(self.hidden_dim))

    def _gates(self, state: LstmState, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise ShapeError(f"expected input dim {self.input_dim}, got {x.shape}")
        if state.h.shape != (self.hidden_dim,):
            raise ShapeError(f"expected hidden dim {self.hidden_dim}, got {state.h.shape}")
        z = self.w_x @ x + self.w_h @ state.h + self.bias
        hd = self.hidden_dim
        i = apply_activation("sigmoid", z[:hd])
        f = apply_activation("sigmoid", z[hd:2 * hd])
        o = apply_activation("sigmoid", z[2 * hd:3 * hd])
        g = np.tanh(z[3 * hd:])
        return x, i, f, o, g

    def step(self, state: LstmState, x: np.ndarray) -> LstmState:
        x, i, f, o, g = self._gates(state, x)
        c = f * state.c + i * g
        return LstmState(o * np.tanh(c), c)

    def step_cached(self, state: LstmState, x: np.ndarray) -> Tuple[LstmState, LstmStepCache]:
        x, i, f, o, g = self._gates(state, x)
        c = f * state.c + i * g
        cache = LstmStepCache(x, state.h.copy(), state.c.copy(), i, f, o, g, c)
        return LstmState(o * np.tanh(c), c), cache

    def backward_step(
        self,
        cache: LstmStepCache,
        dh: np.ndarray,
        dc: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """One BPTT step.

        ``dh``/``dc`` are dLoss/dh and dLoss/dc at this step's output.
        Returns (dWx, dWh, db, dx, dh_prev, dc_prev).
        """
        tanh_c = np.tanh(cache.c)
        do = dh * tanh_c
        dc_total = dc + dh * cache.o * (1.0 - tanh_c * tanh_c)
        di = dc_total * cache.g
        df = dc_total * cache.c_prev
        dg = dc_total * cache.i
        dc_prev = dc_total * cache.f

        dz_i = di * cache.i * (1.0 - cache.i)
        dz_f = df * cache.f * (1.0 - cache.f)
        dz_o = do * cache.o * (1.0 - cache.o)
        dz_g = dg * (1.0 - cache.g * cache.g)
        dz = np.concatenate([dz_i, dz_f, dz_o, dz_g])

        dwx = np.outer(dz, cache.x)
        dwh = np.outer(dz, cache.h_prev)
        db = dz
        dx = self.w_x.T @ dz
        dh_prev = self.w_h.T @ dz
        return dwx, dwh, db, dx, dh_prev, dc_prev

    def parameters(self) -> List[np.ndarray]:
        return [self.w_x, self.w_h, self.bias]

    def parameter_names(self, prefix: str = "lstm") -> List[str]:
        return [f"{prefix}.w_x", f"{prefix}.w_h", f"{prefix}.bias"]
