"""Personalized outfit-compatibility scorer.

The score of a (user, top, bottom) triple blends two parts:

* general compatibility between the top and the bottom, computed from
  projected feature embeddings.  With ``pairing="crossed"`` the top's
  context embedding is dotted against the bottom's visual embedding;
  ``pairing="matched"`` dots context against context instead.
* personal preference of the user for the bottom, a matrix-factorization
  term plus the user's taste vectors dotted against the bottom's
  embeddings.

Users and bottoms carry learned factors keyed by id.  An id outside the
registry scores with zero factors, so an unseen user falls back to the
global popularity of the bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..data import Garment, OutfitQuadruple
from ..errors import ContractViolation, ShapeError
from ..nn import Mlp

PAIRINGS = ("crossed", "matched")


@dataclass
class GpbprConfig:
    embed_dim: int = 16
    mf_dim: int = 8
    hidden_dims: tuple[int, ...] = (24,)
    phi: float = 0.5
    eta: float = 0.5
    mu: float = 0.5
    weight_decay: float = 0.0
    pairing: str = "crossed"
    learning_rate: float = 0.05
    epochs: int = 40
    batch_size: int = 64
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("phi", "eta", "mu"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ContractViolation(f"{name} must lie in [0, 1], got {value}")
        if self.pairing not in PAIRINGS:
            raise ContractViolation(f"pairing must be one of {PAIRINGS}")
        if self.weight_decay < 0:
            raise ContractViolation("weight_decay must be >= 0")

    @property
    def uses_context(self) -> bool:
        return self.phi < 1.0 or self.eta < 1.0


class GpbprModel:
    def __init__(
        self,
        config: GpbprConfig,
        feature_dim: int,
        context_dim: int | None,
        users: Sequence[str],
        bottoms: Sequence[str],
        rng: np.random.Generator | None = None,
    ):
        if config.uses_context and context_dim is None:
            raise ContractViolation(
                "phi < 1 or eta < 1 needs context features; this dataset has none"
                " (set phi = eta = 1 for context-free scoring)"
            )
        if rng is None:
            rng = np.random.default_rng(config.seed)
        self.config = config
        self.feature_dim = feature_dim
        self.context_dim = context_dim if config.uses_context else None
        self.user_index = {uid: i for i, uid in enumerate(users)}
        self.bottom_index = {bid: i for i, bid in enumerate(bottoms)}
        if len(self.user_index) != len(users):
            raise ContractViolation("duplicate user ids in registry")
        if len(self.bottom_index) != len(bottoms):
            raise ContractViolation("duplicate bottom ids in registry")

        dims = [feature_dim, *config.hidden_dims, config.embed_dim]
        acts = ["relu"] * (len(dims) - 2) + ["identity"]
        self.top_visual_net = Mlp.init(dims, acts, rng)
        self.bottom_visual_net = Mlp.init(dims, acts, rng)
        self.top_context_net = None
        self.bottom_context_net = None
        if self.context_dim is not None:
            cdims = [self.context_dim, *config.hidden_dims, config.embed_dim]
            self.top_context_net = Mlp.init(cdims, acts, rng)
            self.bottom_context_net = Mlp.init(cdims, acts, rng)

        n_users, n_bottoms = len(users), len(bottoms)
        scale = 0.1
        self.alpha = np.zeros(1)
        self.beta_user = np.zeros(n_users)
        self.beta_bottom = np.zeros(n_bottoms)
        self.gamma_user = scale * rng.standard_normal((n_users, config.mf_dim))
        self.gamma_bottom = scale * rng.standard_normal((n_bottoms, config.mf_dim))
        self.taste_visual = scale * rng.standard_normal((n_users, config.embed_dim))
        self.taste_context = None
        if self.context_dim is not None:
            self.taste_context = scale * rng.standard_normal((n_users, config.embed_dim))

    # -- parameter plumbing ------------------------------------------------

    def _nets(self) -> list[tuple[str, Mlp]]:
        nets = [("top_visual", self.top_visual_net), ("bottom_visual", self.bottom_visual_net)]
        if self.top_context_net is not None:
            nets.append(("top_context", self.top_context_net))
            nets.append(("bottom_context", self.bottom_context_net))
        return nets

    def _factors(self) -> list[tuple[str, np.ndarray]]:
        factors = [
            ("alpha", self.alpha),
            ("beta_user", self.beta_user),
            ("beta_bottom", self.beta_bottom),
            ("gamma_user", self.gamma_user),
            ("gamma_bottom", self.gamma_bottom),
            ("taste_visual", self.taste_visual),
        ]
        if self.taste_context is not None:
            factors.append(("taste_context", self.taste_context))
        return factors

    def parameters(self) -> list[np.ndarray]:
        params = []
        for _, net in self._nets():
            params.extend(net.parameters())
        params.extend(array for _, array in self._factors())
        return params

    def parameter_names(self) -> list[str]:
        names = []
        for prefix, net in self._nets():
            names.extend(net.parameter_names(prefix))
        names.extend(name for name, _ in self._factors())
        return names

    # -- embeddings --------------------------------------------------------

    def _check(self, garment: Garment, category: str) -> None:
        if garment.category != category:
            raise ShapeError(f"garment {garment.id!r} is not a {category}")
        if self.context_dim is not None and garment.context_feature is None:
            raise ShapeError(f"garment {garment.id!r} lacks a context feature")

    def visual_embedding(self, garment: Garment) -> np.ndarray:
        net = self.top_visual_net if garment.category == "top" else self.bottom_visual_net
        return net.forward(garment.feature)

    def context_embedding(self, garment: Garment) -> np.ndarray | None:
        if self.context_dim is None:
            return None
        net = self.top_context_net if garment.category == "top" else self.bottom_context_net
        return net.forward(garment.context_feature)

    # -- scoring -----------------------------------------------------------

    def general_compatibility(self, top: Garment, bottom: Garment) -> float:
        self._check(top, "top")
        self._check(bottom, "bottom")
        cfg = self.config
        v_t = self.visual_embedding(top)
        v_b = self.visual_embedding(bottom)
        score = cfg.phi * float(v_t @ v_b)
        if cfg.phi < 1.0:
            c_t = self.context_embedding(top)
            other = v_b if cfg.pairing == "crossed" else self.context_embedding(bottom)
            score += (1.0 - cfg.phi) * float(c_t @ other)
        return score

    def _user_row(self, user: str, table: np.ndarray) -> np.ndarray:
        idx = self.user_index.get(user)
        if idx is None:
            return np.zeros(table.shape[1]) if table.ndim == 2 else np.zeros(())
        return table[idx]

    def personal_preference(self, user: str, bottom: Garment) -> float:
        self._check(bottom, "bottom")
        cfg = self.config
        u = self.user_index.get(user)
        j = self.bottom_index.get(bottom.id)
        score = float(self.alpha[0])
        score += float(self.beta_user[u]) if u is not None else 0.0
        score += float(self.beta_bottom[j]) if j is not None else 0.0
        if u is not None and j is not None:
            score += float(self.gamma_user[u] @ self.gamma_bottom[j])
        if u is not None:
            score += cfg.eta * float(self.taste_visual[u] @ self.visual_embedding(bottom))
            if cfg.eta < 1.0:
                score += (1.0 - cfg.eta) * float(
                    self.taste_context[u] @ self.context_embedding(bottom)
                )
        return score

    def score(self, user: str, top: Garment, bottom: Garment) -> float:
        """Blend of general compatibility and personal preference."""
        mu = self.config.mu
        return mu * self.general_compatibility(top, bottom) + (1.0 - mu) * (
            self.personal_preference(user, bottom)
        )


def _regularization(model: GpbprModel) -> float:
    lam = model.config.weight_decay
    if lam == 0:
        return 0.0
    return 0.5 * lam * sum(float((p**2).sum()) for p in model.parameters())


def bpr_loss(
    model: GpbprModel,
    quads: Iterable[OutfitQuadruple],
    garments: dict[str, Garment],
) -> float:
    """Mean ranking loss over quadruples plus L2 weight decay."""
    deltas = []
    for quad in quads:
        top, pos, neg = garments[quad.top], garments[quad.pos], garments[quad.neg]
        deltas.append(
            model.score(quad.user, top, pos) - model.score(quad.user, top, neg)
        )
    data = float(np.mean(np.logaddexp(0.0, -np.asarray(deltas))))
    return data + _regularization(model)


def bpr_gradients(
    model: GpbprModel,
    quads: Sequence[OutfitQuadruple],
    garments: dict[str, Garment],
) -> tuple[float, list[np.ndarray]]:
    """Loss and analytic gradients in ``model.parameters()`` order."""
    cfg = model.config
    B = len(quads)
    if B == 0:
        raise ContractViolation("empty quadruple batch")
    u_idx = np.array([model.user_index[q.user] for q in quads])
    p_idx = np.array([model.bottom_index[q.pos] for q in quads])
    n_idx = np.array([model.bottom_index[q.neg] for q in quads])
    top_feat = np.stack([garments[q.top].feature for q in quads])
    both_feat = np.vstack(
        [
            np.stack([garments[q.pos].feature for q in quads]),
            np.stack([garments[q.neg].feature for q in quads]),
        ]
    )

    v_t = model.top_visual_net.forward_cached(top_feat)
    v_both = model.bottom_visual_net.forward_cached(both_feat)
    v_pos, v_neg = v_both[:B], v_both[B:]
    c_t = c_pos = c_neg = None
    if model.context_dim is not None:
        top_ctx = np.stack([garments[q.top].context_feature for q in quads])
        both_ctx = np.vstack(
            [
                np.stack([garments[q.pos].context_feature for q in quads]),
                np.stack([garments[q.neg].context_feature for q in quads]),
            ]
        )
        c_t = model.top_context_net.forward_cached(top_ctx)
        c_both = model.bottom_context_net.forward_cached(both_ctx)
        c_pos, c_neg = c_both[:B], c_both[B:]

    def general(v_b, c_b):
        s = cfg.phi * (v_t * v_b).sum(axis=1)
        if cfg.phi < 1.0:
            other = v_b if cfg.pairing == "crossed" else c_b
            s = s + (1.0 - cfg.phi) * (c_t * other).sum(axis=1)
        return s

    g_u = model.gamma_user[u_idx]
    t_vis = model.taste_visual[u_idx]
    t_ctx = model.taste_context[u_idx] if model.taste_context is not None else None

    def personal(b_idx, v_b, c_b):
        c = (
            model.alpha[0]
            + model.beta_user[u_idx]
            + model.beta_bottom[b_idx]
            + (g_u * model.gamma_bottom[b_idx]).sum(axis=1)
            + cfg.eta * (t_vis * v_b).sum(axis=1)
        )
        if cfg.eta < 1.0:
            c = c + (1.0 - cfg.eta) * (t_ctx * c_b).sum(axis=1)
        return c

    p_pos = cfg.mu * general(v_pos, c_pos) + (1 - cfg.mu) * personal(p_idx, v_pos, c_pos)
    p_neg = cfg.mu * general(v_neg, c_neg) + (1 - cfg.mu) * personal(n_idx, v_neg, c_neg)
    delta = p_pos - p_neg
    loss = float(np.mean(np.logaddexp(0.0, -delta))) + _regularization(model)

    sig = 1.0 / (1.0 + np.exp(-np.clip(delta, -500, 500)))
    d_delta = (sig - 1.0) / B
    ds_pos, ds_neg = cfg.mu * d_delta, -cfg.mu * d_delta
    dc_pos, dc_neg = (1 - cfg.mu) * d_delta, -(1 - cfg.mu) * d_delta

    # Embedding gradients.
    dv_t = cfg.phi * (ds_pos[:, None] * v_pos + ds_neg[:, None] * v_neg)
    dv_pos = cfg.phi * ds_pos[:, None] * v_t + cfg.eta * dc_pos[:, None] * t_vis
    dv_neg = cfg.phi * ds_neg[:, None] * v_t + cfg.eta * dc_neg[:, None] * t_vis
    dc_t = None
    dc_pos_emb = dc_neg_emb = None
    if model.context_dim is not None:
        dc_pos_emb = np.zeros_like(c_pos)
        dc_neg_emb = np.zeros_like(c_neg)
        if cfg.phi < 1.0:
            if cfg.pairing == "crossed":
                dc_t = (1 - cfg.phi) * (ds_pos[:, None] * v_pos + ds_neg[:, None] * v_neg)
                dv_pos = dv_pos + (1 - cfg.phi) * ds_pos[:, None] * c_t
                dv_neg = dv_neg + (1 - cfg.phi) * ds_neg[:, None] * c_t
            else:
                dc_t = (1 - cfg.phi) * (ds_pos[:, None] * c_pos + ds_neg[:, None] * c_neg)
                dc_pos_emb += (1 - cfg.phi) * ds_pos[:, None] * c_t
                dc_neg_emb += (1 - cfg.phi) * ds_neg[:, None] * c_t
        else:
            dc_t = np.zeros_like(c_t)
        if cfg.eta < 1.0:
            dc_pos_emb += (1 - cfg.eta) * dc_pos[:, None] * t_ctx
            dc_neg_emb += (1 - cfg.eta) * dc_neg[:, None] * t_ctx

    grads: list[np.ndarray] = []
    net_grads = {
        "top_visual": model.top_visual_net.backward(dv_t)[0],
        "bottom_visual": model.bottom_visual_net.backward(np.vstack([dv_pos, dv_neg]))[0],
    }
    if model.context_dim is not None:
        net_grads["top_context"] = model.top_context_net.backward(dc_t)[0]
        net_grads["bottom_context"] = model.bottom_context_net.backward(
            np.vstack([dc_pos_emb, dc_neg_emb])
        )[0]
    for name, net in model._nets():
        grads.extend(net.grads_as_list(net_grads[name]))

    d_alpha = np.array([dc_pos.sum() + dc_neg.sum()])
    d_beta_user = np.zeros_like(model.beta_user)
    np.add.at(d_beta_user, u_idx, dc_pos + dc_neg)
    d_beta_bottom = np.zeros_like(model.beta_bottom)
    np.add.at(d_beta_bottom, p_idx, dc_pos)
    np.add.at(d_beta_bottom, n_idx, dc_neg)
    d_gamma_user = np.zeros_like(model.gamma_user)
    np.add.at(
        d_gamma_user,
        u_idx,
        dc_pos[:, None] * model.gamma_bottom[p_idx]
        + dc_neg[:, None] * model.gamma_bottom[n_idx],
    )
    d_gamma_bottom = np.zeros_like(model.gamma_bottom)
    np.add.at(d_gamma_bottom, p_idx, dc_pos[:, None] * g_u)
    np.add.at(d_gamma_bottom, n_idx, dc_neg[:, None] * g_u)
    d_taste_visual = np.zeros_like(model.taste_visual)
    np.add.at(
        d_taste_visual,
        u_idx,
        cfg.eta * (dc_pos[:, None] * v_pos + dc_neg[:, None] * v_neg),
    )
    grads.extend(
        [d_alpha, d_beta_user, d_beta_bottom, d_gamma_user, d_gamma_bottom, d_taste_visual]
    )
    if model.taste_context is not None:
        d_taste_context = np.zeros_like(model.taste_context)
        if cfg.eta < 1.0:
            np.add.at(
                d_taste_context,
                u_idx,
                (1 - cfg.eta) * (dc_pos[:, None] * c_pos + dc_neg[:, None] * c_neg),
            )
        grads.append(d_taste_context)

    lam = cfg.weight_decay
    if lam > 0:
        for grad, param in zip(grads, model.parameters()):
            grad += lam * param
    return loss, grads
