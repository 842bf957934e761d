"""Elman recurrent tagger.

The hidden layer feeds back its own previous value:

    h(t) = sigmoid(U x(t) + V h(t-1) + b_h)
    y(t) = softmax(W h(t) + b_y)

with h(0) = 0. Training minimizes the summed per-token cross-entropy by full
backpropagation through time; prediction takes the per-token argmax (ties go
to the lowest tag index, i.e. O).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..numeric import sigmoid, uniform_init
from .base import SentenceGrads, TaggerBase


@dataclass
class ElmanParams:
    u: np.ndarray  # (H, s*d)
    v: np.ndarray  # (H, H)
    w: np.ndarray  # (K, H)
    b_h: np.ndarray  # (H,)
    b_y: np.ndarray  # (K,)

    @classmethod
    def create(
        cls, hidden: int, input_dim: int, num_tags: int,
        rng: np.random.Generator | None,
    ) -> "ElmanParams":
        """Weight matrices uniform in [-1, 1), biases zero; zeros without rng."""
        if rng is None:
            return cls(
                u=np.zeros((hidden, input_dim)),
                v=np.zeros((hidden, hidden)),
                w=np.zeros((num_tags, hidden)),
                b_h=np.zeros(hidden),
                b_y=np.zeros(num_tags),
            )
        return cls(
            u=uniform_init(hidden, input_dim, -1.0, 1.0, rng),
            v=uniform_init(hidden, hidden, -1.0, 1.0, rng),
            w=uniform_init(num_tags, hidden, -1.0, 1.0, rng),
            b_h=np.zeros(hidden),
            b_y=np.zeros(num_tags),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {"U": self.u, "V": self.v, "W": self.w, "b_h": self.b_h, "b_y": self.b_y}


def elman_step(
    x: np.ndarray, h_prev: np.ndarray, params: ElmanParams
) -> np.ndarray:
    """One hidden-layer update: sigmoid(U x + V h_prev + b_h)."""
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    if params.u.shape[1] != x.shape[0] or params.v.shape[1] != h_prev.shape[0]:
        raise ValueError(
            f"elman_step dimension mismatch: U {params.u.shape}, x {x.shape}, "
            f"V {params.v.shape}, h_prev {h_prev.shape}"
        )
    return sigmoid(params.u @ x + params.v @ h_prev + params.b_h)


@dataclass
class ElmanTagger(TaggerBase):
    params: ElmanParams

    arch = "elman"

    @property
    def hidden(self) -> int:
        return self.params.u.shape[0]

    def param_arrays(self) -> dict[str, np.ndarray]:
        return self.params.arrays()

    def _forward(self, x_in: np.ndarray) -> np.ndarray:
        t_len = x_in.shape[0]
        hs = np.empty((t_len, self.hidden))
        h = np.zeros(self.hidden)
        for t in range(t_len):
            h = sigmoid(self.params.u @ x_in[t] + self.params.v @ h + self.params.b_h)
            hs[t] = h
        return hs

    def token_distributions(self, token_ids: Sequence[int]) -> np.ndarray:
        """(T, K) per-token class probabilities, mask-free."""
        _, x_in, _ = self._inputs(token_ids)
        hs = self._forward(x_in)
        z = hs @ self.params.w.T + self.params.b_y
        shifted = np.exp(z - z.max(axis=1, keepdims=True))
        return shifted / shifted.sum(axis=1, keepdims=True)

    def predict_tag_ids(self, token_ids: Sequence[int]) -> list[int]:
        probs = self.token_distributions(token_ids)
        return [int(i) for i in np.argmax(probs, axis=1)]

    def sentence_loss(self, token_ids: Sequence[int], gold_ids: Sequence[int]) -> float:
        loss, _ = self.loss_and_grads(token_ids, gold_ids, want_grads=False)
        return loss

    def loss_and_grads(
        self,
        token_ids: Sequence[int],
        gold_ids: Sequence[int],
        dropout: float = 0.0,
        rng: np.random.Generator | None = None,
        want_grads: bool = True,
    ) -> tuple[float, SentenceGrads | None]:
        gold = np.asarray(gold_ids, dtype=np.int64)
        windows, x_in, x_mask = self._inputs(token_ids, dropout, rng)
        t_len = x_in.shape[0]
        if gold.shape != (t_len,):
            raise ValueError("gold tag sequence length does not match sentence")

        hs = self._forward(x_in)
        h_mask = self._hidden_mask(hs.shape, dropout, rng)
        h_out = hs * h_mask if h_mask is not None else hs
        z = h_out @ self.params.w.T + self.params.b_y  # (T, K)

        # row-wise log-softmax, stable
        shifted = z - z.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1))
        loss = float(np.sum(log_norm - shifted[np.arange(t_len), gold]))
        if not want_grads:
            return loss, None

        probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
        d_z = probs
        d_z[np.arange(t_len), gold] -= 1.0

        p = self.params
        d_w = d_z.T @ h_out
        d_by = d_z.sum(axis=0)
        d_hout = d_z @ p.w
        d_h_from_out = d_hout * h_mask if h_mask is not None else d_hout

        d_u = np.zeros_like(p.u)
        d_v = np.zeros_like(p.v)
        d_bh = np.zeros_like(p.b_h)
        d_x = np.empty_like(x_in)
        carry = np.zeros(self.hidden)  # V^T da from the following step
        for t in range(t_len - 1, -1, -1):
            d_h = d_h_from_out[t] + carry
            d_a = d_h * hs[t] * (1.0 - hs[t])
            h_prev = hs[t - 1] if t > 0 else np.zeros(self.hidden)
            d_u += np.outer(d_a, x_in[t])
            d_v += np.outer(d_a, h_prev)
            d_bh += d_a
            d_x[t] = p.u.T @ d_a
            carry = p.v.T @ d_a

        if x_mask is not None:
            d_x *= x_mask
        grads = SentenceGrads(
            params={"U": d_u, "V": d_v, "W": d_w, "b_h": d_bh, "b_y": d_by}
        )
        grads.add_embedding_rows(windows, d_x, self.emb.dim)
        return loss, grads
