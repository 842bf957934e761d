"""Jordan recurrent tagger.

Identical to the Elman network except the feedback is sourced from the
output layer rather than the previous hidden layer:

    h(t) = sigmoid(U x(t) + V y(t-1) + b_h)
    y(t) = softmax(W h(t) + b_y)

y(0) is the zero vector. The feedback uses the model's own previous output
distribution both at training and at prediction time, so there is no
train/test mismatch; BPTT therefore flows through the softmax Jacobian.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..numeric import sigmoid, softmax, uniform_init
from .base import SentenceGrads, TaggerBase


@dataclass
class JordanParams:
    u: np.ndarray  # (H, s*d)
    v: np.ndarray  # (H, K): feedback enters from the K-dim output
    w: np.ndarray  # (K, H)
    b_h: np.ndarray
    b_y: np.ndarray

    @classmethod
    def create(
        cls, hidden: int, input_dim: int, num_tags: int,
        rng: np.random.Generator | None,
    ) -> "JordanParams":
        if rng is None:
            return cls(
                u=np.zeros((hidden, input_dim)),
                v=np.zeros((hidden, num_tags)),
                w=np.zeros((num_tags, hidden)),
                b_h=np.zeros(hidden),
                b_y=np.zeros(num_tags),
            )
        return cls(
            u=uniform_init(hidden, input_dim, -1.0, 1.0, rng),
            v=uniform_init(hidden, num_tags, -1.0, 1.0, rng),
            w=uniform_init(num_tags, hidden, -1.0, 1.0, rng),
            b_h=np.zeros(hidden),
            b_y=np.zeros(num_tags),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        return {"U": self.u, "V": self.v, "W": self.w, "b_h": self.b_h, "b_y": self.b_y}


def jordan_step(
    x: np.ndarray, y_prev: np.ndarray, params: JordanParams
) -> np.ndarray:
    """One hidden-layer update: sigmoid(U x + V y_prev + b_h)."""
    x = np.asarray(x, dtype=np.float64)
    y_prev = np.asarray(y_prev, dtype=np.float64)
    if params.u.shape[1] != x.shape[0] or params.v.shape[1] != y_prev.shape[0]:
        raise ValueError(
            f"jordan_step dimension mismatch: U {params.u.shape}, x {x.shape}, "
            f"V {params.v.shape}, y_prev {y_prev.shape}"
        )
    return sigmoid(params.u @ x + params.v @ y_prev + params.b_h)


@dataclass
class JordanTagger(TaggerBase):
    params: JordanParams

    arch = "jordan"

    @property
    def hidden(self) -> int:
        return self.params.u.shape[0]

    def param_arrays(self) -> dict[str, np.ndarray]:
        return self.params.arrays()

    def _forward(
        self,
        x_in: np.ndarray,
        h_mask: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(hidden states, masked hidden states, output distributions)."""
        p = self.params
        t_len = x_in.shape[0]
        hs = np.empty((t_len, self.hidden))
        h_out = np.empty((t_len, self.hidden))
        ys = np.empty((t_len, self.num_tags))
        y_prev = np.zeros(self.num_tags)
        for t in range(t_len):
            h = sigmoid(p.u @ x_in[t] + p.v @ y_prev + p.b_h)
            hs[t] = h
            h_out[t] = h * h_mask[t] if h_mask is not None else h
            y_prev = softmax(p.w @ h_out[t] + p.b_y)
            ys[t] = y_prev
        return hs, h_out, ys

    def token_distributions(self, token_ids: Sequence[int]) -> np.ndarray:
        _, x_in, _ = self._inputs(token_ids)
        _, _, ys = self._forward(x_in)
        return ys

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
        h_mask = self._hidden_mask((t_len, self.hidden), dropout, rng)
        hs, h_out, ys = self._forward(x_in, h_mask)

        gold_probs = ys[np.arange(t_len), gold]
        loss = float(-np.sum(np.log(gold_probs)))
        if not want_grads:
            return loss, None

        p = self.params
        d_u = np.zeros_like(p.u)
        d_v = np.zeros_like(p.v)
        d_w = np.zeros_like(p.w)
        d_bh = np.zeros_like(p.b_h)
        d_by = np.zeros_like(p.b_y)
        d_x = np.empty_like(x_in)
        d_y_fb = np.zeros(self.num_tags)  # dL/dy_t arriving from step t+1
        for t in range(t_len - 1, -1, -1):
            y = ys[t]
            # direct cross-entropy term plus the feedback path through the
            # softmax Jacobian: J^T v = y*v - y (y.v)
            d_z = y.copy()
            d_z[gold[t]] -= 1.0
            d_z += y * d_y_fb - y * float(y @ d_y_fb)
            d_w += np.outer(d_z, h_out[t])
            d_by += d_z
            d_hout = p.w.T @ d_z
            d_h = d_hout * h_mask[t] if h_mask is not None else d_hout
            d_a = d_h * hs[t] * (1.0 - hs[t])
            y_prev = ys[t - 1] if t > 0 else np.zeros(self.num_tags)
            d_u += np.outer(d_a, x_in[t])
            d_v += np.outer(d_a, y_prev)
            d_bh += d_a
            d_x[t] = p.u.T @ d_a
            d_y_fb = p.v.T @ d_a

        if x_mask is not None:
            d_x *= x_mask
        grads = SentenceGrads(
            params={"U": d_u, "V": d_v, "W": d_w, "b_h": d_bh, "b_y": d_by}
        )
        grads.add_embedding_rows(windows, d_x, self.emb.dim)
        return loss, grads
