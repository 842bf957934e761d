"""Bidirectional LSTM tagger with a linear-chain CRF output layer.

Standard forget-gate LSTM cell, no peepholes:

    i = sigmoid(Wi x + Ui h + bi)      f = sigmoid(Wf x + Uf h + bf)
    o = sigmoid(Wo x + Uo h + bo)      g = tanh(Wg x + Ug h + bg)
    c' = f*c + i*g                     h' = o*tanh(c')

Two directions run independently from zero initial states; the per-token
representation is their concatenation [h_fwd(t); h_bwd(t)], projected to
per-tag emission scores. Forget-gate biases start at 1.0 for gradient flow;
the CRF transition table starts at zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..crf import TransitionTable, crf_gradients, crf_nll, iob_transition_mask, viterbi_decode
from ..numeric import sigmoid, uniform_init
from .base import SentenceGrads, TaggerBase

GATES = ("i", "f", "o", "g")


@dataclass
class LstmDirectionParams:
    """Gate weights for one direction: per gate an input matrix (H x s*d),
    a recurrent matrix (H x H) and a bias (H)."""

    w: dict[str, np.ndarray]
    u: dict[str, np.ndarray]
    b: dict[str, np.ndarray]

    @classmethod
    def create(
        cls, hidden: int, input_dim: int, rng: np.random.Generator | None
    ) -> "LstmDirectionParams":
        w, u, b = {}, {}, {}
        for gate in GATES:
            if rng is None:
                w[gate] = np.zeros((hidden, input_dim))
                u[gate] = np.zeros((hidden, hidden))
            else:
                w[gate] = uniform_init(hidden, input_dim, -1.0, 1.0, rng)
                u[gate] = uniform_init(hidden, hidden, -1.0, 1.0, rng)
            b[gate] = np.zeros(hidden)
        if rng is not None:
            b["f"] += 1.0
        return cls(w=w, u=u, b=b)

    def arrays(self, prefix: str) -> dict[str, np.ndarray]:
        out = {}
        for gate in GATES:
            out[f"{prefix}.W{gate}"] = self.w[gate]
            out[f"{prefix}.U{gate}"] = self.u[gate]
            out[f"{prefix}.b{gate}"] = self.b[gate]
        return out


@dataclass
class LstmCrfParams:
    fwd: LstmDirectionParams
    bwd: LstmDirectionParams
    proj: np.ndarray  # (K, 2H) emission projection
    b_proj: np.ndarray  # (K,)
    trans: TransitionTable

    @classmethod
    def create(
        cls, hidden: int, input_dim: int, num_tags: int,
        rng: np.random.Generator | None,
    ) -> "LstmCrfParams":
        fwd = LstmDirectionParams.create(hidden, input_dim, rng)
        bwd = LstmDirectionParams.create(hidden, input_dim, rng)
        if rng is None:
            proj = np.zeros((num_tags, 2 * hidden))
        else:
            proj = uniform_init(num_tags, 2 * hidden, -1.0, 1.0, rng)
        return cls(
            fwd=fwd,
            bwd=bwd,
            proj=proj,
            b_proj=np.zeros(num_tags),
            trans=TransitionTable.zeros(num_tags),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        out = self.fwd.arrays("fwd")
        out.update(self.bwd.arrays("bwd"))
        out["P"] = self.proj
        out["b_P"] = self.b_proj
        out["A"] = self.trans.matrix
        out["start"] = self.trans.start
        out["stop"] = self.trans.stop
        return out


@dataclass
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int) -> "LstmState":
        return cls(h=np.zeros(hidden), c=np.zeros(hidden))


def _cell(dp: LstmDirectionParams, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    """One cell update; returns (h', c', gate activations)."""
    i = sigmoid(dp.w["i"] @ x + dp.u["i"] @ h + dp.b["i"])
    f = sigmoid(dp.w["f"] @ x + dp.u["f"] @ h + dp.b["f"])
    o = sigmoid(dp.w["o"] @ x + dp.u["o"] @ h + dp.b["o"])
    g = np.tanh(dp.w["g"] @ x + dp.u["g"] @ h + dp.b["g"])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new, (i, f, o, g)


def lstm_step(
    x: np.ndarray,
    state: LstmState,
    params: LstmCrfParams,
    direction: str = "forward",
) -> LstmState:
    """One gated memory-cell update for the chosen direction."""
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    dp = params.fwd if direction == "forward" else params.bwd
    x = np.asarray(x, dtype=np.float64)
    if dp.w["i"].shape[1] != x.shape[0] or dp.u["i"].shape[1] != state.h.shape[0]:
        raise ValueError(
            f"lstm_step dimension mismatch: W {dp.w['i'].shape}, x {x.shape}, "
            f"U {dp.u['i'].shape}, h {state.h.shape}"
        )
    h, c, _ = _cell(dp, x, state.h, state.c)
    return LstmState(h=h, c=c)


def _direction_forward(x_in: np.ndarray, dp: LstmDirectionParams):
    """Left-to-right pass over x_in rows from zero initial state."""
    t_len = x_in.shape[0]
    hidden = dp.b["i"].shape[0]
    cache = {
        name: np.empty((t_len, hidden))
        for name in ("h_prev", "c_prev", "i", "f", "o", "g", "c", "tc")
    }
    hs = np.empty((t_len, hidden))
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    for t in range(t_len):
        cache["h_prev"][t] = h
        cache["c_prev"][t] = c
        h, c, (i, f, o, g) = _cell(dp, x_in[t], h, c)
        cache["i"][t], cache["f"][t], cache["o"][t], cache["g"][t] = i, f, o, g
        cache["c"][t] = c
        cache["tc"][t] = np.tanh(c)
        hs[t] = h
    return hs, cache


def _direction_backward(
    d_h_seq: np.ndarray, x_in: np.ndarray, cache, dp: LstmDirectionParams
):
    """BPTT for one direction; returns (per-array grads, d_x)."""
    t_len, hidden = d_h_seq.shape
    grads = {f"W{g}": np.zeros_like(dp.w[g]) for g in GATES}
    grads.update({f"U{g}": np.zeros_like(dp.u[g]) for g in GATES})
    grads.update({f"b{g}": np.zeros_like(dp.b[g]) for g in GATES})
    d_x = np.zeros_like(x_in)
    dh_carry = np.zeros(hidden)
    dc_carry = np.zeros(hidden)
    for t in range(t_len - 1, -1, -1):
        i, f, o, g = (cache[name][t] for name in GATES)
        tc = cache["tc"][t]
        d_h = d_h_seq[t] + dh_carry
        d_o = d_h * tc
        d_c = d_h * o * (1.0 - tc * tc) + dc_carry
        d_f = d_c * cache["c_prev"][t]
        d_i = d_c * g
        d_g = d_c * i
        dc_carry = d_c * f
        d_a = {
            "i": d_i * i * (1.0 - i),
            "f": d_f * f * (1.0 - f),
            "o": d_o * o * (1.0 - o),
            "g": d_g * (1.0 - g * g),
        }
        dh_carry = np.zeros(hidden)
        for gate in GATES:
            grads[f"W{gate}"] += np.outer(d_a[gate], x_in[t])
            grads[f"U{gate}"] += np.outer(d_a[gate], cache["h_prev"][t])
            grads[f"b{gate}"] += d_a[gate]
            d_x[t] += dp.w[gate].T @ d_a[gate]
            dh_carry += dp.u[gate].T @ d_a[gate]
    return grads, d_x


def bilstm_forward(xs: np.ndarray, params: LstmCrfParams) -> np.ndarray:
    """(T, 2H) matrix: row t is [h_fwd(t); h_bwd(t)], both directions started
    from zero states."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError("bilstm_forward requires a non-empty T x (s*d) input")
    fwd_h, _ = _direction_forward(xs, params.fwd)
    bwd_h, _ = _direction_forward(xs[::-1], params.bwd)
    return np.concatenate([fwd_h, bwd_h[::-1]], axis=1)


@dataclass
class BiLstmCrfTagger(TaggerBase):
    params: LstmCrfParams

    arch = "bilstm-crf"

    @property
    def hidden(self) -> int:
        return self.params.fwd.b["i"].shape[0]

    def param_arrays(self) -> dict[str, np.ndarray]:
        return self.params.arrays()

    def emissions(self, token_ids: Sequence[int]) -> np.ndarray:
        """(T, K) emission scores, mask-free."""
        _, x_in, _ = self._inputs(token_ids)
        h2 = bilstm_forward(x_in, self.params)
        return h2 @ self.params.proj.T + self.params.b_proj

    def predict_tag_ids(
        self, token_ids: Sequence[int], constrain_iob: bool = False
    ) -> list[int]:
        """Viterbi path; with constrain_iob, invalid IOB bigrams are masked."""
        emissions = self.emissions(token_ids)
        allowed = allowed_start = None
        if constrain_iob:
            allowed, allowed_start = iob_transition_mask(self.tags)
        path, _ = viterbi_decode(emissions, self.params.trans, allowed, allowed_start)
        return path

    def sentence_loss(self, token_ids: Sequence[int], gold_ids: Sequence[int]) -> float:
        return crf_nll(self.emissions(token_ids), self.params.trans, gold_ids)

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

        p = self.params
        fwd_h, fwd_cache = _direction_forward(x_in, p.fwd)
        x_rev = x_in[::-1]
        bwd_h_rev, bwd_cache = _direction_forward(x_rev, p.bwd)
        h2 = np.concatenate([fwd_h, bwd_h_rev[::-1]], axis=1)
        h_mask = self._hidden_mask(h2.shape, dropout, rng)
        h2_out = h2 * h_mask if h_mask is not None else h2
        emissions = h2_out @ p.proj.T + p.b_proj

        if not want_grads:
            return crf_nll(emissions, p.trans, gold), None

        nll, d_e, d_trans = crf_gradients(emissions, p.trans, gold)
        d_proj = d_e.T @ h2_out
        d_b_proj = d_e.sum(axis=0)
        d_h2_out = d_e @ p.proj
        d_h2 = d_h2_out * h_mask if h_mask is not None else d_h2_out

        hidden = self.hidden
        fwd_grads, d_x_fwd = _direction_backward(
            d_h2[:, :hidden], x_in, fwd_cache, p.fwd
        )
        bwd_grads, d_x_bwd_rev = _direction_backward(
            d_h2[::-1, hidden:], x_rev, bwd_cache, p.bwd
        )
        d_x = d_x_fwd + d_x_bwd_rev[::-1]
        if x_mask is not None:
            d_x *= x_mask

        params_grads = {f"fwd.{k}": v for k, v in fwd_grads.items()}
        params_grads.update({f"bwd.{k}": v for k, v in bwd_grads.items()})
        params_grads["P"] = d_proj
        params_grads["b_P"] = d_b_proj
        params_grads["A"] = d_trans.matrix
        params_grads["start"] = d_trans.start
        params_grads["stop"] = d_trans.stop
        grads = SentenceGrads(params=params_grads)
        grads.add_embedding_rows(windows, d_x, self.emb.dim)
        return nll, grads
