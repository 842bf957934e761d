"""Linear-chain CRF over per-token emission scores.

The chain score of a tag sequence y for emissions e is

    start[y_1] + sum_t e[t, y_t] + sum_t A[y_{t-1}, y_t] + stop[y_T]

with a dense K x K transition table A plus distinct learned start/stop
vectors. Every chain computation runs in log-space with log-sum-exp
max-shifting; plain forward products would underflow beyond T of about 30.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import logsumexp


@dataclass
class TransitionTable:
    """Tag-to-tag scores A[i, j] = score of bigram (i -> j), plus start/stop."""

    matrix: np.ndarray  # (K, K)
    start: np.ndarray  # (K,)
    stop: np.ndarray  # (K,)

    @classmethod
    def zeros(cls, num_tags: int) -> "TransitionTable":
        return cls(
            matrix=np.zeros((num_tags, num_tags)),
            start=np.zeros(num_tags),
            stop=np.zeros(num_tags),
        )

    @property
    def num_tags(self) -> int:
        return self.matrix.shape[0]


def _check_emissions(emissions: np.ndarray, tr: TransitionTable) -> np.ndarray:
    emissions = np.asarray(emissions, dtype=np.float64)
    if emissions.ndim != 2 or emissions.shape[0] == 0:
        raise ValueError("emissions must be a non-empty T x K matrix")
    if emissions.shape[1] != tr.num_tags:
        raise ValueError(
            f"emissions have {emissions.shape[1]} tags, transitions {tr.num_tags}"
        )
    return emissions


def _check_tags(tags, length: int, num_tags: int) -> np.ndarray:
    tags = np.asarray(tags, dtype=np.int64)
    if tags.shape != (length,):
        raise ValueError(f"tag sequence length {tags.shape} does not match T={length}")
    if np.any(tags < 0) or np.any(tags >= num_tags):
        raise ValueError("tag index out of range")
    return tags


def sequence_score(
    emissions: np.ndarray, tr: TransitionTable, tags
) -> float:
    """Chain score of one tag sequence."""
    emissions = _check_emissions(emissions, tr)
    tags = _check_tags(tags, emissions.shape[0], tr.num_tags)
    score = tr.start[tags[0]] + tr.stop[tags[-1]]
    score += emissions[np.arange(len(tags)), tags].sum()
    score += tr.matrix[tags[:-1], tags[1:]].sum()
    return float(score)


def crf_log_partition(emissions: np.ndarray, tr: TransitionTable) -> float:
    """log sum over all K^T sequences of exp(chain score), by the forward
    recursion in log-space."""
    emissions = _check_emissions(emissions, tr)
    alpha = tr.start + emissions[0]
    for t in range(1, emissions.shape[0]):
        alpha = emissions[t] + logsumexp(alpha[:, None] + tr.matrix, axis=0)
    return float(logsumexp(alpha + tr.stop))


def crf_nll(emissions: np.ndarray, tr: TransitionTable, tags) -> float:
    """Negative log-likelihood of `tags`: logZ - score(tags); >= 0 up to
    numerical slack."""
    return crf_log_partition(emissions, tr) - sequence_score(emissions, tr, tags)


def _forward_backward(emissions: np.ndarray, tr: TransitionTable):
    """Alpha/beta tables (log-space) and logZ."""
    T, K = emissions.shape
    alpha = np.empty((T, K))
    alpha[0] = tr.start + emissions[0]
    for t in range(1, T):
        alpha[t] = emissions[t] + logsumexp(alpha[t - 1][:, None] + tr.matrix, axis=0)
    beta = np.empty((T, K))
    beta[T - 1] = tr.stop
    for t in range(T - 2, -1, -1):
        beta[t] = logsumexp(tr.matrix + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = float(logsumexp(alpha[T - 1] + tr.stop))
    return alpha, beta, log_z


def crf_marginals(emissions: np.ndarray, tr: TransitionTable):
    """Per-position tag marginals (T x K), pairwise bigram marginals
    ((T-1) x K x K) and logZ."""
    emissions = _check_emissions(emissions, tr)
    alpha, beta, log_z = _forward_backward(emissions, tr)
    unary = np.exp(alpha + beta - log_z)
    T, K = emissions.shape
    pairwise = np.empty((max(T - 1, 0), K, K))
    for t in range(1, T):
        pairwise[t - 1] = np.exp(
            alpha[t - 1][:, None]
            + tr.matrix
            + (emissions[t] + beta[t])[None, :]
            - log_z
        )
    return unary, pairwise, log_z


def crf_gradients(emissions: np.ndarray, tr: TransitionTable, tags):
    """Exact gradients of the NLL via forward-backward marginals.

    Returns (nll, d_emissions, d_transitions) where d_transitions is a
    TransitionTable of gradient arrays. d_emissions[t, k] is
    marginal(t, k) - 1{tags_t = k}.
    """
    emissions = _check_emissions(emissions, tr)
    tags = _check_tags(tags, emissions.shape[0], tr.num_tags)
    unary, pairwise, log_z = crf_marginals(emissions, tr)
    nll = log_z - sequence_score(emissions, tr, tags)

    d_e = unary.copy()
    d_e[np.arange(len(tags)), tags] -= 1.0

    d_matrix = pairwise.sum(axis=0) if len(tags) > 1 else np.zeros_like(tr.matrix)
    for a, b in zip(tags[:-1], tags[1:]):
        d_matrix[a, b] -= 1.0
    d_start = unary[0].copy()
    d_start[tags[0]] -= 1.0
    d_stop = unary[-1].copy()
    d_stop[tags[-1]] -= 1.0
    grads = TransitionTable(matrix=d_matrix, start=d_start, stop=d_stop)
    return nll, d_e, grads


def viterbi_decode(
    emissions: np.ndarray,
    tr: TransitionTable,
    allowed: np.ndarray | None = None,
    allowed_start: np.ndarray | None = None,
) -> tuple[list[int], float]:
    """Best-scoring tag sequence and its score.

    Ties break toward the lowest tag index at every backtrack step (argmax
    returns the first maximum). `allowed` (K x K bool) and `allowed_start`
    (K bool), when given, apply -inf masking to forbidden bigrams/start
    tags; decoding is unconstrained by default.
    """
    emissions = _check_emissions(emissions, tr)
    matrix = tr.matrix
    start = tr.start
    if allowed is not None:
        matrix = np.where(allowed, matrix, -np.inf)
    if allowed_start is not None:
        start = np.where(allowed_start, start, -np.inf)
    T, K = emissions.shape
    delta = start + emissions[0]
    backptr = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        scores = delta[:, None] + matrix
        backptr[t] = np.argmax(scores, axis=0)
        delta = emissions[t] + np.max(scores, axis=0)
    delta = delta + tr.stop
    best_last = int(np.argmax(delta))
    best_score = float(delta[best_last])
    path = [best_last]
    for t in range(T - 1, 0, -1):
        path.append(int(backptr[t, path[-1]]))
    path.reverse()
    return path, best_score


def iob_transition_mask(tags: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    """(K x K, K) boolean masks of IOB-legal bigrams and start tags: I-X may
    only follow B-X or I-X of the same class, and may not start a sequence."""
    k = len(tags)
    allowed = np.ones((k, k), dtype=bool)
    allowed_start = np.ones(k, dtype=bool)
    for j, tag in enumerate(tags):
        if not tag.startswith("I-"):
            continue
        cls = tag[2:]
        allowed_start[j] = False
        for i, prev in enumerate(tags):
            if prev not in (f"B-{cls}", f"I-{cls}"):
                allowed[i, j] = False
    return allowed, allowed_start
