"""Scalar/matrix kernels shared by every model.

All floating-point work in this package is 64-bit: the finite-difference
gradient checks used throughout the test suite are unreliable in 32-bit.
Randomness always flows through a seeded PCG64 generator so any run can be
reproduced from its seed alone.
"""
from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .errors import NumericError


def new_rng(seed: int) -> np.random.Generator:
    """Seeded random generator. PCG64 is the one PRNG used everywhere."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, index: int) -> int:
    """Stable child seed for (seed, index), independent of draw order."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def sigmoid(x):
    """Logistic function 1/(1+e^-x), stable for |x| up to ~700.

    Accepts a scalar or an ndarray; the negative branch is rewritten as
    e^x/(1+e^x) so exp never overflows.
    """
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out[0]) if scalar else out.reshape(np.shape(x))


def softmax(z: np.ndarray) -> np.ndarray:
    """Probability vector e^z_m / sum_k e^z_k, computed with max-subtraction."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("softmax of an empty vector")
    shifted = z - np.max(z)
    e = np.exp(shifted)
    return e / np.sum(e)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("log_softmax of an empty vector")
    shifted = z - np.max(z)
    return shifted - np.log(np.sum(np.exp(shifted)))


def logsumexp(a: np.ndarray, axis: int | None = None) -> np.ndarray | float:
    """log(sum(exp(a))) with max-shifting; -inf entries are handled."""
    a = np.asarray(a, dtype=np.float64)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.squeeze(m, axis=axis) if axis is not None else np.squeeze(m)
    with np.errstate(divide="ignore"):  # log(0) -> -inf is the right answer
        out = out + np.log(np.sum(np.exp(a - m), axis=axis))
    return float(out) if np.ndim(out) == 0 else out


def uniform_init(
    rows: int, cols: int, lo: float, hi: float, rng: np.random.Generator
) -> np.ndarray:
    """rows x cols matrix with entries drawn uniformly from [lo, hi)."""
    if lo >= hi:
        raise ValueError(f"uniform_init requires lo < hi, got [{lo}, {hi})")
    return rng.uniform(lo, hi, size=(rows, cols))


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: entries are 0 with probability `rate`,
    else 1/(1-rate), so the expected value of (x * mask) equals x."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    keep = 1.0 - rate
    return (rng.random(shape) < keep).astype(np.float64) / keep


def finite_diff_check(
    loss: Callable[[Mapping[str, np.ndarray]], float],
    params: Mapping[str, np.ndarray],
    analytic_grads: Mapping[str, np.ndarray],
    step: float,
) -> float:
    """Max relative error between `analytic_grads` and central differences.

    `loss` is re-evaluated with each parameter entry perturbed by +-step in
    place; relative error uses a 1e-8 denominator floor so exact-zero
    gradients do not blow up the ratio.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    worst = 0.0
    for name, p in params.items():
        g = analytic_grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape mismatch for {name!r}: {g.shape} vs {p.shape}")
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + step
            lo_plus = float(loss(params))
            p[idx] = orig - step
            lo_minus = float(loss(params))
            p[idx] = orig
            if not (np.isfinite(lo_plus) and np.isfinite(lo_minus)):
                raise NumericError(f"non-finite loss while probing parameter {name}[{idx}]")
            numeric = (lo_plus - lo_minus) / (2.0 * step)
            ana = float(g[idx])
            denom = max(abs(ana), abs(numeric), 1e-8)
            worst = max(worst, abs(ana - numeric) / denom)
    return worst
