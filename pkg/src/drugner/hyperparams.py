"""Hyperparameter settings and the random-search sampling distributions.

The legal search space: hidden nodes in {25, 50, 100}, context window in
{1, 3, 5}, embedding dimension in {50, 100, 300, 500, 1000}, and learning /
dropout rates drawn uniformly from [0.05, 0.1]. dropout_rate is the
probability of dropping a unit.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

HIDDEN_CHOICES = (25, 50, 100)
WINDOW_CHOICES = (1, 3, 5)
DIM_CHOICES = (50, 100, 300, 500, 1000)
RATE_RANGE = (0.05, 0.1)


@dataclass(frozen=True)
class HyperParams:
    hidden: int = 100
    window: int = 3
    dim: int = 100
    learning_rate: float = 0.05
    dropout_rate: float = 0.05
    max_epochs: int = 100
    seed: int = 0

    def validate(self, unrestricted: bool = False) -> None:
        """Check basic sanity, and search-space membership unless unrestricted."""
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        if self.hidden < 1 or self.dim < 1:
            raise ValueError("hidden and dim must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if unrestricted:
            return
        if self.hidden not in HIDDEN_CHOICES:
            raise ValueError(f"hidden={self.hidden} not in allowed set {HIDDEN_CHOICES}")
        if self.window not in WINDOW_CHOICES:
            raise ValueError(f"window={self.window} not in allowed set {WINDOW_CHOICES}")
        if self.dim not in DIM_CHOICES:
            raise ValueError(f"dim={self.dim} not in allowed set {DIM_CHOICES}")
        lo, hi = RATE_RANGE
        if not lo <= self.learning_rate <= hi:
            raise ValueError(
                f"learning_rate={self.learning_rate} outside [{lo}, {hi}]"
            )
        if not lo <= self.dropout_rate <= hi:
            raise ValueError(f"dropout_rate={self.dropout_rate} outside [{lo}, {hi}]")

    def with_seed(self, seed: int) -> "HyperParams":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden,
            "window": self.window,
            "dim": self.dim,
            "learning_rate": self.learning_rate,
            "dropout_rate": self.dropout_rate,
            "max_epochs": self.max_epochs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HyperParams":
        return cls(**data)


def sample_hyperparams(
    rng: np.random.Generator, max_epochs: int = 100, seed: int = 0
) -> HyperParams:
    """One random-search draw: discrete fields uniform over their sets,
    rates uniform over [0.05, 0.1]."""
    lo, hi = RATE_RANGE
    return HyperParams(
        hidden=int(rng.choice(HIDDEN_CHOICES)),
        window=int(rng.choice(WINDOW_CHOICES)),
        dim=int(rng.choice(DIM_CHOICES)),
        learning_rate=float(rng.uniform(lo, hi)),
        dropout_rate=float(rng.uniform(lo, hi)),
        max_epochs=max_epochs,
        seed=seed,
    )
