"""Rate, distortion, and rank-alignment objectives as pure arithmetic.

Two composite objectives are exposed: a rate-distortion sum (bit cost of
two quantized latents plus reconstruction MSE) and a task objective mixing
cross-entropy, weighted MSE, and a rank-alignment bonus. All logarithms
are base 2 so every term is in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MIN_PROB = 2.0 ** -64


@dataclass(frozen=True)
class LossWeights:
    lambda_mse: float = 20.0
    lambda_em: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.lambda_mse) and np.isfinite(self.lambda_em)):
            raise ValueError("loss weights must be finite")


def rate_term(probs) -> float:
    """Total bit cost ``sum(-log2 p)`` of a vector of probabilities in (0, 1].

    Probabilities below 2**-64 are clamped there, keeping the result finite.
    """
    p = np.asarray(probs, dtype=float)
    if p.size and (np.any(p <= 0) or np.any(p > 1)):
        raise ValueError("probabilities must lie in (0, 1]")
    return float(np.sum(-np.log2(np.maximum(p, _MIN_PROB))))


def l1_loss(rate_y: float, rate_z: float, mse: float) -> float:
    """Rate-distortion objective: bit cost of both latents plus MSE."""
    if mse < 0:
        raise ValueError(f"mse must be >= 0, got {mse}")
    return float(rate_y + rate_z + mse)


def cross_entropy(true_label: int, predicted) -> float:
    """Base-2 cross entropy ``-log2 predicted[true_label]`` against a one-hot truth."""
    p = np.asarray(predicted, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"predicted must be a 1-D distribution, got shape {p.shape}")
    if not (0 <= true_label < p.size):
        raise ValueError(f"true_label {true_label} outside [0, {p.size})")
    if np.any(p < 0):
        raise ValueError("predicted probabilities must be >= 0")
    if abs(float(p.sum()) - 1.0) > 1e-6:
        raise ValueError(f"predicted must sum to 1 within 1e-6, got {p.sum()}")
    return float(-np.log2(max(float(p[true_label]), _MIN_PROB)))


def l2_loss(ce: float, mse: float, kappa: float, weights: LossWeights | None = None) -> float:
    """Task objective: ``ce + lambda_mse * mse - lambda_em * kappa``."""
    w = weights if weights is not None else LossWeights()
    if mse < 0:
        raise ValueError(f"mse must be >= 0, got {mse}")
    return float(ce + w.lambda_mse * mse - w.lambda_em * kappa)
