"""Binary cross-entropy loss with the probability clamp that keeps it finite."""

from __future__ import annotations

import numpy as np

from .errors import InputError

PROB_EPS = 1e-7


def bce_loss(p: float, y: int) -> tuple[float, float]:
    """Loss and dLoss/dp for one prediction.

    p is clamped into [1e-7, 1 - 1e-7] before evaluation, so the loss is always
    finite; the gradient is taken at the clamped value.
    """
    if y not in (0, 1):
        raise InputError(f"label must be 0 or 1, got {y!r}")
    p = min(max(float(p), PROB_EPS), 1.0 - PROB_EPS)
    if y == 1:
        return -np.log(p), -1.0 / p
    return -np.log1p(-p), 1.0 / (1.0 - p)


def bce_loss_batch(probs: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean BCE over a batch and the per-sample dLoss/dp (already /N)."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if not np.isin(labels, (0, 1)).all():
        raise InputError("labels must be 0 or 1")
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    losses = -(labels * np.log(p) + (1 - labels) * np.log1p(-p))
    grad = (p - labels) / (p * (1.0 - p)) / labels.size
    return float(losses.mean()), grad
