"""Confusion-matrix metrics, model evaluation, and training-curve CSV export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .losses import bce_loss_batch
from .model import EpochStats

CURVE_HEADER = "epoch,loss,accuracy,val_loss,val_accuracy"


@dataclass
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    mean_loss: float | None = None
    precision_defined: bool = True

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    """Derive precision/recall/accuracy/f1 from confusion counts.

    Precision with tp+fp = 0 is reported as 0.0 with precision_defined=False
    instead of dividing by zero.
    """
    counts = (tp, fp, fn, tn)
    if any(c < 0 for c in counts) or not all(isinstance(c, (int, np.integer)) for c in counts):
        raise InputError(f"counts must be non-negative integers, got {counts}")
    total = sum(counts)
    if total == 0:
        raise InputError("all counts are zero")
    precision_defined = (tp + fp) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    accuracy = (tp + tn) / total
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return Metrics(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn),
                   precision=precision, recall=recall, accuracy=accuracy, f1=f1,
                   precision_defined=precision_defined)


def evaluate(model, samples, threshold: float = 0.5, chunk: int = 64) -> Metrics:
    """Score a model on labeled samples: confusion counts plus mean BCE."""
    samples = list(samples)
    if not samples:
        raise InputError("no samples to evaluate")
    images = np.stack([s.image for s in samples]).astype(np.float32, copy=False)
    labels = np.array([s.label for s in samples])

    tp = fp = fn = tn = 0
    loss_sum = 0.0
    for start in range(0, len(samples), chunk):
        probs = model.forward_batch(images[start:start + chunk])
        batch_labels = labels[start:start + chunk]
        loss, _ = bce_loss_batch(probs, batch_labels)
        loss_sum += loss * len(batch_labels)
        predicted = probs >= threshold
        tp += int((predicted & (batch_labels == 1)).sum())
        fp += int((predicted & (batch_labels == 0)).sum())
        fn += int((~predicted & (batch_labels == 1)).sum())
        tn += int((~predicted & (batch_labels == 0)).sum())
    result = metrics_from_counts(tp, fp, fn, tn)
    result.mean_loss = loss_sum / len(samples)
    return result


def export_curves(stats_list: list[EpochStats], path) -> None:
    """Write per-epoch loss/accuracy rows as CSV (6-decimal floats, LF endings)."""
    if not stats_list:
        raise InputError("no epoch stats to export")
    lines = [CURVE_HEADER]
    for s in stats_list:
        lines.append(
            f"{s.epoch},{s.train_loss:.6f},{s.train_accuracy:.6f},"
            f"{s.val_loss:.6f},{s.val_accuracy:.6f}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
