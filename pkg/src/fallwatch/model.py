"""FallNet assembly, inference, and the training loop.

The network is six conv blocks (3x3 same conv -> ReLU -> 2x2 maxpool) with the
filter schedule 16, 16, 32, 32, 64, 64, then flatten -> dense(32) -> ReLU ->
dense(1) -> sigmoid.  A 64x64x3 input halves to 1x1x64 over the six blocks,
giving a flatten length of 64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError, ShapeError, TrainingDivergedError
from .layers import (
    Conv2D,
    Dense,
    Flatten,
    MaxPool2D,
    ReLU,
    Sigmoid,
    gaussian_init,
)
from .losses import bce_loss_batch
from .optim import Adam

FILTER_SCHEDULE = (16, 16, 32, 32, 64, 64)
HEAD_UNITS = 32
DEFAULT_INPUT_SIZE = (64, 64, 3)
MIN_SPATIAL = 8
INIT_SD = 0.01

FALL = "fall"
NOT_FALL = "not_fall"


class FallNet:
    """Ordered layer stack producing P(fall) for one image."""

    def __init__(self, layers: list, input_size: tuple | None = None, seed=None):
        self.layers = layers
        self.input_size = input_size
        self.seed = seed

    # -- inference ---------------------------------------------------------

    def forward(self, image: np.ndarray) -> float:
        """Probability of class "fall" for one (H, W, C) image in [0, 1]."""
        image = np.asarray(image)
        if image.ndim != 3:
            raise ShapeError(f"expected an (H, W, C) image, got shape {image.shape}")
        if self.input_size is not None and tuple(image.shape) != tuple(self.input_size):
            raise ShapeError(f"expected input shape {self.input_size}, got {image.shape}")
        return float(self.forward_batch(image[None])[0])

    def forward_batch(self, images: np.ndarray) -> np.ndarray:
        """Probabilities for a (B, H, W, C) stack."""
        x = np.asarray(images)
        if x.ndim != 4:
            raise ShapeError(f"expected a (B, H, W, C) batch, got shape {x.shape}")
        for layer in self.layers:
            x = layer.forward(x)
        return x.reshape(-1)

    def backward(self, d_probs: np.ndarray) -> None:
        """Backpropagate dLoss/dprob through the stack, filling layer grads."""
        up = np.asarray(d_probs).reshape(-1, 1)
        for layer in reversed(self.layers):
            up = layer.backward(up)

    # -- parameter access ----------------------------------------------------

    def parameters(self) -> list:
        return [p for layer in self.layers for p in layer.params()]

    def gradients(self) -> list:
        return [g for layer in self.layers for g in layer.grads()]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def describe(self) -> list[str]:
        """One token per layer, e.g. "conv2d(16)" or "dense(32)" (audit aid)."""
        out = []
        for layer in self.layers:
            if layer.kind == "conv2d":
                out.append(f"conv2d({layer.filters})")
            elif layer.kind == "dense":
                out.append(f"dense({layer.units})")
            else:
                out.append(layer.kind)
        return out

    def astype(self, dtype) -> "FallNet":
        """Cast all parameters in place (float64 for gradient checking)."""
        for layer in self.layers:
            if layer.kind == "conv2d":
                layer.kernels = layer.kernels.astype(dtype)
                layer.bias = layer.bias.astype(dtype)
            elif layer.kind == "dense":
                layer.weights = layer.weights.astype(dtype)
                layer.bias = layer.bias.astype(dtype)
        return self


def _halvings(dim: int, n: int) -> int:
    for _ in range(n):
        dim = -(-dim // 2)
    return dim


def build_fallnet(
    input_size: tuple = DEFAULT_INPUT_SIZE, seed=0, dtype=np.float32
) -> FallNet:
    """Build the six-block classifier with Gaussian(sd=0.01) weights, zero biases.

    Kernel tensors get independent seeded streams derived from ``seed``, so the
    same seed always produces a bit-identical model.
    """
    h, w, c = input_size
    if min(h, w) < MIN_SPATIAL:
        raise ConfigurationError(
            f"input {h}x{w} is too small for six halving blocks (min {MIN_SPATIAL})"
        )
    if c < 1:
        raise ConfigurationError(f"channel count must be positive, got {c}")

    seeds = iter(np.random.SeedSequence(seed).spawn(len(FILTER_SCHEDULE) + 2))
    layers: list = []
    in_ch = c
    for filters in FILTER_SCHEDULE:
        kernels = gaussian_init((3, 3, in_ch, filters), sd=INIT_SD, seed=next(seeds), dtype=dtype)
        layers += [Conv2D(kernels, np.zeros(filters, dtype=dtype)), ReLU(), MaxPool2D()]
        in_ch = filters
    flat_len = _halvings(h, 6) * _halvings(w, 6) * in_ch
    w1 = gaussian_init((flat_len, HEAD_UNITS), sd=INIT_SD, seed=next(seeds), dtype=dtype)
    w2 = gaussian_init((HEAD_UNITS, 1), sd=INIT_SD, seed=next(seeds), dtype=dtype)
    layers += [
        Flatten(),
        Dense(w1, np.zeros(HEAD_UNITS, dtype=dtype)),
        ReLU(),
        Dense(w2, np.zeros(1, dtype=dtype)),
        Sigmoid(),
    ]
    return FallNet(layers, input_size=(h, w, c), seed=seed)


def predict_label(probability: float, threshold: float = 0.5) -> str:
    """"fall" iff probability >= threshold (boundary inclusive)."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigurationError(f"threshold must be in [0, 1], got {threshold}")
    if not 0.0 <= probability <= 1.0:
        raise InputError(f"probability must be in [0, 1], got {probability}")
    return FALL if probability >= threshold else NOT_FALL


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 5
    learning_rate: float = 1e-4
    batch_size: int = 16
    seed: int = 0
    shuffle: bool = True

    def validate(self):
        if self.epochs < 1:
            raise InputError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise InputError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise InputError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


def _to_arrays(samples, dtype=np.float32) -> tuple[np.ndarray, np.ndarray]:
    """Stack (image, label) pairs or LabeledSample-likes into arrays."""
    images, labels = [], []
    for s in samples:
        if hasattr(s, "image"):
            images.append(s.image)
            labels.append(s.label)
        else:
            images.append(s[0])
            labels.append(s[1])
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InputError("dataset is empty")
    if not np.isin(labels, (0, 1)).all():
        raise InputError("labels must be 0 or 1")
    return np.stack(images).astype(dtype, copy=False), labels.astype(np.int64)


def _score_set(model: FallNet, images: np.ndarray, labels: np.ndarray,
               chunk: int = 64) -> tuple[float, float]:
    """Mean BCE and accuracy at threshold 0.5 over a sample array."""
    losses, correct = [], 0
    for start in range(0, len(images), chunk):
        probs = model.forward_batch(images[start:start + chunk])
        batch_labels = labels[start:start + chunk]
        loss, _ = bce_loss_batch(probs, batch_labels)
        losses.append(loss * len(batch_labels))
        correct += int(((probs >= 0.5).astype(np.int64) == batch_labels).sum())
    return float(np.sum(losses) / len(images)), correct / len(images)


def train(model: FallNet, train_set, val_set, config: TrainConfig | None = None) -> list[EpochStats]:
    """Train in place; returns one EpochStats per epoch plus the epoch-0 row.

    The epoch-0 row is measured with the initial weights before any update.
    Shuffling is seeded and reproducible; a non-finite batch loss aborts with
    TrainingDivergedError naming the batch.
    """
    config = config or TrainConfig()
    config.validate()
    train_images, train_labels = _to_arrays(train_set)
    val_images, val_labels = _to_arrays(val_set)

    optimizer = Adam(model.parameters(), lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    stats = [EpochStats(0, *_score_set(model, train_images, train_labels),
                        *_score_set(model, val_images, val_labels))]
    n = len(train_images)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            probs = model.forward_batch(train_images[idx])
            loss, d_probs = bce_loss_batch(probs, train_labels[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_index)
            model.backward(d_probs)
            optimizer.step(model.gradients())
        stats.append(EpochStats(epoch, *_score_set(model, train_images, train_labels),
                                *_score_set(model, val_images, val_labels)))
    return stats
