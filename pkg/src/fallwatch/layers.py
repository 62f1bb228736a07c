"""Neural-network kernel: the five layer types the fall classifier needs.

All operations work on channels-last arrays: a single image is (H, W, C) and a
batch is (B, H, W, C).  Convolutions are direct (3x3, stride 1, zero-padded
"same"), pooling is 2x2 stride 2 with ceil semantics on odd edges.  Every
forward op has an exact analytic backward verified against finite differences.

Arithmetic runs in the dtype of the inputs: float32 for training and
inference, float64 when gradient-checking.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, ShapeError

KERNEL_SIZE = 3
POOL_SIZE = 2


def _as_batch(x: np.ndarray, name: str, rank: int) -> tuple[np.ndarray, bool]:
    """Promote a single sample to a batch of one; report whether we did."""
    x = np.asarray(x)
    if x.ndim == rank:
        return x[None], True
    if x.ndim == rank + 1:
        return x, False
    raise ShapeError(f"{name}: expected rank {rank} or {rank + 1}, got shape {x.shape}")


def _restore(x: np.ndarray, squeeze: bool) -> np.ndarray:
    return x[0] if squeeze else x


# ---------------------------------------------------------------------------
# conv2d: 3x3, stride 1, zero-padded same
# ---------------------------------------------------------------------------

def _check_conv_args(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray | None):
    if kernels.ndim != 4 or kernels.shape[0] != KERNEL_SIZE or kernels.shape[1] != KERNEL_SIZE:
        raise ShapeError(f"kernels must be (3, 3, C, F), got {kernels.shape}")
    if min(x.shape[1:3]) < 1 or x.shape[3] < 1:
        raise ShapeError(f"image dims must be positive, got {x.shape[1:]}")
    if x.shape[3] != kernels.shape[2]:
        raise ShapeError(
            f"channel mismatch: image has {x.shape[3]} channels, kernels expect {kernels.shape[2]}"
        )
    if bias is not None and bias.shape != (kernels.shape[3],):
        raise ShapeError(f"bias must be ({kernels.shape[3]},), got {bias.shape}")


def conv2d_forward(image: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-padded 3x3 convolution.

    image: (H, W, C) or (B, H, W, C); kernels: (3, 3, C, F); bias: (F,).
    Returns (H, W, F) / (B, H, W, F); spatial size is preserved.
    """
    x, squeeze = _as_batch(image, "image", 3)
    kernels = np.asarray(kernels)
    bias = np.asarray(bias)
    _check_conv_args(x, kernels, bias)

    b, h, w, c = x.shape
    f = kernels.shape[3]
    padded = np.zeros((b, h + 2, w + 2, c), dtype=x.dtype)
    padded[:, 1:-1, 1:-1, :] = x

    out = np.zeros((b, h, w, f), dtype=x.dtype)
    flat = out.reshape(-1, f)
    for dy in range(KERNEL_SIZE):
        for dx in range(KERNEL_SIZE):
            patch = padded[:, dy:dy + h, dx:dx + w, :].reshape(-1, c)
            flat += patch @ kernels[dy, dx]
    out += bias
    return _restore(out, squeeze)


def conv2d_backward(
    image: np.ndarray, kernels: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sum(upstream * conv2d_forward(image)) w.r.t. all arguments.

    Returns (d_image, d_kernels, d_bias).  Batched upstreams sum their
    contributions into d_kernels / d_bias.
    """
    x, squeeze = _as_batch(image, "image", 3)
    kernels = np.asarray(kernels)
    _check_conv_args(x, kernels, None)
    up, up_squeeze = _as_batch(upstream, "upstream", 3)
    if up_squeeze != squeeze or up.shape[:3] != x.shape[:3] or up.shape[3] != kernels.shape[3]:
        raise ShapeError(f"upstream shape {upstream.shape} does not match output shape")

    b, h, w, c = x.shape
    f = kernels.shape[3]
    padded = np.zeros((b, h + 2, w + 2, c), dtype=x.dtype)
    padded[:, 1:-1, 1:-1, :] = x

    d_bias = up.sum(axis=(0, 1, 2))
    d_kernels = np.zeros_like(kernels)
    d_padded = np.zeros_like(padded)
    up_flat = up.reshape(-1, f)
    for dy in range(KERNEL_SIZE):
        for dx in range(KERNEL_SIZE):
            patch = padded[:, dy:dy + h, dx:dx + w, :].reshape(-1, c)
            d_kernels[dy, dx] = patch.T @ up_flat
            d_padded[:, dy:dy + h, dx:dx + w, :] += (up_flat @ kernels[dy, dx].T).reshape(b, h, w, c)
    d_image = d_padded[:, 1:-1, 1:-1, :]
    return _restore(d_image, squeeze), d_kernels, d_bias


# ---------------------------------------------------------------------------
# relu
# ---------------------------------------------------------------------------

def relu_forward(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    x = np.asarray(x)
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Gate upstream where x > 0; the subgradient at exactly 0 is 0."""
    x = np.asarray(x)
    upstream = np.asarray(upstream)
    if x.shape != upstream.shape:
        raise ShapeError(f"upstream shape {upstream.shape} != input shape {x.shape}")
    return upstream * (x > 0)


# ---------------------------------------------------------------------------
# maxpool2d: 2x2 window, stride 2, odd edges padded with -inf
# ---------------------------------------------------------------------------

def _pool_windows(x: np.ndarray) -> np.ndarray:
    """View (B, H, W, C) as (B, Ho, Wo, C, 4) windows in row-major cell order."""
    b, h, w, c = x.shape
    ho, wo = -(-h // POOL_SIZE), -(-w // POOL_SIZE)
    padded = np.full((b, ho * 2, wo * 2, c), -np.inf, dtype=x.dtype)
    padded[:, :h, :w, :] = x
    win = padded.reshape(b, ho, 2, wo, 2, c)
    return win.transpose(0, 1, 3, 5, 2, 4).reshape(b, ho, wo, c, 4)


def maxpool2d_forward(x: np.ndarray) -> np.ndarray:
    """Max over each 2x2 window; output is (ceil(H/2), ceil(W/2), C)."""
    x4, squeeze = _as_batch(x, "input", 3)
    out = _pool_windows(x4).max(axis=-1)
    return _restore(out, squeeze)


def maxpool2d_backward(x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Route each upstream value to its window's argmax (first cell wins ties)."""
    x4, squeeze = _as_batch(x, "input", 3)
    up, up_squeeze = _as_batch(upstream, "upstream", 3)
    b, h, w, c = x4.shape
    ho, wo = -(-h // POOL_SIZE), -(-w // POOL_SIZE)
    if up_squeeze != squeeze or up.shape != (b, ho, wo, c):
        raise ShapeError(f"upstream shape {upstream.shape} != pooled shape {(ho, wo, c)}")

    win = _pool_windows(x4)
    idx = win.argmax(axis=-1)
    d_win = np.zeros_like(win)
    np.put_along_axis(d_win, idx[..., None], up[..., None].astype(x4.dtype), axis=-1)
    d_padded = d_win.reshape(b, ho, wo, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    d_padded = d_padded.reshape(b, ho * 2, wo * 2, c)
    return _restore(d_padded[:, :h, :w, :], squeeze)


# ---------------------------------------------------------------------------
# dense
# ---------------------------------------------------------------------------

def _check_dense_args(x: np.ndarray, weights: np.ndarray, bias: np.ndarray | None):
    if weights.ndim != 2:
        raise ShapeError(f"weights must be 2-d, got shape {weights.shape}")
    if x.shape[-1] != weights.shape[0]:
        raise ShapeError(
            f"input length {x.shape[-1]} does not match weight rows {weights.shape[0]}"
        )
    if bias is not None and bias.shape != (weights.shape[1],):
        raise ShapeError(f"bias must be ({weights.shape[1]},), got {bias.shape}")


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """x @ weights + bias for x of shape (N,) or (B, N)."""
    x = np.asarray(x)
    weights = np.asarray(weights)
    bias = np.asarray(bias)
    _check_dense_args(x, weights, bias)
    return x @ weights + bias


def dense_backward(
    x: np.ndarray, weights: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of sum(upstream * dense_forward(x)): (d_x, d_weights, d_bias)."""
    x = np.asarray(x)
    weights = np.asarray(weights)
    upstream = np.asarray(upstream)
    _check_dense_args(x, weights, None)
    if upstream.shape != x.shape[:-1] + (weights.shape[1],):
        raise ShapeError(f"upstream shape {upstream.shape} does not match output shape")
    d_x = upstream @ weights.T
    if x.ndim == 1:
        d_weights = np.outer(x, upstream)
        d_bias = upstream.copy()
    else:
        d_weights = x.T @ upstream
        d_bias = upstream.sum(axis=0)
    return d_x, d_weights, d_bias


# ---------------------------------------------------------------------------
# sigmoid
# ---------------------------------------------------------------------------

def sigmoid(x):
    """1 / (1 + exp(-x)), computed without overflow for |x| up to 500."""
    arr = np.asarray(x)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(np.asarray(arr, dtype=np.result_type(arr.dtype, np.float32)))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out[0].item() if scalar else out


def sigmoid_backward(output: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """Backward given the forward *output*: upstream * s * (1 - s)."""
    output = np.asarray(output)
    return np.asarray(upstream) * output * (1.0 - output)


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def gaussian_init(shape, sd: float = 0.01, seed=None, dtype=np.float32) -> np.ndarray:
    """Zero-mean Gaussian weights with the given sd, from a seeded PCG64 stream.

    The generator is NumPy's default_rng (PCG64); the same seed always yields a
    bit-identical tensor.  Biases elsewhere are initialized to exact zeros.
    """
    if sd <= 0:
        raise InputError(f"sd must be positive, got {sd}")
    rng = np.random.default_rng(seed)
    return (rng.standard_normal(shape) * sd).astype(dtype)


# ---------------------------------------------------------------------------
# layer objects used by the model: forward caches what backward needs
# ---------------------------------------------------------------------------

class Conv2D:
    kind = "conv2d"

    def __init__(self, kernels: np.ndarray, bias: np.ndarray):
        self.kernels = np.asarray(kernels)
        self.bias = np.asarray(bias)
        self.d_kernels = None
        self.d_bias = None
        self._x = None

    @property
    def filters(self) -> int:
        return self.kernels.shape[3]

    def forward(self, x):
        self._x = x
        return conv2d_forward(x, self.kernels, self.bias)

    def backward(self, upstream):
        d_x, self.d_kernels, self.d_bias = conv2d_backward(self._x, self.kernels, upstream)
        return d_x

    def params(self):
        return [self.kernels, self.bias]

    def grads(self):
        return [self.d_kernels, self.d_bias]


class ReLU:
    kind = "relu"

    def __init__(self):
        self._x = None

    def forward(self, x):
        self._x = x
        return relu_forward(x)

    def backward(self, upstream):
        return relu_backward(self._x, upstream)

    def params(self):
        return []

    def grads(self):
        return []


class MaxPool2D:
    kind = "maxpool2d"

    def __init__(self):
        self._x = None

    def forward(self, x):
        self._x = x
        return maxpool2d_forward(x)

    def backward(self, upstream):
        return maxpool2d_backward(self._x, upstream)

    def params(self):
        return []

    def grads(self):
        return []


class Flatten:
    kind = "flatten"

    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, upstream):
        return upstream.reshape(self._shape)

    def params(self):
        return []

    def grads(self):
        return []


class Dense:
    kind = "dense"

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        self.weights = np.asarray(weights)
        self.bias = np.asarray(bias)
        self.d_weights = None
        self.d_bias = None
        self._x = None

    @property
    def units(self) -> int:
        return self.weights.shape[1]

    def forward(self, x):
        self._x = x
        return dense_forward(x, self.weights, self.bias)

    def backward(self, upstream):
        d_x, self.d_weights, self.d_bias = dense_backward(self._x, self.weights, upstream)
        return d_x

    def params(self):
        return [self.weights, self.bias]

    def grads(self):
        return [self.d_weights, self.d_bias]


class Sigmoid:
    kind = "sigmoid"

    def __init__(self):
        self._out = None

    def forward(self, x):
        self._out = sigmoid(x)
        return self._out

    def backward(self, upstream):
        return sigmoid_backward(self._out, upstream)

    def params(self):
        return []

    def grads(self):
        return []
