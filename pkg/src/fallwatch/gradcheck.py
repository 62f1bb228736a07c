"""Finite-difference gradient oracle and the layer-by-layer check harness.

Checks run in float64 with central differences (h = 1e-5).  Relative error is
|a - n| / (|a| + |n| + 1e-12); everything here is seeded and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import layers
from .losses import bce_loss, bce_loss_batch
from .model import build_fallnet

DEFAULT_H = 1e-5
REL_TOL = 1e-4


def finite_diff_grad(loss_fn, params: np.ndarray, h: float = DEFAULT_H) -> np.ndarray:
    """Central-difference gradient of a scalar loss_fn, one coordinate at a time."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros_like(params)
    flat = params.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = loss_fn(params)
        flat[i] = orig - h
        lo = loss_fn(params)
        flat[i] = orig
        out[i] = (hi - lo) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max elementwise |a - n| / (|a| + |n| + 1e-12)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return float((np.abs(a - n) / (np.abs(a) + np.abs(n) + 1e-12)).max())


def _sample_coords(rng, size: int, count: int) -> np.ndarray:
    return rng.choice(size, size=min(count, size), replace=False)


def _sampled_fd(loss_fn, params: np.ndarray, coords, h: float = DEFAULT_H) -> np.ndarray:
    """Finite differences at a chosen subset of flat coordinates."""
    params = np.asarray(params, dtype=np.float64)
    flat = params.reshape(-1)
    grads = np.zeros(len(coords))
    for k, i in enumerate(coords):
        orig = flat[i]
        flat[i] = orig + h
        hi = loss_fn(params)
        flat[i] = orig - h
        lo = loss_fn(params)
        flat[i] = orig
        grads[k] = (hi - lo) / (2.0 * h)
    return grads


# ---------------------------------------------------------------------------
# per-layer checks: loss = sum(upstream * forward(...)) on small tensors
# ---------------------------------------------------------------------------

def check_conv2d(seed) -> float:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 5, 2))
    k = rng.standard_normal((3, 3, 2, 3))
    b = rng.standard_normal(3)
    up = rng.standard_normal((5, 5, 3))

    d_x, d_k, d_b = layers.conv2d_backward(x, k, up)
    errs = [
        relative_error(d_x, finite_diff_grad(lambda t: float((up * layers.conv2d_forward(t, k, b)).sum()), x)),
        relative_error(d_k, finite_diff_grad(lambda t: float((up * layers.conv2d_forward(x, t, b)).sum()), k)),
        relative_error(d_b, finite_diff_grad(lambda t: float((up * layers.conv2d_forward(x, k, t)).sum()), b)),
    ]
    return max(errs)


def check_relu(seed) -> float:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((6, 6, 3)) + 0.01  # keep coordinates away from the kink
    up = rng.standard_normal((6, 6, 3))
    d_x = layers.relu_backward(x, up)
    num = finite_diff_grad(lambda t: float((up * layers.relu_forward(t)).sum()), x)
    return relative_error(d_x, num)


def check_maxpool2d(seed) -> float:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((5, 6, 2))  # odd height exercises the -inf padding
    up = rng.standard_normal((3, 3, 2))
    d_x = layers.maxpool2d_backward(x, up)
    num = finite_diff_grad(lambda t: float((up * layers.maxpool2d_forward(t)).sum()), x)
    return relative_error(d_x, num)


def check_dense(seed) -> float:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(8)
    w = rng.standard_normal((8, 4))
    b = rng.standard_normal(4)
    up = rng.standard_normal(4)

    d_x, d_w, d_b = layers.dense_backward(x, w, up)
    errs = [
        relative_error(d_x, finite_diff_grad(lambda t: float((up * layers.dense_forward(t, w, b)).sum()), x)),
        relative_error(d_w, finite_diff_grad(lambda t: float((up * layers.dense_forward(x, t, b)).sum()), w)),
        relative_error(d_b, finite_diff_grad(lambda t: float((up * layers.dense_forward(x, w, t)).sum()), b)),
    ]
    return max(errs)


def check_sigmoid(seed) -> float:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(10) * 3
    up = rng.standard_normal(10)
    out = layers.sigmoid(x)
    d_x = layers.sigmoid_backward(out, up)
    num = finite_diff_grad(lambda t: float((up * layers.sigmoid(t)).sum()), x)
    return relative_error(d_x, num)


def check_bce(seed) -> float:
    rng = np.random.default_rng(seed)
    errs = []
    for y in (0, 1):
        p = np.array([rng.uniform(0.05, 0.95)])
        _, d_p = bce_loss(float(p[0]), y)
        num = finite_diff_grad(lambda t: bce_loss(float(t[0]), y)[0], p)
        errs.append(relative_error(np.array([d_p]), num))
    return max(errs)


LAYER_CHECKS = {
    "conv2d": check_conv2d,
    "relu": check_relu,
    "maxpool2d": check_maxpool2d,
    "dense": check_dense,
    "sigmoid": check_sigmoid,
    "bce": check_bce,
}


# ---------------------------------------------------------------------------
# end-to-end check on a small-input model
# ---------------------------------------------------------------------------

# Coordinates where analytic and numeric gradients are both below this floor
# carry no signal a central difference can measure (cancellation noise in the
# loss is ~1e-12 at h=1e-5); they are treated as agreeing.
MEASURABLE_GRAD = 1e-7


def _rescale_for_check(model, rng) -> None:
    """Replace the production sd=0.01 init with He-scaled weights.

    At sd=0.01 the six-block stack attenuates activations so hard that true
    end-to-end gradients sit below finite-difference resolution; the chain rule
    is checked on the same layers with a numerically healthy weight scale.
    """
    for layer in model.layers:
        if layer.kind == "conv2d":
            fan_in = layer.kernels.shape[0] * layer.kernels.shape[1] * layer.kernels.shape[2]
            layer.kernels = rng.standard_normal(layer.kernels.shape) * np.sqrt(2.0 / fan_in)
            layer.bias = rng.uniform(-0.05, 0.05, size=layer.bias.shape)
        elif layer.kind == "dense":
            fan_in = layer.weights.shape[0]
            layer.weights = rng.standard_normal(layer.weights.shape) * np.sqrt(2.0 / fan_in)
            layer.bias = rng.uniform(-0.05, 0.05, size=layer.bias.shape)


def check_fallnet(seed, input_hw: int = 8, coords_per_tensor: int = 5) -> float:
    """Compare backprop through the whole net against finite differences.

    Runs on an 8x8 input in float64.  Finite differences are evaluated at a
    seeded random subset of coordinates per parameter tensor (plus the input
    image) to keep a 20-seed sweep well under the runtime budget.
    """
    rng = np.random.default_rng(seed)
    model = build_fallnet((input_hw, input_hw, 3), seed=seed, dtype=np.float64)
    _rescale_for_check(model, rng)
    image = rng.uniform(0.0, 1.0, size=(input_hw, input_hw, 3))
    label = int(rng.integers(0, 2))

    def model_loss() -> float:
        return bce_loss(model.forward(image), label)[0]

    # analytic pass: backward fills layer grads, final upstream is d_image
    prob = model.forward_batch(image[None])
    _, d_prob = bce_loss_batch(prob, np.array([label]))
    up = d_prob.reshape(-1, 1)
    for layer in reversed(model.layers):
        up = layer.backward(up)
    d_image = up[0]

    worst = 0.0
    for param, grad in zip(model.parameters(), model.gradients()):
        flat = param.reshape(-1)
        coords = _sample_coords(rng, param.size, coords_per_tensor)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + DEFAULT_H
            hi = model_loss()
            flat[i] = orig - DEFAULT_H
            lo = model_loss()
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * DEFAULT_H)
            analytic = grad.reshape(-1)[i]
            if max(abs(analytic), abs(numeric)) < MEASURABLE_GRAD:
                continue
            worst = max(worst, relative_error(analytic, numeric))

    coords = _sample_coords(rng, image.size, 3 * coords_per_tensor)
    numeric = _sampled_fd(lambda img: bce_loss(model.forward(img), label)[0], image, coords)
    analytic = d_image.reshape(-1)[coords]
    measurable = np.maximum(np.abs(analytic), np.abs(numeric)) >= MEASURABLE_GRAD
    if measurable.any():
        worst = max(worst, relative_error(analytic[measurable], numeric[measurable]))
    return worst


# ---------------------------------------------------------------------------
# report for the CLI
# ---------------------------------------------------------------------------

@dataclass
class GradcheckReport:
    seeds: list
    max_errors: dict = field(default_factory=dict)  # check name -> worst error
    worst_coordinate: tuple | None = None

    @property
    def passed(self) -> bool:
        return all(err <= REL_TOL for err in self.max_errors.values())

    def lines(self) -> list[str]:
        out = [f"gradient check over {len(self.seeds)} seeds (tolerance {REL_TOL:g})"]
        for name in sorted(self.max_errors):
            err = self.max_errors[name]
            mark = "ok" if err <= REL_TOL else "FAIL"
            out.append(f"  {name:<10} max rel err {err:.3e}  [{mark}]")
        if not self.passed and self.worst_coordinate:
            name, seed = self.worst_coordinate
            out.append(f"  violation first seen in check '{name}' at seed {seed}")
        return out


def run_gradcheck(base_seed: int = 0, n_seeds: int = 20) -> GradcheckReport:
    """Run every layer check plus the end-to-end model check across seeds."""
    seeds = [base_seed + i for i in range(n_seeds)]
    report = GradcheckReport(seeds=seeds)
    checks = dict(LAYER_CHECKS)
    checks["fallnet_e2e"] = check_fallnet
    for name, fn in checks.items():
        worst = 0.0
        for seed in seeds:
            err = fn(seed)
            if err > worst:
                worst = err
                if err > REL_TOL and report.worst_coordinate is None:
                    report.worst_coordinate = (name, seed)
        report.max_errors[name] = worst
    return report
