"""Layer forward/backward behavior against hand oracles and brute-force loops."""

import numpy as np
import pytest

from fallwatch.errors import InputError, ShapeError
from fallwatch.layers import (
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    gaussian_init,
    maxpool2d_backward,
    maxpool2d_forward,
    relu_backward,
    relu_forward,
    sigmoid,
    sigmoid_backward,
)


def conv2d_reference(image, kernels, bias):
    """Independent brute-force same-padded convolution (triple loop)."""
    h, w, c = image.shape
    f = kernels.shape[3]
    out = np.zeros((h, w, f))
    for y in range(h):
        for x in range(w):
            for dy in range(3):
                for dx in range(3):
                    sy, sx = y + dy - 1, x + dx - 1
                    if 0 <= sy < h and 0 <= sx < w:
                        out[y, x] += image[sy, sx] @ kernels[dy, dx]
    return out + bias


class TestConv2d:
    def test_identity_kernel_passes_image_through(self):
        kernels = np.zeros((3, 3, 1, 1))
        kernels[1, 1, 0, 0] = 1.0
        image = np.random.default_rng(0).uniform(size=(7, 5, 1))
        out = conv2d_forward(image, kernels, np.zeros(1))
        assert np.allclose(out, image)

    def test_all_ones_kernel_on_constant_image(self):
        # hand-computed: interior pixels see the whole 3x3 window (9c), corners 4c
        c = 0.7
        image = np.full((4, 4, 1), c)
        out = conv2d_forward(image, np.ones((3, 3, 1, 1)), np.zeros(1))[:, :, 0]
        expected = c * np.array(
            [[4, 6, 6, 4], [6, 9, 9, 6], [6, 9, 9, 6], [4, 6, 6, 4]], dtype=float
        )
        assert np.allclose(out, expected)

    def test_same_padding_shape(self):
        image = np.zeros((64, 64, 3), dtype=np.float32)
        kernels = np.zeros((3, 3, 3, 16), dtype=np.float32)
        out = conv2d_forward(image, kernels, np.zeros(16, dtype=np.float32))
        assert out.shape == (64, 64, 16)

    def test_matches_brute_force_reference(self):
        rng = np.random.default_rng(42)
        image = rng.standard_normal((6, 5, 2))
        kernels = rng.standard_normal((3, 3, 2, 4))
        bias = rng.standard_normal(4)
        assert np.allclose(conv2d_forward(image, kernels, bias),
                           conv2d_reference(image, kernels, bias))

    def test_batched_matches_per_image(self):
        rng = np.random.default_rng(1)
        images = rng.standard_normal((3, 5, 5, 2))
        kernels = rng.standard_normal((3, 3, 2, 4))
        bias = rng.standard_normal(4)
        batched = conv2d_forward(images, kernels, bias)
        for i in range(3):
            assert np.allclose(batched[i], conv2d_forward(images[i], kernels, bias))

    def test_channel_mismatch_raises(self):
        with pytest.raises(ShapeError):
            conv2d_forward(np.zeros((4, 4, 2)), np.zeros((3, 3, 3, 1)), np.zeros(1))

    def test_zero_upstream_gives_zero_gradients(self):
        rng = np.random.default_rng(0)
        image = rng.standard_normal((4, 4, 2))
        kernels = rng.standard_normal((3, 3, 2, 3))
        d_img, d_k, d_b = conv2d_backward(image, kernels, np.zeros((4, 4, 3)))
        assert not d_img.any() and not d_k.any() and not d_b.any()

    def test_bias_gradient_sums_upstream(self):
        # 2x2 all-ones upstream -> dBias = 4 per filter, by hand summation
        image = np.zeros((2, 2, 1))
        kernels = np.zeros((3, 3, 1, 2))
        _, _, d_b = conv2d_backward(image, kernels, np.ones((2, 2, 2)))
        assert np.allclose(d_b, [4.0, 4.0])

    def test_upstream_shape_mismatch_raises(self):
        with pytest.raises(ShapeError):
            conv2d_backward(np.zeros((4, 4, 1)), np.zeros((3, 3, 1, 2)), np.zeros((4, 4, 3)))


class TestRelu:
    def test_values(self):
        assert relu_forward(np.array([-1.0]))[0] == 0.0
        assert relu_forward(np.array([2.0]))[0] == 2.0

    def test_backward_zero_at_zero(self):
        # stated convention: subgradient at exactly 0 is 0
        out = relu_backward(np.array([0.0]), np.array([5.0]))
        assert out[0] == 0.0

    def test_zero_tensor_is_fixed_point(self):
        z = np.zeros((3, 3, 2))
        assert not relu_forward(z).any()
        assert not relu_backward(z, np.ones_like(z)).any()


class TestMaxPool2d:
    def test_single_window(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]]).reshape(2, 2, 1)
        out = maxpool2d_forward(x)
        assert out.shape == (1, 1, 1) and out[0, 0, 0] == 4.0
        d_x = maxpool2d_backward(x, np.array([[[7.0]]]))
        expected = np.zeros((2, 2, 1))
        expected[1, 1, 0] = 7.0
        assert np.allclose(d_x, expected)

    def test_tie_routes_to_first_row_major_cell(self):
        x = np.full((2, 2, 1), 3.5)
        d_x = maxpool2d_backward(x, np.ones((1, 1, 1)))
        expected = np.zeros((2, 2, 1))
        expected[0, 0, 0] = 1.0
        assert np.allclose(d_x, expected)

    def test_shape_halves(self):
        out = maxpool2d_forward(np.zeros((64, 64, 16)))
        assert out.shape == (32, 32, 16)

    def test_odd_edge_padded_with_neg_inf(self):
        x = np.array([[-5.0, -1.0, -9.0]]).reshape(1, 3, 1)
        out = maxpool2d_forward(x)
        # windows: [-5,-1] and [-9, pad]; the pad never wins
        assert out.shape == (1, 2, 1)
        assert np.allclose(out[0, :, 0], [-1.0, -9.0])

    def test_backward_is_routing_only(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((6, 6, 3))
        up = rng.standard_normal((3, 3, 3))
        d_x = maxpool2d_backward(x, up)
        assert np.isclose(d_x.sum(), up.sum())
        assert (d_x != 0).sum() == up.size


class TestDense:
    def test_zero_weights_yield_bias(self):
        bias = np.array([1.0, -2.0])
        out = dense_forward(np.ones(4), np.zeros((4, 2)), bias)
        assert np.allclose(out, bias)

    def test_identity_weights(self):
        x = np.array([3.0, -1.0, 2.0])
        out = dense_forward(x, np.eye(3), np.zeros(3))
        assert np.allclose(out, x)

    def test_backward_matches_algebra(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(6)
        w = rng.standard_normal((6, 3))
        up = rng.standard_normal(3)
        d_x, d_w, d_b = dense_backward(x, w, up)
        assert np.allclose(d_x, w @ up)
        assert np.allclose(d_w, np.outer(x, up))
        assert np.allclose(d_b, up)

    def test_length_mismatch_raises(self):
        with pytest.raises(ShapeError):
            dense_forward(np.ones(5), np.zeros((4, 2)), np.zeros(2))


class TestSigmoid:
    def test_zero_maps_to_half(self):
        assert sigmoid(0.0) == 0.5

    def test_symmetry(self):
        xs = np.linspace(-8, 8, 33)
        assert np.allclose(sigmoid(xs) + sigmoid(-xs), 1.0)

    def test_value_at_ten(self):
        # closed form: 1 / (1 + e^-10)
        assert abs(sigmoid(10.0) - 0.9999546) < 1e-7

    def test_no_overflow_at_extremes(self):
        with np.errstate(over="raise"):
            out = sigmoid(np.array([-500.0, 500.0]))
        assert out[0] == 0.0 and out[1] == 1.0

    def test_backward_uses_output(self):
        y = sigmoid(np.array([0.3]))
        assert np.allclose(sigmoid_backward(y, np.array([2.0])), 2.0 * y * (1 - y))


class TestGaussianInit:
    def test_moments_over_large_sample(self):
        t = gaussian_init((100, 100), sd=0.01, seed=7)
        assert abs(t.mean()) <= 3 * 0.01 / np.sqrt(10_000)
        assert 0.0097 <= t.std() <= 0.0103

    def test_same_seed_bit_identical(self):
        a = gaussian_init((4, 4, 3, 16), seed=123)
        b = gaussian_init((4, 4, 3, 16), seed=123)
        assert a.tobytes() == b.tobytes()

    def test_nonpositive_sd_rejected(self):
        with pytest.raises(InputError):
            gaussian_init((3,), sd=0.0, seed=0)
