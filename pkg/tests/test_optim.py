"""Adam update behavior and the BCE loss."""

import numpy as np
import pytest

from fallwatch.errors import InputError, ShapeError
from fallwatch.losses import bce_loss, bce_loss_batch
from fallwatch.optim import Adam, AdamState, adam_step


class TestAdamStep:
    def test_first_step_moves_by_roughly_lr(self):
        # closed form at t=1: m_hat = g, v_hat = g^2, so |delta| ~ lr
        lr = 1e-3
        param = np.zeros(5)
        grad = np.array([1.0, -2.0, 0.5, 10.0, -0.01])
        state = AdamState.for_param(param, lr=lr)
        adam_step(param, grad, state)
        moved = -param / np.sign(grad)
        assert ((moved >= 0.99 * lr) & (moved <= lr)).all()
        assert state.t == 1

    def test_zero_gradient_fresh_state_is_noop(self):
        param = np.array([1.0, 2.0])
        state = AdamState.for_param(param)
        adam_step(param, np.zeros(2), state)
        assert np.allclose(param, [1.0, 2.0])

    def test_zero_lr_is_identity(self):
        param = np.array([1.0, -3.0])
        state = AdamState.for_param(param, lr=0.0)
        for g in ([5.0, 5.0], [-1.0, 2.0]):
            adam_step(param, np.array(g), state)
        assert np.allclose(param, [1.0, -3.0])

    def test_step_counter_increments(self):
        param = np.zeros(1)
        state = AdamState.for_param(param)
        for expected in (1, 2, 3):
            adam_step(param, np.ones(1), state)
            assert state.t == expected

    def test_shape_mismatch_raises(self):
        param = np.zeros(3)
        with pytest.raises(ShapeError):
            adam_step(param, np.zeros(4), AdamState.for_param(param))

    def test_adam_never_increases_locally_linear_loss(self):
        # single step against gradient direction of a linear loss
        rng = np.random.default_rng(0)
        for _ in range(20):
            param = rng.standard_normal(8)
            grad = rng.standard_normal(8)
            before = float(grad @ param)
            adam_step(param, grad, AdamState.for_param(param, lr=1e-4))
            assert float(grad @ param) <= before

    def test_adam_wrapper_updates_all_params(self):
        params = [np.ones(3), np.ones((2, 2))]
        opt = Adam(params, lr=0.1)
        opt.step([np.ones(3), np.ones((2, 2))])
        assert (params[0] < 1).all() and (params[1] < 1).all()


class TestBceLoss:
    def test_perfect_prediction_is_near_zero(self):
        loss, _ = bce_loss(1 - 1e-7, 1)
        assert loss == pytest.approx(1e-7, abs=1e-8)

    def test_half_prediction(self):
        loss, _ = bce_loss(0.5, 1)
        assert loss == pytest.approx(0.693147, abs=1e-6)

    def test_clamp_keeps_loss_finite(self):
        loss, _ = bce_loss(0.0, 1)
        assert loss == pytest.approx(-np.log(1e-7), abs=1e-6)
        assert np.isfinite(loss)

    def test_bad_label_rejected(self):
        with pytest.raises(InputError):
            bce_loss(0.5, 2)

    def test_nonnegative_and_zero_only_when_clamped_perfect(self):
        rng = np.random.default_rng(3)
        for p in rng.uniform(0, 1, 50):
            for y in (0, 1):
                loss, _ = bce_loss(float(p), y)
                assert loss >= 0.0

    def test_monotone_decreasing_in_p_for_positive_label(self):
        ps = np.linspace(0.01, 0.99, 25)
        losses = [bce_loss(float(p), 1)[0] for p in ps]
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_batch_mean_matches_scalar_form(self):
        probs = np.array([0.2, 0.9, 0.5])
        labels = np.array([0, 1, 1])
        mean_loss, grads = bce_loss_batch(probs, labels)
        singles = [bce_loss(float(p), int(y)) for p, y in zip(probs, labels)]
        assert mean_loss == pytest.approx(np.mean([s[0] for s in singles]))
        assert np.allclose(grads, [s[1] / 3 for s in singles])
