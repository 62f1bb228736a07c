"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

DEFAULT_LR = 1e-4
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPSILON = 1e-8


@dataclass
class AdamState:
    """Per-parameter moment estimates; t counts completed steps."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    epsilon: float = DEFAULT_EPSILON

    @classmethod
    def for_param(cls, param: np.ndarray, lr: float = DEFAULT_LR, **kwargs) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), lr=lr, **kwargs)


def adam_step(param: np.ndarray, grad: np.ndarray, state: AdamState) -> np.ndarray:
    """One Adam update: mutates param (in place) and state, and returns param.

    m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;  with bias-corrected
    m_hat, v_hat the update is param -= lr * m_hat / (sqrt(v_hat) + eps).
    """
    grad = np.asarray(grad)
    if param.shape != grad.shape or state.m.shape != param.shape:
        raise ShapeError(
            f"param {param.shape}, grad {grad.shape}, state {state.m.shape} must agree"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * np.square(grad)
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    param -= (state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(param.dtype)
    return param


@dataclass
class Adam:
    """Optimizer over a list of parameter tensors, updated in place."""

    params: list
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    epsilon: float = DEFAULT_EPSILON
    states: list = field(init=False)

    def __post_init__(self):
        self.states = [
            AdamState.for_param(
                p, lr=self.lr, beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon
            )
            for p in self.params
        ]

    def step(self, grads: list) -> None:
        if len(grads) != len(self.params):
            raise ShapeError(f"expected {len(self.params)} gradients, got {len(grads)}")
        for param, grad, state in zip(self.params, grads, self.states):
            adam_step(param, grad, state)
