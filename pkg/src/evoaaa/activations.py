"""The eight layer activations with first and second derivatives.

Everything operates elementwise on ndarrays.  Second derivatives are needed
to differentiate the contraction penalty, whose value already contains first
derivatives.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

SELU_LAMBDA = 1.0507009873554804934193349852946
SELU_ALPHA = 1.6732632423543772848170429916717

LINEAR, SIGMOID, TANH, RELU, SELU, ELU, SOFTPLUS, SOFTSIGN = range(1, 9)

# gene 14 is restricted to these (taken as listed, sign range notwithstanding)
OUTPUT_ACTIVATION_IDS = (LINEAR, RELU, ELU, SOFTPLUS)


def _expm1_neg(x):
    # exp(x) - 1 evaluated only where x <= 0, overflow-free
    return np.expm1(np.minimum(x, 0.0))


def activation(act_id: int, x):
    x = np.asarray(x, dtype=float)
    if act_id == LINEAR:
        return x
    if act_id == SIGMOID:
        return expit(x)
    if act_id == TANH:
        return np.tanh(x)
    if act_id == RELU:
        return np.maximum(x, 0.0)
    if act_id == SELU:
        return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * _expm1_neg(x))
    if act_id == ELU:
        return np.where(x > 0, x, _expm1_neg(x))
    if act_id == SOFTPLUS:
        return np.logaddexp(0.0, x)
    if act_id == SOFTSIGN:
        return x / (1.0 + np.abs(x))
    raise ValueError(f"unknown activation id {act_id}")


def activation_derivative(act_id: int, x):
    x = np.asarray(x, dtype=float)
    if act_id == LINEAR:
        return np.ones_like(x)
    if act_id == SIGMOID:
        s = expit(x)
        return s * (1.0 - s)
    if act_id == TANH:
        t = np.tanh(x)
        return 1.0 - t * t
    if act_id == RELU:
        return (x > 0).astype(float)
    if act_id == SELU:
        return SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))
    if act_id == ELU:
        return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))
    if act_id == SOFTPLUS:
        return expit(x)
    if act_id == SOFTSIGN:
        return 1.0 / (1.0 + np.abs(x)) ** 2
    raise ValueError(f"unknown activation id {act_id}")


def activation_curvature(act_id: int, x):
    """Second derivative, used by the contraction-penalty gradient."""
    x = np.asarray(x, dtype=float)
    if act_id in (LINEAR, RELU):
        return np.zeros_like(x)
    if act_id == SIGMOID:
        s = expit(x)
        return s * (1.0 - s) * (1.0 - 2.0 * s)
    if act_id == TANH:
        t = np.tanh(x)
        return -2.0 * t * (1.0 - t * t)
    if act_id == SELU:
        return SELU_LAMBDA * SELU_ALPHA * np.where(x > 0, 0.0, np.exp(np.minimum(x, 0.0)))
    if act_id == ELU:
        return np.where(x > 0, 0.0, np.exp(np.minimum(x, 0.0)))
    if act_id == SOFTPLUS:
        s = expit(x)
        return s * (1.0 - s)
    if act_id == SOFTSIGN:
        return -2.0 * np.sign(x) / (1.0 + np.abs(x)) ** 3
    raise ValueError(f"unknown activation id {act_id}")
