"""Training losses (gene 15) and their gradients with respect to the output.

Per-sample values are means over features (mape scaled to percent, cosine
proximity taken over the whole vector); the batch objective is the mean of
per-sample values.  bce clamps outputs and mape/cosine guard denominators
with ``EPS``; gradients differentiate the clamped/guarded forms exactly.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-7

MSE, MAE, MAPE, BCE, COSINE = range(1, 6)


def _as_batch(target, output):
    t = np.atleast_2d(np.asarray(target, dtype=float))
    o = np.atleast_2d(np.asarray(output, dtype=float))
    if t.shape != o.shape:
        raise ValueError(f"target shape {t.shape} != output shape {o.shape}")
    return t, o


def batch_loss(loss_id: int, target, output) -> float:
    """Mean over samples of the per-sample loss."""
    t, o = _as_batch(target, output)
    if loss_id == MSE:
        return float(np.mean((t - o) ** 2))
    if loss_id == MAE:
        return float(np.mean(np.abs(t - o)))
    if loss_id == MAPE:
        return float(100.0 * np.mean(np.abs(t - o) / np.maximum(np.abs(t), EPS)))
    if loss_id == BCE:
        oc = np.clip(o, EPS, 1.0 - EPS)
        return float(np.mean(-t * np.log(oc) - (1.0 - t) * np.log(1.0 - oc)))
    if loss_id == COSINE:
        nt = np.maximum(np.linalg.norm(t, axis=1), EPS)
        no = np.maximum(np.linalg.norm(o, axis=1), EPS)
        return float(np.mean(-(t * o).sum(axis=1) / (nt * no)))
    raise ValueError(f"unknown loss id {loss_id}")


def batch_loss_gradient(loss_id: int, target, output) -> np.ndarray:
    """Gradient of :func:`batch_loss` with respect to the output matrix."""
    t, o = _as_batch(target, output)
    n, d = o.shape
    if loss_id == MSE:
        return 2.0 * (o - t) / (n * d)
    if loss_id == MAE:
        return np.sign(o - t) / (n * d)
    if loss_id == MAPE:
        return 100.0 * np.sign(o - t) / np.maximum(np.abs(t), EPS) / (n * d)
    if loss_id == BCE:
        oc = np.clip(o, EPS, 1.0 - EPS)
        grad = (oc - t) / (oc * (1.0 - oc)) / (n * d)
        # the clamp zeroes the derivative outside its interior
        grad[(o < EPS) | (o > 1.0 - EPS)] = 0.0
        return grad
    if loss_id == COSINE:
        norm_o = np.linalg.norm(o, axis=1, keepdims=True)
        nt = np.maximum(np.linalg.norm(t, axis=1, keepdims=True), EPS)
        no = np.maximum(norm_o, EPS)
        dot = (t * o).sum(axis=1, keepdims=True)
        grad = -t / (nt * no)
        unguarded = norm_o > EPS
        grad += np.where(unguarded, dot * o / (nt * no**2 * np.maximum(norm_o, EPS)), 0.0)
        return grad / n
    raise ValueError(f"unknown loss id {loss_id}")


def loss(loss_id: int, target, output) -> float:
    """Per-sample loss for a single (target, output) vector pair."""
    return batch_loss(loss_id, np.atleast_2d(target), np.atleast_2d(output))


def loss_gradient(loss_id: int, target, output) -> np.ndarray:
    """Gradient of :func:`loss` for a single vector pair."""
    grad = batch_loss_gradient(loss_id, np.atleast_2d(target), np.atleast_2d(output))
    return grad[0]


def correntropy_loss(target, output, sigma: float) -> float:
    """Negative mean Gaussian correntropy between target and output."""
    t, o = _as_batch(target, output)
    return float(np.mean(-np.exp(-((o - t) ** 2) / (2.0 * sigma**2))))


def correntropy_gradient(target, output, sigma: float) -> np.ndarray:
    t, o = _as_batch(target, output)
    n, d = o.shape
    e = o - t
    return e * np.exp(-(e**2) / (2.0 * sigma**2)) / (sigma**2 * n * d)
