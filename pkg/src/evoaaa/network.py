"""Dense autoencoder forward/backward passes for the six variant behaviors.

Parameters are plain numpy arrays; layer k of ``ModelParams`` maps the output
of layer k-1 through an affine transform plus activation.  The variational
variant replaces the coding layer with two parallel affine heads (mean and
log-variance) whose sampled code is passed through the coding activation.

The objective differentiated by :func:`backward` is the reconstruction term
(the chromosome's loss gene, or negative correntropy for the robust variant)
plus the variant penalty:

* sparse      -- KL(rho || rho_hat) over batch-mean coding activations
* contractive -- squared Frobenius norm of d(coding)/d(input)
* variational -- closed-form KL against a standard normal
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .activations import activation, activation_curvature, activation_derivative
from .genome import ArchitectureSpec
from .losses import (
    EPS,
    batch_loss,
    batch_loss_gradient,
    correntropy_gradient,
    correntropy_loss,
)

MODEL_SCHEMA = "evoaaa-model/1"


class NumericOverflowError(ArithmeticError):
    """A forward pass produced a non-finite value."""

    def __init__(self, stage: int):
        super().__init__(f"non-finite values in layer {stage}")
        self.stage = stage


@dataclass
class TrainConfig:
    """Training hyperparameters, including the per-variant knobs."""

    epochs: int = 20
    batch_size: int = 32
    noise_sigma: float = 0.1          # denoising input corruption
    sparsity_target: float = 0.1
    sparsity_weight: float = 0.01
    contractive_weight: float = 1e-4
    correntropy_sigma: float = 0.2
    kl_weight: float = 1.0
    learning_rate: float = 0.001
    rho: float = 0.9
    epsilon: float = 1e-7

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class ModelParams:
    """Per-layer weight matrices (out_units x in_units) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def tensors(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def copy(self) -> "ModelParams":
        return ModelParams([w.copy() for w in self.weights],
                           [b.copy() for b in self.biases])

    def zeros_like(self) -> "ModelParams":
        return ModelParams([np.zeros_like(w) for w in self.weights],
                           [np.zeros_like(b) for b in self.biases])

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(t)) for t in self.tensors())


@dataclass
class ForwardCache:
    inputs: np.ndarray
    pre: list[np.ndarray] = field(default_factory=list)   # input of each stage
    z: list[np.ndarray] = field(default_factory=list)     # pre-activation
    out: list[np.ndarray] = field(default_factory=list)   # post-activation
    mu: np.ndarray | None = None
    logvar: np.ndarray | None = None
    noise: np.ndarray | None = None
    z_sample: np.ndarray | None = None
    coding_out: np.ndarray | None = None

    @property
    def outputs(self) -> np.ndarray:
        return self.out[-1]


def stage_shapes(spec: ArchitectureSpec) -> list[tuple[int, int]]:
    """(out_units, in_units) for every weight matrix, in parameter order."""
    f = spec.feature_count
    enc = list(spec.encoder_units)
    c = spec.coding_units
    dec_sizes = [c] + enc[::-1] + [f]
    shapes = []
    sizes_in = [f] + enc
    for i in range(len(enc)):
        shapes.append((sizes_in[i + 1], sizes_in[i]))
    if spec.variant == "variational":
        shapes.append((c, sizes_in[-1]))  # mean head
        shapes.append((c, sizes_in[-1]))  # log-variance head
    else:
        shapes.append((c, sizes_in[-1]))
    for i in range(len(dec_sizes) - 1):
        shapes.append((dec_sizes[i + 1], dec_sizes[i]))
    return shapes


def _encoder_stage_activations(spec: ArchitectureSpec) -> list[int]:
    # encoder hidden stages plus coding stage (layout of non-variational models)
    return list(spec.encoder_activations) + [spec.coding_activation]


def _decoder_stage_activations(spec: ArchitectureSpec) -> list[int]:
    return list(spec.decoder_activations) + [spec.output_activation]


def init_params(spec: ArchitectureSpec, seed: int) -> ModelParams:
    """Uniform Glorot weights, zero biases, deterministic per seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for out_units, in_units in stage_shapes(spec):
        limit = np.sqrt(6.0 / (in_units + out_units))
        weights.append(rng.uniform(-limit, limit, size=(out_units, in_units)))
        biases.append(np.zeros(out_units))
    return ModelParams(weights, biases)


def _affine(x, w, b, stage):
    z = x @ w.T + b
    if not np.all(np.isfinite(z)):
        raise NumericOverflowError(stage)
    return z


def forward(params: ModelParams, spec: ArchitectureSpec, batch: np.ndarray, *,
            training: bool = False, noise: np.ndarray | None = None,
            rng: np.random.Generator | None = None) -> ForwardCache:
    """Run the network on a batch (rows are samples, width must equal f).

    For the variational variant in training mode the code is sampled as
    mu + exp(logvar/2) * noise; at evaluation time the mean is used.  A
    pre-drawn ``noise`` array takes precedence over drawing from ``rng``.
    """
    x = np.asarray(batch, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.feature_count:
        raise ValueError(f"batch must be 2-D with {spec.feature_count} columns")
    cache = ForwardCache(inputs=x)
    L = spec.layers
    enc_acts = list(spec.encoder_activations)
    dec_acts = _decoder_stage_activations(spec)

    a = x
    stage = 0
    for act_id in (enc_acts if spec.variant == "variational"
                   else _encoder_stage_activations(spec)):
        cache.pre.append(a)
        z = _affine(a, params.weights[stage], params.biases[stage], stage)
        a = activation(act_id, z)
        cache.z.append(z)
        cache.out.append(a)
        stage += 1

    if spec.variant == "variational":
        head_in = a
        cache.pre.append(head_in)
        mu = _affine(head_in, params.weights[stage], params.biases[stage], stage)
        cache.z.append(mu)
        cache.out.append(mu)
        stage += 1
        cache.pre.append(head_in)
        logvar = _affine(head_in, params.weights[stage], params.biases[stage], stage)
        cache.z.append(logvar)
        cache.out.append(logvar)
        stage += 1
        cache.mu, cache.logvar = mu, logvar
        if training:
            if noise is None:
                if rng is None:
                    raise ValueError("training a variational model requires noise or rng")
                noise = rng.standard_normal(mu.shape)
            z_sample = mu + np.exp(logvar / 2.0) * noise
            cache.noise = noise
        else:
            z_sample = mu
        if not np.all(np.isfinite(z_sample)):
            raise NumericOverflowError(stage - 1)
        cache.z_sample = z_sample
        a = activation(spec.coding_activation, z_sample)
        cache.coding_out = a
    else:
        cache.coding_out = cache.out[L]

    for act_id in dec_acts:
        cache.pre.append(a)
        z = _affine(a, params.weights[stage], params.biases[stage], stage)
        a = activation(act_id, z)
        cache.z.append(z)
        cache.out.append(a)
        stage += 1
    return cache


def _sparse_kl_value(coding_out: np.ndarray, rho: float) -> float:
    rho_hat = np.clip(coding_out.mean(axis=0), EPS, 1.0 - EPS)
    return float(np.sum(rho * np.log(rho / rho_hat)
                        + (1.0 - rho) * np.log((1.0 - rho) / (1.0 - rho_hat))))


def _sparse_kl_grad(coding_out: np.ndarray, rho: float) -> np.ndarray:
    # gradient w.r.t. the coding activations; zero where the clamp is active
    mean = coding_out.mean(axis=0)
    rho_hat = np.clip(mean, EPS, 1.0 - EPS)
    d_mean = -rho / rho_hat + (1.0 - rho) / (1.0 - rho_hat)
    d_mean = np.where((mean > EPS) & (mean < 1.0 - EPS), d_mean, 0.0)
    n = coding_out.shape[0]
    return np.broadcast_to(d_mean / n, coding_out.shape).copy()


def _gaussian_kl_value(mu: np.ndarray, logvar: np.ndarray) -> float:
    per_sample = -0.5 * np.sum(1.0 + logvar - mu**2 - np.exp(logvar), axis=1)
    return float(np.mean(per_sample))


def _contraction_stage_data(params, spec, cache):
    m = spec.layers + 1  # encoder stages including the coding layer
    acts = _encoder_stage_activations(spec)
    d = [activation_derivative(acts[i], cache.z[i]) for i in range(m)]
    c = [activation_curvature(acts[i], cache.z[i]) for i in range(m)]
    return m, d, c


def contraction_value(params: ModelParams, spec: ArchitectureSpec,
                      cache: ForwardCache) -> float:
    """Batch mean of ||d(coding)/d(input)||_F^2."""
    m, d, _ = _contraction_stage_data(params, spec, cache)
    n, f = cache.inputs.shape
    jac = np.broadcast_to(np.eye(f), (n, f, f))
    for i in range(m):
        jac = (d[i][:, :, None] * params.weights[i][None]) @ jac
    return float(np.mean(np.sum(jac**2, axis=(1, 2))))


def _contraction_backward(params, spec, cache, weight, grads):
    """Add the gradient of weight * contraction_value to ``grads``.

    The penalty P = ||J||_F^2 with J = D_m W_m ... D_1 W_1 depends on each
    W_i both explicitly and through the activation-derivative diagonals D_j,
    which is where the activation curvatures enter.
    """
    m, d, curv = _contraction_stage_data(params, spec, cache)
    n, f = cache.inputs.shape
    scale = weight / n

    # forward chains F_i = D_i W_i F_{i-1}, F_0 = I
    F = [np.broadcast_to(np.eye(f), (n, f, f))]
    for i in range(m):
        F.append((d[i][:, :, None] * params.weights[i][None]) @ F[i])
    # backward chains B_i = D_m W_m ... D_{i+1} W_{i+1}, B_m = I
    B = [None] * (m + 1)
    B[m] = np.broadcast_to(np.eye(F[m].shape[1]), (n, F[m].shape[1], F[m].shape[1]))
    for i in range(m, 0, -1):
        B[i - 1] = B[i] @ (d[i - 1][:, :, None] * params.weights[i - 1][None])

    u_vecs = []
    for i in range(m):
        w = params.weights[i]
        G = B[i + 1].transpose(0, 2, 1) @ B[i + 1]            # (n, u_i, u_i)
        C_prev = F[i] @ F[i].transpose(0, 2, 1)               # (n, u_{i-1}, u_{i-1})
        WC = np.matmul(w[None], C_prev)                       # (n, u_i, u_{i-1})
        H = WC @ w.T[None]                                    # (n, u_i, u_i)
        outer = d[i][:, :, None] * d[i][:, None, :]
        explicit = 2.0 * np.matmul(G * outer, WC)             # dP/dW_i at fixed D
        grads.weights[i] += scale * explicit.sum(axis=0)
        u = 2.0 * np.matmul(G * H, d[i][:, :, None])[:, :, 0] * curv[i]
        u_vecs.append(u)

    # delta_i = dP/dz_i, accumulated through the usual backprop recursion
    delta = u_vecs[m - 1]
    for i in range(m - 1, -1, -1):
        grads.weights[i] += scale * (delta.T @ cache.pre[i])
        grads.biases[i] += scale * delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * d[i - 1] + u_vecs[i - 1]


def objective(params: ModelParams, spec: ArchitectureSpec, target: np.ndarray,
              cache: ForwardCache, cfg: TrainConfig) -> float:
    """Total training objective for the batch behind ``cache``."""
    if spec.variant == "robust":
        value = correntropy_loss(target, cache.outputs, cfg.correntropy_sigma)
    else:
        value = batch_loss(spec.loss_id, target, cache.outputs)
    if spec.variant == "sparse":
        value += cfg.sparsity_weight * _sparse_kl_value(cache.coding_out,
                                                        cfg.sparsity_target)
    elif spec.variant == "contractive":
        value += cfg.contractive_weight * contraction_value(params, spec, cache)
    elif spec.variant == "variational":
        value += cfg.kl_weight * _gaussian_kl_value(cache.mu, cache.logvar)
    return value


def backward(params: ModelParams, spec: ArchitectureSpec, target: np.ndarray,
             cache: ForwardCache, cfg: TrainConfig) -> ModelParams:
    """Gradients of :func:`objective` with respect to every parameter."""
    target = np.asarray(target, dtype=float)
    grads = params.zeros_like()
    L = spec.layers
    if spec.variant == "robust":
        da = correntropy_gradient(target, cache.outputs, cfg.correntropy_sigma)
    else:
        da = batch_loss_gradient(spec.loss_id, target, cache.outputs)

    dec_acts = _decoder_stage_activations(spec)
    n_stages = len(params.weights)
    first_dec = n_stages - len(dec_acts)
    for k in range(len(dec_acts) - 1, -1, -1):
        i = first_dec + k
        dz = da * activation_derivative(dec_acts[k], cache.z[i])
        grads.weights[i] = dz.T @ cache.pre[i]
        grads.biases[i] = dz.sum(axis=0)
        da = dz @ params.weights[i]

    # da now holds the gradient w.r.t. the coding activations
    if spec.variant == "sparse":
        da = da + cfg.sparsity_weight * _sparse_kl_grad(cache.coding_out,
                                                        cfg.sparsity_target)

    if spec.variant == "variational":
        if cache.noise is None:
            raise ValueError("variational backward requires a training-mode cache")
        n = cache.inputs.shape[0]
        dz_sample = da * activation_derivative(spec.coding_activation, cache.z_sample)
        dmu = dz_sample + cfg.kl_weight * cache.mu / n
        dlogvar = (dz_sample * cache.noise * 0.5 * np.exp(cache.logvar / 2.0)
                   + cfg.kl_weight * 0.5 * (np.exp(cache.logvar) - 1.0) / n)
        for i, dhead in ((L, dmu), (L + 1, dlogvar)):
            grads.weights[i] = dhead.T @ cache.pre[i]
            grads.biases[i] = dhead.sum(axis=0)
        da = dmu @ params.weights[L] + dlogvar @ params.weights[L + 1]
        enc_acts = list(spec.encoder_activations)
    else:
        enc_acts = _encoder_stage_activations(spec)

    for i in range(len(enc_acts) - 1, -1, -1):
        dz = da * activation_derivative(enc_acts[i], cache.z[i])
        grads.weights[i] = dz.T @ cache.pre[i]
        grads.biases[i] = dz.sum(axis=0)
        da = dz @ params.weights[i]

    if spec.variant == "contractive":
        _contraction_backward(params, spec, cache, cfg.contractive_weight, grads)
    return grads


def reconstruction_mse(params: ModelParams, spec: ArchitectureSpec,
                       data: np.ndarray) -> float:
    """Plain evaluation-mode MSE, independent of the training loss gene."""
    cache = forward(params, spec, data, training=False)
    return batch_loss(1, data, cache.outputs)


def encode_data(params: ModelParams, spec: ArchitectureSpec,
                data: np.ndarray) -> np.ndarray:
    """Coding-layer activations in evaluation mode (the mean code for vae)."""
    cache = forward(params, spec, data, training=False)
    return cache.coding_out


def decode_codes(params: ModelParams, spec: ArchitectureSpec,
                 codes: np.ndarray) -> np.ndarray:
    """Run only the decoder stack on already-encoded rows."""
    codes = np.asarray(codes, dtype=float)
    if codes.ndim != 2 or codes.shape[1] != spec.coding_units:
        raise ValueError(f"codes must be 2-D with {spec.coding_units} columns")
    dec_acts = _decoder_stage_activations(spec)
    first_dec = len(params.weights) - len(dec_acts)
    a = codes
    for k, act_id in enumerate(dec_acts):
        i = first_dec + k
        a = activation(act_id, _affine(a, params.weights[i], params.biases[i], i))
    return a


def model_to_dict(spec: ArchitectureSpec, params: ModelParams,
                  train_mse: float) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "spec": spec.to_dict(),
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist()}
            for w, b in zip(params.weights, params.biases)
        ],
        "train_mse": float(train_mse),
    }


def save_model(path, spec: ArchitectureSpec, params: ModelParams,
               train_mse: float) -> None:
    Path(path).write_text(json.dumps(model_to_dict(spec, params, train_mse)))


def load_model(path) -> tuple[ArchitectureSpec, ModelParams, float]:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema: {doc.get('schema')!r}")
    spec = ArchitectureSpec.from_dict(doc["spec"])
    params = ModelParams(
        [np.asarray(layer["weights"], dtype=float) for layer in doc["layers"]],
        [np.asarray(layer["biases"], dtype=float) for layer in doc["layers"]],
    )
    return spec, params, float(doc["train_mse"])
