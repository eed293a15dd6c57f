"""From-scratch feed-forward regressor for remaining gate counts.

A plain numpy MLP: rectified-linear hidden layers, softplus output (so
predictions are strictly positive), mean-squared-error loss, AdamW with
decoupled weight decay, global-norm gradient clipping, and a linear-warmup
plus cosine-decay learning-rate schedule. Training streams examples into a
ring replay buffer and samples minibatches uniformly from it; all
arithmetic is double precision, weights are serialized as float32.

Model file format (little-endian): magic ``MDLM``, version u16, qubit count
u8, layer count u8, then per layer rows u32, cols u32, float32 weights
row-major, float32 biases; trailing CRC32.
"""

from __future__ import annotations

import copy
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from ._rng import substream
from .datagen import TrainingExample, feature_length
from .errors import ModelFormatError, TrainingError

_MAGIC = b"MDLM"
_VERSION = 1

DEFAULT_HIDDEN = (1024, 512, 128)


@dataclass
class MlpModel:
    """Weights are (fan_in, fan_out) float64 matrices; x maps through
    relu(x @ W + b) per hidden layer and softplus at the scalar output."""

    n_qubits: int
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return (self.input_dim, *(w.shape[1] for w in self.weights))

    @property
    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def init_model(
    n_qubits: int,
    hidden: tuple[int, ...] = DEFAULT_HIDDEN,
    rng: np.random.Generator | None = None,
) -> MlpModel:
    """He-scaled normal weights, zero biases."""
    if rng is None:
        rng = np.random.default_rng(0)
    dims = (feature_length(n_qubits), *hidden, 1)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(n_qubits, weights, biases)


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def forward(model: MlpModel, batch: np.ndarray) -> np.ndarray:
    """Predictions for a (B, input_dim) batch; strictly positive, one per row."""
    x = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if x.shape[1] != model.input_dim:
        raise ValueError(
            f"feature width {x.shape[1]} does not match model input {model.input_dim}"
        )
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        x = np.maximum(x @ w + b, 0.0)
    z = x @ model.weights[-1] + model.biases[-1]
    return softplus(z)[:, 0]


Gradients = tuple[list[np.ndarray], list[np.ndarray]]


def loss_and_grad(
    model: MlpModel, batch: np.ndarray, labels: np.ndarray
) -> tuple[float, Gradients]:
    """Mean squared error and its gradients via backpropagation."""
    x = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    y = np.asarray(labels, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"batch size {x.shape[0]} != label count {y.shape[0]}")
    if x.shape[1] != model.input_dim:
        raise ValueError(
            f"feature width {x.shape[1]} does not match model input {model.input_dim}"
        )

    activations = [x]
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        x = np.maximum(x @ w + b, 0.0)
        activations.append(x)
    z = x @ model.weights[-1] + model.biases[-1]
    pred = softplus(z)[:, 0]

    diff = pred - y
    loss = float(np.mean(diff**2))
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss}")

    batch_size = y.shape[0]
    # d loss / d z through the softplus output
    dz = (2.0 / batch_size) * diff[:, None] * _sigmoid(z)
    grad_w = [np.empty(0)] * len(model.weights)
    grad_b = [np.empty(0)] * len(model.biases)
    grad_w[-1] = activations[-1].T @ dz
    grad_b[-1] = dz.sum(axis=0)
    da = dz @ model.weights[-1].T
    for layer in range(len(model.weights) - 2, -1, -1):
        da = da * (activations[layer + 1] > 0.0)
        grad_w[layer] = activations[layer].T @ da
        grad_b[layer] = da.sum(axis=0)
        if layer > 0:
            da = da @ model.weights[layer].T
    return loss, (grad_w, grad_b)


@dataclass
class TrainConfig:
    """Optimizer and schedule hyperparameters."""

    epochs: int = 10
    steps_per_epoch: int = 2000
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    grad_clip: float = 1.0
    dropout: float = 0.0
    batch: int = 256
    grad_accumulation: int = 5
    warmup_steps: int = 2000
    cosine_t_max: int = 20000
    eta_min: float = 1e-6
    peak_lr: float = 5e-4
    replay_buffer: int = 6000
    stream_per_step: int = 64
    validation_size: int = 4096
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dropout != 0.0:
            raise ValueError("dropout is exposed for config parity but not implemented")
        positive = (
            self.epochs, self.steps_per_epoch, self.batch, self.grad_accumulation,
            self.cosine_t_max, self.replay_buffer,
        )
        if any(v < 1 for v in positive):
            raise ValueError("epochs/steps/batch/accumulation/t_max/buffer must be >= 1")
        if self.warmup_steps > self.epochs * self.steps_per_epoch:
            raise ValueError("warmup longer than the whole run")


@dataclass
class AdamWState:
    step: int = 0
    m_w: list[np.ndarray] = field(default_factory=list)
    v_w: list[np.ndarray] = field(default_factory=list)
    m_b: list[np.ndarray] = field(default_factory=list)
    v_b: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_model(cls, model: MlpModel) -> "AdamWState":
        return cls(
            step=0,
            m_w=[np.zeros_like(w) for w in model.weights],
            v_w=[np.zeros_like(w) for w in model.weights],
            m_b=[np.zeros_like(b) for b in model.biases],
            v_b=[np.zeros_like(b) for b in model.biases],
        )


def global_grad_norm(grads: Gradients) -> float:
    grad_w, grad_b = grads
    total = sum(float(np.sum(g**2)) for g in grad_w)
    total += sum(float(np.sum(g**2)) for g in grad_b)
    return float(np.sqrt(total))


def adamw_step(
    state: AdamWState,
    model: MlpModel,
    grads: Gradients,
    lr: float,
    cfg: TrainConfig,
) -> AdamWState:
    """One decoupled-weight-decay Adam update with bias correction.
    Global-norm clipping is applied to the gradients before the moment
    update. Mutates model and state in place and returns the state."""
    grad_w, grad_b = grads
    norm = global_grad_norm(grads)
    if not np.isfinite(norm):
        raise TrainingError("non-finite gradient norm")
    if cfg.grad_clip > 0.0 and norm > cfg.grad_clip:
        scale = cfg.grad_clip / norm
        grad_w = [g * scale for g in grad_w]
        grad_b = [g * scale for g in grad_b]

    state.step += 1
    bc1 = 1.0 - cfg.beta1**state.step
    bc2 = 1.0 - cfg.beta2**state.step
    for params, grads_k, ms, vs in (
        (model.weights, grad_w, state.m_w, state.v_w),
        (model.biases, grad_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(params, grads_k, ms, vs):
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g**2
            update = (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
            if cfg.weight_decay > 0.0:
                update = update + cfg.weight_decay * p
            p -= lr * update
    return state


def lr_at(step: int, cfg: TrainConfig) -> float:
    """Linear ramp 0 -> peak over the warmup, then cosine decay to eta_min
    over cosine_t_max steps, clamped at eta_min afterwards."""
    if step < 0:
        raise ValueError("step must be non-negative")
    if cfg.warmup_steps > 0 and step < cfg.warmup_steps:
        return cfg.peak_lr * step / cfg.warmup_steps
    s = step - cfg.warmup_steps
    if s >= cfg.cosine_t_max:
        return cfg.eta_min
    cos = np.cos(np.pi * s / cfg.cosine_t_max)
    return float(cfg.eta_min + (cfg.peak_lr - cfg.eta_min) * (1.0 + cos) / 2.0)


def _examples_to_arrays(
    examples: list[TrainingExample],
) -> tuple[np.ndarray, np.ndarray]:
    feats = np.stack([ex.features for ex in examples]).astype(np.float64)
    labels = np.array([ex.label for ex in examples], dtype=np.float64)
    return feats, labels


def validation_metrics(
    model: MlpModel, features: np.ndarray, labels: np.ndarray
) -> dict[str, float]:
    pred = forward(model, features)
    err = pred - labels
    mse = float(np.mean(err**2))
    mae = float(np.mean(np.abs(err)))
    var = float(np.var(labels))
    r2 = 1.0 - mse / var if var > 0 else 0.0
    return {"mse": mse, "mae": mae, "r2": r2}


def train(
    datastream: Iterator[TrainingExample],
    cfg: TrainConfig,
    n_qubits: int,
    validation: list[TrainingExample] | None = None,
) -> tuple[MlpModel, list[dict[str, float]]]:
    """Run the full streaming training loop.

    Fills a ring replay buffer from the stream, then per optimizer step
    refreshes the buffer with ``stream_per_step`` fresh examples and
    accumulates gradients over ``grad_accumulation`` minibatches sampled
    uniformly with replacement. Returns the best-validation-MSE checkpoint
    (the final model when no validation set is given) and one metrics row
    per epoch."""
    model = init_model(n_qubits, cfg.hidden, rng=substream(cfg.seed, "init"))
    state = AdamWState.for_model(model)
    sample_rng = substream(cfg.seed, "training-shuffle")

    flen = feature_length(n_qubits)
    capacity = cfg.replay_buffer
    buf_x = np.empty((capacity, flen), dtype=np.float64)
    buf_y = np.empty(capacity, dtype=np.float64)
    filled = 0
    cursor = 0

    def push(ex: TrainingExample) -> None:
        nonlocal filled, cursor
        if ex.features.size != flen:
            raise TrainingError(
                f"stream feature width {ex.features.size} != expected {flen}"
            )
        buf_x[cursor] = ex.features
        buf_y[cursor] = ex.label
        cursor = (cursor + 1) % capacity
        filled = min(filled + 1, capacity)

    try:
        for _ in range(min(capacity, max(cfg.batch, cfg.stream_per_step))):
            push(next(datastream))
    except StopIteration as exc:
        raise TrainingError("datastream exhausted during buffer prefill") from exc

    val_x = val_y = None
    if validation:
        val_x, val_y = _examples_to_arrays(validation)

    log: list[dict[str, float]] = []
    best_val = np.inf
    best_model = None
    global_step = 0
    for epoch in range(cfg.epochs):
        epoch_losses = []
        for _ in range(cfg.steps_per_epoch):
            try:
                for _ in range(cfg.stream_per_step):
                    push(next(datastream))
            except StopIteration as exc:
                raise TrainingError("datastream exhausted mid-training") from exc
            acc_w = [np.zeros_like(w) for w in model.weights]
            acc_b = [np.zeros_like(b) for b in model.biases]
            acc_loss = 0.0
            for _ in range(cfg.grad_accumulation):
                rows = sample_rng.integers(filled, size=cfg.batch)
                loss, (gw, gb) = loss_and_grad(model, buf_x[rows], buf_y[rows])
                acc_loss += loss
                for a, g in zip(acc_w, gw):
                    a += g
                for a, g in zip(acc_b, gb):
                    a += g
            k = cfg.grad_accumulation
            grads = ([a / k for a in acc_w], [a / k for a in acc_b])
            adamw_step(state, model, grads, lr_at(global_step, cfg), cfg)
            epoch_losses.append(acc_loss / k)
            global_step += 1

        row: dict[str, float] = {
            "epoch": float(epoch),
            "train_mse": float(np.mean(epoch_losses)),
            "lr": lr_at(global_step, cfg),
        }
        if val_x is not None:
            vm = validation_metrics(model, val_x, val_y)
            row.update(val_mse=vm["mse"], val_mae=vm["mae"], val_r2=vm["r2"])
            if vm["mse"] < best_val:
                best_val = vm["mse"]
                best_model = MlpModel(
                    model.n_qubits,
                    [w.copy() for w in model.weights],
                    [b.copy() for b in model.biases],
                )
        log.append(row)

    return (best_model if best_model is not None else model), log


def save_model(model: MlpModel, path: str | Path) -> None:
    parts = [
        _MAGIC,
        _VERSION.to_bytes(2, "little"),
        model.n_qubits.to_bytes(1, "little"),
        len(model.weights).to_bytes(1, "little"),
    ]
    for w, b in zip(model.weights, model.biases):
        rows, cols = w.shape
        parts.append(rows.to_bytes(4, "little"))
        parts.append(cols.to_bytes(4, "little"))
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    body = b"".join(parts)
    Path(path).write_bytes(body + zlib.crc32(body).to_bytes(4, "little"))


def load_model(path: str | Path) -> MlpModel:
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise ModelFormatError(f"{path}: truncated header")
    if raw[:4] != _MAGIC:
        raise ModelFormatError(f"{path}: bad magic {raw[:4]!r}")
    version = int.from_bytes(raw[4:6], "little")
    if version != _VERSION:
        raise ModelFormatError(f"{path}: unsupported version {version}")
    if zlib.crc32(raw[:-4]) != int.from_bytes(raw[-4:], "little"):
        raise ModelFormatError(f"{path}: CRC mismatch")
    n_qubits = raw[6]
    if not 1 <= n_qubits <= 5:
        raise ModelFormatError(f"{path}: qubit count {n_qubits} out of range")
    layer_count = raw[7]
    offset = 8
    weights = []
    biases = []
    for _ in range(layer_count):
        if offset + 8 > len(raw) - 4:
            raise ModelFormatError(f"{path}: truncated layer header")
        rows = int.from_bytes(raw[offset : offset + 4], "little")
        cols = int.from_bytes(raw[offset + 4 : offset + 8], "little")
        offset += 8
        nbytes = 4 * (rows * cols + cols)
        if offset + nbytes > len(raw) - 4:
            raise ModelFormatError(f"{path}: truncated layer data")
        w = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=offset)
        offset += 4 * rows * cols
        b = np.frombuffer(raw, dtype="<f4", count=cols, offset=offset)
        offset += 4 * cols
        weights.append(w.reshape(rows, cols).astype(np.float64))
        biases.append(b.astype(np.float64))
    if offset != len(raw) - 4:
        raise ModelFormatError(f"{path}: trailing bytes after layers")
    if not weights:
        raise ModelFormatError(f"{path}: no layers")
    if weights[0].shape[0] != feature_length(n_qubits):
        raise ModelFormatError(
            f"{path}: input dim {weights[0].shape[0]} does not match "
            f"qubit count {n_qubits}"
        )
    if weights[-1].shape[1] != 1:
        raise ModelFormatError(f"{path}: output layer is not scalar")
    for prev, nxt in zip(weights[:-1], weights[1:]):
        if prev.shape[1] != nxt.shape[0]:
            raise ModelFormatError(f"{path}: inconsistent layer shapes")
    return MlpModel(n_qubits, weights, biases)
