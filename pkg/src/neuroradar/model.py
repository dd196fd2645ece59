"""Tiny MLP gesture classifier: float training, 8-bit quantization, NRNM format.

Architecture is a single-hidden-layer perceptron, 64 -> 48 -> 5 with a
rectifier and a softmax head: 3365 parameters, which serializes with
per-layer scales and a 16-byte header to 3389 bytes, inside the 4096-byte
model budget.

NRNM file layout (little-endian throughout):

    offset  size  field
    0       4     magic 'NRNM'
    4       1     version (1)
    5       1     n_layers (2)
    6       6     dims, u16 x 3: input, hidden, output
    12      4     reserved (zero)
    per layer, in order:
            4     scale, float32; real = int8 * scale
            out*in  int8 weights, row-major (one row per output unit)
            out   int8 biases

Quantization is symmetric per layer: scale = max(|weights|, |biases|)/127
(1.0 for an all-zero layer), values rounded to nearest.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractError,
    FormatError,
    QuantizationQualityError,
    SizeBudgetError,
    TrainingDivergedError,
    ValidationError,
)
from .gestures import GestureClass

MODEL_BUDGET_BYTES = 4096
NRNM_MAGIC = b"NRNM"
NRNM_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    n_in: int = 64
    n_hidden: int = 48
    n_out: int = 5

    @property
    def param_count(self) -> int:
        return (
            self.n_in * self.n_hidden
            + self.n_hidden
            + self.n_hidden * self.n_out
            + self.n_out
        )

    @property
    def serialized_size(self) -> int:
        return 16 + (4 + self.n_in * self.n_hidden + self.n_hidden) + (
            4 + self.n_hidden * self.n_out + self.n_out
        )


@dataclass
class FloatModel:
    """Full-precision weights plus training metadata."""

    spec: ModelSpec
    w1: np.ndarray  # (n_hidden, n_in)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_out, n_hidden)
    b2: np.ndarray  # (n_out,)
    seed: int = 0
    epochs_trained: int = 0
    final_loss: float = float("nan")

    def copy(self) -> "FloatModel":
        return FloatModel(
            spec=self.spec,
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
            b2=self.b2.copy(),
            seed=self.seed,
            epochs_trained=self.epochs_trained,
            final_loss=self.final_loss,
        )


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.15  # halved every 50 epochs
    epochs: int = 450
    batch: int = 32
    seed: int = 0

    def validate(self) -> None:
        if not self.lr >= 0:
            raise ValidationError("lr must be >= 0")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.batch < 1:
            raise ValidationError("batch must be >= 1")


def init_model(spec: ModelSpec = ModelSpec(), seed: int = 0) -> FloatModel:
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng([seed, 0x4D])
    lim1 = np.sqrt(6.0 / (spec.n_in + spec.n_hidden))
    lim2 = np.sqrt(6.0 / (spec.n_hidden + spec.n_out))
    return FloatModel(
        spec=spec,
        w1=rng.uniform(-lim1, lim1, (spec.n_hidden, spec.n_in)),
        b1=np.zeros(spec.n_hidden),
        w2=rng.uniform(-lim2, lim2, (spec.n_out, spec.n_hidden)),
        b2=np.zeros(spec.n_out),
        seed=seed,
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_batch(model: FloatModel, x: np.ndarray) -> np.ndarray:
    """Softmax probabilities for a (n, n_in) batch."""
    h = np.maximum(x @ model.w1.T + model.b1, 0.0)
    return _softmax(h @ model.w2.T + model.b2)


def forward(model: FloatModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.spec.n_in,):
        raise ContractError(f"expected input shape ({model.spec.n_in},), got {x.shape}")
    return forward_batch(model, x[None, :])[0]


def loss_and_grads(
    model: FloatModel, x: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its parameter gradients."""
    n = len(x)
    h_pre = x @ model.w1.T + model.b1
    h = np.maximum(h_pre, 0.0)
    probs = _softmax(h @ model.w2.T + model.b2)
    eps = 1e-12
    loss = float(-np.mean(np.log(probs[np.arange(n), y] + eps)))

    d_logits = probs.copy()
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    g_w2 = d_logits.T @ h
    g_b2 = d_logits.sum(axis=0)
    d_h = d_logits @ model.w2
    d_h[h_pre <= 0.0] = 0.0
    g_w1 = d_h.T @ x
    g_b1 = d_h.sum(axis=0)
    return loss, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


def train(
    model: FloatModel,
    features: np.ndarray,
    labels: np.ndarray,
    cfg: TrainConfig = TrainConfig(),
) -> FloatModel:
    """Mini-batch gradient descent on cross-entropy; returns a new model.

    Deterministic for a fixed (dataset order, cfg.seed). Raises
    TrainingDivergedError if the loss goes non-finite.
    """
    cfg.validate()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if len(x) == 0:
        raise ValidationError("training set is empty")
    if x.ndim != 2 or x.shape[1] != model.spec.n_in:
        raise ContractError(f"features must be (n, {model.spec.n_in})")
    if np.any(y < 0) or np.any(y >= model.spec.n_out):
        raise ValidationError("labels outside class range")

    out = model.copy()
    rng = np.random.default_rng([cfg.seed, 0x7E])
    n = len(x)
    last_loss = float("nan")
    for epoch in range(cfg.epochs):
        lr = cfg.lr * 0.5 ** (epoch // 50)
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch):
            sel = order[start : start + cfg.batch]
            loss, grads = loss_and_grads(out, x[sel], y[sel])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"loss diverged at epoch {epoch}", epoch)
            out.w1 -= lr * grads["w1"]
            out.b1 -= lr * grads["b1"]
            out.w2 -= lr * grads["w2"]
            out.b2 -= lr * grads["b2"]
            last_loss = loss
    out.seed = cfg.seed
    out.epochs_trained = model.epochs_trained + cfg.epochs
    out.final_loss = last_loss
    return out


def accuracy(model: FloatModel, features: np.ndarray, labels: np.ndarray) -> float:
    probs = forward_batch(model, np.asarray(features, dtype=np.float64))
    return float(np.mean(np.argmax(probs, axis=1) == np.asarray(labels)))


# ---------------------------------------------------------------------------
# quantization


@dataclass
class QuantLayer:
    scale: float
    weights: np.ndarray  # int8, (out, in)
    biases: np.ndarray  # int8, (out,)


@dataclass
class QuantModel:
    spec: ModelSpec
    layers: list[QuantLayer]

    def to_bytes(self) -> bytes:
        head = struct.pack(
            "<4sBBHHH4x",
            NRNM_MAGIC,
            NRNM_VERSION,
            len(self.layers),
            self.spec.n_in,
            self.spec.n_hidden,
            self.spec.n_out,
        )
        parts = [head]
        for layer in self.layers:
            parts.append(struct.pack("<f", layer.scale))
            parts.append(layer.weights.astype(np.int8).tobytes(order="C"))
            parts.append(layer.biases.astype(np.int8).tobytes())
        return b"".join(parts)

    @property
    def serialized_size(self) -> int:
        return len(self.to_bytes())

    def dequantize(self) -> FloatModel:
        l1, l2 = self.layers
        return FloatModel(
            spec=self.spec,
            w1=l1.weights.astype(np.float64) * l1.scale,
            b1=l1.biases.astype(np.float64) * l1.scale,
            w2=l2.weights.astype(np.float64) * l2.scale,
            b2=l2.biases.astype(np.float64) * l2.scale,
        )


def _quantize_layer(w: np.ndarray, b: np.ndarray) -> QuantLayer:
    peak = max(float(np.max(np.abs(w))), float(np.max(np.abs(b))))
    # scale lives as float32 in the file; use that value everywhere so
    # the in-memory model and its serialized form dequantize identically
    scale = float(np.float32(peak / 127.0)) if peak > 0 else 1.0
    q = lambda a: np.clip(np.round(a / scale), -127, 127).astype(np.int8)
    return QuantLayer(scale=scale, weights=q(w), biases=q(b))


def quantize(
    model: FloatModel,
    eval_features: np.ndarray | None = None,
    eval_labels: np.ndarray | None = None,
    max_accuracy_drop: float = 0.02,
) -> QuantModel:
    """Symmetric per-layer 8-bit quantization of weights and biases.

    When an evaluation set is supplied, the quantized model must stay
    within ``max_accuracy_drop`` of the float model's accuracy on it.
    """
    qm = QuantModel(
        spec=model.spec,
        layers=[
            _quantize_layer(model.w1, model.b1),
            _quantize_layer(model.w2, model.b2),
        ],
    )
    size = qm.serialized_size
    if size > MODEL_BUDGET_BYTES:
        raise SizeBudgetError(
            f"serialized model is {size} bytes, budget {MODEL_BUDGET_BYTES}", size
        )
    if eval_features is not None and eval_labels is not None and len(eval_features):
        float_acc = accuracy(model, eval_features, eval_labels)
        quant_acc = accuracy(qm.dequantize(), eval_features, eval_labels)
        if float_acc - quant_acc > max_accuracy_drop:
            raise QuantizationQualityError(
                f"quantization dropped accuracy {float_acc:.4f} -> {quant_acc:.4f}, "
                f"beyond {max_accuracy_drop:.2%}"
            )
    return qm


def infer(qmodel: QuantModel, x: np.ndarray) -> tuple[GestureClass, float]:
    """Classify one feature vector with the quantized model.

    Returns (label, confidence); argmax ties resolve to the lowest
    class index.
    """
    probs = forward(qmodel.dequantize(), x)
    idx = int(np.argmax(probs))
    return GestureClass(idx), float(probs[idx])


# ---------------------------------------------------------------------------
# NRNM serialization


def save_model(qmodel: QuantModel, path) -> int:
    """Write the NRNM file; returns the byte count."""
    blob = qmodel.to_bytes()
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def parse_model(blob: bytes) -> QuantModel:
    if len(blob) < 16:
        raise FormatError("NRNM header truncated", offset=len(blob))
    if blob[0:4] != NRNM_MAGIC:
        raise FormatError(f"bad magic {blob[0:4]!r}, expected {NRNM_MAGIC!r}", offset=0)
    version, n_layers = blob[4], blob[5]
    if version != NRNM_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if n_layers != 2:
        raise FormatError(f"expected 2 layers, got {n_layers}", offset=5)
    n_in, n_hidden, n_out = struct.unpack_from("<HHH", blob, 6)
    spec = ModelSpec(n_in=n_in, n_hidden=n_hidden, n_out=n_out)

    layers = []
    pos = 16
    for rows, cols in ((n_hidden, n_in), (n_out, n_hidden)):
        if pos + 4 + rows * cols + rows > len(blob):
            raise FormatError("layer data truncated", offset=pos)
        (scale,) = struct.unpack_from("<f", blob, pos)
        pos += 4
        w = np.frombuffer(blob, dtype=np.int8, count=rows * cols, offset=pos).reshape(
            rows, cols
        )
        pos += rows * cols
        b = np.frombuffer(blob, dtype=np.int8, count=rows, offset=pos)
        pos += rows
        layers.append(QuantLayer(scale=float(scale), weights=w.copy(), biases=b.copy()))
    if pos != len(blob):
        raise FormatError(f"{len(blob) - pos} trailing bytes", offset=pos)
    return QuantModel(spec=spec, layers=layers)


def load_model(path) -> QuantModel:
    with open(path, "rb") as fh:
        return parse_model(fh.read())
