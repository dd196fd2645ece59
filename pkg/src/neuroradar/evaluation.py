"""Gated evaluation of a classifier over manifest splits."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .dataset import SampleRecord, center_window_features
from .gestures import GESTURE_NAMES, GestureClass
from .model import FloatModel, QuantModel, forward_batch
from .pipeline import GateConfig

N_CLASSES = len(GestureClass)


@dataclass
class EvalMetrics:
    accuracy: float
    confusion: np.ndarray  # rows true, cols predicted
    per_class_precision: dict[str, float]
    per_class_recall: dict[str, float]
    n_samples: int

    def format_text(self) -> str:
        lines = [f"accuracy {self.accuracy:.4f} over {self.n_samples} samples"]
        lines.append("confusion (rows=true, cols=pred):")
        names = [GESTURE_NAMES[g] for g in GestureClass]
        header = " " * 14 + " ".join(f"{n[:9]:>10s}" for n in names)
        lines.append(header)
        for g in GestureClass:
            row = " ".join(f"{int(v):>10d}" for v in self.confusion[int(g)])
            lines.append(f"{GESTURE_NAMES[g]:>13s} {row}")
        lines.append("per-class precision/recall:")
        for g in GestureClass:
            name = GESTURE_NAMES[g]
            lines.append(
                f"{name:>13s} precision {self.per_class_precision[name]:.3f} "
                f"recall {self.per_class_recall[name]:.3f}"
            )
        return "\n".join(lines)


def gated_predictions(
    model: FloatModel,
    features: np.ndarray,
    counts: np.ndarray,
    gate: GateConfig = GateConfig(),
) -> np.ndarray:
    """Argmax labels with the activity gate applied first.

    Gate-closed windows go straight to NO_ACTIVITY without touching the
    classifier, mirroring the live pipeline.
    """
    pred = np.full(len(features), int(GestureClass.NO_ACTIVITY), dtype=np.int64)
    open_idx = np.flatnonzero(counts >= gate.min_events)
    if len(open_idx):
        probs = forward_batch(model, features[open_idx])
        pred[open_idx] = np.argmax(probs, axis=1)
    return pred


def compute_metrics(true: np.ndarray, pred: np.ndarray) -> EvalMetrics:
    conf = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(true, pred):
        conf[int(t), int(p)] += 1
    precision, recall = {}, {}
    for g in GestureClass:
        i = int(g)
        col = conf[:, i].sum()
        row = conf[i, :].sum()
        precision[GESTURE_NAMES[g]] = conf[i, i] / col if col else 0.0
        recall[GESTURE_NAMES[g]] = conf[i, i] / row if row else 0.0
    return EvalMetrics(
        accuracy=float(np.mean(true == pred)) if len(true) else 0.0,
        confusion=conf,
        per_class_precision=precision,
        per_class_recall=recall,
        n_samples=len(true),
    )


def evaluate_split(
    records: list[SampleRecord],
    base_dir,
    model: FloatModel | QuantModel,
    split: str = "test",
    gate: GateConfig = GateConfig(),
) -> EvalMetrics:
    """Deterministic gated metrics over one manifest split."""
    if isinstance(model, QuantModel):
        model = model.dequantize()
    feats, labels, counts, _ = center_window_features(records, base_dir, split=split)
    pred = gated_predictions(model, feats, counts, gate)
    return compute_metrics(labels, pred)
