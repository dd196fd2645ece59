"""Event windowing, featurization, and the activity gate.

Feature layout: the window is split into ``n_bins`` equal time bins;
positive and negative polarities are counted separately, giving a
2*n_bins vector (positive half first). Counts are log1p-compressed and
divided by the vector maximum, so features live in [0, 1] and encode
the temporal shape of the event stream rather than absolute rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import EventStream
from .errors import ValidationError

DEFAULT_N_BINS = 32
FEATURE_DIM = 2 * DEFAULT_N_BINS

#: Live labeling cadence and window span, seconds.
WINDOW_SPAN_S = 1.5
WINDOW_HOP_S = 0.25


@dataclass(frozen=True)
class GateConfig:
    """Event-count threshold that suppresses all classifier work."""

    min_events: int = 30

    def validate(self) -> None:
        if self.min_events < 0:
            raise ValidationError("min_events must be >= 0")


@dataclass
class EventWindow:
    """Events of one analysis window, timestamps rebased to the start."""

    t0_ticks: int
    span_ticks: int
    t_ticks: np.ndarray  # rebased, uint64, ascending
    polarity: np.ndarray  # int8

    @property
    def count(self) -> int:
        return len(self.t_ticks)


def slice_windows(stream: EventStream, span_ticks: int, hop_ticks: int) -> list[EventWindow]:
    """Sliding windows at t0 = 0, hop, 2*hop, ... while t0+span fits.

    An event at absolute time t lands in every window with
    t0 <= t < t0 + span, rebased to t - t0.
    """
    if span_ticks <= 0 or hop_ticks <= 0:
        raise ValidationError("span and hop must be positive")
    t = stream.t_ticks.astype(np.int64)
    windows = []
    t0 = 0
    while t0 + span_ticks <= stream.duration_ticks:
        lo = int(np.searchsorted(t, t0, side="left"))
        hi = int(np.searchsorted(t, t0 + span_ticks, side="left"))
        windows.append(
            EventWindow(
                t0_ticks=t0,
                span_ticks=span_ticks,
                t_ticks=(t[lo:hi] - t0).astype(np.uint64),
                polarity=stream.polarity[lo:hi].copy(),
            )
        )
        t0 += hop_ticks
    return windows


def window_at(stream_t: np.ndarray, stream_p: np.ndarray, t0: int, span: int) -> EventWindow:
    """One window over raw event arrays (used by the live pipeline)."""
    t = stream_t.astype(np.int64)
    lo = int(np.searchsorted(t, t0, side="left"))
    hi = int(np.searchsorted(t, t0 + span, side="left"))
    return EventWindow(
        t0_ticks=t0,
        span_ticks=span,
        t_ticks=(t[lo:hi] - t0).astype(np.uint64),
        polarity=np.asarray(stream_p[lo:hi], dtype=np.int8),
    )


def bin_counts(window: EventWindow, n_bins: int = DEFAULT_N_BINS) -> tuple[np.ndarray, np.ndarray]:
    """Raw per-bin event counts, (positive, negative)."""
    if n_bins < 1:
        raise ValidationError("n_bins must be >= 1")
    if window.count == 0:
        z = np.zeros(n_bins, dtype=np.int64)
        return z, z.copy()
    # integer bin index: floor(t * n_bins / span); t < span so idx < n_bins
    idx = (window.t_ticks.astype(np.int64) * n_bins) // window.span_ticks
    pos = np.bincount(idx[window.polarity > 0], minlength=n_bins)
    neg = np.bincount(idx[window.polarity < 0], minlength=n_bins)
    return pos.astype(np.int64), neg.astype(np.int64)


def featurize(window: EventWindow, n_bins: int = DEFAULT_N_BINS) -> np.ndarray:
    """Fixed-size feature vector for the classifier (2*n_bins values)."""
    pos, neg = bin_counts(window, n_bins)
    vec = np.concatenate([pos, neg]).astype(np.float64)
    vec = np.log1p(vec)
    peak = vec.max()
    if peak > 0:
        vec /= peak
    return vec


def activity_gate(window: EventWindow, cfg: GateConfig = GateConfig()) -> bool:
    """True when the window holds enough events to be worth classifying."""
    cfg.validate()
    return window.count >= cfg.min_events
