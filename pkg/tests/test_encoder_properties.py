"""Hypothesis property tests for the level-crossing encoder."""

import numpy as np
from hypothesis import given, settings, strategies as st

from neuroradar.encoder import EncoderConfig, EncoderMode, encode, reconstruct
from neuroradar.gestures import SampledSignal

FS = 4000.0


@st.composite
def band_limited_signal(draw):
    """Random sum of low-frequency cosines, oversampled well past Nyquist."""
    n_components = draw(st.integers(1, 4))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    t = np.arange(2000) / FS
    out = np.zeros_like(t)
    for _ in range(n_components):
        amp = rng.uniform(0.1, 1.0)
        freq = rng.uniform(0.5, 40.0)
        out += amp * np.cos(2.0 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
    return out


@given(band_limited_signal(), st.floats(0.02, 0.5))
@settings(max_examples=25, deadline=None)
def test_antisymmetry(wave, delta):
    cfg = EncoderConfig(delta=delta)
    a = encode(SampledSignal(FS, wave), cfg)
    b = encode(SampledSignal(FS, -wave), cfg)
    assert np.array_equal(a.t_ticks, b.t_ticks)
    assert np.array_equal(a.polarity, -b.polarity)


@given(band_limited_signal(), st.sampled_from([0.25, 0.5, 2.0, 8.0]))
@settings(max_examples=25, deadline=None)
def test_scale_invariance(wave, alpha):
    # power-of-two scales are exact in binary floating point
    base = encode(SampledSignal(FS, wave), EncoderConfig(delta=0.1))
    scaled = encode(SampledSignal(FS, alpha * wave), EncoderConfig(delta=alpha * 0.1))
    assert np.array_equal(base.t_ticks, scaled.t_ticks)
    assert np.array_equal(base.polarity, scaled.polarity)


@given(band_limited_signal())
@settings(max_examples=25, deadline=None)
def test_count_monotone_in_delta(wave):
    counts = [
        encode(SampledSignal(FS, wave), EncoderConfig(delta=d)).count
        for d in (0.05, 0.1, 0.2, 0.4)
    ]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@given(band_limited_signal(), st.floats(0.05, 0.3))
@settings(max_examples=25, deadline=None)
def test_tracking_bound_interpolated(wave, delta):
    # the bound presumes adequate oversampling: one event per sample can
    # only track slews up to delta per sample, so scale into that regime
    max_inc = np.max(np.abs(np.diff(wave)))
    if max_inc > delta / 2:
        wave = wave * (delta / 2 / max_inc)
    cfg = EncoderConfig(delta=delta, mode=EncoderMode.INTERPOLATED_CROSSING)
    stream = encode(SampledSignal(FS, wave), cfg)
    recon = reconstruct(stream, delta=delta, v0=wave[0], sample_rate=FS)
    n = min(len(wave), len(recon.samples))
    bound = delta + np.max(np.abs(np.diff(wave))) + 1e-12
    assert np.max(np.abs(wave[:n] - recon.samples[:n])) <= bound
