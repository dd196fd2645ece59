import numpy as np
import pytest

from neuroradar.encoder import (
    Encoder,
    EncoderConfig,
    EncoderMode,
    EventStream,
    encode,
    event_stats,
    reconstruct,
)
from neuroradar.errors import ConfigError, ContractError, EncodingError, ValidationError
from neuroradar.gestures import (
    GestureClass,
    GestureParams,
    RadarConfig,
    SampledSignal,
    gesture_trajectory,
    synthesize_if,
)

FS = 8192.0


def sig(samples, rate=FS):
    return SampledSignal(sample_rate=rate, samples=np.asarray(samples, dtype=np.float64))


def brute_force_count(values, delta):
    """Independent scan oracle: naive reference tracker, no timestamps."""
    ref = values[0]
    count = pos = 0
    for v in values[1:]:
        if v >= ref + delta:
            count += 1
            pos += 1
            ref = v
        elif v <= ref - delta:
            count += 1
            ref = v
    return count, pos


class TestEncode:
    def test_constant_signal_no_events(self):
        stream = encode(sig(np.full(8192, 0.7)), EncoderConfig(delta=0.05))
        assert stream.count == 0
        assert stream.duration_ticks == round(125e6)

    def test_ramp_events(self):
        ramp = np.linspace(0.0, 1.0, 8192)
        stream = encode(sig(ramp), EncoderConfig(delta=0.1))
        assert 9 <= stream.count <= 11
        assert np.all(stream.polarity == 1)
        # approximately uniform spacing
        gaps = np.diff(stream.t_ticks.astype(np.int64))
        assert gaps.max() < 1.5 * gaps.min()

    def test_sine_event_count_matches_oracle(self):
        # total variation 4A per period puts the ideal count at 4A/delta
        # = 40; each of the four extrema forfeits up to one threshold of
        # unfired travel, so the brute-force oracle is the authority
        t = np.arange(8192) / FS
        wave = np.sin(2.0 * np.pi * 1.0 * t)
        stream = encode(sig(wave), EncoderConfig(delta=0.1))
        t10 = np.arange(81920) / (10 * FS)
        count10, pos10 = brute_force_count(np.sin(2.0 * np.pi * t10), 0.1)
        assert abs(stream.count - count10) <= 2
        assert 40 - 6 <= stream.count <= 40 + 2
        pos = int(np.sum(stream.polarity == 1))
        neg = stream.count - pos
        assert abs(pos - pos10) <= 2
        assert abs(pos - neg) <= 2  # one period is nearly balanced

    def test_antisymmetry(self):
        rng = np.random.default_rng(0)
        wave = np.cumsum(rng.normal(0, 0.02, 4096))
        a = encode(sig(wave), EncoderConfig(delta=0.1))
        b = encode(sig(-wave), EncoderConfig(delta=0.1))
        assert np.array_equal(a.t_ticks, b.t_ticks)
        assert np.array_equal(a.polarity, -b.polarity)

    def test_one_event_per_sample_on_jump(self):
        # a > 2*delta jump emits a single event and the reference follows
        values = np.array([0.0, 1.0, 1.0, 1.0])
        stream = encode(sig(values, rate=1000.0), EncoderConfig(delta=0.1))
        assert stream.count == 1
        assert stream.polarity[0] == 1

    def test_interpolated_crossing_timestamps(self):
        # the 0.25 -> 0.75 sample interval crosses the 0.5 level exactly
        # halfway through, so the event lands at 1.5 ms
        values = np.array([0.0, 0.25, 0.75, 0.9])
        cfg = EncoderConfig(delta=0.5, mode=EncoderMode.INTERPOLATED_CROSSING)
        stream = encode(sig(values, rate=1000.0), cfg)
        assert stream.count == 1
        assert stream.t_ticks[0] == round(1.5e-3 * 125e6)

    def test_non_finite_sample_error(self):
        values = np.array([0.0, 0.1, np.nan, 0.2])
        with pytest.raises(EncodingError) as err:
            encode(sig(values, rate=1000.0))
        assert err.value.index == 2
        assert "2" in str(err.value)

    def test_empty_signal_error(self):
        with pytest.raises(ValidationError):
            encode(sig(np.empty(0)))

    def test_tick_rate_precondition(self):
        with pytest.raises(ConfigError):
            encode(sig(np.zeros(10), rate=8192.0), EncoderConfig(tick_rate=10000.0))

    def test_streaming_matches_batch(self):
        rng = np.random.default_rng(1)
        wave = np.cumsum(rng.normal(0, 0.05, 6000))
        cfg = EncoderConfig(delta=0.2)
        batch = encode(sig(wave), cfg)
        enc = Encoder(cfg, FS)
        ts, ps = [], []
        for start in range(0, 6000, 701):
            t, p = enc.push(wave[start : start + 701])
            ts.extend(t.tolist())
            ps.extend(p.tolist())
        assert ts == batch.t_ticks.tolist()
        assert ps == batch.polarity.tolist()


class TestReconstruct:
    def test_empty_stream_constant(self):
        stream = EventStream(125e6, np.empty(0, np.uint64), np.empty(0, np.int8), round(125e6))
        out = reconstruct(stream, delta=0.1, v0=0.3, sample_rate=100.0)
        assert np.all(out.samples == 0.3)
        assert len(out.samples) == 100

    def test_single_step(self):
        t = np.array([round(0.5 * 125e6)], dtype=np.uint64)
        p = np.array([1], dtype=np.int8)
        stream = EventStream(125e6, t, p, round(125e6))
        out = reconstruct(stream, delta=0.1, v0=0.0, sample_rate=1000.0)
        assert np.all(out.samples[:500] == 0.0)
        assert np.all(out.samples[500:] == pytest.approx(0.1))

    def test_tracking_bound_interpolated(self):
        # 5 Hz sine, amplitude 0.5, delta 0.05: sup error bounded by
        # delta + max per-sample increment in interpolated mode
        t = np.arange(8192) / FS
        wave = 0.5 * np.sin(2.0 * np.pi * 5.0 * t)
        cfg = EncoderConfig(delta=0.05, mode=EncoderMode.INTERPOLATED_CROSSING)
        stream = encode(sig(wave), cfg)
        recon = reconstruct(stream, delta=0.05, v0=wave[0], sample_rate=FS)
        n = min(len(recon.samples), len(wave))
        max_inc = np.max(np.abs(np.diff(wave)))
        sup = np.max(np.abs(wave[:n] - recon.samples[:n]))
        assert sup <= 0.05 + max_inc + 1e-12

    def test_unsorted_stream_rejected(self):
        t = np.array([100, 50], dtype=np.uint64)
        p = np.array([1, -1], dtype=np.int8)
        stream = EventStream(125e6, t, p, 1000)
        with pytest.raises(ContractError):
            reconstruct(stream, delta=0.1, v0=0.0, sample_rate=100.0)


class TestStats:
    def test_empty(self):
        stream = EventStream(125e6, np.empty(0, np.uint64), np.empty(0, np.int8), round(125e6))
        stats = event_stats(stream)
        assert stats["count"] == 0
        assert stats["mean_rate_hz"] == 0.0

    def test_rate_arithmetic(self):
        t = (np.arange(40, dtype=np.uint64) + 1) * 3_000_000
        p = np.ones(40, dtype=np.int8)
        stream = EventStream(125e6, t, p, round(125e6))
        assert event_stats(stream)["mean_rate_hz"] == pytest.approx(40.0)

    def test_monotone_input_single_polarity(self):
        stream = encode(sig(np.linspace(0, 1, 8192)), EncoderConfig(delta=0.1))
        stats = event_stats(stream)
        assert stats["pos_count"] == stats["count"]
        assert stats["neg_count"] == 0


class TestInvariants:
    def test_joint_scale_invariance(self):
        rng = np.random.default_rng(2)
        wave = np.cumsum(rng.normal(0, 0.03, 3000))
        base = encode(sig(wave), EncoderConfig(delta=0.15))
        for alpha in (0.5, 2.0, 4.0, 0.125, 3.7):
            scaled = encode(sig(alpha * wave), EncoderConfig(delta=alpha * 0.15))
            assert np.array_equal(base.t_ticks, scaled.t_ticks)
            assert np.array_equal(base.polarity, scaled.polarity)

    def test_time_shift_equivariance(self):
        # exact when tick_rate is an integer multiple of the sample rate
        rate = 8000.0
        ticks_per_sample = round(125e6 / rate)
        rng = np.random.default_rng(3)
        wave = np.cumsum(rng.normal(0, 0.03, 2000))
        cfg = EncoderConfig(delta=0.15)
        base = encode(sig(wave, rate=rate), cfg)
        for k in (1, 7, 250):
            delayed = np.concatenate([np.full(k, wave[0]), wave])
            shifted = encode(sig(delayed, rate=rate), cfg)
            assert np.array_equal(
                base.t_ticks.astype(np.int64) + k * ticks_per_sample,
                shifted.t_ticks.astype(np.int64),
            )
            assert np.array_equal(base.polarity, shifted.polarity)

    def test_sparsity_monotone_in_delta(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            wave = np.cumsum(rng.normal(0, 0.05, 4000))
            counts = [
                encode(sig(wave), EncoderConfig(delta=d)).count
                for d in (0.05, 0.1, 0.2, 0.4, 0.8)
            ]
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_idle_silence(self):
        # NoActivity at 20 dB emits <5% of PushPull's events (20 seeds)
        cfg = RadarConfig()
        idle_total = active_total = 0
        for seed in range(20):
            idle = gesture_trajectory(
                GestureClass.NO_ACTIVITY,
                GestureParams(r0=0.45, amplitude=0.0, freq=0.0, duration=1.5),
                seed=seed,
            )
            active = gesture_trajectory(
                GestureClass.PUSH_PULL,
                GestureParams(r0=0.45, amplitude=0.15, freq=1.4, duration=1.5),
                seed=seed,
            )
            idle_total += encode(synthesize_if(idle, cfg, 20.0, seed)).count
            active_total += encode(synthesize_if(active, cfg, 20.0, seed)).count
        assert idle_total < 0.05 * active_total
