"""Live demo session host: pointer/replay ingest, streaming pipeline,
label debouncing, and the gesture-to-media-control mapping.

A session speaks line-delimited text frames:

    client -> server:  HELLO <ver> | MODE pointer|replay
                       PTR <t_ms> <x> <y> | REPLAY <class_id> <seed> | BYE
    server -> client:  READY <id> | EVTB <n> <t1> <p1> ... <tn> <pn>
                       LBL <t_ms> <class_id> <conf>
                       CTL PLAYPAUSE | CTL SEEK +10 | CTL SEEK -10
                       CTL VOL <v> | CTL MUTE 0|1
                       WARN <code> <text> | ERR <code> <text>

All methods take explicit times (milliseconds), so sessions are fully
deterministic under test; the network server drives them from the wall
clock. The classifier runs only for gate-open windows; idle ticks cost
no inference (the invocation counter makes that testable).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .encoder import Encoder, EncoderConfig
from .errors import ContractError
from .gestures import (
    GestureClass,
    RadarConfig,
    Trajectory,
    default_params,
    gesture_trajectory,
    if_samples,
)
from .model import QuantModel, forward
from .pipeline import GateConfig, activity_gate, featurize, window_at

POINTER_RATE = 200.0  # Hz, pointer resample grid
POINTER_LPF_HZ = 5.0  # single-pole low-pass cutoff


@dataclass(frozen=True)
class PlayerState:
    playing: bool = False
    volume: int = 50  # 0..100 step 25
    muted: bool = False
    position: float = 0.0  # seconds

    def validate(self) -> None:
        if self.volume not in (0, 25, 50, 75, 100):
            raise ContractError(f"volume {self.volume} not a 25-step level")
        if self.position < 0:
            raise ContractError("position must be >= 0")


def apply_gesture(state: PlayerState, gesture: GestureClass) -> tuple[PlayerState, str]:
    """One control-table step; pure. NO_ACTIVITY never reaches here."""
    if gesture == GestureClass.PUSH_PULL:
        return replace(state, playing=not state.playing), "CTL PLAYPAUSE"
    if gesture == GestureClass.SLOW_WAVE:
        return replace(state, position=max(0.0, state.position - 10.0)), "CTL SEEK -10"
    if gesture == GestureClass.FAST_WAVE:
        return replace(state, position=state.position + 10.0), "CTL SEEK +10"
    if gesture == GestureClass.UP_DOWN:
        vol = (state.volume + 25) % 125  # 100 wraps to 0
        return replace(state, volume=vol), f"CTL VOL {vol}"
    raise ContractError(f"{gesture.name} has no control mapping")


@dataclass(frozen=True)
class ServiceConfig:
    tick_ms: int = 250
    window_s: float = 1.5
    gate: GateConfig = GateConfig()
    debounce_k: int = 3
    cooldown_s: float = 1.0
    idle_mute_s: float = 30.0
    radar: RadarConfig = RadarConfig()
    encoder: EncoderConfig = EncoderConfig()
    snr_db: float = 20.0
    n_bins: int = 32
    max_pending_pointer: int = 1024
    replay_lead_in_s: float = 0.5
    replay_tail_s: float = 0.5
    #: classify only once the current activity stretch is this old;
    #: younger windows are fragments the classifier was not trained on
    min_activity_s: float = 1.0


class Debouncer:
    """Fires a label after k consecutive identical non-idle labels,
    at most once per run, honoring a cooldown between fires."""

    def __init__(self, k: int, cooldown_ms: float):
        self.k = k
        self.cooldown_ms = cooldown_ms
        self.run_label: GestureClass | None = None
        self.run_len = 0
        self.fired_this_run = False
        self.last_fire_ms = -math.inf

    def update(self, label: GestureClass, now_ms: float) -> GestureClass | None:
        if label == self.run_label:
            self.run_len += 1
        else:
            self.run_label = label
            self.run_len = 1
            self.fired_this_run = False
        if (
            label != GestureClass.NO_ACTIVITY
            and self.run_len >= self.k
            and not self.fired_this_run
            and now_ms - self.last_fire_ms >= self.cooldown_ms
        ):
            self.fired_this_run = True
            self.last_fire_ms = now_ms
            return label
        return None


def pointer_to_range(x: float, y: float) -> float:
    """Map normalized pointer coordinates to effective radial range.

    Vertical axis is range (top = far, 0.8 m, bottom = near, 0.2 m);
    horizontal is a +-0.3 m lateral offset folded in by projection.
    """
    r = 0.8 - 0.6 * y
    x_m = 0.6 * (x - 0.5)
    return math.sqrt(r * r + x_m * x_m)


class UartMirror:
    """Serial-style label sink: one byte 0x00-0x04 per label + newline."""

    def __init__(self, sink):
        self._sink = sink

    def emit(self, label: GestureClass) -> None:
        self._sink.write(bytes((int(label), 0x0A)))


class GestureSession:
    """One demo session: protocol handling plus the streaming pipeline.

    Sessions share nothing mutable; times come from the caller, so a
    test can run a session on a purely logical clock.
    """

    def __init__(
        self,
        session_id: str,
        model: QuantModel | None,
        cfg: ServiceConfig = ServiceConfig(),
        uart: UartMirror | None = None,
    ):
        self.id = session_id
        self.cfg = cfg
        self.model = model
        self._dequantized = model.dequantize() if model is not None else None
        self.uart = uart
        self.mode: str | None = None
        self.greeted = False
        self.closed = False
        self.player = PlayerState()
        self.debouncer = Debouncer(cfg.debounce_k, cfg.cooldown_s * 1000.0)

        sim_rate = cfg.radar.sim_rate
        self.encoder = Encoder(cfg.encoder, sim_rate)
        self.event_t: list[int] = []
        self.event_p: list[int] = []

        # pointer-mode state
        self.pending_ptr: deque[tuple[float, float]] = deque(maxlen=cfg.max_pending_pointer)
        self.dropped_frames = 0
        self.clamped_frames = 0
        self._ptr_pts: list[tuple[float, float]] = []  # (t_s, r_eff), monotone
        self._ptr_t0: float | None = None  # client ms of first pointer sample
        self._last_ptr_ms: float | None = None
        self._grid_idx = 0  # next 200 Hz sample index
        self._lpf_y: float | None = None
        self._r200: list[float] = []  # low-passed 200 Hz range history tail
        self._r200_t0_idx = 0  # grid index of _r200[0]
        self._synth_idx = 0  # next sim-rate sample index
        self._phi0: float | None = None
        self._rng: np.random.Generator | None = None

        # replay-mode state
        self._replay_buf = np.empty(0, dtype=np.float64)
        self._replay_pos = 0
        self.replay_onset_ms: float | None = None

        # bookkeeping
        self.classifier_calls = 0
        self.labels_emitted = 0
        self._last_active_ms: float | None = None
        self._opened_ms: float | None = None
        self._signal_t0_ms: float | None = None  # wall time of signal t=0
        self._activity_start_tick: int | None = None

    # -- frame handling ----------------------------------------------------

    def handle_frame(self, line: str, now_ms: float) -> list[str]:
        """Process one inbound frame; never silent on malformed input."""
        if self._opened_ms is None:
            self._opened_ms = now_ms
            self._last_active_ms = now_ms
        parts = line.strip().split()
        if not parts:
            return ["ERR BAD_FRAME empty frame"]
        verb = parts[0]
        try:
            if verb == "HELLO":
                if self.greeted:
                    return ["ERR PROTO already greeted"]
                self.greeted = True
                return [f"READY {self.id}"]
            if verb == "MODE":
                if not self.greeted:
                    return ["ERR PROTO HELLO first"]
                if len(parts) != 2 or parts[1] not in ("pointer", "replay"):
                    return [f"ERR BAD_MODE unknown mode {' '.join(parts[1:2]) or '?'}"]
                self.mode = parts[1]
                return []
            if verb == "PTR":
                return self._handle_ptr(parts, now_ms)
            if verb == "REPLAY":
                return self._handle_replay(parts, now_ms)
            if verb == "BYE":
                self.closed = True
                return []
            return [f"ERR BAD_FRAME unknown verb {verb}"]
        except Exception as exc:  # contract: session survives bad frames
            return [f"ERR INTERNAL {type(exc).__name__}: {exc}"]

    def _handle_ptr(self, parts: list[str], now_ms: float) -> list[str]:
        if self.mode != "pointer":
            return ["ERR PROTO not in pointer mode"]
        if len(parts) != 4:
            return ["ERR BAD_FRAME PTR wants t_ms x y"]
        try:
            t_ms, x, y = float(parts[1]), float(parts[2]), float(parts[3])
        except ValueError:
            return ["ERR BAD_FRAME PTR fields must be numeric"]
        if not all(map(math.isfinite, (t_ms, x, y))):
            return ["ERR BAD_FRAME PTR fields must be finite"]
        if self._last_ptr_ms is not None and t_ms <= self._last_ptr_ms:
            self.dropped_frames += 1
            return []
        self._last_ptr_ms = t_ms
        out = []
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            x, y = min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0)
            self.clamped_frames += 1
            out.append("WARN CLAMP coordinates clamped to [0,1]")
        if self._ptr_t0 is None:
            self._ptr_t0 = t_ms
            self._signal_t0_ms = now_ms
            self._ensure_synth_seeds(hash_salt=0)
        if len(self.pending_ptr) == self.pending_ptr.maxlen:
            self.dropped_frames += 1
        self.pending_ptr.append(((t_ms - self._ptr_t0) / 1000.0, pointer_to_range(x, y)))
        return out

    def _handle_replay(self, parts: list[str], now_ms: float) -> list[str]:
        if self.mode != "replay":
            return ["ERR PROTO not in replay mode"]
        if len(parts) != 3:
            return ["ERR BAD_FRAME REPLAY wants class_id seed"]
        try:
            class_id, seed = int(parts[1]), int(parts[2])
            gesture = GestureClass(class_id)
        except ValueError:
            return ["ERR BAD_FRAME REPLAY class_id in 0..4, integer seed"]
        cfg = self.cfg
        rng = np.random.default_rng([seed, class_id, 0xD0])
        params = default_params(gesture, rng)
        traj = gesture_trajectory(gesture, params, seed)
        lead = np.full(round(cfg.replay_lead_in_s * traj.sample_rate), float(traj.r[0]))
        tail = np.full(round(cfg.replay_tail_s * traj.sample_rate), float(traj.r[-1]))
        r_ext = np.concatenate([lead, traj.r, tail])
        t_in = np.arange(len(r_ext)) / traj.sample_rate
        n_out = round(len(r_ext) / traj.sample_rate * cfg.radar.sim_rate)
        r_sim = np.interp(np.arange(n_out) / cfg.radar.sim_rate, t_in, r_ext)
        self._ensure_synth_seeds(hash_salt=seed)
        chunk = if_samples(r_sim, cfg.radar, self._phi0, cfg.snr_db, self._rng)
        if self._signal_t0_ms is None:
            self._signal_t0_ms = now_ms
        buffered_s = (len(self._replay_buf) - self._replay_pos) / cfg.radar.sim_rate
        self.replay_onset_ms = now_ms + (buffered_s + cfg.replay_lead_in_s) * 1000.0
        self._replay_buf = np.concatenate([self._replay_buf[self._replay_pos :], chunk])
        self._replay_pos = 0
        return []

    def _ensure_synth_seeds(self, hash_salt: int) -> None:
        if self._phi0 is None:
            self._rng = np.random.default_rng([hash_salt & 0x7FFFFFFF, 0x5E55])
            self._phi0 = float(self._rng.uniform(0.0, 2.0 * np.pi))

    # -- pipeline ----------------------------------------------------------

    def tick(self, now_ms: float) -> list[str]:
        """Advance the pipeline one step; emits EVTB/LBL/CTL frames."""
        if self._opened_ms is None:
            self._opened_ms = now_ms
            self._last_active_ms = now_ms
        frames: list[str] = []
        try:
            # drains append to the rolling window buffer themselves and
            # return what was newly emitted, for the EVTB frame
            if self.mode == "pointer":
                new_t, new_p = self._drain_pointer()
            elif self.mode == "replay":
                new_t, new_p = self._drain_replay()
            else:
                new_t, new_p = [], []
            if new_t:
                parts = []
                for t, p in zip(new_t, new_p):
                    parts.append(str(t))
                    parts.append(str(p))
                frames.append(f"EVTB {len(new_t)} " + " ".join(parts))
            frames.extend(self._label_and_control(now_ms))
        except Exception as exc:
            frames.append(f"ERR PIPELINE {type(exc).__name__}: {exc}")
        return frames

    def _drain_pointer(self) -> tuple[list[int], list[int]]:
        while self.pending_ptr:
            t_s, r = self.pending_ptr.popleft()
            if self._ptr_pts and t_s <= self._ptr_pts[-1][0]:
                continue
            self._ptr_pts.append((t_s, r))
        if len(self._ptr_pts) < 2:
            return [], []

        # pointer points -> 200 Hz grid -> single-pole low-pass
        alpha = 1.0 - math.exp(-2.0 * math.pi * POINTER_LPF_HZ / POINTER_RATE)
        latest = self._ptr_pts[-1][0]
        ts = [p[0] for p in self._ptr_pts]
        rs = [p[1] for p in self._ptr_pts]
        new200: list[float] = []
        while self._grid_idx / POINTER_RATE <= latest:
            t = self._grid_idx / POINTER_RATE
            r = float(np.interp(t, ts, rs))
            if self._lpf_y is None:
                self._lpf_y = r
            else:
                self._lpf_y += alpha * (r - self._lpf_y)
            new200.append(self._lpf_y)
            self._grid_idx += 1
        if new200:
            self._r200.extend(new200)

        # 200 Hz -> sim rate, then IF synthesis and encoding
        sim_rate = self.cfg.radar.sim_rate
        have_until = (self._grid_idx - 1) / POINTER_RATE if self._grid_idx else 0.0
        target_idx = int(math.floor(have_until * sim_rate))
        if target_idx < self._synth_idx or not self._r200:
            return [], []
        t200 = (self._r200_t0_idx + np.arange(len(self._r200))) / POINTER_RATE
        t_sim = np.arange(self._synth_idx, target_idx + 1) / sim_rate
        r_sim = np.interp(t_sim, t200, np.asarray(self._r200))
        self._synth_idx = target_idx + 1
        # keep a short LPF history tail for the next interpolation
        if len(self._r200) > 4:
            drop = len(self._r200) - 4
            self._r200 = self._r200[drop:]
            self._r200_t0_idx += drop
        if len(self._ptr_pts) > 2:
            self._ptr_pts = self._ptr_pts[-2:]
        chunk = if_samples(r_sim, self.cfg.radar, self._phi0, self.cfg.snr_db, self._rng)
        t_new, p_new = self.encoder.push(chunk)
        self.event_t.extend(t_new.tolist())
        self.event_p.extend(p_new.tolist())
        return t_new.tolist(), p_new.tolist()

    def _drain_replay(self) -> tuple[list[int], list[int]]:
        if self._signal_t0_ms is None:
            return [], []
        n = round(self.cfg.tick_ms / 1000.0 * self.cfg.radar.sim_rate)
        had_signal = self._replay_pos < len(self._replay_buf)
        chunk = self._replay_buf[self._replay_pos : self._replay_pos + n]
        self._replay_pos += len(chunk)
        if len(chunk) < n:
            # recording over: the virtual scene is empty, but the radar
            # keeps sampling so the signal clock stays on the wall clock
            chunk = np.concatenate([chunk, np.zeros(n - len(chunk))])
        t_new, p_new = self.encoder.push(chunk)
        if had_signal and self._replay_pos >= len(self._replay_buf):
            # flush the window at end of recording: stale fragments must
            # not keep feeding classifications
            self.event_t.clear()
            self.event_p.clear()
            self._activity_start_tick = None
        else:
            self.event_t.extend(t_new.tolist())
            self.event_p.extend(p_new.tolist())
        return t_new.tolist(), p_new.tolist()

    def _label_and_control(self, now_ms: float) -> list[str]:
        frames: list[str] = []
        tick_rate = self.cfg.encoder.tick_rate
        span = round(self.cfg.window_s * tick_rate)
        end = self.encoder.duration_ticks()
        if self._signal_t0_ms is not None:
            # the window keeps sliding on the session clock even when no
            # new samples arrive, so old events age out of it
            clock_end = round((now_ms - self._signal_t0_ms) / 1000.0 * tick_rate)
            end = max(end, clock_end)
        t0 = max(0, end - span)
        window = window_at(
            np.asarray(self.event_t, dtype=np.uint64),
            np.asarray(self.event_p, dtype=np.int8),
            t0,
            span,
        )
        gate_open = activity_gate(window, self.cfg.gate)
        if not gate_open:
            self._activity_start_tick = None
        elif self._activity_start_tick is None:
            self._activity_start_tick = t0 + int(window.t_ticks[0])
        mature = (
            gate_open
            and end - self._activity_start_tick
            >= round(self.cfg.min_activity_s * tick_rate)
        )
        if mature and self._dequantized is not None:
            vec = featurize(window, self.cfg.n_bins)
            self.classifier_calls += 1
            probs = forward(self._dequantized, vec)
            idx = int(np.argmax(probs))
            label, conf = GestureClass(idx), float(probs[idx])
        else:
            label, conf = GestureClass.NO_ACTIVITY, 1.0
        frames.append(f"LBL {round(now_ms)} {int(label)} {conf:.3f}")
        self.labels_emitted += 1
        if self.uart is not None:
            self.uart.emit(label)
        if label != GestureClass.NO_ACTIVITY:
            self._last_active_ms = now_ms

        fired = self.debouncer.update(label, now_ms)
        if fired is not None:
            if self.player.muted:
                self.player = replace(self.player, muted=False)
                frames.append("CTL MUTE 0")
            self.player, ctl = apply_gesture(self.player, fired)
            frames.append(ctl)
            self._last_active_ms = now_ms
        elif (
            not self.player.muted
            and self._last_active_ms is not None
            and now_ms - self._last_active_ms >= self.cfg.idle_mute_s * 1000.0
        ):
            self.player = replace(self.player, muted=True)
            frames.append("CTL MUTE 1")
        return frames
