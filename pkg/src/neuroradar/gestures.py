"""Hand-gesture kinematics and CW Doppler IF signal synthesis.

Replaces the RF front end: a gesture is a radial-distance trajectory
r(t), and the receiver's intermediate-frequency output is modeled as

    v(t) = A(r) * cos(4*pi*r(t)/lambda + phi0) + noise

with a two-way inverse-square amplitude law A(r) = amp_ref * (0.4/r)^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, ValidationError

SPEED_OF_LIGHT = 2.998e8  # m/s
REFERENCE_RANGE = 0.4  # m, range at which A(r) = amp_ref

#: Trajectories are generated at this rate and upsampled for IF synthesis.
TRAJECTORY_RATE = 512.0  # Hz

#: Hand must never get closer than this to the antenna.
MIN_RANGE = 0.05  # m


class GestureClass(enum.IntEnum):
    """The five recognized gesture classes. Codes are stable on the wire."""

    PUSH_PULL = 0
    SLOW_WAVE = 1
    FAST_WAVE = 2
    UP_DOWN = 3
    NO_ACTIVITY = 4


GESTURE_NAMES = {
    GestureClass.PUSH_PULL: "push-pull",
    GestureClass.SLOW_WAVE: "slow-wave",
    GestureClass.FAST_WAVE: "fast-wave",
    GestureClass.UP_DOWN: "up-down",
    GestureClass.NO_ACTIVITY: "no-activity",
}

GESTURE_BY_NAME = {name: cls for cls, name in GESTURE_NAMES.items()}

#: Classes whose motion is transverse to boresight (projected to range).
TRANSVERSE_CLASSES = frozenset(
    {GestureClass.SLOW_WAVE, GestureClass.FAST_WAVE, GestureClass.UP_DOWN}
)

#: Oscillation frequency draw ranges, Hz. The range envelope repeats at
#: 2f for radial and offset-lateral motion but 4f for the boresight-
#: crossing vertical wave, so these bands keep the observable envelope
#: rates distinct: slow [1.0-1.8], push-pull [2.4-3.2], up-down
#: [3.2-4.8], fast [5.2-7.0] bursts per second.
GESTURE_FREQ_BANDS = {
    GestureClass.PUSH_PULL: (1.2, 1.6),
    GestureClass.SLOW_WAVE: (0.5, 0.9),
    GestureClass.FAST_WAVE: (2.6, 3.5),
    GestureClass.UP_DOWN: (0.8, 1.2),
}

#: Motion amplitude draw ranges, m.
GESTURE_AMP_RANGES = {
    GestureClass.PUSH_PULL: (0.10, 0.20),
    GestureClass.SLOW_WAVE: (0.15, 0.30),
    GestureClass.FAST_WAVE: (0.15, 0.30),
    GestureClass.UP_DOWN: (0.15, 0.30),
}


@dataclass(frozen=True)
class GestureParams:
    """Kinematic parameters for one gesture instance."""

    r0: float = 0.45  # rest range, m
    amplitude: float = 0.15  # motion amplitude, m
    freq: float = 1.0  # oscillation frequency, Hz
    duration: float = 2.0  # s
    snr_db: float = 20.0
    lateral: bool = False  # motion transverse to boresight

    def validate(self) -> None:
        if not (0.2 <= self.r0 <= 0.8):
            raise ValidationError(f"r0 {self.r0} outside [0.2, 0.8] m")
        if not (0.0 <= self.amplitude <= 0.3):
            raise ValidationError(f"amplitude {self.amplitude} outside [0, 0.3] m")
        if not (0.0 <= self.freq <= 5.0):
            raise ValidationError(f"freq {self.freq} outside [0, 5] Hz")
        if not self.duration > 0:
            raise ValidationError(f"duration {self.duration} must be positive")
        if not math.isfinite(self.snr_db):
            # +inf means "no noise" and is allowed
            if self.snr_db != math.inf:
                raise ValidationError("snr_db must be finite or +inf")


@dataclass(frozen=True)
class RadarConfig:
    """Front-end constants for the simulated 24 GHz CW radar."""

    rf_freq: float = 24e9  # Hz
    sim_rate: float = 8192.0  # Hz, IF synthesis rate
    amp_ref: float = 1.0  # V at REFERENCE_RANGE

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.rf_freq


@dataclass
class Trajectory:
    """Radial distance over time for one gesture instance."""

    sample_rate: float
    r: np.ndarray
    label: GestureClass
    seed: int
    params: GestureParams

    @property
    def duration(self) -> float:
        return len(self.r) / self.sample_rate

    def validate(self) -> None:
        if not np.all(np.isfinite(self.r)):
            raise ValidationError("trajectory contains non-finite ranges")
        if np.min(self.r) <= MIN_RANGE:
            raise ValidationError(
                f"trajectory range {np.min(self.r):.4f} m at or below {MIN_RANGE} m"
            )


@dataclass
class SampledSignal:
    """Uniformly sampled IF voltage trace."""

    sample_rate: float
    samples: np.ndarray

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def doppler_frequency(v: float, rf_freq: float) -> float:
    """Doppler shift (Hz) of a target with radial speed ``v`` (m/s)."""
    return 2.0 * v * rf_freq / SPEED_OF_LIGHT


def _noactivity_jitter(
    n: int, sample_rate: float, rng: np.random.Generator, std_m: float = 5e-4
) -> np.ndarray:
    # Hand drift modeled as slow wander: Gaussian keypoints at 4 Hz,
    # linearly interpolated. Keeps the idle IF signal nearly static and
    # its phase wobble below the dense pipeline's clutter notch.
    key_rate = 4.0
    duration = n / sample_rate
    n_keys = int(duration * key_rate) + 2
    keys = rng.normal(0.0, std_m, n_keys)
    t_keys = np.arange(n_keys) / key_rate
    t = np.arange(n) / sample_rate
    return np.interp(t, t_keys, keys)


def gesture_trajectory(
    gesture: GestureClass,
    params: GestureParams,
    seed: int,
    sample_rate: float = TRAJECTORY_RATE,
) -> Trajectory:
    """Realize a gesture class as a radial-distance trajectory.

    Templates:
      PUSH_PULL    radial sinusoid  r = r0 + a*sin(2*pi*f*t + phase)
      SLOW_WAVE /
      FAST_WAVE    horizontal wave beside boresight: x = xc + a*sin(...),
                   xc in [1.1a, 1.5a] so x never crosses the axis, projected
                   r = sqrt(r0^2 + x^2); range then oscillates at f
      UP_DOWN      vertical wave through boresight: z = a*sin(...),
                   r = sqrt(r0^2 + z^2); the symmetric crossing doubles the
                   range oscillation to 2f
      NO_ACTIVITY  constant r0 plus sub-millimeter tremor

    Deterministic for fixed (gesture, params, seed).
    """
    params.validate()
    if gesture == GestureClass.NO_ACTIVITY and params.amplitude > 0.01:
        raise ValidationError("NO_ACTIVITY requires amplitude ~ 0")
    if gesture in TRANSVERSE_CLASSES and not params.lateral:
        raise ValidationError(f"{gesture.name} requires lateral=True")
    if gesture == GestureClass.PUSH_PULL:
        if params.lateral:
            raise ValidationError("PUSH_PULL requires lateral=False")
        if params.r0 - params.amplitude <= MIN_RANGE:
            raise ValidationError(
                f"radial motion reaches {params.r0 - params.amplitude:.3f} m, "
                f"below the {MIN_RANGE} m floor"
            )

    rng = np.random.default_rng([seed, int(gesture)])
    phase = rng.uniform(0.0, 2.0 * np.pi)
    n = round(params.duration * sample_rate)
    t = np.arange(n) / sample_rate
    a, f, r0 = params.amplitude, params.freq, params.r0

    if gesture == GestureClass.PUSH_PULL:
        r = r0 + a * np.sin(2.0 * np.pi * f * t + phase)
    elif gesture in (GestureClass.SLOW_WAVE, GestureClass.FAST_WAVE):
        offset = a * rng.uniform(1.1, 1.5)
        x = offset + a * np.sin(2.0 * np.pi * f * t + phase)
        r = np.sqrt(r0 * r0 + x * x)
    elif gesture == GestureClass.UP_DOWN:
        z = a * np.sin(2.0 * np.pi * f * t + phase)
        r = np.sqrt(r0 * r0 + z * z)
    else:  # NO_ACTIVITY
        r = r0 + _noactivity_jitter(n, sample_rate, rng)

    traj = Trajectory(sample_rate=sample_rate, r=r, label=gesture, seed=seed, params=params)
    traj.validate()
    return traj


def range_amplitude(r: np.ndarray | float, cfg: RadarConfig) -> np.ndarray | float:
    """Two-way inverse-square amplitude law, referenced to 0.4 m."""
    return cfg.amp_ref * (REFERENCE_RANGE / r) ** 2


def if_samples(
    r: np.ndarray,
    cfg: RadarConfig,
    phi0: float,
    snr_db: float,
    noise_rng: np.random.Generator | None,
) -> np.ndarray:
    """IF voltage for a range series already sampled at cfg.sim_rate.

    Shared by batch synthesis and the streaming demo service; the phase
    depends only on the instantaneous range, so chunked calls with a
    fixed phi0 are seamless.
    """
    clean = range_amplitude(r, cfg) * np.cos(4.0 * np.pi * r / cfg.wavelength + phi0)
    if snr_db == math.inf:
        return clean
    if noise_rng is None:
        raise ValidationError("finite snr_db requires a noise generator")
    p_sig = float(np.mean(clean * clean))
    noise_std = math.sqrt(p_sig / 10.0 ** (snr_db / 10.0))
    return clean + noise_rng.normal(0.0, noise_std, len(r))


def max_doppler(traj: Trajectory, cfg: RadarConfig) -> float:
    """Peak instantaneous Doppler magnitude (Hz) of a trajectory."""
    if len(traj.r) < 2:
        return 0.0
    v_max = float(np.max(np.abs(np.diff(traj.r)))) * traj.sample_rate
    return abs(doppler_frequency(v_max, cfg.rf_freq))


def synthesize_if(
    traj: Trajectory,
    cfg: RadarConfig,
    snr_db: float,
    seed: int,
) -> SampledSignal:
    """Synthesize the Doppler IF voltage a CW front end would output.

    The trajectory is linearly upsampled to cfg.sim_rate; the carrier
    phase offset phi0 is drawn uniformly from the seed; white Gaussian
    noise is added at the requested SNR (mean signal power over noise
    power). Pass snr_db=inf for a noiseless trace.
    """
    traj.validate()
    if cfg.sim_rate < traj.sample_rate:
        raise ValidationError(
            f"sim_rate {cfg.sim_rate} below trajectory rate {traj.sample_rate}"
        )
    f_d = max_doppler(traj, cfg)
    if f_d > cfg.sim_rate / 2.0:
        raise AliasingError(
            f"trajectory Doppler {f_d:.1f} Hz exceeds Nyquist {cfg.sim_rate / 2:.1f} Hz"
        )

    n_out = round(len(traj.r) / traj.sample_rate * cfg.sim_rate)
    t_out = np.arange(n_out) / cfg.sim_rate
    t_in = np.arange(len(traj.r)) / traj.sample_rate
    r = np.interp(t_out, t_in, traj.r)

    rng = np.random.default_rng([seed, 0x1F])
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    samples = if_samples(r, cfg, phi0, snr_db, rng)
    return SampledSignal(sample_rate=cfg.sim_rate, samples=samples)


def default_params(
    gesture: GestureClass, rng: np.random.Generator | None = None
) -> GestureParams:
    """Class-consistent parameters, randomized within the design ranges.

    Without a generator, returns the midpoint of each range.
    """

    def draw(lo: float, hi: float) -> float:
        if rng is None:
            return (lo + hi) / 2.0
        return float(rng.uniform(lo, hi))

    r0 = draw(0.40, 0.55)
    if gesture == GestureClass.NO_ACTIVITY:
        return GestureParams(r0=r0, amplitude=0.0, freq=0.0, lateral=False)
    f_lo, f_hi = GESTURE_FREQ_BANDS[gesture]
    a_lo, a_hi = GESTURE_AMP_RANGES[gesture]
    if gesture == GestureClass.PUSH_PULL:
        # keep the near point of the stroke off the antenna
        amp = draw(a_lo, min(a_hi, r0 - 0.25))
        return GestureParams(r0=r0, amplitude=amp, freq=draw(f_lo, f_hi), lateral=False)
    return GestureParams(
        r0=r0, amplitude=draw(a_lo, a_hi), freq=draw(f_lo, f_hi), lateral=True
    )
