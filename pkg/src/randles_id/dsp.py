"""Fundamental extraction from pulsed-current records.

Both channels run through the same band-pass chain,

    G(s) = k w0 s / (s^2 + k w0 s + w0^2),

discretised with a bilinear map prewarped at w0 so the digital filter keeps
unity gain and zero phase exactly at the pulse frequency. Amplitude and
phase of the filtered steady state come from quadrature demodulation over
whole cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .ecm_model import ImpedancePoint
from .errors import (
    ConfigurationError,
    ContractError,
    InsufficientDataError,
    LowSignalError,
    ValidationError,
    ZeroMagnitudeError,
)

MIN_SAMPLES_PER_CYCLE = 20
MIN_MEASURED_CYCLES = 3
SETTLE_TIME_CONSTANTS = 3.0 * math.pi
DEFAULT_NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled current/voltage record; time origin at sample 0."""

    sample_rate_hz: float
    current: np.ndarray
    voltage: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise ValidationError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz!r}")
        i = np.asarray(self.current, dtype=float)
        v = np.asarray(self.voltage, dtype=float)
        if i.ndim != 1 or i.shape != v.shape:
            raise ValidationError(f"current/voltage must be 1-D and equal length, got {i.shape} and {v.shape}")
        object.__setattr__(self, "current", i)
        object.__setattr__(self, "voltage", v)

    def __len__(self) -> int:
        return self.current.size

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate_hz


@dataclass(frozen=True)
class BpfConfig:
    f0_hz: float
    k: float = 1.0
    cascade_order: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.f0_hz) and self.f0_hz > 0):
            raise ConfigurationError(f"f0_hz must be > 0, got {self.f0_hz!r}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ConfigurationError(f"k must be > 0, got {self.k!r}")
        if self.cascade_order not in (1, 2):
            raise ConfigurationError(f"cascade_order must be 1 or 2, got {self.cascade_order!r}")

    @property
    def settle_s(self) -> float:
        """Samples before this time carry the filter's start-up transient.

        Per stage: 3 / (k f0) for k <= 2, i.e. 3*pi time constants of the
        envelope decay rate k*w0/2. Above k = 2 the poles split and the slow
        one sets the pace.
        """
        w0 = 2.0 * math.pi * self.f0_hz
        sigma = w0 * (self.k - math.sqrt(max(self.k * self.k - 4.0, 0.0))) / 2.0
        return self.cascade_order * SETTLE_TIME_CONSTANTS / sigma


@dataclass(frozen=True)
class Phasor:
    amplitude: float
    phase_rad: float
    freq_hz: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValidationError(f"amplitude must be >= 0, got {self.amplitude!r}")


def wrap_phase(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def bpf_prototype_response(k: float, f0_hz: float, f_hz) -> np.ndarray:
    """Continuous-time G(j w) of one stage."""
    s = 2j * np.pi * np.asarray(f_hz, dtype=float)
    w0 = 2.0 * np.pi * f0_hz
    return k * w0 * s / (s * s + k * w0 * s + w0 * w0)


def design_bpf(config: BpfConfig, sample_rate_hz: float) -> np.ndarray:
    """Second-order sections (scipy ``sos`` layout), one row per cascade stage."""
    if sample_rate_hz < MIN_SAMPLES_PER_CYCLE * config.f0_hz:
        raise ConfigurationError(
            f"sample rate {sample_rate_hz:g} Hz is below {MIN_SAMPLES_PER_CYCLE} x f0 = "
            f"{MIN_SAMPLES_PER_CYCLE * config.f0_hz:g} Hz"
        )
    w0 = 2.0 * math.pi * config.f0_hz
    # s -> c (z - 1) / (z + 1), with c chosen so that w0 maps onto itself
    c = w0 / math.tan(w0 / (2.0 * sample_rate_hz))
    kw = config.k * w0 * c
    a0 = c * c + kw + w0 * w0
    a1 = 2.0 * (w0 * w0 - c * c)
    a2 = c * c - kw + w0 * w0
    stage = np.array([kw / a0, 0.0, -kw / a0, 1.0, a1 / a0, a2 / a0])
    return np.tile(stage, (config.cascade_order, 1))


def bpf_response(sos: np.ndarray, f_hz, sample_rate_hz: float) -> np.ndarray:
    """Digital frequency response of a section cascade at the given frequencies."""
    zinv = np.exp(-2j * np.pi * np.asarray(f_hz, dtype=float) / sample_rate_hz)
    h = np.ones_like(zinv)
    for b0, b1, b2, _, a1, a2 in sos:
        h = h * (b0 + b1 * zinv + b2 * zinv**2) / (1.0 + a1 * zinv + a2 * zinv**2)
    return h


def _filter_channel(sos: np.ndarray, x: np.ndarray) -> np.ndarray:
    # start from the DC steady state of the first sample so a large offset
    # (OCV, bias current) does not ring through the band-pass
    zi = signal.sosfilt_zi(sos) * x[0]
    y, _ = signal.sosfilt(sos, x, zi=zi)
    return y


def min_record_s(config: BpfConfig) -> float:
    return config.settle_s + MIN_MEASURED_CYCLES / config.f0_hz


def filter_fundamental(ts: TimeSeries, config: BpfConfig) -> TimeSeries:
    """Band-pass both channels through an identical filter chain."""
    sos = design_bpf(config, ts.sample_rate_hz)
    need = min_record_s(config)
    # one sample of slack for records cut at exact period boundaries
    if ts.duration_s + 1.0 / ts.sample_rate_hz < need:
        raise InsufficientDataError(
            f"record is {ts.duration_s:g} s; need {need:g} s "
            f"({config.settle_s:g} s settling + {MIN_MEASURED_CYCLES} cycles at {config.f0_hz:g} Hz)"
        )
    return TimeSeries(ts.sample_rate_hz, _filter_channel(sos, ts.current), _filter_channel(sos, ts.voltage))


def extract_phasor(
    x, f0_hz: float, sample_rate_hz: float, noise_floor: float = DEFAULT_NOISE_FLOOR
) -> Phasor:
    """Amplitude and phase of the f0 component, sine reference at sample 0.

    ``x`` should already be steady state. Only the largest whole number of
    cycles is used so harmonics integrate to zero.
    """
    x = np.asarray(x, dtype=float)
    per_cycle = sample_rate_hz / f0_hz
    n_cycles = int(math.floor(x.size / per_cycle + 1e-9))
    if n_cycles < 1:
        raise InsufficientDataError(f"{x.size} samples do not span one cycle at {f0_hz:g} Hz")
    n = int(round(n_cycles * per_cycle))
    n = min(n, x.size)
    theta = 2.0 * np.pi * f0_hz * np.arange(n) / sample_rate_hz
    in_phase = 2.0 / n * np.dot(x[:n], np.sin(theta))
    quad = 2.0 / n * np.dot(x[:n], np.cos(theta))
    amplitude = math.hypot(in_phase, quad)
    if not amplitude > noise_floor:
        raise LowSignalError(f"fundamental amplitude {amplitude:.3g} is at or below the noise floor {noise_floor:.3g}")
    return Phasor(amplitude, wrap_phase(math.atan2(quad, in_phase)), f0_hz)


def impedance_from_phasors(v: Phasor, i: Phasor) -> ImpedancePoint:
    if not math.isclose(v.freq_hz, i.freq_hz, rel_tol=1e-9):
        raise ContractError(f"phasor frequencies differ: {v.freq_hz:g} Hz vs {i.freq_hz:g} Hz")
    if i.amplitude == 0:
        raise ZeroMagnitudeError("current amplitude is zero")
    mag = v.amplitude / i.amplitude
    phase = wrap_phase(v.phase_rad - i.phase_rad)
    return ImpedancePoint(v.freq_hz, complex(mag * math.cos(phase), mag * math.sin(phase)))


def lissajous_phase(v_pu, i_pu) -> float:
    """Phase magnitude from the per-unit V-I ellipse.

    Where the current crosses zero the voltage sits at +-sin(phi); the
    crossings are located by linear interpolation and averaged. The ellipse
    cannot tell lead from lag, so the result is in [0, pi/2].
    """
    v = np.asarray(v_pu, dtype=float)
    i = np.asarray(i_pu, dtype=float)
    if v.shape != i.shape or v.ndim != 1:
        raise ContractError("channels must be 1-D and equal length")
    if not (np.ptp(v) > 0 and np.ptp(i) > 0):
        raise LowSignalError("a channel has zero amplitude")
    idx = np.flatnonzero(np.signbit(i[:-1]) != np.signbit(i[1:]))
    if idx.size == 0:
        raise InsufficientDataError("current never crosses zero")
    frac = i[idx] / (i[idx] - i[idx + 1])
    intercepts = np.abs(v[idx] + frac * (v[idx + 1] - v[idx]))
    return math.asin(min(float(np.mean(intercepts)), 1.0))


def measure_impedance(ts: TimeSeries, config: BpfConfig, noise_floor: float = DEFAULT_NOISE_FLOOR) -> ImpedancePoint:
    """Filter, drop the settling span, demodulate both channels, divide."""
    filtered = filter_fundamental(ts, config)
    start = int(math.ceil(config.settle_s * ts.sample_rate_hz))
    i_ph = extract_phasor(filtered.current[start:], config.f0_hz, ts.sample_rate_hz, noise_floor)
    v_ph = extract_phasor(filtered.voltage[start:], config.f0_hz, ts.sample_rate_hz, noise_floor)
    return impedance_from_phasors(v_ph, i_ph)
