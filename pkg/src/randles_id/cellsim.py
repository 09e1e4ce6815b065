"""Synthetic pulse tests on a Randles cell.

The voltage is the periodic steady-state response, built harmonic by
harmonic from the sampled excitation's DFT. That is exact for a linear
model under periodic drive and needs no state for the half-order Warburg
element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dsp import MIN_SAMPLES_PER_CYCLE, TimeSeries
from .ecm_model import EcmParams, randles_impedance
from .errors import ConfigurationError, ValidationError

MIN_HARMONICS = 10


@dataclass(frozen=True)
class PulseSpec:
    freq_hz: float
    amplitude_a: float
    duty: float = 0.5
    n_periods: int = 10
    dc_bias_a: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.freq_hz) and self.freq_hz > 0):
            raise ValidationError(f"freq_hz must be > 0, got {self.freq_hz!r}")
        if not (math.isfinite(self.amplitude_a) and self.amplitude_a > 0):
            raise ValidationError(f"amplitude_a must be > 0, got {self.amplitude_a!r}")
        if not 0 < self.duty < 1:
            raise ValidationError(f"duty must lie strictly between 0 and 1, got {self.duty!r}")
        if int(self.n_periods) != self.n_periods or self.n_periods < 3:
            raise ValidationError(f"n_periods must be an integer >= 3, got {self.n_periods!r}")
        if not math.isfinite(self.dc_bias_a):
            raise ValidationError(f"dc_bias_a must be finite, got {self.dc_bias_a!r}")


@dataclass(frozen=True)
class SimConfig:
    params: EcmParams
    sample_rate_hz: float
    ocv_v: float = 3.7
    n_harmonics: int = 25
    noise_rms_v: float = 0.0
    seed: int | None = 0

    def __post_init__(self):
        if self.n_harmonics < MIN_HARMONICS:
            raise ConfigurationError(f"n_harmonics must be >= {MIN_HARMONICS}, got {self.n_harmonics!r}")
        if not self.sample_rate_hz > 0:
            raise ConfigurationError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz!r}")
        if self.noise_rms_v < 0:
            raise ConfigurationError(f"noise_rms_v must be >= 0, got {self.noise_rms_v!r}")


def samples_per_period(freq_hz: float, sample_rate_hz: float) -> int:
    return int(round(sample_rate_hz / freq_hz))


def square_wave_current(spec: PulseSpec, sample_rate_hz: float) -> TimeSeries:
    """Pulse train, high for the first ``duty`` of every period.

    Period and on-time are rounded to whole samples. The voltage channel is
    left at zero for ``simulate_voltage`` to fill.
    """
    if sample_rate_hz < MIN_SAMPLES_PER_CYCLE * spec.freq_hz:
        raise ConfigurationError(
            f"sample rate {sample_rate_hz:g} Hz is below {MIN_SAMPLES_PER_CYCLE} x {spec.freq_hz:g} Hz"
        )
    n = samples_per_period(spec.freq_hz, sample_rate_hz)
    n_on = int(round(spec.duty * n))
    one = np.full(n, spec.dc_bias_a, dtype=float)
    one[:n_on] += spec.amplitude_a
    current = np.tile(one, int(spec.n_periods))
    return TimeSeries(sample_rate_hz, current, np.zeros_like(current))


def simulate_voltage(
    current: TimeSeries, config: SimConfig, freq_hz: float
) -> TimeSeries:
    """Steady-state terminal voltage for a periodic current record.

    ``current`` must repeat every ``round(fs / freq_hz)`` samples (as
    produced by ``square_wave_current``). The DC term uses R0 + R1; the
    Warburg element has no finite DC resistance.
    """
    fs = current.sample_rate_hz
    if not math.isclose(fs, config.sample_rate_hz, rel_tol=1e-12):
        raise ConfigurationError(f"record sampled at {fs:g} Hz but config says {config.sample_rate_hz:g} Hz")
    if fs < 2 * config.n_harmonics * freq_hz:
        raise ConfigurationError(
            f"sample rate {fs:g} Hz cannot carry {config.n_harmonics} harmonics of {freq_hz:g} Hz "
            f"(need >= {2 * config.n_harmonics * freq_hz:g} Hz)"
        )
    n = samples_per_period(freq_hz, fs)
    if len(current) % n:
        raise ValidationError(f"record length {len(current)} is not a whole number of {n}-sample periods")
    f_eff = fs / n

    spectrum = np.fft.rfft(current.current[:n])
    out = np.zeros_like(spectrum)
    p = config.params
    out[0] = spectrum[0] * (p.r0 + p.r1)
    for h in range(1, min(config.n_harmonics, spectrum.size - 1) + 1):
        out[h] = spectrum[h] * randles_impedance(p, 2.0 * math.pi * h * f_eff)
    period = np.fft.irfft(out, n)

    v = config.ocv_v + np.tile(period, len(current) // n)
    if config.noise_rms_v > 0:
        rng = np.random.default_rng(config.seed)
        v = v + rng.normal(0.0, config.noise_rms_v, v.size)
    return TimeSeries(fs, current.current, v)


def pulse_test(spec: PulseSpec, config: SimConfig) -> TimeSeries:
    """Square-wave excitation plus its simulated voltage in one record."""
    return simulate_voltage(square_wave_current(spec, config.sample_rate_hz), config, spec.freq_hz)


def default_sample_rate(freq_hz: float, n_harmonics: int = 25, per_cycle: int = 1000) -> float:
    """A sample rate giving an integer number of samples per period."""
    return freq_hz * max(per_cycle, MIN_SAMPLES_PER_CYCLE, 2 * n_harmonics)
