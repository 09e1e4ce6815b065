"""Randles equivalent circuit with a Warburg diffusion element.

Topology::

    R0 ── ┬── R1 ── W ──┬──
          └──── C1 ─────┘

All quantities are SI (ohm, farad, rad/s); milliohm conversion happens at
file boundaries only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class EcmParams:
    """Randles parameters.

    r0: electrolyte resistance [ohm]
    r1: charge-transfer resistance [ohm]
    c1: double-layer capacitance [F]; 0 means the capacitor is an open circuit
    aw: Warburg gain [ohm (rad/s)^0.5]; 0 means no diffusion branch
    """

    r0: float
    r1: float
    c1: float
    aw: float

    def __post_init__(self):
        for name in ("r0", "r1", "c1", "aw"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.r0 <= 0 or self.r1 <= 0:
            raise ValidationError(f"r0 and r1 must be > 0, got r0={self.r0!r}, r1={self.r1!r}")
        if self.c1 < 0 or self.aw < 0:
            raise ValidationError(f"c1 and aw must be >= 0, got c1={self.c1!r}, aw={self.aw!r}")

    def scaled(self, s: float) -> "EcmParams":
        """Parameters of a cell whose impedance is s times this one."""
        return EcmParams(self.r0 * s, self.r1 * s, self.c1 / s, self.aw * s)


@dataclass(frozen=True)
class ImpedancePoint:
    freq_hz: float
    z: complex

    def __post_init__(self):
        object.__setattr__(self, "freq_hz", float(self.freq_hz))
        object.__setattr__(self, "z", complex(self.z))
        if not (math.isfinite(self.freq_hz) and self.freq_hz > 0):
            raise ValidationError(f"freq_hz must be finite and > 0, got {self.freq_hz!r}")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.freq_hz


MIN_MEASURED_POINTS = 3


@dataclass(frozen=True)
class ImpedanceSpectrum:
    """Impedance sweep, strictly increasing in frequency.

    Measured spectra need at least ``MIN_MEASURED_POINTS`` points; that is
    checked by ``require_measured``, since model evaluations on one or two
    frequencies are legitimate.
    """

    points: tuple[ImpedancePoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValidationError("a spectrum needs at least one point")
        freqs = [p.freq_hz for p in self.points]
        for lo, hi in zip(freqs, freqs[1:]):
            if not hi > lo:
                raise ValidationError(
                    f"spectrum frequencies must be strictly increasing ({lo:g} Hz then {hi:g} Hz)"
                )

    @classmethod
    def from_arrays(cls, freqs_hz: Iterable[float], z: Iterable[complex]) -> "ImpedanceSpectrum":
        return cls(tuple(ImpedancePoint(float(f), complex(v)) for f, v in zip(freqs_hz, z)))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def require_measured(self) -> "ImpedanceSpectrum":
        if len(self.points) < MIN_MEASURED_POINTS:
            raise ValidationError(
                f"a measured spectrum needs at least {MIN_MEASURED_POINTS} points, got {len(self.points)}"
            )
        return self

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.array([p.freq_hz for p in self.points])

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points], dtype=complex)


def _check_omega(omega: float) -> None:
    if not (math.isfinite(omega) and omega > 0):
        raise ValidationError(f"angular frequency must be finite and > 0, got {omega!r}")


def warburg_impedance(aw: float, omega: float) -> complex:
    """A_w / sqrt(j*omega), i.e. (A_w / sqrt(2 omega)) * (1 - j)."""
    _check_omega(omega)
    if aw < 0:
        raise ValidationError(f"aw must be >= 0, got {aw!r}")
    m = aw / math.sqrt(2.0 * omega)
    return complex(m, -m)


def randles_impedance(params: EcmParams, omega: float) -> complex:
    w = warburg_impedance(params.aw, omega)
    branch = params.r1 + w
    return params.r0 + branch / (1.0 + 1j * omega * params.c1 * branch)


def spectrum_from_params(params: EcmParams, freqs: Sequence[float]) -> ImpedanceSpectrum:
    freqs = [float(f) for f in freqs]
    if not freqs:
        raise ValidationError("frequency list is empty")
    return ImpedanceSpectrum(
        tuple(ImpedancePoint(f, randles_impedance(params, 2.0 * math.pi * f)) for f in freqs)
    )
