"""Closed-form Randles identification from three impedance measurements.

No iteration and no fitting: each parameter falls out of one algebraic step,
in dependency order r0 -> aw -> r1 -> c1.

* high frequency: capacitor shorts the RC branch, ``Z ~ R0``
* low frequency: capacitor is open, ``Z ~ R0 + R1 + A_w / sqrt(j w)``
* mid frequency: Warburg is negligible, ``Z ~ R0 + R1 / (1 + j w R1 C1)``
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .ecm_model import EcmParams
from .errors import DegenerateInputError, NonPhysicalFitError, SolverError, ValidationError

DEFAULT_MIN_SEPARATION = 10.0


class SeparationWarning(UserWarning):
    """Triplet frequencies are too close for the asymptotic assumptions."""


@dataclass(frozen=True)
class FrequencyTriplet:
    f_low_hz: float
    f_mid_hz: float
    f_high_hz: float

    def __post_init__(self):
        for name in ("f_low_hz", "f_mid_hz", "f_high_hz"):
            object.__setattr__(self, name, float(getattr(self, name)))
        freqs = (self.f_low_hz, self.f_mid_hz, self.f_high_hz)
        if not all(math.isfinite(f) and f > 0 for f in freqs):
            raise ValidationError(f"triplet frequencies must be finite and > 0, got {freqs}")
        if not self.f_low_hz < self.f_mid_hz < self.f_high_hz:
            raise ValidationError(f"triplet must satisfy f_low < f_mid < f_high, got {freqs}")

    @property
    def omegas(self) -> tuple[float, float, float]:
        return tuple(2.0 * math.pi * f for f in (self.f_low_hz, self.f_mid_hz, self.f_high_hz))

    def separation_warnings(self, min_ratio: float = DEFAULT_MIN_SEPARATION) -> list[str]:
        out = []
        lo = self.f_mid_hz / self.f_low_hz
        hi = self.f_high_hz / self.f_mid_hz
        if lo < min_ratio:
            out.append(f"f_mid/f_low = {lo:.3g} is below {min_ratio:g}; Warburg/C1 overlap biases aw and r1")
        if hi < min_ratio:
            out.append(f"f_high/f_mid = {hi:.3g} is below {min_ratio:g}; residual RC response biases r0 and c1")
        return out


@dataclass(frozen=True)
class TripletMeasurement:
    triplet: FrequencyTriplet
    z_low: complex
    z_mid: complex
    z_high: complex

    def __post_init__(self):
        for name in ("z_low", "z_mid", "z_high"):
            z = complex(getattr(self, name))
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValidationError(f"{name} must be finite, got {z!r}")
            object.__setattr__(self, name, z)
        if self.z_low.imag >= 0:
            raise DegenerateInputError(
                "low-frequency point must be capacitive (Im < 0)",
                value=self.z_low.imag,
                freq_hz=self.triplet.f_low_hz,
            )
        if self.z_mid.imag >= 0:
            raise DegenerateInputError(
                "mid-frequency point must be capacitive (Im < 0)",
                value=self.z_mid.imag,
                freq_hz=self.triplet.f_mid_hz,
            )


def solve_r0(z_high: complex) -> float:
    z_high = complex(z_high)
    if not (math.isfinite(z_high.real) and math.isfinite(z_high.imag)):
        raise ValidationError(f"z_high must be finite, got {z_high!r}")
    return z_high.real


def solve_aw(z_low: complex, omega_low: float) -> float:
    if not omega_low > 0:
        raise ValidationError(f"omega_low must be > 0, got {omega_low!r}")
    im = complex(z_low).imag
    if im == 0:
        raise DegenerateInputError("Im(z_low) is zero: no diffusion tail at the low frequency", value=im)
    return abs(im) * math.sqrt(2.0 * omega_low)


def solve_r1(z_low: complex, r0: float, aw: float, omega_low: float) -> float:
    if not omega_low > 0:
        raise ValidationError(f"omega_low must be > 0, got {omega_low!r}")
    r1 = complex(z_low).real - r0 - aw / math.sqrt(2.0 * omega_low)
    if r1 <= 0:
        raise NonPhysicalFitError(f"r1 = {r1:.6g} ohm is not positive", value=r1)
    return r1


def solve_c1(z_mid: complex, r0: float, r1: float, omega_mid: float) -> float:
    if not omega_mid > 0:
        raise ValidationError(f"omega_mid must be > 0, got {omega_mid!r}")
    z_mid = complex(z_mid)
    if z_mid.imag >= 0:
        raise DegenerateInputError("Im(z_mid) must be negative (capacitive)", value=z_mid.imag)
    alpha = z_mid.real - r0
    if alpha <= 0:
        raise NonPhysicalFitError(f"Re(z_mid) - r0 = {alpha:.6g} ohm is not positive", value=alpha)
    if r1 <= 0:
        raise NonPhysicalFitError(f"r1 = {r1:.6g} ohm is not positive", value=r1)
    return abs(z_mid.imag) / (alpha * omega_mid * r1)


def c1_from_real_part(z_mid: complex, r0: float, r1: float, omega_mid: float) -> float:
    """C1 from Re(z_mid) alone: alpha = R1 / (1 + (w R1 C1)^2) solved for C1."""
    alpha = complex(z_mid).real - r0
    if alpha <= 0:
        return float("nan")
    return math.sqrt(max(r1 / alpha - 1.0, 0.0)) / (omega_mid * r1)


@dataclass(frozen=True)
class Identification:
    params: EcmParams
    c1_consistency_gap_pct: float
    r0_imag_residue: float
    warnings: list[str] = field(default_factory=list)


def _tag(exc: SolverError, freq_hz: float) -> SolverError:
    return type(exc)(str(exc), value=exc.value, freq_hz=freq_hz)


def identify_detailed(
    measurement: TripletMeasurement, min_separation: float = DEFAULT_MIN_SEPARATION
) -> Identification:
    """Identify parameters and report the diagnostics alongside them."""
    t = measurement.triplet
    w_low, w_mid, _ = t.omegas

    r0 = solve_r0(measurement.z_high)
    if r0 <= 0:
        raise NonPhysicalFitError(f"r0 = {r0:.6g} ohm is not positive", value=r0, freq_hz=t.f_high_hz)
    try:
        aw = solve_aw(measurement.z_low, w_low)
        r1 = solve_r1(measurement.z_low, r0, aw, w_low)
    except SolverError as exc:
        raise _tag(exc, t.f_low_hz) from exc
    try:
        c1 = solve_c1(measurement.z_mid, r0, r1, w_mid)
    except SolverError as exc:
        raise _tag(exc, t.f_mid_hz) from exc

    c1_alt = c1_from_real_part(measurement.z_mid, r0, r1, w_mid)
    gap = 100.0 * abs(c1 - c1_alt) / c1
    notes = t.separation_warnings(min_separation)
    for msg in notes:
        warnings.warn(msg, SeparationWarning, stacklevel=2)
    return Identification(
        params=EcmParams(r0=r0, r1=r1, c1=c1, aw=aw),
        c1_consistency_gap_pct=gap,
        r0_imag_residue=measurement.z_high.imag,
        warnings=notes,
    )


def identify(measurement: TripletMeasurement) -> EcmParams:
    return identify_detailed(measurement).params


def asymptotic_measurement(params: EcmParams, triplet: FrequencyTriplet) -> TripletMeasurement:
    """Impedances from the three asymptotic forms the solver inverts.

    ``identify`` undoes this exactly; useful as a reference for the algebra.
    """
    w_low, w_mid, _ = triplet.omegas
    m = params.aw / math.sqrt(2.0 * w_low)
    z_low = complex(params.r0 + params.r1 + m, -m)
    z_mid = params.r0 + params.r1 / (1.0 + 1j * w_mid * params.r1 * params.c1)
    return TripletMeasurement(triplet, z_low=z_low, z_mid=z_mid, z_high=complex(params.r0, 0.0))
