"""Model-vs-measurement scoring and the FitReport file formats.

Errors are signed percent deviations of |Z|. Scoring skips the inductive
tail (Im > 0) except for the point closest to the real axis, since the
model has no inductance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .ecm_model import EcmParams, ImpedanceSpectrum, spectrum_from_params
from .errors import ContractError, ParseError, ValidationError, ZeroMagnitudeError
from .solver import FrequencyTriplet

PathLike = Union[str, Path]

# key=value names for parameter files and the machine-readable report
PARAM_KEYS = {
    "r0": "r0_ohm",
    "r1": "r1_ohm",
    "c1": "c1_farad",
    "aw": "aw_ohm_sqrt_rad_per_s",
}


def magnitude_error_pct(model: ImpedanceSpectrum, measured: ImpedanceSpectrum) -> list[tuple[float, float]]:
    fm, fx = model.freqs_hz, measured.freqs_hz
    if fm.shape != fx.shape or not np.array_equal(fm, fx):
        raise ContractError("model and measured spectra must share the same frequency grid")
    mag_meas = np.abs(measured.z)
    if np.any(mag_meas == 0):
        f0 = fx[np.argmax(mag_meas == 0)]
        raise ZeroMagnitudeError(f"measured |Z| is zero at {f0:g} Hz")
    err = 100.0 * (np.abs(model.z) - mag_meas) / mag_meas
    return [(float(f), float(e)) for f, e in zip(fx, err)]


def summarize(errors: Sequence[tuple[float, float]] | Sequence[float]) -> tuple[float, float]:
    """(RMSE, absolute maximum error) of percent errors."""
    if len(errors) == 0:
        raise ContractError("cannot summarize an empty error list")
    values = np.array([e[1] if isinstance(e, tuple) else e for e in errors], dtype=float)
    rmse = float(np.sqrt(np.mean(values**2)))
    ame = float(np.max(np.abs(values)))
    # rounding in the mean can push rmse a hair above ame when all |e| are equal
    return min(rmse, ame), ame


def scoring_mask(measured: ImpedanceSpectrum) -> np.ndarray:
    z = measured.z
    mask = z.imag <= 0
    mask[int(np.argmin(np.abs(z.imag)))] = True
    return mask


def score(params: EcmParams, measured: ImpedanceSpectrum):
    """Per-frequency errors on the scored subset plus (rmse, ame)."""
    mask = scoring_mask(measured)
    sub = ImpedanceSpectrum(tuple(p for p, keep in zip(measured.points, mask) if keep))
    model = spectrum_from_params(params, sub.freqs_hz)
    errors = magnitude_error_pct(model, sub)
    return errors, summarize(errors)


@dataclass
class FitReport:
    params: EcmParams
    triplet: FrequencyTriplet | None = None
    per_freq_error_pct: list[tuple[float, float]] = field(default_factory=list)
    rmse_pct: float | None = None
    ame_pct: float | None = None
    c1_consistency_gap_pct: float | None = None
    warnings: list[str] = field(default_factory=list)
    measured_triplet: dict[str, complex] = field(default_factory=dict)

    def to_kv(self) -> str:
        lines = [f"{PARAM_KEYS[name]}={getattr(self.params, name)!r}" for name in PARAM_KEYS]
        if self.triplet is not None:
            lines += [
                f"f_low_hz={self.triplet.f_low_hz!r}",
                f"f_mid_hz={self.triplet.f_mid_hz!r}",
                f"f_high_hz={self.triplet.f_high_hz!r}",
            ]
        for tag, z in self.measured_triplet.items():
            lines.append(f"z_{tag}_re_ohm={z.real!r}")
            lines.append(f"z_{tag}_im_ohm={z.imag!r}")
        lines += [
            f"rmse_pct={_num(self.rmse_pct)}",
            f"ame_pct={_num(self.ame_pct)}",
            f"c1_consistency_gap_pct={_num(self.c1_consistency_gap_pct)}",
            f"n_scored_points={len(self.per_freq_error_pct)}",
            f"n_warnings={len(self.warnings)}",
        ]
        lines += [f"warning_{k}={w}" for k, w in enumerate(self.warnings, start=1)]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        p = self.params
        out = [
            "Randles ECM identification",
            f"  R0 = {p.r0 * 1e3:.4f} mOhm",
            f"  R1 = {p.r1 * 1e3:.4f} mOhm",
            f"  C1 = {p.c1:.4g} F",
            f"  Aw = {p.aw:.6g} Ohm (rad/s)^0.5",
        ]
        if self.triplet is not None:
            t = self.triplet
            out.append(f"  triplet: {t.f_low_hz:g} Hz / {t.f_mid_hz:g} Hz / {t.f_high_hz:g} Hz")
        if self.rmse_pct is not None:
            out.append(f"  RMSE = {self.rmse_pct:.2f} %")
            out.append(f"  AME  = {self.ame_pct:.2f} %")
            out.append(f"  scored points: {len(self.per_freq_error_pct)}")
        else:
            out.append("  RMSE: n/a (no reference spectrum)")
        if self.c1_consistency_gap_pct is not None:
            out.append(f"  C1 consistency gap = {self.c1_consistency_gap_pct:.2f} %")
        for w in self.warnings:
            out.append(f"  warning: {w}")
        return "\n".join(out) + "\n"


def _num(x: float | None) -> str:
    return "nan" if x is None else repr(float(x))


def read_kv(path: PathLike) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"expected key=value, got {line!r}", lineno, str(path))
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def read_params(path: PathLike) -> EcmParams:
    """Load r0/r1/c1/aw from a parameter file or a machine-readable report."""
    kv = read_kv(path)
    missing = [k for k in PARAM_KEYS.values() if k not in kv]
    if missing:
        raise ValidationError(f"{path}: missing parameter keys {', '.join(missing)}")
    try:
        values = {name: float(kv[key]) for name, key in PARAM_KEYS.items()}
    except ValueError as exc:
        raise ParseError(f"non-numeric parameter value: {exc}", None, str(path)) from None
    return EcmParams(**values)


def write_params(path: PathLike, params: EcmParams) -> None:
    Path(path).write_text(
        "".join(f"{key}={getattr(params, name)!r}\n" for name, key in PARAM_KEYS.items()), encoding="utf-8"
    )

