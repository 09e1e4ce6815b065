"""EIS and time-series files, triplet auto-selection, spectrum probing."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .dsp import TimeSeries
from .ecm_model import ImpedancePoint, ImpedanceSpectrum
from .errors import ParseError, RangeError, SelectionError, ValidationError
from .solver import DEFAULT_MIN_SEPARATION, FrequencyTriplet, TripletMeasurement

RECT_HEADER = ("freq_hz", "re_ohm", "im_ohm")
POLAR_HEADER = ("freq_hz", "mag_ohm", "phase_deg")
TIMESERIES_HEADER = ("t_s", "i_a", "v_v")

# relative tolerance on sample spacing when reading time-series files
UNIFORM_RTOL = 1e-6

# zero-slope rule: |d|Z| / d log10 f| below this fraction of |Z| per decade
ZERO_SLOPE_FRACTION = 0.01

F_LOW_TARGET_HZ = 0.1
F_LOW_FLOOR_HZ = 0.05

PathLike = Union[str, Path]


def _rows(path: PathLike):
    """Yield (line_number, cells) for non-blank, non-comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cells = next(csv.reader(io.StringIO(stripped)))
            yield lineno, [c.strip() for c in cells]


def _floats(cells, lineno, path, width):
    if len(cells) != width:
        raise ParseError(f"expected {width} columns, got {len(cells)}", lineno, str(path))
    try:
        values = [float(c) for c in cells]
    except ValueError:
        raise ParseError(f"non-numeric cell in {cells}", lineno, str(path)) from None
    if not all(math.isfinite(v) for v in values):
        raise ParseError(f"non-finite value in {cells}", lineno, str(path))
    return values


def parse_eis_csv(path: PathLike) -> ImpedanceSpectrum:
    """Read an EIS sweep in rectangular or polar form; rows may come in any order."""
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("file is empty", None, str(path)) from None
    header = tuple(h.lower() for h in header)
    if header == RECT_HEADER:
        polar = False
    elif header == POLAR_HEADER:
        polar = True
    else:
        raise ParseError(
            f"unknown header {','.join(header)!r}; expected {','.join(RECT_HEADER)} or {','.join(POLAR_HEADER)}",
            lineno,
            str(path),
        )

    seen: dict[float, int] = {}
    points = []
    for lineno, cells in rows:
        f, a, b = _floats(cells, lineno, path, 3)
        if f <= 0:
            raise ParseError(f"frequency must be > 0, got {f!r}", lineno, str(path))
        if f in seen:
            raise ParseError(f"duplicate frequency {f:g} Hz (first on line {seen[f]})", lineno, str(path))
        seen[f] = lineno
        if polar:
            z = a * complex(math.cos(math.radians(b)), math.sin(math.radians(b)))
        else:
            z = complex(a, b)
        points.append(ImpedancePoint(f, z))
    if len(points) < 3:
        raise ParseError(f"need at least 3 data rows, got {len(points)}", None, str(path))
    points.sort(key=lambda p: p.freq_hz)
    return ImpedanceSpectrum(tuple(points))


def write_eis_csv(path: PathLike, spectrum: ImpedanceSpectrum, polar: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POLAR_HEADER if polar else RECT_HEADER)
        for p in spectrum:
            if polar:
                w.writerow([repr(p.freq_hz), repr(abs(p.z)), repr(math.degrees(math.atan2(p.z.imag, p.z.real)))])
            else:
                w.writerow([repr(p.freq_hz), repr(p.z.real), repr(p.z.imag)])


def parse_timeseries_csv(path: PathLike) -> TimeSeries:
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("file is empty", None, str(path)) from None
    if tuple(h.lower() for h in header) != TIMESERIES_HEADER:
        raise ParseError(f"unknown header {','.join(header)!r}; expected {','.join(TIMESERIES_HEADER)}", lineno, str(path))
    data = []
    for lineno, cells in rows:
        data.append(_floats(cells, lineno, path, 3))
    if len(data) < 3:
        raise ParseError(f"need at least 3 samples, got {len(data)}", None, str(path))
    arr = np.asarray(data)
    dt = np.diff(arr[:, 0])
    if not np.all(dt > 0):
        bad = int(np.argmax(dt <= 0))
        raise ParseError("t_s must be strictly increasing", _data_line(path, bad + 1), str(path))
    step = (arr[-1, 0] - arr[0, 0]) / (len(arr) - 1)
    if np.max(np.abs(dt - step)) > UNIFORM_RTOL * step:
        bad = int(np.argmax(np.abs(dt - step)))
        raise ParseError("t_s is not uniformly spaced", _data_line(path, bad + 1), str(path))
    return TimeSeries(1.0 / step, arr[:, 1], arr[:, 2])


def _data_line(path: PathLike, index: int) -> int | None:
    """File line number of the index-th data row (0-based)."""
    rows = _rows(path)
    next(rows)
    for k, (lineno, _) in enumerate(rows):
        if k == index:
            return lineno
    return None


def write_timeseries_csv(path: PathLike, ts: TimeSeries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_HEADER)
        for n, (i, v) in enumerate(zip(ts.current.tolist(), ts.voltage.tolist())):
            w.writerow([repr(n / ts.sample_rate_hz), repr(i), repr(v)])


@dataclass(frozen=True)
class SelectionPolicy:
    """How to pick the triplet. ``None`` / rule names mean automatic."""

    f_low_hz: float | None = None
    f_mid_rule: Union[str, float] = "knee"
    f_high_rule: Union[str, float] = "min-imag"
    min_separation_ratio: float = DEFAULT_MIN_SEPARATION

    def __post_init__(self):
        if isinstance(self.f_mid_rule, str) and self.f_mid_rule != "knee":
            raise ValidationError(f"f_mid_rule must be 'knee' or a frequency, got {self.f_mid_rule!r}")
        if isinstance(self.f_high_rule, str) and self.f_high_rule not in ("min-imag", "zero-slope"):
            raise ValidationError(
                f"f_high_rule must be 'min-imag', 'zero-slope' or a frequency, got {self.f_high_rule!r}"
            )
        if self.min_separation_ratio <= 1:
            raise ValidationError(f"min_separation_ratio must be > 1, got {self.min_separation_ratio!r}")


@dataclass(frozen=True)
class Selection:
    triplet: FrequencyTriplet
    warnings: list[str]


def _check_in_range(spectrum: ImpedanceSpectrum, f: float, what: str) -> float:
    f = float(f)
    freqs = spectrum.freqs_hz
    if not freqs[0] <= f <= freqs[-1]:
        raise RangeError(f"{what} = {f:g} Hz lies outside the spectrum ({freqs[0]:g}..{freqs[-1]:g} Hz)")
    return f


def _capacitive_limit(z) -> int:
    """Index one past the last capacitive point below any inductive upturn."""
    capacitive = np.flatnonzero(z.imag <= 0)
    if capacitive.size == 0:
        raise SelectionError("spectrum has no capacitive (Im <= 0) points")
    inductive_above = np.flatnonzero((z.imag > 0) & (np.arange(z.size) > capacitive[0]))
    return int(inductive_above[0]) if inductive_above.size else int(z.size)


def _knee_index(z, hi: int) -> int:
    """Highest-frequency local maximum of -Im strictly below index ``hi``."""
    neg = -z.imag
    for i in range(hi - 1, 0, -1):
        if neg[i] > 0 and neg[i] >= neg[i + 1] and neg[i] > neg[i - 1]:
            return i
    raise SelectionError("no capacitive semicircle found (no local maximum of -Im)")


def _high_index(freqs, z, knee: int, limit: int, rule: str) -> int:
    above = np.arange(knee + 1, limit)
    if rule == "min-imag":
        return int(above[np.argmin(np.abs(z.imag[above]))])
    mag = np.abs(z)
    slope = np.gradient(mag, np.log10(freqs))
    for i in above:
        if abs(slope[i]) < ZERO_SLOPE_FRACTION * mag[i]:
            return int(i)
    return int(above[-1])


def select_frequencies(spectrum: ImpedanceSpectrum, policy: SelectionPolicy | None = None) -> Selection:
    """Pick (f_low, f_mid, f_high) from a measured spectrum.

    f_mid: apex of the capacitive semicircle (highest-frequency local
    maximum of -Im), stepped one grid point up.
    f_high: above the apex and below any inductive upturn, the point of
    smallest |Im| ("min-imag") or the first with flat |Z| ("zero-slope").
    f_low: grid point nearest 0.1 Hz (log distance) among those >= 0.05 Hz.
    """
    policy = policy or SelectionPolicy()
    spectrum.require_measured()
    freqs = spectrum.freqs_hz
    z = spectrum.z
    if freqs[-1] / freqs[0] < 100.0:
        raise SelectionError(f"spectrum spans {freqs[0]:g}..{freqs[-1]:g} Hz; need at least two decades")

    auto_high = isinstance(policy.f_high_rule, str)
    auto_mid = isinstance(policy.f_mid_rule, str)
    if auto_high or auto_mid:
        limit = _capacitive_limit(z)
        knee = _knee_index(z, limit - 1)

    if auto_high:
        hi = _high_index(freqs, z, knee, limit, policy.f_high_rule)
        f_high = float(freqs[hi])
    else:
        f_high = _check_in_range(spectrum, policy.f_high_rule, "f_high")
        hi = int(np.searchsorted(freqs, f_high, side="right")) - 1

    if auto_mid:
        # one grid step off the apex, toward f_high
        f_mid = float(freqs[max(min(knee + 1, hi - 1), knee)])
    else:
        f_mid = _check_in_range(spectrum, policy.f_mid_rule, "f_mid")

    if policy.f_low_hz is not None:
        f_low = _check_in_range(spectrum, policy.f_low_hz, "f_low")
    else:
        ok = np.flatnonzero((freqs >= F_LOW_FLOOR_HZ) & (freqs < f_mid))
        if ok.size:
            f_low = float(freqs[ok[np.argmin(np.abs(np.log(freqs[ok] / F_LOW_TARGET_HZ)))]])
        else:
            f_low = float(freqs[0])

    try:
        triplet = FrequencyTriplet(f_low, f_mid, f_high)
    except ValidationError as exc:
        raise SelectionError(f"selected frequencies are not ordered: {exc}") from exc
    return Selection(triplet, triplet.separation_warnings(policy.min_separation_ratio))


def probe_spectrum(spectrum: ImpedanceSpectrum, triplet: FrequencyTriplet) -> TripletMeasurement:
    """Impedance at the triplet, interpolating Re and Im linearly in log f."""
    logf = np.log(spectrum.freqs_hz)
    z = spectrum.z
    vals = []
    for name, f in zip(("f_low", "f_mid", "f_high"), (triplet.f_low_hz, triplet.f_mid_hz, triplet.f_high_hz)):
        _check_in_range(spectrum, f, name)
        lf = math.log(f)
        vals.append(complex(np.interp(lf, logf, z.real), np.interp(lf, logf, z.imag)))
    return TripletMeasurement(triplet, z_low=vals[0], z_mid=vals[1], z_high=vals[2])
