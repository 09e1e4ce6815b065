"""End-to-end workflows shared by the CLI and the tests."""

from __future__ import annotations

import csv
import math
import warnings
from pathlib import Path
from typing import Sequence

from .dsp import BpfConfig, TimeSeries, measure_impedance
from .ecm_model import EcmParams, ImpedanceSpectrum, spectrum_from_params
from .metrics import FitReport, score
from .solver import FrequencyTriplet, SeparationWarning, TripletMeasurement, identify_detailed
from .spectrum_io import SelectionPolicy, probe_spectrum, select_frequencies
from .errors import ValidationError


def _identify_quiet(measurement: TripletMeasurement, min_separation: float):
    # separation notes are carried in the report instead of the warnings module
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        return identify_detailed(measurement, min_separation)


def _triplet_z(m: TripletMeasurement) -> dict[str, complex]:
    return {"low": m.z_low, "mid": m.z_mid, "high": m.z_high}


def fit_spectrum(spectrum: ImpedanceSpectrum, policy: SelectionPolicy | None = None) -> FitReport:
    """select -> probe -> identify -> score against the same spectrum."""
    policy = policy or SelectionPolicy()
    selection = select_frequencies(spectrum, policy)
    measurement = probe_spectrum(spectrum, selection.triplet)
    ident = _identify_quiet(measurement, policy.min_separation_ratio)
    errors, (rmse, ame) = score(ident.params, spectrum)
    return FitReport(
        params=ident.params,
        triplet=selection.triplet,
        per_freq_error_pct=errors,
        rmse_pct=rmse,
        ame_pct=ame,
        c1_consistency_gap_pct=ident.c1_consistency_gap_pct,
        warnings=list(ident.warnings),
        measured_triplet=_triplet_z(measurement),
    )


def fit_records(
    records: Sequence[tuple[float, TimeSeries]],
    k: float = 1.0,
    cascade_order: int = 2,
    reference: ImpedanceSpectrum | None = None,
    min_separation: float = 10.0,
) -> FitReport:
    """Three pulse records (frequency, series) -> parameters.

    Records may arrive in any order; they are sorted by frequency and a
    warning is added when that changed the order.
    """
    if len(records) != 3:
        raise ValidationError(f"exactly three pulse records are needed, got {len(records)}")
    notes = []
    ordered = sorted(records, key=lambda r: r[0])
    if [r[0] for r in ordered] != [r[0] for r in records]:
        notes.append("pulse records were reordered by frequency")
    points = [measure_impedance(ts, BpfConfig(f, k, cascade_order)) for f, ts in ordered]
    triplet = FrequencyTriplet(*(p.freq_hz for p in points))
    measurement = TripletMeasurement(triplet, points[0].z, points[1].z, points[2].z)
    ident = _identify_quiet(measurement, min_separation)
    report = FitReport(
        params=ident.params,
        triplet=triplet,
        c1_consistency_gap_pct=ident.c1_consistency_gap_pct,
        warnings=notes + list(ident.warnings),
        measured_triplet=_triplet_z(measurement),
    )
    if reference is not None:
        report.per_freq_error_pct, (report.rmse_pct, report.ame_pct) = score(ident.params, reference)
    return report


def validate_params(spectrum: ImpedanceSpectrum, params: EcmParams) -> FitReport:
    spectrum.require_measured()
    errors, (rmse, ame) = score(params, spectrum)
    return FitReport(params=params, per_freq_error_pct=errors, rmse_pct=rmse, ame_pct=ame)


def write_plot_csvs(out_dir: Path, report: FitReport, measured: ImpedanceSpectrum | None) -> None:
    """Nyquist/Bode data for measured and model, plus error vs frequency."""
    out_dir = Path(out_dir)
    if measured is not None:
        model = spectrum_from_params(report.params, measured.freqs_hz)
        with open(out_dir / "spectrum.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(
                [
                    "freq_hz",
                    "meas_re_ohm", "meas_im_ohm", "meas_mag_ohm", "meas_phase_deg",
                    "model_re_ohm", "model_im_ohm", "model_mag_ohm", "model_phase_deg",
                ]
            )
            for pm, pf in zip(measured, model):
                w.writerow([repr(pm.freq_hz), *_polar_rect(pm.z), *_polar_rect(pf.z)])
    with open(out_dir / "errors.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "mag_error_pct"])
        for f, e in report.per_freq_error_pct:
            w.writerow([repr(f), repr(e)])


def _polar_rect(z: complex):
    return [repr(z.real), repr(z.imag), repr(abs(z)), repr(math.degrees(math.atan2(z.imag, z.real)))]


def write_report(out_dir: Path, report: FitReport, measured: ImpedanceSpectrum | None = None) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out_dir / "report.kv").write_text(report.to_kv(), encoding="utf-8")
    write_plot_csvs(out_dir, report, measured)
