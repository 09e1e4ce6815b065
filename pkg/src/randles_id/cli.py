"""randles-id command line.

Exit codes: 0 ok, 2 usage/validation, 3 parse or unreadable input,
4 frequency selection, 5 solver (non-physical / degenerate), 6 dsp.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .cellsim import PulseSpec, SimConfig, default_sample_rate, pulse_test
from .ecm_model import EcmParams, randles_impedance
from .errors import EcmError, ValidationError
from .metrics import read_params
from .pipeline import fit_records, fit_spectrum, validate_params, write_report
from .spectrum_io import (
    SelectionPolicy,
    parse_eis_csv,
    parse_timeseries_csv,
    write_timeseries_csv,
)

log = logging.getLogger("randles_id")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("cell parameters (either --params or all four values)")
    g.add_argument("--params", type=Path, help="key=value parameter file or report.kv")
    g.add_argument("--r0-ohm", type=float)
    g.add_argument("--r1-ohm", type=float)
    g.add_argument("--c1-farad", type=float)
    g.add_argument("--aw", type=float, help="Warburg gain, ohm (rad/s)^0.5")


def _params_from_args(args) -> EcmParams:
    values = [args.r0_ohm, args.r1_ohm, args.c1_farad, args.aw]
    if args.params is not None:
        if any(v is not None for v in values):
            raise ValidationError("give either --params or individual parameter flags, not both")
        return read_params(args.params)
    if any(v is None for v in values):
        raise ValidationError("need --params or all of --r0-ohm --r1-ohm --c1-farad --aw")
    return EcmParams(*values)


def _policy_from_args(args) -> SelectionPolicy:
    return SelectionPolicy(
        f_low_hz=args.f_low_hz,
        f_mid_rule=args.f_mid_hz if args.f_mid_hz is not None else "knee",
        f_high_rule=args.f_high_hz if args.f_high_hz is not None else args.f_high_rule,
        min_separation_ratio=args.min_separation_ratio,
    )


def _eis_inputs(paths: list[Path]) -> list[Path]:
    out = []
    for p in paths:
        if p.is_dir():
            out.extend(sorted(p.glob("*.csv")))
        else:
            out.append(p)
    if not out:
        raise ValidationError("no EIS CSV files found")
    return out


def cmd_fit_eis(args) -> int:
    files = _eis_inputs(args.eis_csv)
    batch = len(files) > 1
    for path in files:
        spectrum = parse_eis_csv(path)
        report = fit_spectrum(spectrum, _policy_from_args(args))
        out = args.out_dir / path.stem if batch else args.out_dir
        write_report(out, report, spectrum)
        for w in report.warnings:
            log.warning("%s: %s", path.name, w)
        print(f"{path.name}: RMSE {report.rmse_pct:.2f} %  AME {report.ame_pct:.2f} %  -> {out}")
    return EXIT_OK


def cmd_fit_pulse(args) -> int:
    if len(args.records) != 3 or len(args.freq_hz) != 3:
        raise ValidationError(
            f"fit-pulse needs exactly three records and three --freq-hz values "
            f"(got {len(args.records)} and {len(args.freq_hz)})"
        )
    records = [(f, parse_timeseries_csv(p)) for f, p in zip(args.freq_hz, args.records)]
    reference = parse_eis_csv(args.reference_eis) if args.reference_eis else None
    report = fit_records(records, k=args.k, cascade_order=args.cascade, reference=reference)
    write_report(args.out_dir, report, reference)
    for w in report.warnings:
        log.warning("%s", w)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params_from_args(args)
    spec = PulseSpec(args.freq_hz, args.amplitude_a, args.duty, args.n_periods, args.dc_bias_a)
    fs = args.sample_rate_hz or default_sample_rate(args.freq_hz, args.n_harmonics, args.samples_per_cycle)
    config = SimConfig(params, fs, args.ocv_v, args.n_harmonics, args.noise_rms_v, args.seed)
    ts = pulse_test(spec, config)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_timeseries_csv(args.out, ts)
    z = randles_impedance(params, 2.0 * math.pi * args.freq_hz)
    truth = args.out.with_suffix(".truth.txt")
    truth.write_text(
        f"freq_hz={args.freq_hz!r}\n"
        f"sample_rate_hz={fs!r}\n"
        f"z_re_ohm={z.real!r}\n"
        f"z_im_ohm={z.imag!r}\n"
        f"z_mag_ohm={abs(z)!r}\n"
        f"z_phase_deg={math.degrees(math.atan2(z.imag, z.real))!r}\n",
        encoding="utf-8",
    )
    print(f"wrote {len(ts)} samples ({ts.duration_s:g} s) to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    params = _params_from_args(args)
    spectrum = parse_eis_csv(args.eis_csv)
    report = validate_params(spectrum, params)
    write_report(args.out_dir, report, spectrum)
    print(f"RMSE {report.rmse_pct:.2f} %  AME {report.ame_pct:.2f} %")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randles-id",
        description="Three-frequency Randles ECM identification from EIS sweeps or pulse records.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-eis", help="identify parameters from an EIS CSV (or a directory of them)")
    p.add_argument("eis_csv", type=Path, nargs="+")
    p.add_argument("--f-low-hz", type=float)
    p.add_argument("--f-mid-hz", type=float, help="explicit mid frequency (default: semicircle knee rule)")
    p.add_argument("--f-high-hz", type=float, help="explicit high frequency")
    p.add_argument("--f-high-rule", choices=("min-imag", "zero-slope"), default="min-imag")
    p.add_argument("--min-separation-ratio", type=float, default=10.0)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_fit_eis)

    p = sub.add_parser("fit-pulse", help="identify parameters from three pulse time-series CSVs")
    p.add_argument("records", type=Path, nargs="+")
    p.add_argument("--freq-hz", type=float, nargs="+", required=True, help="pulse frequency of each record")
    p.add_argument("--k", type=float, default=1.0, help="band-pass damping gain")
    p.add_argument("--cascade", type=int, choices=(1, 2), default=2)
    p.add_argument("--reference-eis", type=Path, help="EIS CSV to score the identified model against")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_fit_pulse)

    p = sub.add_parser("simulate", help="write a synthetic pulse-test record")
    _add_param_flags(p)
    p.add_argument("--freq-hz", type=float, required=True)
    p.add_argument("--amplitude-a", type=float, default=50.0)
    p.add_argument("--duty", type=float, default=0.5)
    p.add_argument("--n-periods", type=int, default=12)
    p.add_argument("--dc-bias-a", type=float, default=0.0)
    p.add_argument("--ocv-v", type=float, default=3.7)
    p.add_argument("--n-harmonics", type=int, default=25)
    p.add_argument("--sample-rate-hz", type=float, help="default: --samples-per-cycle x freq")
    p.add_argument("--samples-per-cycle", type=int, default=200)
    p.add_argument("--noise-rms-v", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="time-series CSV to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="score a parameter set against an EIS CSV")
    p.add_argument("eis_csv", type=Path)
    _add_param_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except EcmError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
