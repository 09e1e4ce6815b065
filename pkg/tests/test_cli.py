import subprocess
import sys

import pytest

from randles_id import spectrum_from_params
from randles_id.cli import main
from randles_id.metrics import read_kv, read_params, write_params
from randles_id.spectrum_io import parse_timeseries_csv, write_eis_csv

from conftest import PRISMATIC, log_grid

TRIPLET = (0.1, 20.0, 650.0)


@pytest.fixture
def eis_file(tmp_path):
    path = tmp_path / "cell.csv"
    write_eis_csv(path, spectrum_from_params(PRISMATIC, log_grid(0.01, 650, extra=TRIPLET)))
    return path


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "params.kv"
    write_params(path, PRISMATIC)
    return path


def simulate(tmp_path, params_file, f, name=None, *extra):
    out = tmp_path / (name or f"pulse_{f:g}.csv")
    code = main(["simulate", "--params", str(params_file), "--freq-hz", str(f), "--out", str(out), *extra])
    assert code == 0
    return out


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "randles_id", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("randles-id ")


def test_fit_eis_writes_report(tmp_path, eis_file):
    out = tmp_path / "out"
    assert main(["fit-eis", str(eis_file), "--out-dir", str(out)]) == 0
    for name in ("report.txt", "report.kv", "spectrum.csv", "errors.csv"):
        assert (out / name).is_file()
    kv = read_kv(out / "report.kv")
    assert float(kv["rmse_pct"]) <= 3.0
    assert read_params(out / "report.kv").r0 == pytest.approx(PRISMATIC.r0, rel=0.02)


def test_fit_eis_batch_directory(tmp_path, eis_file):
    write_eis_csv(tmp_path / "other.csv", spectrum_from_params(PRISMATIC.scaled(2.0), log_grid(0.01, 650)))
    out = tmp_path / "batch"
    assert main(["fit-eis", str(tmp_path), "--out-dir", str(out)]) == 0
    assert (out / "cell" / "report.kv").is_file()
    assert (out / "other" / "report.kv").is_file()


def test_fit_eis_is_deterministic(tmp_path, eis_file):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["fit-eis", str(eis_file), "--out-dir", str(a)])
    main(["fit-eis", str(eis_file), "--out-dir", str(b)])
    for name in ("report.txt", "report.kv", "spectrum.csv", "errors.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_validate_prints_rmse(tmp_path, eis_file, params_file, capsys):
    assert main(["validate", str(eis_file), "--params", str(params_file), "--out-dir", str(tmp_path / "v")]) == 0
    assert "RMSE 0.00 %" in capsys.readouterr().out


def test_validate_with_flags(tmp_path, eis_file, capsys):
    args = ["--r0-ohm", "0.826e-3", "--r1-ohm", "0.346e-3", "--c1-farad", "7.07", "--aw", "0.1032e-3"]
    assert main(["validate", str(eis_file), *args, "--out-dir", str(tmp_path / "v")]) == 0
    assert "RMSE 0.00 %" in capsys.readouterr().out


@pytest.mark.parametrize(
    "content, code",
    [
        ("freq_hz,foo,im_ohm\n1,1,1\n2,1,1\n3,1,1\n", 3),
        ("freq_hz,re_ohm,im_ohm\n0.01,1,0\n1,1,0\n10,1,0\n1000,1,0\n", 4),
    ],
)
def test_fit_eis_exit_codes(tmp_path, content, code):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    assert main(["fit-eis", str(path), "--out-dir", str(tmp_path / "o")]) == code


def test_missing_file_is_exit_3(tmp_path):
    assert main(["fit-eis", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path / "o")]) == 3


def test_usage_errors_exit_2(tmp_path, eis_file, params_file):
    pulse = simulate(tmp_path, params_file, 20.0, None, "--n-periods", "3")
    assert main(["fit-pulse", str(pulse), str(pulse), "--freq-hz", "20", "20", "--out-dir", str(tmp_path)]) == 2
    assert main(["simulate", "--params", str(params_file), "--freq-hz", "1", "--duty", "0", "--out", str(tmp_path / "x.csv")]) == 2
    mixed = ["simulate", "--params", str(params_file), "--r0-ohm", "1", "--freq-hz", "1", "--out", str(tmp_path / "x.csv")]
    assert main(mixed) == 2
    partial = tmp_path / "partial.kv"
    partial.write_text("r0_ohm=1e-3\n")
    assert main(["validate", str(eis_file), "--params", str(partial), "--out-dir", str(tmp_path / "v")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["fit-eis"])
    assert info.value.code == 2


def test_simulate_long_period_record(tmp_path, params_file):
    out = simulate(tmp_path, params_file, 0.02, "slow.csv", "--n-periods", "3")
    ts = parse_timeseries_csv(out)
    assert ts.duration_s == pytest.approx(150.0)
    truth = read_kv(out.with_suffix(".truth.txt"))
    assert set(truth) == {"freq_hz", "sample_rate_hz", "z_re_ohm", "z_im_ohm", "z_mag_ohm", "z_phase_deg"}
    assert float(truth["freq_hz"]) == 0.02
    assert float(truth["sample_rate_hz"]) == pytest.approx(ts.sample_rate_hz)


def test_simulate_is_deterministic(tmp_path, params_file):
    a = simulate(tmp_path, params_file, 5.0, "a.csv", "--noise-rms-v", "1e-4", "--seed", "4", "--n-periods", "4")
    b = simulate(tmp_path, params_file, 5.0, "b.csv", "--noise-rms-v", "1e-4", "--seed", "4", "--n-periods", "4")
    assert a.read_bytes() == b.read_bytes()


def test_pulse_and_eis_paths_agree(tmp_path, eis_file, params_file, caplog):
    records = [simulate(tmp_path, params_file, f) for f in TRIPLET]
    pulse_out, eis_out = tmp_path / "pulse", tmp_path / "eis"
    # deliberately out of order: the pipeline sorts and warns
    order = [2, 0, 1]
    argv = ["fit-pulse", *(str(records[i]) for i in order), "--freq-hz", *(str(TRIPLET[i]) for i in order)]
    assert main([*argv, "--reference-eis", str(eis_file), "--out-dir", str(pulse_out)]) == 0
    assert "reordered" in caplog.text
    lo, mid, hi = (str(f) for f in TRIPLET)
    argv = ["fit-eis", str(eis_file), "--f-low-hz", lo, "--f-mid-hz", mid, "--f-high-hz", hi]
    assert main([*argv, "--out-dir", str(eis_out)]) == 0
    p_pulse = read_params(pulse_out / "report.kv")
    p_eis = read_params(eis_out / "report.kv")
    for name in ("r0", "r1", "c1", "aw"):
        assert getattr(p_pulse, name) == pytest.approx(getattr(p_eis, name), rel=0.02), name
    assert float(read_kv(pulse_out / "report.kv")["rmse_pct"]) <= 3.0
