import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randles_id import EcmParams, FrequencyTriplet, TripletMeasurement, identify, randles_impedance
from randles_id.errors import DegenerateInputError, NonPhysicalFitError, ValidationError
from randles_id.solver import (
    SeparationWarning,
    asymptotic_measurement,
    identify_detailed,
    solve_aw,
    solve_c1,
    solve_r0,
    solve_r1,
)

from conftest import PRISMATIC, REF_TRIPLET, CYLINDRICAL_ROWS, cylindrical_params

W_LOW, W_MID, W_HIGH = REF_TRIPLET.omegas


def full_model_measurement(p, t):
    wl, wm, wh = t.omegas
    return TripletMeasurement(t, randles_impedance(p, wl), randles_impedance(p, wm), randles_impedance(p, wh))


def test_solve_r0():
    assert solve_r0(0.826e-3 + 0j) == 0.826e-3
    assert solve_r0(22.421e-3 - 1e-5j) == 22.421e-3
    assert solve_r0(0j) == 0.0


def test_identify_rejects_zero_r0():
    m = TripletMeasurement(REF_TRIPLET, 1e-3 - 1e-4j, 1e-3 - 1e-4j, 0j)
    with pytest.raises(NonPhysicalFitError) as exc:
        identify(m)
    assert exc.value.freq_hz == REF_TRIPLET.f_high_hz


def test_solve_aw_recovers_reference_gain():
    # Im of the Warburg term at 0.116 Hz for Aw = 0.1032e-3
    assert solve_aw(complex(0, -85.476311e-6), W_LOW) == pytest.approx(0.1032e-3, rel=1e-6)


def test_solve_aw_degenerate():
    with pytest.raises(DegenerateInputError):
        solve_aw(1e-3 + 0j, W_LOW)


def test_solve_aw_scaling_law():
    a = solve_aw(complex(0, -3e-5), 1.0)
    b = solve_aw(complex(0, -3e-5 / math.sqrt(2)), 2.0)
    assert a == pytest.approx(b, rel=1e-14)


def test_solve_r1_round_trip():
    m = PRISMATIC.aw / math.sqrt(2 * W_LOW)
    re = PRISMATIC.r0 + PRISMATIC.r1 + m
    assert solve_r1(complex(re, -m), PRISMATIC.r0, PRISMATIC.aw, W_LOW) == pytest.approx(0.346e-3, rel=1e-12)


def test_solve_r1_pure_rc():
    assert solve_r1(complex(3.0, 0.0), 1.0, 0.0, 1.0) == 2.0


def test_solve_r1_negative():
    with pytest.raises(NonPhysicalFitError) as exc:
        solve_r1(complex(0.5e-3, -1e-5), PRISMATIC.r0, PRISMATIC.aw, W_LOW)
    assert exc.value.value < 0


def test_solve_c1_round_trip():
    z_mid = PRISMATIC.r0 + PRISMATIC.r1 / (1 + 1j * W_MID * PRISMATIC.r1 * PRISMATIC.c1)
    assert solve_c1(z_mid, PRISMATIC.r0, PRISMATIC.r1, W_MID) == pytest.approx(7.07, rel=1e-12)


def test_solve_c1_semicircle_apex():
    r1, w = 2.0, 5.0
    z = complex(1.0 + r1 / 2, -r1 / 2)
    assert solve_c1(z, 1.0, r1, w) == pytest.approx(1 / (w * r1), rel=1e-14)


def test_solve_c1_errors():
    with pytest.raises(NonPhysicalFitError):
        solve_c1(complex(PRISMATIC.r0, -1e-4), PRISMATIC.r0, PRISMATIC.r1, W_MID)
    with pytest.raises(DegenerateInputError):
        solve_c1(complex(1e-3, 0.0), PRISMATIC.r0, PRISMATIC.r1, W_MID)


def test_measurement_requires_capacitive_points():
    with pytest.raises(DegenerateInputError):
        TripletMeasurement(REF_TRIPLET, 1e-3 + 1e-5j, 1e-3 - 1e-5j, 1e-3)
    with pytest.raises(DegenerateInputError):
        TripletMeasurement(REF_TRIPLET, 1e-3 - 1e-5j, 1e-3 + 0j, 1e-3)


def test_triplet_ordering():
    with pytest.raises(ValidationError):
        FrequencyTriplet(1.0, 1.0, 10.0)
    with pytest.raises(ValidationError):
        FrequencyTriplet(10.0, 1.0, 100.0)


def test_separation_warning():
    t = FrequencyTriplet(1.0, 5.0, 500.0)
    assert len(t.separation_warnings()) == 1
    with pytest.warns(SeparationWarning):
        identify(asymptotic_measurement(PRISMATIC, t))


def test_asymptotic_data_is_inverted_exactly():
    got = identify(asymptotic_measurement(PRISMATIC, REF_TRIPLET))
    for name in ("r0", "r1", "c1", "aw"):
        assert getattr(got, name) == pytest.approx(getattr(PRISMATIC, name), rel=1e-12)


def test_full_model_round_trip_r0_aw_r1():
    got = identify(full_model_measurement(PRISMATIC, REF_TRIPLET))
    assert got.r0 == pytest.approx(PRISMATIC.r0, rel=0.02)
    assert got.aw == pytest.approx(PRISMATIC.aw, rel=0.05)
    assert got.r1 == pytest.approx(PRISMATIC.r1, rel=0.10)


def test_cylindrical_fresh_20pct_r0():
    p = cylindrical_params(CYLINDRICAL_ROWS[0])
    t = FrequencyTriplet(0.1, 100.0, 5000.0)
    got = identify(full_model_measurement(p, t))
    assert got.r0 == pytest.approx(22.533e-3, rel=0.02)


def test_errors_carry_frequency():
    # Re(z_low) below r0 -> negative r1, tagged with f_low
    m = TripletMeasurement(REF_TRIPLET, complex(0.5e-3, -1e-5), complex(1.0e-3, -1e-4), complex(0.826e-3, 0))
    with pytest.raises(NonPhysicalFitError) as exc:
        identify(m)
    assert exc.value.freq_hz == REF_TRIPLET.f_low_hz


def test_consistency_gap_zero_on_asymptotic_data():
    ident = identify_detailed(asymptotic_measurement(PRISMATIC, REF_TRIPLET))
    assert ident.c1_consistency_gap_pct == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("f_mid", [5.0, 20.0, 65.0])
def test_recovery_improves_with_separation(f_mid):
    # ratio r applied symmetrically around a fixed mid frequency
    errs = []
    for r in (3, 10, 30, 100):
        t = FrequencyTriplet(f_mid / r, f_mid, f_mid * r)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SeparationWarning)
            try:
                got = identify(full_model_measurement(PRISMATIC, t))
            except NonPhysicalFitError:
                errs.append({k: math.inf for k in ("r0", "r1", "c1", "aw")})
                continue
        errs.append({k: abs(getattr(got, k) / getattr(PRISMATIC, k) - 1) for k in ("r0", "r1", "c1", "aw")})
    for k in ("r0", "r1", "c1", "aw"):
        seq = [e[k] for e in errs]
        assert all(b <= a for a, b in zip(seq, seq[1:])), (k, seq)


params_st = st.builds(
    EcmParams,
    r0=st.floats(1e-4, 1e-1),
    r1=st.floats(1e-4, 1e-1),
    c1=st.floats(1e-2, 1e2),
    aw=st.floats(1e-5, 1e-2),
)


@settings(max_examples=60)
@given(p=params_st, s=st.floats(1e-3, 1e3))
def test_scale_equivariance(p, s):
    m = asymptotic_measurement(p, REF_TRIPLET)
    base = identify(m)
    scaled = identify(TripletMeasurement(m.triplet, m.z_low * s, m.z_mid * s, m.z_high * s))
    assert scaled.r0 == pytest.approx(base.r0 * s, rel=1e-9)
    assert scaled.r1 == pytest.approx(base.r1 * s, rel=1e-9)
    assert scaled.aw == pytest.approx(base.aw * s, rel=1e-9)
    assert scaled.c1 == pytest.approx(base.c1 / s, rel=1e-9)


@settings(max_examples=60)
@given(p=params_st)
def test_positive_or_raises(p):
    m = full_model_measurement(p, REF_TRIPLET)
    try:
        got = identify(m)
    except (NonPhysicalFitError, DegenerateInputError):
        return
    assert min(got.r0, got.r1, got.c1, got.aw) > 0


def test_deterministic():
    m = full_model_measurement(PRISMATIC, REF_TRIPLET)
    a, b = identify(m), identify(m)
    assert np.array([a.r0, a.r1, a.c1, a.aw]).tobytes() == np.array([b.r0, b.r1, b.c1, b.aw]).tobytes()
