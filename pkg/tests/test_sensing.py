import json
import warnings

import numpy as np
import pytest
from scipy.integrate import trapezoid

from linsta.errors import DesignError, DomainError
from linsta.oscillator import Target
from linsta.sensing import (
    SensingDrive,
    SensingEntry,
    SensingRegimeWarning,
    SensingSpec,
    design_sensing_drive,
    drive_json,
    drive_summary,
    epsilon,
    final_state,
    frequency_sweep,
    regime_warning,
    separation_angle,
    sweep_csv,
    transform_residuals,
)
from linsta.signal import energy, imaginary_fraction

FIG4 = SensingSpec.two_frequency(1.0, 1.05, 10.0)


def _err(state, target):
    e = np.asarray(state) - target.state
    return np.hypot(e[0], e[1] / target.omega0)


def test_single_frequency_analytic():
    spec = SensingSpec((SensingEntry(1.0, Target(1.0, 0.0, 1.0)),), 2 * np.pi)
    drive = design_sensing_drive(spec)
    assert abs(drive.a[0]) < 1e-14
    assert drive.b[0] == pytest.approx(1 / np.pi, rel=1e-13)


def test_targets_at_origin_give_zero_drive():
    spec = SensingSpec.two_frequency(1.0, 1.1, 5.0, r1=0.0, r2=0.0)
    drive = design_sensing_drive(spec)
    assert not np.any(drive.a) and not np.any(drive.b)
    assert energy(drive.signal) == 0


def test_fig4_instance_reaches_targets():
    drive = design_sensing_drive(FIG4)
    assert drive.signal.real and imaginary_fraction(drive.signal) < 1e-13
    for e in FIG4.entries:
        assert _err(final_state(drive, e.omega), e.target) < 1e-8
    assert np.max(np.abs(transform_residuals(drive, FIG4))) < 1e-10


def test_sweep_endpoints_and_angle():
    drive = design_sensing_drive(FIG4)
    s = frequency_sweep(drive, [1.0, 1.05])
    assert _err(s[0], FIG4.entries[0].target) < 1e-8
    assert _err(s[1], FIG4.entries[1].target) < 1e-8
    assert abs(separation_angle(s[0], s[1], 1.0) - np.pi / 2) < 1e-8


def test_sweep_continuity():
    # |d x_f / d omega| <= (t_f/omega + 1/omega^2) int|u| and |d v_f / d omega| <= t_f int|u|
    drive = design_sensing_drive(FIG4)
    omegas = np.linspace(1.0, 1.05, 26)
    states = frequency_sweep(drive, omegas)
    t = np.linspace(0, 10, 4001)
    l1 = trapezoid(np.abs(drive.signal(t).real), t) * 1.01
    step = np.abs(np.diff(states, axis=0))
    h = omegas[1] - omegas[0]
    assert np.all(step[:, 0] <= (10.0 / 1.0 + 1.0) * l1 * h)
    assert np.all(step[:, 1] <= 10.0 * l1 * h)


def test_least_norm_variant():
    ans = design_sensing_drive(FIG4)
    ln = design_sensing_drive(FIG4, method="least_norm")
    assert np.max(np.abs(transform_residuals(ln, FIG4))) < 1e-10
    for e in FIG4.entries:
        assert _err(final_state(ln, e.omega), e.target) < 1e-8
    # the least-norm solution lies in the cos/sin span, so the two coincide
    assert energy(ln.signal) == pytest.approx(energy(ans.signal), rel=1e-9)
    assert energy(ans.signal) == pytest.approx(13.5709, rel=1e-4)
    with pytest.raises(DomainError):
        design_sensing_drive(FIG4, method="other")


def test_three_frequencies():
    spec = SensingSpec(
        tuple(SensingEntry(w, Target(1.0, ph, w)) for w, ph in [(1.0, 0.0), (1.2, 1.0), (1.5, 2.0)]), 8.0
    )
    drive = design_sensing_drive(spec, warn=False)
    for e in spec.entries:
        assert _err(final_state(drive, e.omega), e.target) < 1e-8


def test_spec_validation():
    with pytest.raises(DesignError):
        SensingSpec.two_frequency(1.0, 1.0, 10.0)
    with pytest.raises(DomainError):
        SensingSpec.two_frequency(-1.0, 1.0, 10.0)
    with pytest.raises(DomainError):
        SensingSpec.two_frequency(1.0, 1.1, 0.0)


def test_near_coincident_frequencies_singular():
    with pytest.raises(DesignError):
        design_sensing_drive(SensingSpec.two_frequency(1.0, 1.0 + 1e-12, 1.0), warn=False)


def test_separation_angle_examples():
    assert separation_angle([1, 0], [0, 2.0], 2.0) == pytest.approx(np.pi / 2, abs=1e-15)
    assert separation_angle([0.3, -0.2], [0.3, -0.2], 1.0) == 0
    assert separation_angle([1, 0], [-1, 0], 1.0) == pytest.approx(np.pi)
    with pytest.raises(DomainError):
        separation_angle([0, 0], [1, 0], 1.0)


def test_regime_threshold_exact():
    eps = 0.05
    assert epsilon(FIG4) == pytest.approx(eps)
    limit = np.pi / (2 * epsilon(FIG4))
    below = SensingSpec.two_frequency(1.0, 1.05, np.nextafter(limit, 0))
    at = SensingSpec.two_frequency(1.0, 1.05, limit)
    assert regime_warning(FIG4) is None
    assert regime_warning(below) is None
    assert regime_warning(at) is not None
    assert regime_warning(SensingSpec.two_frequency(1.0, 1.05, 100.0)) is not None


def test_regime_warning_emitted():
    with pytest.warns(SensingRegimeWarning):
        design_sensing_drive(SensingSpec.two_frequency(1.0, 1.05, 100.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        design_sensing_drive(FIG4)


def test_summary_and_exports():
    drive = design_sensing_drive(FIG4)
    summ = drive_summary(drive, FIG4)
    assert summ["energy"] > 0 and len(summ["max_excursion"]) == 2
    data = json.loads(drive_json(drive))
    assert data["method"] == "ansatz" and len(data["a"]) == 2
    text = sweep_csv([1.0], [[0.5, -0.25]])
    assert text.splitlines() == ["omega,x_f,v_f", "1,0.5,-0.25"]
    assert isinstance(drive, SensingDrive)
