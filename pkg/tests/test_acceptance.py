"""Acceptance gate: one test per criterion, each with its tolerance and runtime budget.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists a
PASS/FAIL line per criterion.
"""

import itertools
import time
from contextlib import contextmanager

import numpy as np
import pytest

from linsta.dissipative import LindbladOscillator, alpha_to_mean, coherent_alpha, lindblad_to_lti
from linsta.ltidyn import LtiSystem, final_excitation, gramian, min_energy_drive, simulate
from linsta.oscillator import RobustnessSpec, Target, cost_curve, e1_min, excitation_spectrum, u1_closed_form
from linsta.sensing import (
    SensingSpec,
    design_sensing_drive,
    epsilon,
    frequency_sweep,
    regime_warning,
    separation_angle,
)
from linsta.signal import PolyExpSignal
from linsta.superosc import DesignProblem, FourierConstraint, design_robust_transport, solve_design

from oracles import dense_least_norm, five_point_derivative, quad_complex


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f} s, budget {seconds} s"


def _spec(p, phi=0.0, t_f=10.0, bc=False):
    return RobustnessSpec(p, 1.0, Target(1.0, phi, 1.0), t_f, include_boundary_conditions=bc)


def _delta_e(x0, target, w):
    return excitation_spectrum(x0, target, [w])[0]


@pytest.mark.acceptance(1, "closed-form cost agrees with quadrature and Gramian (1e-8 rel, <1 s)")
def test_closed_form_cost():
    with budget(1.0):
        target = Target(1.0, 0.0, 1.0)
        e1 = e1_min(target, 10.0)
        u = u1_closed_form(target, 10.0)
        quad = quad_complex(lambda t: u(t).real ** 2, 0.0, 10.0).real
        sys_ = LtiSystem.oscillator(1.0)
        W = gramian(sys_, 10.0)
        xf = target.state
        gram = float(xf @ np.linalg.solve(W, xf))
    assert abs(e1 - quad) <= 1e-8 * e1
    assert abs(e1 - gram) <= 1e-8 * e1
    assert e1 == pytest.approx(0.209751, abs=1e-6)


@pytest.mark.acceptance(2, "minimal drive reaches 12 targets within 1e-8 (<5 s)")
def test_target_reaching():
    with budget(5.0):
        errs = []
        for pf, phi in itertools.product((3.0, 5.0, 10.0, 20.0), (0.0, np.pi / 4, np.pi / 2)):
            target = Target(1.0, phi, 1.0)
            (u,) = min_energy_drive(LtiSystem.oscillator(1.0), [0, 0], target.state, pf)
            e = simulate(LtiSystem.oscillator(1.0), u).final - target.state
            errs.append(np.hypot(e[0], e[1]))
    assert len(errs) == 12
    assert max(errs) < 1e-8


@pytest.mark.acceptance(3, "E1 strictly decreasing on w0 t_f in [2, 40] for phi = 0, pi/2 (<1 s)")
def test_cost_monotone():
    with budget(1.0):
        tf = 2.0 + 0.1 * np.arange(381)
        curves = [cost_curve(1.0, phi, 1.0, tf) for phi in (0.0, np.pi / 2)]
    assert tf[-1] == pytest.approx(40.0)
    for c in curves:
        assert np.all(np.diff(c) < 0)


@pytest.mark.acceptance(4, "p=1 and p=2 designs are flat at w0 to 1e-6 (<2 s)")
def test_flatness():
    h = 1e-3
    with budget(2.0):
        out = {}
        for p in (1, 2):
            spec = _spec(p)
            x0 = design_robust_transport(spec).trap_position

            def de(w, x0=x0, t=spec.target):
                return _delta_e(x0, t, w)

            out[p] = (de(1.0), five_point_derivative(de, 1.0, h, 1), five_point_derivative(de, 1.0, h, 2))
    for p in (1, 2):
        assert out[p][0] < 1e-16
        assert abs(out[p][1]) < 1e-6
    assert abs(out[2][2]) < 1e-6


@pytest.mark.acceptance(5, "detuning suppression: p=1 <= 0.1 p=0 at +-5%, p=2 <= 0.1 p=1 at +-2% (<2 s)")
def test_detuning_suppression():
    with budget(2.0):
        x0 = {p: design_robust_transport(_spec(p)).trap_position for p in (0, 1, 2)}
        target = _spec(0).target
        de = {(p, w): _delta_e(x0[p], target, w) for p in (0, 1, 2) for w in (0.95, 0.98, 1.02, 1.05)}
    for w in (0.95, 1.05):
        assert de[1, w] <= 0.1 * de[0, w]
    for w in (0.98, 1.02):
        assert de[2, w] <= 0.1 * de[1, w]


@pytest.mark.acceptance(6, "energy ordering E(2) >= E(1) >= E(0) >= E1 for transport and shuttling (<2 s)")
def test_energy_ordering():
    with budget(2.0):
        gaps = []
        for phi, t_f in itertools.product((0.0, np.pi / 2), (5.0, 10.0, 20.0)):
            e = [design_robust_transport(_spec(p, phi, t_f)).energy for p in (0, 1, 2)]
            e1 = e1_min(Target(1.0, phi, 1.0), t_f)
            gaps += [e[0] - e1, e[1] - e[0], e[2] - e[1]]
    assert min(gaps) >= -1e-9


@pytest.mark.acceptance(7, "Fourier-form spectrum equals simulated excitation, 51 freqs x 3 drives, 1e-8 (<10 s)")
def test_spectrum_identity():
    omegas = np.linspace(0.5, 1.5, 51)
    with budget(10.0):
        cases = [
            (u1_closed_form(Target(1.0, 0.0, 1.0), 10.0), Target(1.0, 0.0, 1.0)),
            (design_robust_transport(_spec(1, np.pi / 2)).trap_position, Target(1.0, np.pi / 2, 1.0)),
            (design_robust_transport(_spec(2, bc=True)).trap_position, Target(1.0, 0.0, 1.0)),
        ]
        worst = 0.0
        for x0, target in cases:
            fourier = excitation_spectrum(x0, target, omegas)
            for w, f in zip(omegas, fourier):
                final = simulate(LtiSystem.oscillator(w), w**2 * x0, steps=256).final
                worst = max(worst, abs(f - final_excitation(w, final, target)))
    assert worst < 1e-8


@pytest.mark.acceptance(8, "solve_design matches dense least-norm: energy 1e-6 rel, drive 1e-4 sup (<30 s)")
def test_oracle_equivalence():
    problems = [
        [(1.0, 0, 1j * np.exp(-10j))],
        [(1.0, 0, 1j * np.exp(-10j)), (-1.0, 0, -1j * np.exp(10j))],
        [(1.0, 0, 0.2 + 1j), (1.0, 1, 3 - 1j), (1.0, 2, -5 + 2j)],
        [(0.7, 0, 1.0), (1.4, 0, -1j), (0.0, 0, 0.5)],
    ]
    with budget(30.0):
        results = []
        for cons in problems:
            drive = solve_design(DesignProblem(10.0, tuple(FourierConstraint(*c) for c in cons)))
            t, f, e = dense_least_norm(cons, 10.0, n=10001)
            sup = np.max(np.abs(drive.signal(t) - f)) / max(1.0, np.max(np.abs(f)))
            results.append((abs(drive.energy - e) / e, sup))
    for rel_e, sup in results:
        assert rel_e < 1e-6
        assert sup < 1e-4


@pytest.mark.acceptance(9, "coherent amplitude obeys its ODE (1e-8) and matches the LTI mean (1e-7) (<5 s)")
def test_dissipative_consistency():
    drives = [
        PolyExpSignal.polynomial([0.0, 0.1, 0.02], 8.0),
        PolyExpSignal.cosine(0.7, 8.0, 0.5, 0.3),
        u1_closed_form(Target(1.0, 0.0, 1.0), 8.0),
    ]
    pairs = [(1.0, 0.0), (1.0, 0.3), (1.7, 1.2)]
    with budget(5.0):
        ode_err, mean_err = 0.0, 0.0
        for drive, (w, G) in itertools.product(drives, pairs):
            osc = LindbladOscillator(w, G, 0.8)
            for t in np.linspace(0.5, 7.5, 8):
                d = five_point_derivative(lambda s: coherent_alpha(osc, drive, [s])[0], t, 1e-3)
                rhs = -osc.decay_rate * coherent_alpha(osc, drive, [t])[0] + osc.drive_gain * drive(t)
                ode_err = max(ode_err, abs(d - rhs))
            tr = simulate(lindblad_to_lti(osc), drive, steps=80)
            mean = alpha_to_mean(osc, coherent_alpha(osc, drive, tr.times))
            mean_err = max(mean_err, float(np.max(np.abs(mean - tr.states))))
    assert ode_err < 1e-8
    assert mean_err < 1e-7


@pytest.mark.acceptance(10, "two-frequency sensing hits both targets, separation pi/2, regime warning exact (<2 s)")
def test_sensing():
    with budget(2.0):
        spec = SensingSpec.two_frequency(1.0, 1.05, 10.0)
        drive = design_sensing_drive(spec)
        s1, s2 = frequency_sweep(drive, [1.0, 1.05], steps=1024)
        errs = [np.linalg.norm(s - e.target.state) for s, e in zip((s1, s2), spec.entries)]
        angle = separation_angle(s1, s2, 1.0)
        limit = np.pi / (2 * epsilon(spec))
        warn_ok = []
        for t_f in (1.0, 10.0, np.nextafter(limit, 0), limit, np.nextafter(limit, np.inf), 100.0):
            fired = regime_warning(SensingSpec.two_frequency(1.0, 1.05, t_f)) is not None
            warn_ok.append(fired == (1.0 * t_f >= limit))
    assert max(errs) < 1e-8
    assert abs(angle - np.pi / 2) < 1e-8
    assert all(warn_ok)
